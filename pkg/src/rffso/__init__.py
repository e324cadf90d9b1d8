"""Outage and throughput of hybrid mmWave-RF / FSO links with incremental-redundancy HARQ."""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    DecodingProfile,
    FsoLogMoments,
    HarqParams,
    PerformanceMetrics,
    analyze_point,
    decoding_prob_asymptotic,
    decoding_prob_exact,
    decoding_prob_linearized,
    decoding_profile,
    fso_log_moments,
    throughput_and_outage,
)
from .channel import (  # noqa: E402
    FsoLinkParams,
    RfLinkParams,
    SystemPower,
    pa_output_power,
    rician_gain_cdf,
    sample_fso_gain,
    sample_rf_gain,
)
from .mc import McConfig, McEstimate, simulate_fso_rate_stats, simulate_harq  # noqa: E402
from .special import (  # noqa: E402
    ConvergenceError,
    FsoGainDensityParams,
    bessel_i0,
    fso_gain_pdf,
    gaussian_q,
    marcum_q1,
)
