"""Channel and hardware models for the hybrid RF/FSO link.

Noise powers of both links are normalised to one, so every "power" below
is also an SNR per unit channel gain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .special import FsoGainDensityParams, bessel_i0e, marcum_p1, mean_electrical_snr

HETERODYNE = 1
IM_DD = 2


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class FsoLinkParams:
    """FSO link: turbulence shapes, pointing-error ratio, detection mode, power."""

    alpha: float
    beta: float
    xi: float
    r: int = HETERODYNE
    mean_gain: float = 1.0
    p_fso: float = 0.0

    def __post_init__(self):
        if not self.mean_gain > 0:
            raise ValueError("mean_gain must be positive")
        if self.p_fso < 0:
            raise ValueError("p_fso must be nonnegative")
        # validates alpha, beta, xi, r
        self.density  # noqa: B018

    @property
    def density(self) -> FsoGainDensityParams:
        mu_r = mean_electrical_snr(self.alpha, self.beta, self.xi, self.r, self.mean_gain)
        return FsoGainDensityParams(self.alpha, self.beta, self.xi, self.r, mu_r)

    @property
    def c_r(self) -> float:
        """Rate constant: 1 for heterodyne, e/(2 pi) for IM/DD."""
        return 1.0 if self.r == HETERODYNE else math.e / (2.0 * math.pi)


@dataclass(frozen=True)
class RfLinkParams:
    """Rician RF link with a nonideal power amplifier.

    ``p_max = inf`` together with ``epsilon=1, vartheta=0`` is the ideal PA.
    """

    nu: float
    omega: float
    epsilon: float = 1.0
    vartheta: float = 0.0
    p_max: float = math.inf
    p_cons: float = 0.0

    def __post_init__(self):
        if self.nu < 0 or not self.omega > 0:
            raise ValueError("need nu >= 0 and omega > 0")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if not 0.0 <= self.vartheta < 1.0:
            raise ValueError("vartheta must lie in [0, 1)")
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")
        if self.p_cons < 0:
            raise ValueError("p_cons must be nonnegative")

    @property
    def mean_gain(self) -> float:
        return self.nu ** 2 + 2.0 * self.omega ** 2

    @property
    def p_rf(self) -> float:
        return pa_output_power(self)


@dataclass(frozen=True)
class SystemPower:
    """Total power budget in dB, split between the FSO and RF links."""

    snr_db: float
    split: float = field(default=0.5)

    def __post_init__(self):
        if not 0.0 <= self.split <= 1.0:
            raise ValueError("split must lie in [0, 1]")

    @property
    def total(self) -> float:
        return db_to_linear(self.snr_db)

    @property
    def p_fso(self) -> float:
        return self.split * self.total

    @property
    def p_cons(self) -> float:
        return (1.0 - self.split) * self.total


def _pa_formula(rf: RfLinkParams) -> float:
    if rf.vartheta >= 1.0:
        raise ValueError("vartheta >= 1 makes the PA model singular")
    if rf.p_cons == 0.0 or rf.epsilon == 0.0:
        return 0.0
    # log space: p_max may be huge and the exponent 1/(1-vartheta) large
    log_p = math.log(rf.epsilon) + math.log(rf.p_cons)
    if rf.vartheta > 0.0:
        log_p = (log_p - rf.vartheta * math.log(rf.p_max)) / (1.0 - rf.vartheta)
    return math.exp(log_p)


def pa_output_power(rf: RfLinkParams) -> float:
    """Transmitted RF power for consumed power ``rf.p_cons``.

    Solves ``P_rf / P_cons = epsilon * (P_rf / P_max)**vartheta`` for P_rf and
    saturates at ``p_max``.
    """
    return min(_pa_formula(rf), rf.p_max)


def pa_saturated(rf: RfLinkParams) -> bool:
    """True when the unclamped PA formula would exceed ``p_max``."""
    return _pa_formula(rf) > rf.p_max


def effective_efficiency(rf: RfLinkParams) -> float:
    """epsilon * (P_rf/P_max)**vartheta, the delivered fraction of consumed power."""
    p_rf = pa_output_power(rf)
    if math.isinf(rf.p_max):
        return rf.epsilon if rf.vartheta == 0 else 0.0
    return rf.epsilon * (p_rf / rf.p_max) ** rf.vartheta


def with_power(fso: FsoLinkParams, rf: RfLinkParams, power: SystemPower):
    """Return copies of the link parameters carrying the power split of ``power``."""
    from dataclasses import replace

    return replace(fso, p_fso=power.p_fso), replace(rf, p_cons=power.p_cons)


# --------------------------------------------------------------------------
# samplers


def sample_unit_gamma(shape: float, rng: np.random.Generator, size=None):
    """Gamma variates with the given shape and unit mean."""
    return rng.standard_gamma(shape, size=size) / shape


def pointing_loss_from_uniform(u, xi: float):
    """h_p = U^{1/xi^2}, the pointing loss with density xi^2 t^{xi^2-1} on (0, 1]."""
    return np.exp(np.log(u) / (xi * xi))


def fso_gain_from_draws(fso: FsoLinkParams, xa, xb, u):
    """Map unit-mean gamma draws and a uniform to FSO gains."""
    dens = fso.density
    y = xa * xb * pointing_loss_from_uniform(u, fso.xi)
    if fso.r == 1:
        return dens.mu_r * (y / dens.h)
    return dens.mu_r * (y / dens.h) ** 2


def sample_fso_gain(fso: FsoLinkParams, rng: np.random.Generator, size=None):
    """Draw FSO channel gains from the Gamma-Gamma/pointing-error law."""
    xa = sample_unit_gamma(fso.alpha, rng, size)
    xb = sample_unit_gamma(fso.beta, rng, size)
    # 1 - random() lies in (0, 1], keeping log(u) finite
    u = 1.0 - rng.random(size)
    return fso_gain_from_draws(fso, xa, xb, u)


def sample_rf_gain(rf: RfLinkParams, rng: np.random.Generator, size=None):
    """Draw RF power gains; the square root is Rician(nu, omega)."""
    z1 = rng.standard_normal(size)
    z2 = rng.standard_normal(size)
    return (rf.nu + rf.omega * z1) ** 2 + (rf.omega * z2) ** 2


# --------------------------------------------------------------------------
# Rician amplitude law


def rician_amplitude_pdf(u: float, rf: RfLinkParams) -> float:
    """Density of the Rician amplitude sqrt(G_RF)."""
    if u <= 0.0:
        return 0.0
    w2 = rf.omega * rf.omega
    arg = u * rf.nu / w2
    return (u / w2) * math.exp(-((u - rf.nu) ** 2) / (2.0 * w2)) * bessel_i0e(arg)


def rician_gain_cdf(x: float, rf: RfLinkParams) -> float:
    """Pr(sqrt(G_RF) <= x), the Rician amplitude CDF.

    For the power gain use ``rician_gain_cdf(sqrt(g), rf)``.
    """
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return marcum_p1(rf.nu / rf.omega, x / rf.omega)
