"""Closed-form pipeline: FSO log-rate moments, decoding probabilities, throughput.

The FSO contribution to the accumulated mutual information after ``m``
rounds is an average of ``m*N`` i.i.d. log-rates; it is replaced by a
Gaussian with the moments from :func:`fso_log_moments`. Three evaluations of
the per-round failure probability phi_m are offered:

* ``exact``: direct quadrature over the Rician amplitude,
* ``linearized``: piecewise-linear surrogate of the Gaussian tail plus a
  midpoint rule, giving a closed form in the Rician CDF,
* ``asymptotic``: the N -> infinity limit where the FSO term is its mean.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .channel import FsoLinkParams, RfLinkParams, pa_output_power, rician_amplitude_pdf, rician_gain_cdf
from .special import adaptive_quad, fso_gain_expectation, gaussian_q

METHODS = ("exact", "linearized", "asymptotic")
MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class HarqParams:
    m_max: int
    rate: float
    n_fso: int = 100
    psi: float = 1.0

    def __post_init__(self):
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if self.n_fso < 1:
            raise ValueError("n_fso must be >= 1")
        if not self.psi > 0:
            raise ValueError("psi must be positive")

    def round_rate(self, m: int) -> float:
        """Equivalent code rate R/m after ``m`` rounds."""
        return self.rate / m


@dataclass(frozen=True)
class FsoLogMoments:
    mu: float
    sigma2: float
    rho2: float


@dataclass(frozen=True)
class DecodingProfile:
    phi: tuple
    method: str
    # per-round flag: linearized result replaced by the exact integral
    fallback: tuple = ()

    @property
    def m_max(self) -> int:
        return len(self.phi)


@dataclass(frozen=True)
class PerformanceMetrics:
    throughput: float
    outage: float


# --------------------------------------------------------------------------
# FSO moments


@lru_cache(maxsize=4096)
def _log_rate_raw_moments(fso: FsoLinkParams):
    """E[log(1+c P G)] and E[log(1+c P G)^2] for the FSO gain G."""
    k = fso.c_r * fso.p_fso
    if k == 0.0:
        return 0.0, 0.0
    dens = fso.density
    # below this gain the log-rate is < 1e-16 and its contribution negligible
    floor = 1e-16 / k
    e1 = fso_gain_expectation(lambda x: math.log1p(k * x), dens, x_floor=floor)
    e2 = fso_gain_expectation(lambda x: math.log1p(k * x) ** 2, dens, x_floor=floor)
    return e1, e2


def fso_log_moments(fso: FsoLinkParams, psi: float) -> FsoLogMoments:
    """Mean and variance of the scaled per-realisation FSO log-rate psi*log(1+c_r P G)."""
    e1, e2 = _log_rate_raw_moments(fso)
    mu = psi * e1
    rho2 = psi * psi * e2
    sigma2 = max(rho2 - mu * mu, 0.0)
    return FsoLogMoments(mu=mu, sigma2=sigma2, rho2=rho2)


# --------------------------------------------------------------------------
# decoding probabilities


def _amplitude_cap(rf: RfLinkParams) -> float:
    # Rician mass beyond nu + 40 omega is below e^{-800}
    return rf.nu + 40.0 * rf.omega


def decoding_prob_exact(m: int, harq: HarqParams, moments: FsoLogMoments, rf: RfLinkParams) -> float:
    """phi_m with the Gaussian FSO surrogate, integrated numerically over the RF amplitude."""
    s = pa_output_power(rf)
    thr = harq.round_rate(m)
    c = thr - moments.mu
    if moments.sigma2 <= 0.0:
        if c <= 0.0:
            return 0.0
        if s == 0.0:
            return 1.0
        return rician_gain_cdf(math.sqrt(math.expm1(c) / s), rf)
    sd = math.sqrt(moments.sigma2 / (m * harq.n_fso))
    if s == 0.0:
        return float(gaussian_q(-c / sd))

    upper = min(math.sqrt(math.expm1(thr) / s), _amplitude_cap(rf))

    def integrand(u):
        return rician_amplitude_pdf(u, rf) * gaussian_q((math.log1p(s * u * u) - c) / sd)

    points = []
    for z in (-8.0, -2.0, 0.0, 2.0, 8.0):
        level = c + z * sd
        if level > 0:
            points.append(math.sqrt(math.expm1(level) / s))
    val, _ = adaptive_quad(integrand, 0.0, upper, epsabs=1e-13, epsrel=1e-9, points=points)
    return min(max(val, 0.0), 1.0)


@dataclass(frozen=True)
class LinearizationTerms:
    """Amplitude-domain constants of the linearised Gaussian tail."""

    centre: float  # sqrt(tau_m)
    slope: float  # lambda_m
    lower: float  # a_m
    upper: float  # b_m
    limit: float  # sqrt(d_m)


def linearization_terms(m: int, harq: HarqParams, moments: FsoLogMoments, rf: RfLinkParams):
    """Constants of the piecewise-linear surrogate, or None where it is undefined.

    The Gaussian tail in the amplitude variable u crosses 1/2 at
    u = sqrt(tau_m); its slope there is lambda_m. The surrogate is undefined
    when R/m <= mu (the slope's radicand is not positive), when either link
    variance collapses, or when the RF link is off.
    """
    s = pa_output_power(rf)
    thr = harq.round_rate(m)
    c = thr - moments.mu
    if c <= 0.0 or s == 0.0 or moments.sigma2 <= 0.0:
        return None
    radicand = 2.0 * m * harq.n_fso * (math.exp(-c) - math.exp(-2.0 * c)) * s / (math.pi * moments.sigma2)
    if not radicand > 0.0 or not math.isfinite(radicand):
        return None
    slope = math.sqrt(radicand)
    centre = math.sqrt(math.expm1(c) / s)
    limit = math.sqrt(math.expm1(thr) / s)
    half = 0.5 / slope
    lower = max(0.0, centre - half)
    upper = min(centre + half, limit)
    return LinearizationTerms(centre, slope, lower, upper, limit)


def linearized_closed_form(terms: LinearizationTerms, cdf) -> float:
    """F(a) + (1/2 + lam t)(F(b) - F(a)) - lam (b F(b) - a F(a) - (b - a) F((a+b)/2))."""
    a, b, t, lam = terms.lower, terms.upper, terms.centre, terms.slope
    fa = cdf(a)
    if b <= a:
        return fa
    fb = cdf(b)
    fmid = cdf(0.5 * (a + b))
    return fa + (0.5 + lam * t) * (fb - fa) - lam * (b * fb - a * fa - (b - a) * fmid)


def decoding_prob_linearized(m: int, harq: HarqParams, moments: FsoLogMoments, rf: RfLinkParams) -> float:
    """phi_m from the linearised closed form; falls back to the exact integral.

    Use :func:`linearization_terms` to find out whether the fallback fired.
    """
    terms = linearization_terms(m, harq, moments, rf)
    if terms is None:
        return decoding_prob_exact(m, harq, moments, rf)
    val = linearized_closed_form(terms, lambda u: rician_gain_cdf(u, rf))
    return min(max(val, 0.0), 1.0)


def decoding_prob_asymptotic(m: int, harq: HarqParams, moments: FsoLogMoments, rf: RfLinkParams) -> float:
    """Large-N limit: Pr(log(1 + s G_RF) <= R/m - mu)."""
    s = pa_output_power(rf)
    c = harq.round_rate(m) - moments.mu
    if c <= 0.0:
        return 0.0
    if s == 0.0:
        return 1.0
    return rician_gain_cdf(math.sqrt(math.expm1(c) / s), rf)


_DISPATCH = {
    "exact": decoding_prob_exact,
    "linearized": decoding_prob_linearized,
    "asymptotic": decoding_prob_asymptotic,
}


def enforce_monotone(phi, slack: float = MONOTONE_SLACK):
    """Clamp phi to be nonincreasing; rises larger than ``slack`` are an error."""
    out = []
    for i, value in enumerate(phi):
        if out and value > out[-1]:
            if value - out[-1] > slack:
                raise ValueError(f"phi rises from round {i} to {i + 1} by {value - out[-1]:.3g}")
            value = out[-1]
        out.append(value)
    return tuple(out)


def decoding_profile(method: str, harq: HarqParams, moments: FsoLogMoments, rf: RfLinkParams) -> DecodingProfile:
    try:
        fn = _DISPATCH[method]
    except KeyError:
        raise ValueError(f"unknown analytic method {method!r}") from None
    phi = []
    fallback = []
    for m in range(1, harq.m_max + 1):
        phi.append(fn(m, harq, moments, rf))
        fallback.append(method == "linearized" and linearization_terms(m, harq, moments, rf) is None)
    return DecodingProfile(phi=enforce_monotone(phi), method=method, fallback=tuple(fallback))


def throughput_and_outage(profile, rate: float) -> PerformanceMetrics:
    """eta = R (1 - phi_M) / (1 + sum_{m<M} phi_m); outage = phi_M."""
    phi = profile.phi if isinstance(profile, DecodingProfile) else tuple(profile)
    if not phi:
        raise ValueError("empty decoding profile")
    for value in phi:
        if not -MONOTONE_SLACK <= value <= 1.0 + MONOTONE_SLACK:
            raise ValueError(f"phi value {value} outside [0, 1]")
    phi = enforce_monotone([min(max(v, 0.0), 1.0) for v in phi])
    eta = rate * (1.0 - phi[-1]) / (1.0 + sum(phi[:-1]))
    return PerformanceMetrics(throughput=eta, outage=phi[-1])


def analyze_point(fso: FsoLinkParams, rf: RfLinkParams, harq: HarqParams, method: str = "exact"):
    """Profile and metrics for links that already carry their powers."""
    moments = fso_log_moments(fso, harq.psi)
    profile = decoding_profile(method, harq, moments, rf)
    return profile, throughput_and_outage(profile, harq.rate)
