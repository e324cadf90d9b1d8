import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rffso.channel import (
    FsoLinkParams,
    RfLinkParams,
    SystemPower,
    effective_efficiency,
    pa_output_power,
    pa_saturated,
    pointing_loss_from_uniform,
    rician_gain_cdf,
    sample_fso_gain,
    sample_rf_gain,
    sample_unit_gamma,
)
from rffso.special import adaptive_quad, fso_gain_expectation, fso_gain_pdf, marcum_q1
from conftest import ALPHA, BETA, NU, OMEGA

N_BIG = 10 ** 7


def rng(seed):
    return np.random.Generator(np.random.Philox(seed))


# --- PA model ---------------------------------------------------------------

@pytest.mark.parametrize("p_max", [1.0, 63.0, math.inf])
def test_ideal_pa_is_identity(p_max):
    rf = RfLinkParams(NU, OMEGA, 1.0, 0.0, p_max, 0.7)
    assert pa_output_power(rf) == pytest.approx(0.7, rel=1e-15)


def test_nonideal_pa_operating_point():
    p = 10 ** 1.8
    rf = RfLinkParams(NU, OMEGA, 0.65, 0.5, p, p)
    assert pa_output_power(rf) == pytest.approx(0.4225 * p, rel=1e-13)
    assert effective_efficiency(rf) == pytest.approx(0.4225, rel=1e-13)


def test_pa_zero_input():
    assert pa_output_power(RfLinkParams(NU, OMEGA, 0.65, 0.5, 100.0, 0.0)) == 0.0


def test_pa_singular_class_rejected():
    with pytest.raises(ValueError):
        RfLinkParams(NU, OMEGA, 0.65, 1.0, 100.0, 1.0)


def test_pa_clamps_at_saturation():
    rf = RfLinkParams(NU, OMEGA, 0.65, 0.5, 10.0, 1000.0)
    assert pa_saturated(rf)
    assert pa_output_power(rf) == 10.0
    assert not pa_saturated(RfLinkParams(NU, OMEGA, 0.65, 0.5, 10.0, 1.0))


def test_pa_monotone_grid():
    cons = np.geomspace(1e-3, 1e4, 80)
    out = [pa_output_power(RfLinkParams(NU, OMEGA, 0.65, 0.5, 63.0, c)) for c in cons]
    assert all(b >= a for a, b in zip(out, out[1:]))
    effs = np.linspace(0.01, 1, 40)
    out = [pa_output_power(RfLinkParams(NU, OMEGA, e, 0.5, 63.0, 5.0)) for e in effs]
    assert all(b >= a for a, b in zip(out, out[1:]))


# --- power split ------------------------------------------------------------

@given(st.floats(-40, 60), st.floats(0.05, 0.95))
def test_system_power_round_trip(snr_db, split):
    pw = SystemPower(snr_db, split)
    assert 10 * math.log10(pw.p_fso + pw.p_cons) == pytest.approx(snr_db, abs=1e-12)


def test_default_split_is_equal():
    pw = SystemPower(20.0)
    assert pw.p_fso == pw.p_cons == 50.0


# --- samplers ---------------------------------------------------------------

@pytest.mark.parametrize("shape", [ALPHA, BETA])
def test_unit_gamma_moments(shape):
    x = sample_unit_gamma(shape, rng(3), N_BIG)
    se_mean = math.sqrt(1 / shape / N_BIG)
    assert abs(x.mean() - 1.0) < 3 * se_mean
    var = x.var()
    # var of the sample variance: (mu4 - sigma^4)/n, gamma mu4 = 3(shape+2)/shape^3
    mu4 = 3 * (shape + 2) / shape ** 3
    se_var = math.sqrt((mu4 - 1 / shape ** 2) / N_BIG)
    assert abs(var - 1 / shape) < 3 * se_var


def test_fso_sampler_mean_and_variance():
    fso = FsoLinkParams(ALPHA, BETA, 0.9, 1)
    g = sample_fso_gain(fso, rng(5), N_BIG)
    dens = fso.density
    m2 = fso_gain_expectation(lambda x: x * x, dens)
    m4 = fso_gain_expectation(lambda x: x ** 4, dens)
    var = m2 - 1.0
    assert abs(g.mean() - 1.0) < 3 * math.sqrt(var / N_BIG)
    central4 = np.mean((g - 1.0) ** 4)
    assert abs(g.var() - var) < 3 * math.sqrt((central4 - var ** 2) / N_BIG)
    assert m4 > 0


@pytest.mark.parametrize("r", [1, 2])
def test_fso_sampler_cdf_matches_pdf(r):
    fso = FsoLinkParams(ALPHA, BETA, 0.9, r)
    g = sample_fso_gain(fso, rng(8 + r), N_BIG)
    dens = fso.density
    for q in np.quantile(g, np.linspace(0.05, 0.95, 10)):
        # P(G <= q) by quadrature of the density in log x
        cdf, _ = adaptive_quad(lambda s: fso_gain_pdf(math.exp(s), dens) * math.exp(s),
                               -60.0, math.log(q), epsabs=1e-12, epsrel=1e-10)
        emp = np.mean(g <= q)
        assert abs(emp - cdf) < 3 * math.sqrt(cdf * (1 - cdf) / N_BIG)


def test_pointing_loss_degenerates_for_large_xi():
    u = 1.0 - rng(1).random(10 ** 6)
    assert abs(pointing_loss_from_uniform(u, 1e3).mean() - 1.0) < 1e-3


def test_rf_sampler_unit_mean():
    g = sample_rf_gain(RfLinkParams(NU, OMEGA), rng(12), N_BIG)
    assert g.mean() == pytest.approx(1.0, abs=0.002)
    assert RfLinkParams(NU, OMEGA).mean_gain == pytest.approx(1.0, abs=1e-4)


def test_rf_sampler_rayleigh_tail():
    rf = RfLinkParams(0.0, 0.9)
    n = 10 ** 6
    amp = np.sqrt(sample_rf_gain(rf, rng(4), n))
    for b in (0.3, 0.9, 1.8, 2.7):
        p = math.exp(-b * b / (2 * 0.81))
        assert abs(np.mean(amp > b) - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_rf_sampler_marcum_tail():
    rf = RfLinkParams(NU, OMEGA)
    n = 10 ** 6
    amp = np.sqrt(sample_rf_gain(rf, rng(6), n))
    for x in np.linspace(0.1, 2.5, 10):
        p = marcum_q1(NU / OMEGA, x / OMEGA)
        assert abs(np.mean(amp > x) - p) < 3 * math.sqrt(p * (1 - p) / n)


# --- Rician CDF -------------------------------------------------------------

def test_rician_cdf_limits(unit_rf):
    assert rician_gain_cdf(0.0, unit_rf) == 0.0
    assert rician_gain_cdf(1e3 * OMEGA, unit_rf) == pytest.approx(1.0, abs=1e-9)


def test_rician_cdf_matches_sampler(unit_rf):
    amp = np.sqrt(sample_rf_gain(unit_rf, rng(21), N_BIG))
    p = rician_gain_cdf(1.0, unit_rf)
    assert abs(np.mean(amp <= 1.0) - p) < 3 * math.sqrt(p * (1 - p) / N_BIG)


def test_param_validation():
    with pytest.raises(ValueError):
        FsoLinkParams(ALPHA, BETA, 0.9, 1, mean_gain=0.0)
    with pytest.raises(ValueError):
        FsoLinkParams(ALPHA, BETA, -1.0)
    with pytest.raises(ValueError):
        RfLinkParams(NU, 0.0)
    with pytest.raises(ValueError):
        SystemPower(10.0, 1.5)


def test_im_dd_rate_constant():
    assert FsoLinkParams(ALPHA, BETA, 0.9, 2).c_r == pytest.approx(math.e / (2 * math.pi))
    assert FsoLinkParams(ALPHA, BETA, 0.9, 1).c_r == 1.0
