import math

import pytest

from rffso.channel import FsoLinkParams, RfLinkParams, SystemPower
from rffso.analysis import HarqParams

ALPHA, BETA = 4.3939, 2.5636
NU, OMEGA = 0.0995, 0.7036


def fig3_point(snr_db, m_max=3, n_fso=100, xi=0.9, r=1):
    power = SystemPower(snr_db)
    fso = FsoLinkParams(ALPHA, BETA, xi, r, 1.0, power.p_fso)
    rf = RfLinkParams(NU, OMEGA, 1.0, 0.0, math.inf, power.p_cons)
    return fso, rf, HarqParams(m_max, 1.0, n_fso, 0.03)


@pytest.fixture
def unit_rf():
    return RfLinkParams(NU, OMEGA)


# acceptance lines are collected here and echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
