"""Built-in run configurations for the four figure families.

A configuration is a plain JSON-compatible dict with sections ``fso``,
``rf``, ``harq``, ``power``, ``mc`` and ``sweep``. All powers are in dB.
"""
from __future__ import annotations

import copy

# turbulence shapes for Rytov variance 1; Rician parameters give unit mean
# and unit variance of the RF power gain
BASE = {
    "fso": {"alpha": 4.3939, "beta": 2.5636, "xi": 0.9, "r": 1, "mean_gain": 1.0},
    "rf": {
        "nu": 0.0995,
        "omega": 0.7036,
        "ideal_pa": True,
        "epsilon": 1.0,
        "vartheta": 0.0,
        "p_max_db": None,
    },
    "harq": {"m_max": 1, "rate": 1.0, "n_fso": 100, "psi": 0.03},
    "power": {"snr_db": 20.0, "split": 0.5},
    "mc": {"trials": 100_000, "seed": 1, "antithetic": False},
    "sweep": {
        "axis": "snr_db",
        "grid": [20.0],
        "methods": ["exact"],
        "series": [{"label": "base", "set": {}}],
    },
}

_NONIDEAL_18DB = {"rf.ideal_pa": False, "rf.epsilon": 0.65, "rf.vartheta": 0.5, "rf.p_max_db": 18.0}


def _grid(start, stop, step):
    n = int(round((stop - start) / step))
    return [float(start + i * step) for i in range(n + 1)]


def _preset(overrides: dict, sweep: dict) -> dict:
    cfg = copy.deepcopy(BASE)
    apply_overrides(cfg, overrides)
    cfg["sweep"] = sweep
    return cfg


def apply_overrides(cfg: dict, overrides: dict) -> dict:
    """Set dotted ``section.field`` keys in place."""
    for key, value in overrides.items():
        section, _, name = key.partition(".")
        if not name or section not in cfg or not isinstance(cfg[section], dict):
            raise KeyError(f"unknown configuration key {key!r}")
        if section != "sweep" and name not in cfg[section]:
            raise KeyError(f"unknown configuration key {key!r}")
        cfg[section][name] = value
    return cfg


PRESETS = {
    # outage vs SNR, ideal PA, tightness of the approximations
    "fig3": _preset(
        {"harq.m_max": 3},
        {
            "axis": "snr_db",
            "grid": _grid(0, 35, 1),
            "methods": ["exact", "linearized", "asymptotic"],
            "series": [
                {"label": "M=1", "set": {"harq.m_max": 1}},
                {"label": "M=3", "set": {"harq.m_max": 3}},
            ],
        },
    ),
    # throughput vs SNR, ideal vs nonideal PA; SNR grid not given for this figure
    "fig4": _preset(
        {"harq.rate": 0.5},
        {
            "axis": "snr_db",
            "grid": _grid(0, 20, 1),
            "methods": ["exact"],
            "series": [
                {"label": "ideal M=1", "set": {"harq.m_max": 1}},
                {"label": "ideal M=3", "set": {"harq.m_max": 3}},
                {"label": "nonideal M=1", "set": {"harq.m_max": 1, **_NONIDEAL_18DB}},
                {"label": "nonideal M=3", "set": {"harq.m_max": 3, **_NONIDEAL_18DB}},
            ],
        },
    ),
    # outage vs SNR for several pointing-error ratios
    "fig5": _preset(
        {
            "harq.rate": 3.0,
            "harq.psi": 0.25,
            "rf.ideal_pa": False,
            "rf.epsilon": 0.65,
            "rf.vartheta": 0.5,
            "rf.p_max_db": 30.0,
        },
        {
            "axis": "snr_db",
            "grid": _grid(0, 40, 2),
            "methods": ["exact"],
            "series": [
                {"label": f"xi={xi:g} M={m}", "set": {"fso.xi": xi, "harq.m_max": m}}
                for m in (1, 2)
                for xi in (0.1, 0.5, 1.0, 2.0, 10.0, 1000.0)
            ],
        },
    ),
    # outage vs number of FSO realisations per round, both detection modes
    "fig6": _preset(
        {
            "harq.rate": 12.0,
            "harq.m_max": 1,
            "harq.psi": 2.0,
            "fso.xi": 1.2,
            "power.snr_db": 18.0,
            **_NONIDEAL_18DB,
        },
        {
            "axis": "n_fso",
            "grid": [1, 5, 25, 100, 1000],
            "methods": ["exact"],
            "series": [
                {"label": "heterodyne", "set": {"fso.r": 1}},
                {"label": "IM/DD", "set": {"fso.r": 2}},
            ],
        },
    ),
}


def get_preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
