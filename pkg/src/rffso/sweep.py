"""Parameter sweeps, cross-method validation and the HARQ power gain."""
from __future__ import annotations

import copy
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .analysis import METHODS, HarqParams, decoding_profile, fso_log_moments, throughput_and_outage
from .channel import FsoLinkParams, RfLinkParams, SystemPower, db_to_linear, pa_saturated
from .mc import McConfig, simulate_harq
from .presets import BASE, apply_overrides
from .special import ConvergenceError

AXES = {
    "snr_db": "power.snr_db",
    "xi": "fso.xi",
    "n_fso": "harq.n_fso",
    "rate": "harq.rate",
    "m_max": "harq.m_max",
}
ALL_METHODS = METHODS + ("monte-carlo",)
COLUMNS = ("series", "axis", "axis_value", "method", "m", "phi", "throughput", "outage", "std_err", "status")

TOLERANCE_PROFILES = {
    "default": {"linearized": 0.02, "asymptotic": 0.05, "mc_floor": 5e-3, "mc_sigmas": 3.0},
    "strict": {"linearized": 5e-3, "asymptotic": 0.02, "mc_floor": 2e-3, "mc_sigmas": 3.0},
}


class ConfigError(ValueError):
    pass


class RangeError(ValueError):
    pass


@dataclass(frozen=True)
class PointParams:
    fso: FsoLinkParams
    rf: RfLinkParams
    harq: HarqParams
    power: SystemPower
    mc: McConfig


def build_point(cfg: dict) -> PointParams:
    """Turn a config dict (dB powers) into linear-scale parameter objects."""
    try:
        f, r, hq, pw, mc = (cfg[k] for k in ("fso", "rf", "harq", "power", "mc"))
        power = SystemPower(float(pw["snr_db"]), float(pw["split"]))
        fso = FsoLinkParams(
            float(f["alpha"]), float(f["beta"]), float(f["xi"]), int(f["r"]), float(f["mean_gain"]), power.p_fso
        )
        if r["ideal_pa"]:
            rf = RfLinkParams(float(r["nu"]), float(r["omega"]), 1.0, 0.0, math.inf, power.p_cons)
        else:
            if r["p_max_db"] is None:
                raise ConfigError("a nonideal PA needs rf.p_max_db")
            rf = RfLinkParams(
                float(r["nu"]),
                float(r["omega"]),
                float(r["epsilon"]),
                float(r["vartheta"]),
                db_to_linear(float(r["p_max_db"])),
                power.p_cons,
            )
        harq = HarqParams(int(hq["m_max"]), float(hq["rate"]), int(hq["n_fso"]), float(hq["psi"]))
        mcc = McConfig(int(mc["trials"]), int(mc["seed"]), bool(mc["antithetic"]))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return PointParams(fso, rf, harq, power, mcc)


@dataclass
class SweepSpec:
    axis: str
    grid: list
    base: dict
    methods: list
    series: list = field(default_factory=lambda: [{"label": "base", "set": {}}])

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}")
        if not self.grid:
            raise ConfigError("sweep grid is empty")
        steps = [b - a for a, b in zip(self.grid, self.grid[1:])]
        if not (all(d > 0 for d in steps) or all(d < 0 for d in steps)):
            raise ConfigError("sweep grid must be strictly monotone")
        if not self.methods:
            raise ConfigError("no methods requested")
        bad = [m for m in self.methods if m not in ALL_METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {list(ALL_METHODS)}")
        if not self.series:
            raise ConfigError("at least one series is required")

    @classmethod
    def from_config(cls, cfg: dict) -> "SweepSpec":
        sw = cfg.get("sweep") or {}
        base = {k: copy.deepcopy(v) for k, v in cfg.items() if k != "sweep"}
        try:
            return cls(
                axis=sw.get("axis", "snr_db"),
                grid=list(sw.get("grid", [base["power"]["snr_db"]])),
                base=base,
                methods=list(sw.get("methods", ["exact"])),
                series=list(sw.get("series") or [{"label": "base", "set": {}}]),
            )
        except TypeError as exc:
            raise ConfigError(f"invalid sweep section: {exc}") from exc

    def point_config(self, series: dict, value) -> dict:
        cfg = copy.deepcopy(self.base)
        try:
            apply_overrides(cfg, dict(series.get("set", {})))
            apply_overrides(cfg, {AXES[self.axis]: value})
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        return cfg


def merge_config(base: dict, update: dict) -> dict:
    """Overlay ``update`` section by section onto a copy of ``base``."""
    out = copy.deepcopy(base)
    for section, values in update.items():
        if section not in BASE:
            raise ConfigError(f"unknown configuration section {section!r}")
        if section == "sweep":
            out.setdefault("sweep", {}).update(copy.deepcopy(values))
            continue
        for key, value in values.items():
            if key not in BASE[section]:
                raise ConfigError(f"unknown configuration key {section}.{key}")
            out[section][key] = value
    return out


# --------------------------------------------------------------------------
# sweep execution


def _fmt(value):
    return "" if value is None else value


def _point_rows(args):
    label, axis, value, cfg, methods = args
    rows = []
    try:
        p = build_point(cfg)
    except ConfigError as exc:
        for method in methods:
            rows.append(_row(label, axis, value, method, None, None, None, None, None, f"error: {exc}"))
        return rows
    flags = ["pa_saturated"] if pa_saturated(p.rf) else []
    analytic = [m for m in methods if m in METHODS]
    moments = None
    if analytic:
        try:
            moments = fso_log_moments(p.fso, p.harq.psi)
        except ConvergenceError as exc:
            moments = exc
    for method in methods:
        if method == "monte-carlo":
            est = simulate_harq(p.fso, p.rf, p.harq, p.mc)
            for m, (phi, se) in enumerate(zip(est.phi_hat, est.std_err), start=1):
                status = "+".join(["ok"] + flags)
                rows.append(_row(label, axis, value, method, m, phi, est.throughput_hat, est.outage_hat, se, status))
            continue
        try:
            if isinstance(moments, Exception):
                raise moments
            prof = decoding_profile(method, p.harq, moments, p.rf)
            met = throughput_and_outage(prof, p.harq.rate)
        except (ConvergenceError, ValueError) as exc:
            rows.append(_row(label, axis, value, method, None, None, None, None, None,
                             f"error: {type(exc).__name__}: {exc}"))
            continue
        for m, phi in enumerate(prof.phi, start=1):
            extra = ["fallback"] if prof.fallback[m - 1] else []
            status = "+".join(["ok"] + flags + extra)
            rows.append(_row(label, axis, value, method, m, phi, met.throughput, met.outage, None, status))
    return rows


def _row(series, axis, value, method, m, phi, eta, outage, se, status):
    return dict(zip(COLUMNS, (series, axis, value, method, m, phi, eta, outage, se, status)))


def run_sweep(spec: SweepSpec, workers: int = 1) -> list:
    """One row per (series, grid point, method, round m), in grid order.

    Failures are recorded in the ``status`` column; the sweep never aborts.
    """
    tasks = []
    for series in spec.series:
        for value in spec.grid:
            cfg = spec.point_config(series, value)
            tasks.append((series.get("label", ""), spec.axis, value, cfg, list(spec.methods)))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_point_rows, tasks))
    else:
        chunks = [_point_rows(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def has_errors(rows) -> bool:
    return any(str(r["status"]).startswith("error") for r in rows)


def rows_to_csv(rows, header_line: str | None = None) -> str:
    buf = io.StringIO()
    if header_line:
        buf.write(f"# {header_line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps([{c: row[c] for c in COLUMNS} for row in rows], indent=2) + "\n"


# --------------------------------------------------------------------------
# validation


def validate_rows(rows, profile: str = "default"):
    """Compare every method against ``exact`` at matching (series, point, m).

    Returns a list of report dicts, each with a ``verdict`` of PASS or FAIL.
    """
    tol = TOLERANCE_PROFILES[profile]
    exact = {
        (r["series"], r["axis_value"], r["m"]): r["phi"]
        for r in rows
        if r["method"] == "exact" and r["m"] is not None
    }
    report = []
    for r in rows:
        if str(r["status"]).startswith("error"):
            report.append({**_rep(r), "reference": None, "delta": None, "tolerance": None, "verdict": "FAIL"})
            continue
        if r["method"] == "exact":
            continue
        ref = exact.get((r["series"], r["axis_value"], r["m"]))
        if ref is None:
            report.append({**_rep(r), "reference": None, "delta": None, "tolerance": None, "verdict": "FAIL"})
            continue
        if r["method"] == "monte-carlo":
            bound = max(tol["mc_sigmas"] * r["std_err"], tol["mc_floor"])
        else:
            bound = tol[r["method"]]
        delta = abs(r["phi"] - ref)
        verdict = "PASS" if delta <= bound else "FAIL"
        report.append({**_rep(r), "reference": ref, "delta": delta, "tolerance": bound, "verdict": verdict})
    return report


def _rep(r):
    return {k: r[k] for k in ("series", "axis_value", "method", "m", "phi")}


def validate(spec: SweepSpec, profile: str = "default", workers: int = 1):
    methods = list(spec.methods)
    if "exact" not in methods:
        methods = ["exact"] + methods
    run = SweepSpec(spec.axis, spec.grid, spec.base, methods, spec.series)
    rows = run_sweep(run, workers=workers)
    return validate_rows(rows, profile)


# --------------------------------------------------------------------------
# HARQ gain


def snr_for_outage(snr_grid, outages, target: float) -> float:
    """Invert a nonincreasing outage curve by linear interpolation in log10(outage)."""
    if not 0.0 < target < 1.0:
        raise RangeError(f"target outage {target} is not a probability in (0, 1)")
    logs = [math.log10(max(o, 1e-300)) for o in outages]
    lt = math.log10(target)
    for (x0, y0), (x1, y1) in zip(zip(snr_grid, logs), zip(snr_grid[1:], logs[1:])):
        if y0 >= lt >= y1:
            if y0 == y1:
                return float(x0)
            return float(x0 + (lt - y0) * (x1 - x0) / (y1 - y0))
    raise RangeError(
        f"target outage {target:g} outside the curve range [{min(outages):.3g}, {max(outages):.3g}]"
    )


def outage_curve(base: dict, grid, m_max: int, method: str = "exact"):
    spec = SweepSpec("snr_db", list(grid), base, [method], [{"label": f"M={m_max}", "set": {"harq.m_max": m_max}}])
    rows = run_sweep(spec)
    if has_errors(rows):
        bad = next(r for r in rows if str(r["status"]).startswith("error"))
        raise ConvergenceError(f"outage curve failed at {bad['axis_value']}: {bad['status']}")
    return [r["outage"] for r in rows if r["m"] == m_max]


def harq_gain(cfg: dict, target: float, m_ref: int = 1, m_harq: int = 3, method: str = "exact") -> float:
    """SNR saving (dB) of ``m_harq`` rounds over ``m_ref`` rounds at a target outage."""
    sw = cfg.get("sweep") or {}
    if sw.get("axis", "snr_db") != "snr_db":
        raise ConfigError("harq-gain needs an SNR sweep")
    grid = list(sw.get("grid", []))
    if len(grid) < 2:
        raise ConfigError("harq-gain needs at least two SNR grid points")
    base = {k: v for k, v in cfg.items() if k != "sweep"}
    if not 0.0 < target < 1.0:
        raise RangeError(f"target outage {target} is not a probability in (0, 1)")
    ref = snr_for_outage(grid, outage_curve(base, grid, m_ref, method), target)
    if m_harq == m_ref:
        return 0.0
    harq = snr_for_outage(grid, outage_curve(base, grid, m_harq, method), target)
    return ref - harq
