"""Command-line front end.

Exit codes: 0 success, 1 validation FAIL, 2 usage/config error,
3 numeric convergence failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys

from . import __version__
from .presets import BASE, PRESETS, get_preset
from .special import ConvergenceError
from .sweep import (
    ALL_METHODS,
    TOLERANCE_PROFILES,
    ConfigError,
    RangeError,
    SweepSpec,
    harq_gain,
    has_errors,
    merge_config,
    rows_to_csv,
    rows_to_json,
    run_sweep,
    validate,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _methods(text: str):
    out = [m.strip() for m in text.split(",") if m.strip()]
    out = ["monte-carlo" if m in ("mc", "montecarlo") else m for m in out]
    bad = [m for m in out if m not in ALL_METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown methods {bad}; choose from {', '.join(ALL_METHODS)}")
    if not out:
        raise argparse.ArgumentTypeError("empty method list")
    return out


def _load_config(args) -> dict:
    preset = getattr(args, "preset", None)
    cfg = get_preset(preset) if preset else {k: dict(v) for k, v in BASE.items()}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = merge_config(cfg, json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    overrides = {}
    for item in getattr(args, "set", None) or []:
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        section, _, name = key.partition(".")
        overrides.setdefault(section, {})[name] = _parse_value(value)
    if overrides:
        cfg = merge_config(cfg, overrides)
    if getattr(args, "seed", None) is not None:
        cfg["mc"]["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        cfg["mc"]["trials"] = args.trials
    return cfg


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_rows(rows, args):
    fmt = "json" if args.out and args.out.lower().endswith(".json") else "csv"
    if fmt == "json":
        _emit(rows_to_json(rows), args.out)
    else:
        stamp = None
        if not args.no_header_timestamp:
            stamp = "generated " + _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        _emit(rows_to_csv(rows, stamp), args.out)


def _cmd_dataset(args, forced_methods=None, allowed=None):
    cfg = _load_config(args)
    spec = SweepSpec.from_config(cfg)
    if args.methods:
        spec.methods = args.methods
    if forced_methods is not None:
        spec.methods = forced_methods
    if allowed is not None:
        spec.methods = [m for m in spec.methods if m in allowed] or list(allowed)
    spec.__post_init__()
    rows = run_sweep(spec, workers=args.workers)
    _write_rows(rows, args)
    return EXIT_NUMERIC if has_errors(rows) else EXIT_OK


def cmd_analyze(args):
    return _cmd_dataset(args, allowed=("exact", "linearized", "asymptotic"))


def cmd_simulate(args):
    return _cmd_dataset(args, forced_methods=["monte-carlo"])


def cmd_sweep(args):
    return _cmd_dataset(args)


def cmd_validate(args):
    args.preset = args.preset_name or args.preset
    if not args.preset:
        raise ConfigError("validate needs a preset")
    cfg = _load_config(args)
    spec = SweepSpec.from_config(cfg)
    spec.methods = args.methods or ["linearized", "asymptotic"]
    report = validate(spec, args.tolerance_profile, workers=args.workers)
    lines = ["series,axis_value,method,m,phi,reference,delta,tolerance,verdict"]
    for r in report:
        lines.append(",".join("" if r[k] is None else str(r[k]) for k in
                              ("series", "axis_value", "method", "m", "phi", "reference", "delta", "tolerance", "verdict")))
    fails = sum(r["verdict"] == "FAIL" for r in report)
    worst = {}
    for r in report:
        if r["delta"] is not None:
            worst[r["method"]] = max(worst.get(r["method"], 0.0), r["delta"])
    summary = "; ".join(f"max |{m} - exact| = {d:.3g}" for m, d in sorted(worst.items()))
    verdict = "FAIL" if fails else "PASS"
    if args.out:
        _emit("\n".join(lines) + "\n", args.out)
    print(f"{verdict} {args.preset}: {len(report)} comparisons, {fails} failed; {summary}")
    return EXIT_FAIL if fails else EXIT_OK


def cmd_harq_gain(args):
    args.preset = args.preset_name
    cfg = _load_config(args)
    gain = harq_gain(cfg, args.target, m_ref=args.m_ref, m_harq=args.m_harq)
    print(f"{gain:.4f}")
    return EXIT_OK


def _common(p, preset_flag=True):
    if preset_flag:
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in configuration")
    p.add_argument("--config", help="JSON configuration overlaid on the preset")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override one field")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (u64)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
    p.add_argument("--workers", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rffso", description="Hybrid RF/FSO HARQ outage and throughput")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func, doc in (
        ("analyze", cmd_analyze, "closed-form methods only"),
        ("simulate", cmd_simulate, "Monte Carlo only"),
        ("sweep", cmd_sweep, "any mix of methods"),
    ):
        p = sub.add_parser(name, help=doc)
        _common(p)
        p.add_argument("--methods", type=_methods, help=f"comma list from {','.join(ALL_METHODS)}")
        p.add_argument("--out", help="output path (.csv or .json); stdout if omitted")
        p.add_argument("--no-header-timestamp", action="store_true", help="omit the CSV timestamp line")
        p.set_defaults(func=func)

    p = sub.add_parser("validate", help="compare methods against the exact integral")
    p.add_argument("preset_name", nargs="?", choices=sorted(PRESETS), metavar="PRESET")
    _common(p)
    p.add_argument("--methods", type=_methods, help="methods checked against exact")
    p.add_argument("--tolerance-profile", choices=sorted(TOLERANCE_PROFILES), default="default")
    p.add_argument("--out", help="write the per-point report as CSV")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("harq-gain", help="SNR saved by HARQ at a target outage")
    p.add_argument("preset_name", choices=sorted(PRESETS), metavar="PRESET")
    p.add_argument("target", type=float, help="target outage probability")
    _common(p, preset_flag=False)
    p.add_argument("--m-ref", type=int, default=1)
    p.add_argument("--m-harq", type=int, default=3)
    p.set_defaults(func=cmd_harq_gain)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, RangeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
