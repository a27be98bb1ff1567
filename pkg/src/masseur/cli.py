"""Command line entry point.

Exit codes: 0 success, 1 comparison failed, 2 usage/config/input error,
3 unstable simulation.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import analysis
from .analysis import TooFewSamples, Tolerance, TraceStats, UnknownTechnique, ZeroVariance
from .config import ConfigError, build, read_raw, set_value
from .core_types import EmptyTrace, TraceFormatError, read_trace_csv
from .sim import UnstableSimulation, export_trace, run_simulation

EXIT_OK, EXIT_COMPARE_FAIL, EXIT_USAGE, EXIT_UNSTABLE = 0, 1, 2, 3

log = logging.getLogger("masseur")


def _setup_logging() -> None:
    level = os.environ.get("MASSEUR_LOG", "warn").strip().lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _fail(code: int, message: str) -> int:
    print(f"masseur: {message}", file=sys.stderr)
    return code


def _parse_window(text: Optional[str]):
    if text is None:
        return None
    t0, sep, t1 = text.partition(":")
    if not sep:
        raise ValueError(f"--window expects t0:t1, got {text!r}")
    return (float(t0) if t0.strip() else None, float(t1) if t1.strip() else None)


def _write_json(path: Path, obj, one_line: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if one_line:
            fh.write(json.dumps(obj) + "\n")
        else:
            json.dump(obj, fh, indent=2)
            fh.write("\n")


def cmd_run(config_path, out_dir) -> int:
    try:
        cfg = build(read_raw(config_path))
    except ConfigError as exc:
        return _fail(EXIT_USAGE, str(exc))
    try:
        result = run_simulation(cfg.sim_config())
    except UnstableSimulation as exc:
        return _fail(EXIT_UNSTABLE, str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    export_trace(result, out / "trace.csv")
    _write_json(out / "summary.json", result.summary(), one_line=True)
    log.info("wrote %s", out / "trace.csv")
    return EXIT_OK


def _stats_with_warning(trace, window) -> TraceStats:
    try:
        return analysis.trace_stats(trace, window)
    except ZeroVariance as exc:
        log.warning("%s; writing null skew/kurt/freq", exc)
        print(f"masseur: warning: {exc}", file=sys.stderr)
        return exc.stats


def cmd_analyze(trace_path, out_dir, window=None) -> int:
    try:
        trace = read_trace_csv(trace_path)
    except (TraceFormatError, EmptyTrace) as exc:
        return _fail(EXIT_USAGE, f"{trace_path}: {exc}")
    except OSError as exc:
        return _fail(EXIT_USAGE, f"cannot read {trace_path}: {exc.strerror or exc}")
    try:
        stats = _stats_with_warning(trace, window)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "stats.json", stats.as_dict())
        analysis.export_spectrum(trace, window, out / "spectrum.csv")
    except TooFewSamples as exc:
        return _fail(EXIT_USAGE, str(exc))
    return EXIT_OK


def _load_tolerances(path):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    tolerances = dict(analysis.DEFAULT_TOLERANCES)
    for name, spec in data.items():
        if name not in analysis.STAT_FIELDS:
            raise ValueError(f"unknown stats field {name!r} in tolerance file")
        tolerances[name] = Tolerance.parse("none" if spec is None else str(spec))
    return tolerances


def cmd_compare(stats_path, technique, reference="expert", tol_path=None, out_dir=None) -> int:
    try:
        with open(stats_path, encoding="utf-8") as fh:
            stats = TraceStats.from_dict(json.load(fh))
        tolerances = _load_tolerances(tol_path) if tol_path else None
        report = analysis.compare_to_reference(stats, technique, reference, tolerances)
    except UnknownTechnique as exc:
        return _fail(EXIT_USAGE, exc.args[0])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_USAGE, f"{stats_path}: {exc}")
    out = Path(out_dir) if out_dir else Path(stats_path).parent
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report.json", report.as_dict())
    for name, c in report.fields.items():
        verdict = {True: "pass", False: "FAIL", None: "-"}[c.passed]
        delta = "n/a" if c.delta is None else f"{c.delta:+.4g}"
        print(f"{name:>5}  value={c.value!s:<22} ref={c.ref:<8g} delta={delta:<10} {verdict}")
    return EXIT_OK if report.passed else EXIT_COMPARE_FAIL


def _sweep_one(args):
    raw, param, value, run_dir = args
    cfg = build(set_value(raw, param, value))
    result = run_simulation(cfg.sim_config())
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    export_trace(result, run_dir / "trace.csv")
    _write_json(run_dir / "summary.json", result.summary(), one_line=True)
    window = cfg.window or result.window
    try:
        stats = analysis.trace_stats(result.trace, window)
    except ZeroVariance as exc:
        stats = exc.stats
    sel = result.trace.window(*window)
    mask = (result.trace.t >= sel.t[0]) & (result.trace.t <= sel.t[-1])
    return {
        "value": value,
        "steady_state_force_error": result.steady_state_force_error,
        "mean_depth_m": float(np.mean(result.depth[mask])),
        **stats.as_dict(),
    }


def cmd_sweep(config_path, param, values: List[str], out_dir, jobs: int = 1) -> int:
    values = [v.strip() for v in values if v.strip()]
    if not values:
        return _fail(EXIT_USAGE, "--values is empty")
    try:
        raw = read_raw(config_path)
        for v in values:
            build(set_value(raw, param, v))
    except ConfigError as exc:
        return _fail(EXIT_USAGE, str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(raw, param, v, str(out / f"run_{i:03d}")) for i, v in enumerate(values)]
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_sweep_one, tasks))
        else:
            rows = [_sweep_one(t) for t in tasks]
    except UnstableSimulation as exc:
        return _fail(EXIT_UNSTABLE, str(exc))
    columns = ["value", "steady_state_force_error", "mean_depth_m"] + list(analysis.STAT_FIELDS)
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row[k] is None else row[k]) for k in columns})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masseur", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one technique from a config file")
    p.add_argument("config")
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("analyze", help="characterize a trace CSV")
    p.add_argument("trace")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--window", help="t0:t1 in seconds; either side may be empty")

    p = sub.add_parser("compare", help="compare stats.json against a reference row")
    p.add_argument("stats")
    p.add_argument("--technique", required=True)
    p.add_argument("--ref", default="expert")
    p.add_argument("--tol", help="JSON file mapping field to rel:X, abs:X, sign or none")
    p.add_argument("-o", "--out", help="directory for report.json (default: next to stats)")

    p = sub.add_parser("sweep", help="run one simulation per parameter value")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="section.key, e.g. admittance.sigma")
    p.add_argument("--values", required=True, help="comma separated")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("-j", "--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "analyze":
        try:
            window = _parse_window(args.window)
        except ValueError as exc:
            return _fail(EXIT_USAGE, str(exc))
        return cmd_analyze(args.trace, args.out, window)
    if args.command == "compare":
        return cmd_compare(args.stats, args.technique, args.ref, args.tol, args.out)
    return cmd_sweep(args.config, args.param, args.values.split(","), args.out, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
