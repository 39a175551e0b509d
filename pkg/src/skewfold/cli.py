"""Command-line scenario runner.

``skewfold list``
    Enumerate the scenarios.
``skewfold simulate <scenario> [--config FILE] [--seed N] [--out DIR] [--workers K]``
    Run the scenario and write ``<scenario>_paths.csv`` and
    ``<scenario>_report.json`` to the output directory.
``skewfold verify <scenario> ...``
    Same as ``simulate``, and print one line per check.

Both run commands exit with 0 when every check passes, 1 when a check fails
and 2 on a configuration error. The output directory defaults to
``$SKEWFOLD_OUT`` and then to ``./skewfold-out``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigurationError, SkewfoldError
from .scenarios import SCENARIOS, resolve_config, run_scenario, sample_series

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
OUT_ENV = "SKEWFOLD_OUT"


def _load_config(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from None
    except yaml.YAMLError as e:
        raise ConfigurationError(f"malformed config {path}: {e}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config {path} must hold a mapping at top level")
    return data


def _output_dir(args, cfg) -> Path:
    return Path(args.out or cfg.get("output_dir") or os.environ.get(OUT_ENV) or "skewfold-out")


def write_paths_csv(path: Path, series: dict) -> None:
    """Write ``t`` and every series as columns, full double precision."""
    names = list(series)
    cols = np.column_stack([np.asarray(series[k], dtype=float).reshape(-1) for k in names])
    np.savetxt(path, cols, fmt="%.17g", delimiter=",", header=",".join(names), comments="")


def write_report_json(path: Path, report: dict) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")


def _build_parser():
    ap = argparse.ArgumentParser(prog="skewfold", description="Skew-unfolding verification scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list the scenarios")
    for cmd, hlp in (("simulate", "run a scenario and write its outputs"),
                     ("verify", "run a scenario, print its checks and set the exit code")):
        p = sub.add_parser(cmd, help=hlp)
        p.add_argument("scenario")
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./skewfold-out)")
        p.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
    return ap


def _run(args) -> int:
    if args.scenario not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {args.scenario!r}; try 'skewfold list'")
    user = _load_config(args.config) if args.config else {}
    if args.seed is not None:
        user["seed"] = args.seed
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigurationError("--workers must be >= 1")
        user["workers"] = args.workers
    cfg = resolve_config(args.scenario, user, strict=args.config is not None)
    out = _output_dir(args, cfg)
    report = run_scenario(cfg)
    out.mkdir(parents=True, exist_ok=True)
    write_paths_csv(out / f"{args.scenario}_paths.csv", sample_series(cfg))
    write_report_json(out / f"{args.scenario}_report.json", report)
    if args.command == "verify":
        for c in report["checks"]:
            print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: estimate={c['estimate']} target={c['target']}")
    print(f"{args.scenario}: {'PASS' if report['passed'] else 'FAIL'} ({report['wall_clock']:.1f} s) -> {out}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        width = max(map(len, SCENARIOS))
        for name, sc in SCENARIOS.items():
            req = ", ".join(sc.required) or "-"
            print(f"{name:<{width}}  [{req}]  {sc.summary}")
        return EXIT_OK
    try:
        return _run(args)
    except ConfigurationError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SkewfoldError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
