"""Command-line entry point.

Exit status: 0 on success, 2 for configuration problems, 3 when a
numerical or passivity error prevented part of the computation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Optional, Sequence

from . import experiment as ex

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("risqkd")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment file (defaults used if omitted)")
    common.add_argument("--output", type=Path, help="result file; stdout when omitted")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default from config)")
    common.add_argument("--seed", type=int, help="overrides phase and swarm seeds")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent grid points")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="risqkd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="SKR over the configured sweep grid")
    sub.add_parser("secure-distance", parents=[common], help="largest distance meeting the SKR threshold")
    sub.add_parser("optimize", parents=[common], help="PSO over RIS phases and splitters at one distance")
    sub.add_parser("validate-config", parents=[common], help="print the resolved configuration")
    return p


def _load(args) -> ex.ExperimentConfig:
    cfg = ex.load_config(args.config) if args.config else ex.ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, phases=replace(cfg.phases, seed=args.seed), pso=replace(cfg.pso, seed=args.seed))
    if args.jobs < 1:
        raise ex.ConfigError("--jobs: must be >= 1")
    return cfg


def _open_output(args, cfg: ex.ExperimentConfig):
    path = args.output or (Path(cfg.output.path) if cfg.output.path else None)
    return path.open("w", newline="") if path else sys.stdout


def _write_secure(rows: list[ex.SecureDistanceRow], fh, fmt: str, cfg: ex.ExperimentConfig) -> None:
    if fmt == "json":
        fh.write(json.dumps({"config": cfg.resolved(), "rows": [asdict(r) for r in rows]}, indent=2) + "\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(("sweep_var", "sweep_value", "scenario", "phase_source", "threshold_bits", "secure_distance_m"))
    for r in rows:
        w.writerow((r.sweep_var, repr(r.sweep_value), r.scenario, r.phase_source,
                    repr(r.threshold_bits), repr(r.distance_m)))


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
    except ex.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = args.format or cfg.output.format

    if args.command == "validate-config":
        print(json.dumps(cfg.resolved(), indent=2))
        return EXIT_OK

    try:
        if args.command == "secure-distance":
            rows = ex.secure_distance_table(cfg, jobs=args.jobs)
            writer = lambda fh: _write_secure(rows, fh, fmt, cfg)  # noqa: E731
            failed = False
        else:
            if args.command == "optimize":
                cfg = replace(cfg, phases=replace(cfg.phases, source="optimized"),
                              sweep=ex.SweepConfig("distance_m", (cfg.system.distance_m,)))
            rows = ex.run_sweep(cfg, jobs=args.jobs)
            writer = lambda fh: ex.write_results(rows, fh, fmt, cfg)  # noqa: E731
            failed = any(r.error for r in rows)
    except ex.BracketError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ex.NUMERIC_ERRORS as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    fh = _open_output(args, cfg)
    try:
        writer(fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    if failed:
        print("numerical error: some rows failed, see the error column", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
