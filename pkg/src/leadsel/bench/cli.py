"""Command-line entry point: ``leadsel-bench <experiment> [options]``.

Exit status is 0 when every cell ran, 2 when some cells failed and 1 on a
configuration error. The output directory is ``--out``, else
``$LEADSEL_OUT``, else ``./results``.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import yaml

from .experiments import ConfigError, ExperimentConfig, fit_scaling_exponent, run_experiment
from .report import emit_report

log = logging.getLogger("leadsel.bench")

SUBCOMMANDS = {
    "scaling": "scaling",
    "lazy-profile": "lazy-profile",
    "epsilon-sweep": "epsilon-sweep",
    "monte-carlo": "monte-carlo",
    "sbm": "sbm-distributed",
}


def load_config(path, kind: str) -> ExperimentConfig:
    data = {}
    if path is not None:
        try:
            data = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    declared = data.pop("kind", kind)
    if declared != kind:
        raise ConfigError(f"config declares kind {declared!r}, command is {kind!r}")
    try:
        return ExperimentConfig.from_dict({"kind": kind, **data})
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _fit_main(args) -> int:
    try:
        with open(args.points, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if rows and not rows[0][0].replace(".", "", 1).isdigit():
            rows = rows[1:]
        fit = fit_scaling_exponent((float(r[0]), float(r[1])) for r in rows)
    except (OSError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"a={fit.a:.12g} d={fit.d:.12g} r2={fit.r2:.12g} "
          f"d_ci=[{fit.d_ci[0]:.6g}, {fit.d_ci[1]:.6g}]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leadsel-bench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run a {SUBCOMMANDS[name]} experiment")
        p.add_argument("--config", help="YAML file of ExperimentConfig fields")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="run a single seed instead of the list")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--jobs", type=int, default=1)
    p = sub.add_parser("fit", help="fit y = a*n^d to a two-column CSV of (n, y)")
    p.add_argument("points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "fit":
        return _fit_main(args)
    try:
        cfg = load_config(args.config, SUBCOMMANDS[args.command])
        if args.seed is not None:
            cfg.seeds = [args.seed]
            cfg.graph_seed = args.seed
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out = args.out or cfg.out or os.environ.get("LEADSEL_OUT") or "results"
    report = run_experiment(cfg, jobs=args.jobs)
    for path in emit_report(report, args.format, out):
        log.info("wrote %s", path)
    for cell in report.failed:
        print(f"failed cell {cell.params}: {cell.error}", file=sys.stderr)
    return 2 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
