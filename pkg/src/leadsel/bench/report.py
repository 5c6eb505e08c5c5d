"""Byte-stable CSV/JSON output for experiment reports.

Floats are written with 12 significant digits and JSON keys are sorted, so
emitting the same report twice yields identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .experiments import ExperimentReport

CELL_PARAM_FIELDS = (
    "graph", "topology", "n", "k", "seed", "algorithm", "oracle", "epsilon",
    "c", "n_c", "p_out_ratio", "inner", "partition",
)
RECORD_FIELDS = (
    "iteration", "node", "objective", "gain", "calls", "seconds",
    "recomputations", "sample_size",
)
CELL_FIELDS = ("cell",) + CELL_PARAM_FIELDS + ("status", "error") + RECORD_FIELDS


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _round(obj):
    """Recursively round floats to 12 significant digits for JSON."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def cell_rows(report: ExperimentReport):
    """One row per iteration per cell; a failed cell gives one row."""
    for idx, cell in enumerate(report.cells):
        head = [idx] + [cell.params.get(f) for f in CELL_PARAM_FIELDS]
        if not cell.ok:
            yield head + ["failed", cell.error] + [None] * len(RECORD_FIELDS)
            continue
        for i, r in enumerate(cell.trace.records, start=1):
            yield head + ["ok", None, i, r.node, r.objective, r.gain, r.calls,
                          r.seconds, r.recomputations, r.sample_size]


def emit_report(report: ExperimentReport, fmt_: str, out_dir) -> list[Path]:
    """Write ``report`` under ``out_dir`` as ``csv`` or ``json``; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt_ == "json":
        path = out / "report.json"
        path.write_text(json.dumps(_round(report.to_dict()), sort_keys=True, indent=2) + "\n")
        return [path]
    if fmt_ != "csv":
        raise ValueError(f"unknown format {fmt_!r}")
    paths = [out / "cells.csv"]
    _write_csv(paths[0], CELL_FIELDS, cell_rows(report))
    for name in sorted(report.tables):
        rows = report.tables[name]
        header = sorted({k for r in rows for k in r})
        path = out / f"{name}.csv"
        _write_csv(path, header, ([r.get(h) for h in header] for r in rows))
        paths.append(path)
    if report.fits:
        header = sorted({k for r in report.fits for k in r})
        path = out / "fits.csv"
        _write_csv(path, header, ([r.get(h) for h in header] for r in report.fits))
        paths.append(path)
    return paths
