"""Declarative experiments over the greedy optimizers.

An :class:`ExperimentConfig` names one of five experiment kinds; it is
expanded into independent *units* (one graph instance each, holding one or
more optimizer runs), the units are executed, serially or in a process
pool, and the resulting cells are aggregated into an
:class:`ExperimentReport`.

Automated checks should rely on call counts and objective deviations. Wall
times are recorded for information only.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy import stats

from ..graph import (
    SbmParams,
    gen_ba,
    gen_er,
    gen_rg,
    gen_sbm,
    partition_equal,
)
from ..greedy import ALGORITHMS, SelectionTrace, run_algorithm

KINDS = ("scaling", "lazy-profile", "epsilon-sweep", "monte-carlo", "sbm-distributed")
TOPOLOGIES = ("er", "ba", "rg")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    topology: str = "er"
    topologies: list[str] = field(default_factory=lambda: ["er", "rg", "ba"])
    er_p: float = 0.05
    rg_radius: float | None = None
    ba_m: int = 2
    n: list[int] = field(default_factory=lambda: [100, 200, 400, 800])
    k: int | None = 10
    k_fraction: float | None = None
    k_list: list[int] = field(default_factory=lambda: [10, 20, 30, 40, 50])
    epsilon: list[float] = field(default_factory=lambda: [0.01])
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    algorithms: list[str] = field(default_factory=lambda: ["ordinary", "lazy", "stochastic"])
    oracle: str | dict = "accelerated"
    graph_seed: int = 0
    at_k: int | None = None
    bins: int = 20
    # sbm-distributed
    c: list[int] = field(default_factory=lambda: [2, 4])
    n_c: list[int] = field(default_factory=lambda: [50, 100])
    p_in: float = 0.05
    p_out_ratio: list[float] = field(default_factory=lambda: [0.4])
    inner: str = "stochastic"
    partition: str = "truth"
    warmup: bool = True
    out: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def oracle_for(self, algorithm: str) -> str:
        if isinstance(self.oracle, dict):
            return self.oracle.get(algorithm, "accelerated")
        return self.oracle

    def k_for(self, n: int) -> int:
        if self.k_fraction is not None:
            return max(1, round(self.k_fraction * n))
        return int(self.k)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; expected {KINDS}")
        for t in [self.topology, *self.topologies]:
            if t not in TOPOLOGIES:
                raise ConfigError(f"unknown topology {t!r}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if not self.n or any(x < 2 for x in self.n):
            raise ConfigError("n values must be >= 2")
        if (self.k is None) == (self.k_fraction is None):
            raise ConfigError("set exactly one of k and k_fraction")
        if self.k_fraction is not None and not 0 < self.k_fraction < 1:
            raise ConfigError("k_fraction must lie in (0, 1)")
        if self.k is not None and self.k < 1:
            raise ConfigError("k must be positive")
        for a in self.algorithms:
            if a not in ALGORITHMS[:3]:
                raise ConfigError(f"unknown algorithm {a!r}")
        for e in self.epsilon:
            if not 0 < e < 1:
                raise ConfigError(f"epsilon {e} outside (0, 1)")
        if not 0 < self.er_p <= 1:
            raise ConfigError("er_p must lie in (0, 1]")
        if self.rg_radius is not None and not 0 < self.rg_radius <= math.sqrt(2):
            raise ConfigError("rg_radius must lie in (0, sqrt(2)]")
        if self.partition not in ("truth", "equal"):
            raise ConfigError("partition must be 'truth' or 'equal'")
        if self.inner not in ALGORITHMS[:3]:
            raise ConfigError(f"unknown inner algorithm {self.inner!r}")
        kinds = [self.oracle_for(a) for a in ALGORITHMS]
        if any(o not in ("naive", "accelerated") for o in kinds):
            raise ConfigError(f"bad oracle setting {self.oracle!r}")


def default_rg_radius(n: int, er_p: float) -> float:
    """Radius giving roughly the ER default's mean degree, kept above the
    connectivity threshold ``sqrt(2 ln n / (pi n))``."""
    return min(math.sqrt(2), max(math.sqrt(er_p / math.pi),
                                 math.sqrt(2 * math.log(n) / (math.pi * n))))


def make_graph(cfg: ExperimentConfig, topology: str, n: int, seed: int):
    if topology == "er":
        return gen_er(n, cfg.er_p, seed)
    if topology == "rg":
        radius = cfg.rg_radius or default_rg_radius(n, cfg.er_p)
        return gen_rg(n, radius, seed)
    if topology == "ba":
        return gen_ba(n, cfg.ba_m, seed)
    raise ConfigError(f"unknown topology {topology!r}")


@dataclass
class Cell:
    """One optimizer run (or its failure) inside an experiment."""

    params: dict
    trace: SelectionTrace | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "trace": self.trace.to_dict() if self.trace else None,
            "error": self.error,
        }


@dataclass
class ScalingFit:
    a: float
    d: float
    r2: float
    d_ci: tuple[float, float]


@dataclass
class ExperimentReport:
    config: dict
    cells: list[Cell] = field(default_factory=list)
    tables: dict[str, list[dict]] = field(default_factory=dict)
    fits: list[dict] = field(default_factory=list)

    @property
    def failed(self) -> list[Cell]:
        return [c for c in self.cells if not c.ok]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "cells": [c.to_dict() for c in self.cells],
            "tables": self.tables,
            "fits": self.fits,
        }


def fit_scaling_exponent(points) -> ScalingFit:
    """Least-squares fit of ``y = a * n**d`` on log-log axes.

    Returns the coefficient, exponent, r^2 and a 95% interval on ``d``.
    """
    pts = [(float(n), float(y)) for n, y in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit")
    if any(n <= 0 or y <= 0 for n, y in pts):
        raise ValueError("points must be positive")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    if np.ptp(x) == 0:
        raise ValueError("need at least two distinct n values")
    res = stats.linregress(x, y)
    r2 = res.rvalue**2 if np.ptp(y) > 0 else 1.0
    half = stats.t.ppf(0.975, len(pts) - 2) * res.stderr
    return ScalingFit(float(math.exp(res.intercept)), float(res.slope), float(r2),
                      (float(res.slope - half), float(res.slope + half)))


def deviation_stats(baseline: SelectionTrace, candidates, at_k: int) -> dict:
    """Percentage deviation of candidate objectives from the baseline at ``at_k``.

    ``100 * (f_candidate - f_baseline) / f_baseline``, positive when the
    candidate is worse.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidate traces")
    graph = baseline.params.get("graph")
    for t in [baseline, *candidates]:
        if len(t.records) < at_k:
            raise ValueError(f"trace has {len(t.records)} records, need {at_k}")
        if t.params.get("graph") != graph:
            raise ValueError("traces come from different instances")
    base = baseline.records[at_k - 1].objective
    dev = np.array([100.0 * (t.records[at_k - 1].objective - base) / base
                    for t in candidates])
    p5, p50, p95 = np.percentile(dev, [5, 50, 95])
    return {
        "count": len(dev),
        "mean": float(dev.mean()),
        "std": float(dev.std()),
        "min": float(dev.min()),
        "max": float(dev.max()),
        "p5": float(p5),
        "p50": float(p50),
        "p95": float(p95),
        "deviations": dev.tolist(),
    }


# -- execution ----------------------------------------------------------------


def _timed_run(cfg: ExperimentConfig, params: dict, g, **kw) -> Cell:
    algo = params["algorithm"]
    kw.setdefault("oracle", cfg.oracle_for(algo))
    try:
        if cfg.warmup:
            run_algorithm(algo, g, params["k"], **kw)
        t0 = time.perf_counter()
        trace = run_algorithm(algo, g, params["k"], **kw)
        params["wall_seconds"] = time.perf_counter() - t0
        trace.params["graph"] = params["graph"]
        return Cell(params, trace)
    except Exception as exc:  # recorded per cell, run continues
        return Cell(params, error=f"{type(exc).__name__}: {exc}")


def _graph_label(topology: str, n: int, seed: int) -> str:
    return f"{topology}-n{n}-s{seed}"


def _unit_scaling(cfg, topology, n, seed):
    k = cfg.k_for(n)
    label = _graph_label(topology, n, seed)
    try:
        g = make_graph(cfg, topology, n, seed)
    except Exception as exc:
        return [Cell({"graph": label, "n": n, "k": k, "seed": seed, "algorithm": a},
                     error=f"{type(exc).__name__}: {exc}") for a in cfg.algorithms]
    cells = []
    for algo in cfg.algorithms:
        for eps in (cfg.epsilon if algo == "stochastic" else [None]):
            params = {"graph": label, "topology": topology, "n": n, "k": k,
                      "seed": seed, "algorithm": algo, "epsilon": eps,
                      "oracle": cfg.oracle_for(algo)}
            kw = {"epsilon": eps, "seed": seed} if eps is not None else {}
            cells.append(_timed_run(cfg, params, g, **kw))
    return cells


def _unit_lazy(cfg, topology, n, seed):
    k = max(cfg.k_list)
    label = _graph_label(topology, n, seed)
    g = make_graph(cfg, topology, n, seed)
    cells = []
    for algo in ("ordinary", "lazy"):
        params = {"graph": label, "topology": topology, "n": n, "k": k,
                  "seed": seed, "algorithm": algo, "oracle": cfg.oracle_for(algo)}
        cells.append(_timed_run(cfg, params, g))
    return cells


def _unit_stochastic_vs_ordinary(cfg, topology, n, graph_seed, run_seeds):
    k = cfg.k_for(n)
    label = _graph_label(topology, n, graph_seed)
    g = make_graph(cfg, topology, n, graph_seed)
    base = {"graph": label, "topology": topology, "n": n, "k": k}
    cells = [_timed_run(cfg, dict(base, seed=graph_seed, algorithm="ordinary",
                                  oracle=cfg.oracle_for("ordinary")), g)]
    for eps in cfg.epsilon:
        for s in run_seeds:
            params = dict(base, seed=s, algorithm="stochastic", epsilon=eps,
                          oracle=cfg.oracle_for("stochastic"))
            cells.append(_timed_run(cfg, params, g, epsilon=eps, seed=s))
    return cells


def _unit_sbm(cfg, c, n_c, ratio, seed):
    p_out = ratio * cfg.p_in
    label = f"sbm-c{c}-nc{n_c}-r{ratio}-s{seed}"
    k = cfg.k_for(c * n_c)
    base = {"graph": label, "c": c, "n_c": n_c, "p_out_ratio": ratio,
            "n": c * n_c, "k": k, "seed": seed}
    try:
        g, truth = gen_sbm(SbmParams(c, n_c, cfg.p_in, p_out), seed)
    except Exception as exc:
        return [Cell(dict(base, algorithm=a), error=f"{type(exc).__name__}: {exc}")
                for a in ("ordinary", "distributed")]
    part = truth if cfg.partition == "truth" else partition_equal(g, c, seed)
    eps = cfg.epsilon[0]
    return [
        _timed_run(cfg, dict(base, algorithm="ordinary",
                             oracle=cfg.oracle_for("ordinary")), g),
        _timed_run(cfg, dict(base, algorithm="distributed", inner=cfg.inner,
                             epsilon=eps, partition=cfg.partition,
                             oracle=cfg.oracle_for("distributed")),
                   g, partition=part, inner=cfg.inner, epsilon=eps, seed=seed),
    ]


def _units(cfg: ExperimentConfig):
    if cfg.kind == "scaling":
        return [(_unit_scaling, (cfg, cfg.topology, n, s)) for n in cfg.n for s in cfg.seeds]
    if cfg.kind == "lazy-profile":
        return [(_unit_lazy, (cfg, t, cfg.n[0], s)) for t in cfg.topologies for s in cfg.seeds]
    if cfg.kind == "epsilon-sweep":
        # one graph per seed, stochastic reuses the seed
        return [(_unit_stochastic_vs_ordinary, (cfg, cfg.topology, cfg.n[0], s, [s]))
                for s in cfg.seeds]
    if cfg.kind == "monte-carlo":
        return [(_unit_stochastic_vs_ordinary,
                 (cfg, cfg.topology, cfg.n[0], cfg.graph_seed, list(cfg.seeds)))]
    return [(_unit_sbm, (cfg, c, nc, r, s)) for c in cfg.c for nc in cfg.n_c
            for r in cfg.p_out_ratio for s in cfg.seeds]


def _call(unit):
    fn, args = unit
    try:
        return fn(*args)
    except Exception as exc:
        return [Cell({"unit": fn.__name__.lstrip("_"), "args": repr(args[1:])},
                     error=f"{type(exc).__name__}: {exc}")]


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Run every unit of ``cfg`` and aggregate tables and fits.

    Failures inside a unit are recorded on its cells; config errors raise
    :class:`ConfigError` before anything runs.
    """
    cfg.validate()
    units = _units(cfg)
    cells: list[Cell] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for batch in pool.map(_call, units):
                cells.extend(batch)
    else:
        for unit in units:
            cells.extend(_call(unit))
    report = ExperimentReport(config=cfg.to_dict(), cells=cells)
    _AGGREGATORS[cfg.kind](cfg, report)
    return report


# -- aggregation ----------------------------------------------------------------


def _ok(cells, **match):
    return [c for c in cells if c.ok and all(c.params.get(k) == v for k, v in match.items())]


def _series_key(c: Cell):
    return (c.params["algorithm"], c.params.get("epsilon"))


def _agg_scaling(cfg, report):
    rows = []
    groups: dict = {}
    for c in _ok(report.cells):
        groups.setdefault(_series_key(c), {}).setdefault(c.params["n"], []).append(c)
    for (algo, eps), by_n in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0)):
        for n in sorted(by_n):
            cs = by_n[n]
            rows.append({
                "algorithm": algo, "epsilon": eps, "n": n, "k": cs[0].params["k"],
                "runs": len(cs),
                "mean_calls": float(np.mean([c.trace.call_count for c in cs])),
                "mean_seconds": float(np.mean([c.params["wall_seconds"] for c in cs])),
                "mean_objective": float(np.mean([c.trace.final_objective for c in cs])),
            })
        for metric, col in (("calls", "mean_calls"), ("seconds", "mean_seconds")):
            pts = [(r["n"], r[col]) for r in rows
                   if r["algorithm"] == algo and r["epsilon"] == eps]
            if len(pts) >= 3:
                f = fit_scaling_exponent(pts)
                report.fits.append({"algorithm": algo, "epsilon": eps, "metric": metric,
                                    "a": f.a, "d": f.d, "r2": f.r2,
                                    "d_lo": f.d_ci[0], "d_hi": f.d_ci[1]})
    report.tables["scaling"] = rows


def _agg_lazy(cfg, report):
    rows = []
    for t in cfg.topologies:
        for k in sorted(cfg.k_list):
            ratios, tratio = [], []
            for s in cfg.seeds:
                o = _ok(report.cells, topology=t, seed=s, algorithm="ordinary")
                z = _ok(report.cells, topology=t, seed=s, algorithm="lazy")
                if not (o and z):
                    continue
                ro, rz = o[0].trace.records[k - 1], z[0].trace.records[k - 1]
                ratios.append(ro.calls / rz.calls)
                tratio.append(ro.seconds / rz.seconds if rz.seconds > 0 else math.nan)
            if ratios:
                rows.append({"topology": t, "k": k, "runs": len(ratios),
                             "call_ratio": float(np.mean(ratios)),
                             "time_ratio": float(np.nanmean(tratio))})
    report.tables["lazy_profile"] = rows


def _deviation_rows(cfg, report, graph_cells):
    """Per-(epsilon, k) deviation summaries against the ordinary baseline."""
    rows = []
    for eps in cfg.epsilon:
        for kk in range(1, cfg.k_for(cfg.n[0]) + 1):
            devs = []
            for base, cands in graph_cells:
                cs = [c.trace for c in cands if c.params.get("epsilon") == eps]
                if cs:
                    devs.extend(deviation_stats(base.trace, cs, kk)["deviations"])
            if devs:
                rows.append({"epsilon": eps, "k": kk, "runs": len(devs),
                             "mean_dev": float(np.mean(devs)),
                             "max_dev": float(np.max(devs))})
    return rows


def _pair_by_graph(report):
    out = []
    graphs = sorted({c.params["graph"] for c in report.cells if "graph" in c.params})
    for gl in graphs:
        base = _ok(report.cells, graph=gl, algorithm="ordinary")
        cands = _ok(report.cells, graph=gl, algorithm="stochastic")
        if base:
            out.append((base[0], cands))
    return out


def _call_ratio_rows(pairs):
    rows = []
    for base, cands in pairs:
        for c in cands:
            rows.append({"graph": c.params["graph"], "epsilon": c.params["epsilon"],
                         "seed": c.params["seed"],
                         "call_ratio": base.trace.call_count / c.trace.call_count,
                         "time_ratio": base.params["wall_seconds"] / c.params["wall_seconds"]})
    return rows


def _agg_epsilon(cfg, report):
    pairs = _pair_by_graph(report)
    report.tables["deviation_by_k"] = _deviation_rows(cfg, report, pairs)
    report.tables["speedup"] = _call_ratio_rows(pairs)


def _agg_monte_carlo(cfg, report):
    pairs = _pair_by_graph(report)
    report.tables["deviation_by_k"] = _deviation_rows(cfg, report, pairs)
    at_k = cfg.at_k or cfg.k_for(cfg.n[0])
    summary, hist = [], []
    for eps in cfg.epsilon:
        for base, cands in pairs:
            cs = [c.trace for c in cands if c.params.get("epsilon") == eps]
            if not cs:
                continue
            st = deviation_stats(base.trace, cs, at_k)
            devs = st.pop("deviations")
            summary.append({"epsilon": eps, "at_k": at_k, **st})
            counts, edges = np.histogram(devs, bins=cfg.bins)
            hist += [{"epsilon": eps, "lo": float(lo), "hi": float(hi), "count": int(n)}
                     for lo, hi, n in zip(edges[:-1], edges[1:], counts)]
    report.tables["deviation_summary"] = summary
    report.tables["histogram"] = hist


def _agg_sbm(cfg, report):
    rows = []
    graphs = sorted({c.params["graph"] for c in report.cells if "graph" in c.params})
    for gl in graphs:
        o = _ok(report.cells, graph=gl, algorithm="ordinary")
        d = _ok(report.cells, graph=gl, algorithm="distributed")
        if not (o and d):
            continue
        o, d = o[0], d[0]
        fo, fd = o.trace.final_objective, d.trace.final_objective
        rows.append({"graph": gl, "c": o.params["c"], "n_c": o.params["n_c"],
                     "p_out_ratio": o.params["p_out_ratio"], "seed": o.params["seed"],
                     "deviation_pct": 100.0 * (fd - fo) / fo,
                     "call_ratio": o.trace.call_count / d.trace.call_count,
                     "time_ratio": o.params["wall_seconds"] / d.params["wall_seconds"]})
    report.tables["sbm_distributed"] = rows


_AGGREGATORS = {
    "scaling": _agg_scaling,
    "lazy-profile": _agg_lazy,
    "epsilon-sweep": _agg_epsilon,
    "monte-carlo": _agg_monte_carlo,
    "sbm-distributed": _agg_sbm,
}
