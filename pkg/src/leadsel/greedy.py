"""Greedy leader selection: ordinary, lazy, stochastic and distributed.

All optimizers maximize the decrease of the noise-variance objective, which
is the same as greedily minimizing it. They share three conventions:

* iteration 1 scores every candidate by its single-leader objective (the
  empty set has no objective), later iterations by the marginal decrease;
* among candidates whose score is within ``TIE_TOL`` of the best, the lowest
  node id wins, so results never depend on evaluation order;
* an optional ``candidates`` pool restricts which nodes may be chosen while
  the objective is always evaluated on the whole graph.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg
from .graph import Graph, NodePartition, is_connected, laplacian
from .oracle import (
    TIE_TOL,
    CallCounter,
    OracleState,
    _check_kind,
    commit,
    first_iteration_gains,
    initial_state,
    objective,
    value_with,
)

ALGORITHMS = ("ordinary", "lazy", "stochastic", "distributed")


@dataclass
class IterationRecord:
    node: int
    objective: float
    gain: float | None  # None on iteration 1: f(empty) is undefined
    calls: int
    seconds: float
    recomputations: int | None = None
    sample_size: int | None = None
    sample: list[int] | None = None


@dataclass
class SelectionTrace:
    algorithm: str
    seed: int | None
    params: dict
    records: list[IterationRecord] = field(default_factory=list)
    stages: dict | None = None

    @property
    def leaders(self) -> list[int]:
        return [r.node for r in self.records]

    @property
    def objectives(self) -> list[float]:
        return [r.objective for r in self.records]

    @property
    def final_objective(self) -> float:
        return self.records[-1].objective

    @property
    def call_count(self) -> int:
        return self.records[-1].calls if self.records else 0

    @property
    def seconds(self) -> float:
        return self.records[-1].seconds if self.records else 0.0

    def to_dict(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "params": self.params,
            "records": [asdict(r) for r in self.records],
        }
        if self.stages is not None:
            out["stages"] = {
                "stage1": [t.to_dict() for t in self.stages["stage1"]],
                "stage2": self.stages["stage2"].to_dict(),
                "pool": list(self.stages["pool"]),
            }
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionTrace":
        stages = d.get("stages")
        if stages is not None:
            stages = {
                "stage1": [cls.from_dict(t) for t in stages["stage1"]],
                "stage2": cls.from_dict(stages["stage2"]),
                "pool": list(stages["pool"]),
            }
        return cls(
            algorithm=d["algorithm"],
            seed=d["seed"],
            params=dict(d["params"]),
            records=[IterationRecord(**r) for r in d["records"]],
            stages=stages,
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SelectionTrace":
        return cls.from_dict(json.loads(text))

    CSV_FIELDS = (
        "iteration", "node", "objective", "gain", "calls",
        "seconds", "recomputations", "sample_size",
    )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_FIELDS)
        for i, r in enumerate(self.records, start=1):
            w.writerow([i, r.node, _fmt(r.objective), _fmt(r.gain), r.calls,
                        _fmt(r.seconds), _fmt(r.recomputations), _fmt(r.sample_size)])
        return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def select_best(scores: dict[int, float]) -> int:
    """Lowest node id among scores within ``TIE_TOL`` of the maximum."""
    best = max(scores.values())
    return min(v for v, s in scores.items() if s >= best - TIE_TOL)


def sample_size(remaining: int, k: int, epsilon: float) -> int:
    """Candidates evaluated per stochastic iteration.

    ``beta = k / ln(1/epsilon)``; the sample is ``ceil(remaining / beta)``
    clamped to ``[1, remaining]``.
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if k < 1 or remaining < 1:
        raise ValueError("k and remaining must be positive")
    beta = k / math.log(1.0 / epsilon)
    if beta <= 1:
        return remaining
    return min(max(math.ceil(remaining / beta), 1), remaining)


class _Run:
    """Bookkeeping shared by the optimizers for one run."""

    def __init__(self, g: Graph, k: int, oracle: str, candidates=None, cache=None):
        _check_kind(oracle)
        if not is_connected(g):
            raise ValueError("graph is disconnected")
        self.pool = sorted(set(range(g.n) if candidates is None else map(int, candidates)))
        if any(not 0 <= v < g.n for v in self.pool):
            raise ValueError("candidate out of range")
        if not 1 <= k <= min(g.n - 1, len(self.pool)):
            raise ValueError(f"k={k} out of range [1, {min(g.n - 1, len(self.pool))}]")
        self.g, self.k, self.kind = g, k, oracle
        self.cache = cache if cache is not None else {}
        if "lap" not in self.cache:
            self.cache["lap"] = laplacian(g)
        self.counter = CallCounter()
        self.state: OracleState | None = None
        self.records: list[IterationRecord] = []
        self.t0 = time.perf_counter()

    @property
    def lap(self):
        return self.cache["lap"]

    def remaining(self) -> list[int]:
        chosen = set(self.state.leaders) if self.state else set()
        return [v for v in self.pool if v not in chosen]

    def first_scores(self, nodes) -> dict[int, float]:
        """Negated single-leader objectives (higher is better)."""
        if self.kind == "accelerated":
            if "pinv" not in self.cache:
                self.cache["pinv"] = linalg.pinv_laplacian(self.lap, self.g.n)
            vals = first_iteration_gains(self.g, nodes, self.counter, self.cache["pinv"])
        else:
            vals = {v: objective(self.g, (v,), lap=self.lap) for v in nodes}
            self.counter.add(len(vals))
        return {v: -x for v, x in vals.items()}

    def gains(self, nodes) -> dict[int, float]:
        return {v: self.state.value - value_with(self.state, v) for v in nodes}

    def take(self, v: int, gain: float | None, **extra) -> None:
        if self.state is None:
            self.state = initial_state(
                self.g, (v,), self.kind, self.counter, self.lap, self.cache.get("pinv")
            )
        else:
            self.state = commit(self.state, v)
        self.records.append(IterationRecord(
            node=v,
            objective=self.state.value,
            gain=gain,
            calls=self.counter.calls,
            seconds=time.perf_counter() - self.t0,
            **extra,
        ))

    def trace(self, algorithm: str, seed, params: dict) -> SelectionTrace:
        return SelectionTrace(algorithm, seed, dict(params, k=self.k, oracle=self.kind),
                              self.records)


def _first_pick(run: _Run, nodes) -> tuple[int, dict[int, float]]:
    scores = run.first_scores(nodes)
    return select_best(scores), scores


def ordinary_greedy(g: Graph, k: int, oracle: str = "accelerated",
                    candidates=None, cache=None) -> SelectionTrace:
    """Evaluate every remaining candidate each iteration; commit the best."""
    run = _Run(g, k, oracle, candidates, cache)
    v, _ = _first_pick(run, run.remaining())
    run.take(v, None)
    for _ in range(1, k):
        scores = run.gains(run.remaining())
        v = select_best(scores)
        run.take(v, scores[v])
    return run.trace("ordinary", None, {})


def lazy_greedy(g: Graph, k: int, oracle: str = "accelerated",
                candidates=None, cache=None) -> SelectionTrace:
    """Greedy with a max-heap of cached gains used as upper bounds.

    Entries are popped and re-evaluated until no stale bound can reach
    within ``TIE_TOL`` of the best fresh gain; the choice among fresh
    entries then follows the same rule as :func:`ordinary_greedy`, so both
    return identical selections. Iteration-1 scores are objectives rather
    than decreases, so every bound starts at infinity for iteration 2.
    """
    run = _Run(g, k, oracle, candidates, cache)
    pool = run.remaining()
    v, _ = _first_pick(run, pool)
    run.take(v, None, recomputations=len(pool))
    heap = [(-math.inf, u) for u in pool if u != v]
    heapq.heapify(heap)
    for _ in range(1, k):
        fresh: dict[int, float] = {}
        best = -math.inf
        while heap and -heap[0][0] >= best - TIE_TOL:
            _, u = heapq.heappop(heap)
            gu = run.gains([u])[u]
            fresh[u] = gu
            best = max(best, gu)
        v = select_best(fresh)
        for u, gu in fresh.items():
            if u != v:
                heapq.heappush(heap, (-gu, u))
        run.take(v, fresh[v], recomputations=len(fresh))
    return run.trace("lazy", None, {})


def stochastic_greedy(g: Graph, k: int, epsilon: float, seed: int = 0,
                      oracle: str = "accelerated", candidates=None,
                      cache=None) -> SelectionTrace:
    """Greedy over a uniform without-replacement sample of the remainder.

    The sample size comes from :func:`sample_size` and is redrawn every
    iteration, the first one included.
    """
    sample_size(1, k, epsilon)  # validates epsilon early
    run = _Run(g, k, oracle, candidates, cache)
    rng = np.random.default_rng(seed)
    for i in range(k):
        rem = run.remaining()
        size = sample_size(len(rem), k, epsilon)
        sample = sorted(rng.choice(rem, size=size, replace=False).tolist())
        if i == 0:
            v, _ = _first_pick(run, sample)
            gain = None
        else:
            scores = run.gains(sample)
            v = select_best(scores)
            gain = scores[v]
        run.take(v, gain, sample_size=size, sample=sample)
    return run.trace("stochastic", seed, {"epsilon": epsilon})


def run_algorithm(name: str, g: Graph, k: int, *, epsilon: float = 0.5, seed: int = 0,
                  oracle: str = "accelerated", candidates=None, partition=None,
                  inner: str = "stochastic", cache=None) -> SelectionTrace:
    """Dispatch by algorithm id (one of ``ALGORITHMS``)."""
    if name == "ordinary":
        return ordinary_greedy(g, k, oracle, candidates, cache)
    if name == "lazy":
        return lazy_greedy(g, k, oracle, candidates, cache)
    if name == "stochastic":
        return stochastic_greedy(g, k, epsilon, seed, oracle, candidates, cache)
    if name == "distributed":
        if partition is None:
            raise ValueError("distributed greedy needs a partition")
        return distributed_greedy(g, k, partition, inner, epsilon, seed, oracle)
    raise ValueError(f"unknown algorithm {name!r}; expected one of {ALGORITHMS}")


def distributed_greedy(g: Graph, k: int, partition: NodePartition,
                       inner: str = "stochastic", epsilon: float = 0.5,
                       seed: int = 0, oracle: str = "accelerated") -> SelectionTrace:
    """Two-stage GreeDi-style selection.

    Stage 1 picks ``k`` nodes inside each cluster (a cluster with at most
    ``k`` nodes contributes all of them); stage 2 runs ``inner`` again over
    the union of the stage-1 picks. Both stages score candidates with the
    full-graph objective. Cluster ``j`` uses seed ``seed + j`` and stage 2
    uses ``seed + c``.

    The returned records are stage 2's, with calls and seconds offset by the
    stage-1 totals.
    """
    if inner not in ("ordinary", "lazy", "stochastic"):
        raise ValueError(f"unknown inner algorithm {inner!r}")
    if partition.n != g.n:
        raise ValueError(f"partition covers {partition.n} nodes, graph has {g.n}")
    if not 1 <= k <= g.n - 1:
        raise ValueError(f"k={k} out of range [1, {g.n - 1}]")
    cache: dict = {}
    stage1 = []
    pool: set[int] = set()
    for j, cluster in enumerate(partition.clusters()):
        if len(cluster) <= k:
            pool.update(cluster)
            continue
        tr = run_algorithm(inner, g, k, epsilon=epsilon, seed=seed + j, oracle=oracle,
                           candidates=cluster, cache=cache)
        stage1.append(tr)
        pool.update(tr.leaders)
    stage2 = run_algorithm(inner, g, k, epsilon=epsilon, seed=seed + partition.c,
                           oracle=oracle, candidates=sorted(pool), cache=cache)
    calls0 = sum(t.call_count for t in stage1)
    secs0 = sum(t.seconds for t in stage1)
    records = [
        IterationRecord(**{**asdict(r), "calls": r.calls + calls0,
                           "seconds": r.seconds + secs0})
        for r in stage2.records
    ]
    params = {"k": k, "epsilon": epsilon, "c": partition.c, "inner": inner,
              "oracle": oracle}
    return SelectionTrace("distributed", seed, params, records,
                          stages={"stage1": stage1, "stage2": stage2,
                                  "pool": sorted(pool)})
