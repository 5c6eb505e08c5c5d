"""Noise-variance objective and its two computation oracles.

The objective of a leader set ``S`` is ``0.5 * tr(L_ff^-1)`` where ``L_ff`` is
the Laplacian restricted to the followers ``V \\ S``. Lower is better, and the
objective decreases monotonically as leaders are added, so optimizers
maximize the *decrease* ``f(S) - f(S + v)``.

Two oracle kinds share one interface:

``"naive"``
    every evaluation inverts the grounded Laplacian from scratch.
``"accelerated"``
    the first leader is scored from the Laplacian pseudo-inverse, later
    candidates from a rank-2 Woodbury removal on the current grounded inverse.

Every grounded-trace evaluation counts as one oracle call, whichever path
produced it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .graph import Graph, is_connected, laplacian

ORACLE_KINDS = ("naive", "accelerated")
REFRESH_EVERY = 64
TIE_TOL = 1e-12


class OracleError(ValueError):
    pass


@dataclass
class CallCounter:
    calls: int = 0

    def add(self, k: int = 1) -> None:
        self.calls += k


def _check_kind(kind: str) -> str:
    if kind not in ORACLE_KINDS:
        raise ValueError(f"unknown oracle kind {kind!r}; expected one of {ORACLE_KINDS}")
    return kind


def _followers(n: int, leaders) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[list(leaders)] = False
    return np.flatnonzero(mask)


def _check_leaders(n: int, leaders) -> tuple[int, ...]:
    leaders = tuple(int(v) for v in leaders)
    if not leaders:
        raise OracleError("objective undefined at empty set")
    if len(set(leaders)) != len(leaders):
        raise OracleError(f"duplicate leaders in {leaders}")
    if any(not 0 <= v < n for v in leaders):
        raise OracleError(f"leader out of range in {leaders}")
    if len(leaders) >= n:
        raise OracleError("objective undefined with no followers left")
    return leaders


def objective(g: Graph, s, lap: np.ndarray | None = None) -> float:
    """Half the trace of the inverse grounded Laplacian, by direct inversion."""
    s = _check_leaders(g.n, s)
    if lap is None:
        lap = laplacian(g)
    f = _followers(g.n, s)
    return 0.5 * linalg.trace(linalg.invert(lap[np.ix_(f, f)]))


def first_iteration_gains(
    g: Graph,
    nodes=None,
    counter: CallCounter | None = None,
    l_pinv: np.ndarray | None = None,
) -> dict[int, float]:
    """Objective value of every single-leader set ``{m}``.

    One pseudo-inverse is computed up front; each node then costs O(n^2).
    Despite the name (kept for symmetry with the greedy loop) the values are
    objectives, not decreases: ``f(empty)`` does not exist.
    """
    if g.n < 2:
        raise OracleError("need at least two nodes")
    if l_pinv is None:
        if not is_connected(g):
            raise OracleError("graph is disconnected")
        l_pinv = linalg.pinv_laplacian(laplacian(g), g.n)
    nodes = range(g.n) if nodes is None else nodes
    out = {int(m): 0.5 * linalg.ground_trace_from_pinv(l_pinv, m) for m in nodes}
    if counter is not None:
        counter.add(len(out))
    return out


@dataclass(frozen=True)
class OracleState:
    """Snapshot of an oracle after committing ``leaders``.

    ``grounded_inverse`` is indexed by follower position; ``index_map[r]`` is
    the graph node behind row ``r``. ``counter`` is shared between snapshots
    of one run and is the only part that changes after construction.
    """

    graph: Graph
    lap: np.ndarray = field(repr=False)
    kind: str
    leaders: tuple[int, ...]
    grounded_inverse: np.ndarray = field(repr=False)
    index_map: tuple[int, ...]
    value: float
    counter: CallCounter = field(default_factory=CallCounter, compare=False)
    refresh_counter: int = 0

    @property
    def call_count(self) -> int:
        return self.counter.calls

    def row_of(self, v: int) -> int:
        try:
            return self._rows[v]
        except KeyError:
            raise OracleError(f"node {v} is not a follower") from None

    @property
    def _rows(self) -> dict[int, int]:
        rows = self.__dict__.get("_rows_cache")
        if rows is None:
            rows = {v: r for r, v in enumerate(self.index_map)}
            object.__setattr__(self, "_rows_cache", rows)
        return rows

    def followers_laplacian(self) -> np.ndarray:
        lap_ff = self.__dict__.get("_lap_ff")
        if lap_ff is None:
            idx = np.asarray(self.index_map)
            lap_ff = self.lap[np.ix_(idx, idx)]
            object.__setattr__(self, "_lap_ff", lap_ff)
        return lap_ff

    def check(self, tol: float = 1e-6) -> bool:
        """Verify ``grounded_inverse @ L_ff == I`` within ``tol``."""
        prod = self.grounded_inverse @ self.followers_laplacian()
        return bool(np.max(np.abs(prod - np.eye(len(self.index_map)))) <= tol)


def initial_state(
    g: Graph,
    leaders,
    kind: str = "accelerated",
    counter: CallCounter | None = None,
    lap: np.ndarray | None = None,
    l_pinv: np.ndarray | None = None,
) -> OracleState:
    """Build a state for ``leaders`` from scratch (not counted as a call).

    With a single leader and ``l_pinv`` given, the grounded inverse comes from
    the pseudo-inverse in O(n^2); otherwise it is inverted directly.
    """
    _check_kind(kind)
    leaders = _check_leaders(g.n, leaders)
    if lap is None:
        lap = laplacian(g)
    f = _followers(g.n, leaders)
    if l_pinv is not None and len(leaders) == 1:
        inv = linalg.ground_from_pinv(l_pinv, leaders[0])
    else:
        inv = linalg.invert(lap[np.ix_(f, f)])
    return OracleState(
        graph=g,
        lap=lap,
        kind=kind,
        leaders=leaders,
        grounded_inverse=inv,
        index_map=tuple(f.tolist()),
        value=0.5 * float(np.trace(inv)),
        counter=counter if counter is not None else CallCounter(),
    )


def _check_candidate(state: OracleState, v: int) -> int:
    v = int(v)
    if v in state.leaders:
        raise OracleError(f"node {v} is already a leader")
    if not 0 <= v < state.graph.n:
        raise OracleError(f"node {v} out of range")
    if len(state.index_map) <= 1:
        raise OracleError(f"adding node {v} leaves no followers")
    return v


def value_with(state: OracleState, v: int) -> float:
    """Objective of ``leaders + {v}``; counts one oracle call."""
    v = _check_candidate(state, v)
    if state.kind == "naive":
        val = objective(state.graph, state.leaders + (v,), lap=state.lap)
    else:
        lap_ff = state.followers_laplacian()
        val = 0.5 * linalg.woodbury_remove_trace(
            state.grounded_inverse, lap_ff, state.row_of(v)
        )
    state.counter.add()
    return val


def marginal_gain(state: OracleState, v: int) -> float:
    """Decrease ``f(S) - f(S + v)`` of the objective; counts one call."""
    return state.value - value_with(state, v)


def commit(state: OracleState, v: int) -> OracleState:
    """New snapshot with ``v`` appended to the leaders.

    The accelerated kind shrinks the grounded inverse with one Woodbury
    removal and falls back to a direct inverse every ``REFRESH_EVERY``
    chained updates to bound drift.
    """
    v = _check_candidate(state, v)
    leaders = state.leaders + (v,)
    refresh = state.refresh_counter + 1
    row = state.row_of(v)
    index_map = state.index_map[:row] + state.index_map[row + 1 :]
    idx = np.asarray(index_map)
    if state.kind == "naive" or refresh >= REFRESH_EVERY:
        inv = linalg.invert(state.lap[np.ix_(idx, idx)])
        refresh = 0 if state.kind == "accelerated" else refresh
    else:
        inv = linalg.woodbury_remove(
            state.grounded_inverse, state.followers_laplacian(), row
        )
    return replace(
        state,
        leaders=leaders,
        grounded_inverse=inv,
        index_map=index_map,
        value=0.5 * float(np.trace(inv)),
        refresh_counter=refresh,
    )


def brute_force_optimum(g: Graph, k: int, max_subsets: int = 200_000):
    """Exhaustive minimizer over all ``k``-subsets (naive objective).

    Ties go to the lexicographically smallest subset, which is the first one
    met in ``itertools.combinations`` order.
    """
    if g.n > 20:
        raise OracleError(f"instance too large for brute force: n={g.n} > 20")
    if not 1 <= k <= g.n - 1:
        raise OracleError(f"k={k} out of range [1, {g.n - 1}]")
    if math.comb(g.n, k) > max_subsets:
        raise OracleError(f"instance too large for brute force: C({g.n},{k}) subsets")
    lap = laplacian(g)
    best, best_val = None, math.inf
    for s in itertools.combinations(range(g.n), k):
        val = objective(g, s, lap=lap)
        if val < best_val - TIE_TOL:
            best, best_val = s, val
    return best, best_val
