"""Undirected weighted graphs, seeded generators and partitions.

Nodes are ``0 .. n-1``. Generators emit unit weights and always return a
connected graph: a draw that comes out disconnected is discarded and redrawn
with seed ``seed + attempt`` until ``max_attempts`` is exhausted.

Barabasi-Albert graphs grow from a clique on the first ``m_attach`` nodes, so
they have ``m(m-1)/2 + (n-m)m`` edges.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_ATTEMPTS = 1000


class GraphGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected graph with positive edge weights.

    ``edges`` holds pairs ``(i, j)`` with ``i < j``, sorted; ``weights`` is
    aligned with it.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        weights = self.weights or (1.0,) * len(self.edges)
        if len(weights) != len(self.edges):
            raise ValueError("weights and edges differ in length")
        canon = {}
        for (i, j), w in zip(self.edges, weights):
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
            key = (min(i, j), max(i, j))
            if key in canon:
                raise ValueError(f"duplicate edge {key}")
            canon[key] = float(w)
        keys = sorted(canon)
        object.__setattr__(self, "edges", tuple(keys))
        object.__setattr__(self, "weights", tuple(canon[e] for e in keys))

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n)
        for (i, j), w in zip(self.edges, self.weights):
            deg[i] += w
            deg[j] += w
        return deg


@dataclass(frozen=True)
class NodePartition:
    """Assignment of every node to one of ``c`` non-empty clusters."""

    assignment: tuple[int, ...]
    c: int

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))
        if self.c < 1:
            raise ValueError("partition needs at least one cluster")
        seen = set(self.assignment)
        if not seen <= set(range(self.c)):
            raise ValueError("cluster id out of range")
        if len(seen) != self.c:
            raise ValueError("every cluster must be non-empty")

    @property
    def n(self) -> int:
        return len(self.assignment)

    def clusters(self) -> list[list[int]]:
        out = [[] for _ in range(self.c)]
        for node, cl in enumerate(self.assignment):
            out[cl].append(node)
        return out


@dataclass(frozen=True)
class SbmParams:
    c: int
    n_c: int
    p_in: float
    p_out: float

    def __post_init__(self):
        if self.c < 1 or self.n_c < 1:
            raise ValueError("c and n_c must be positive")
        if not 0 < self.p_in <= 1:
            raise ValueError("p_in must lie in (0, 1]")
        if not 0 <= self.p_out <= 1:
            raise ValueError("p_out must lie in [0, 1]")


def from_adjacency(adj: np.ndarray) -> Graph:
    i, j = np.nonzero(np.triu(adj, k=1))
    return Graph(adj.shape[0], tuple(zip(i.tolist(), j.tolist())))


def is_connected(g: Graph) -> bool:
    adj = g.adjacency()
    seen = [False] * g.n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                queue.append(v)
    return count == g.n


def laplacian(g: Graph) -> np.ndarray:
    """Weighted Laplacian ``D - A`` as a dense matrix."""
    lap = np.zeros((g.n, g.n))
    if g.edges:
        e = np.asarray(g.edges)
        w = np.asarray(g.weights)
        lap[e[:, 0], e[:, 1]] = -w
        lap[e[:, 1], e[:, 0]] = -w
    lap[np.diag_indices(g.n)] = -lap.sum(axis=1)
    return lap


def _retry_connected(draw, seed: int, max_attempts: int, what: str) -> Graph:
    for attempt in range(max_attempts):
        g = draw(np.random.default_rng(seed + attempt))
        if is_connected(g):
            return g
    raise GraphGenerationError(
        f"could not generate connected graph ({what}) after {max_attempts} attempts"
    )


def gen_er(n: int, p: float, seed: int, max_attempts: int = MAX_ATTEMPTS) -> Graph:
    """Connected Erdos-Renyi G(n, p) graph."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    iu = np.triu_indices(n, k=1)

    def draw(rng):
        mask = rng.random(iu[0].size) < p
        return Graph(n, tuple(zip(iu[0][mask].tolist(), iu[1][mask].tolist())))

    return _retry_connected(draw, seed, max_attempts, f"ER n={n} p={p}")


def gen_ba(n: int, m_attach: int, seed: int) -> Graph:
    """Preferential-attachment graph grown from a clique of ``m_attach`` nodes.

    Each new node links to ``m_attach`` distinct existing nodes chosen with
    probability proportional to degree (uniformly while all degrees are 0).
    Always connected, so no retry is needed.
    """
    if not 1 <= m_attach < n:
        raise ValueError(f"need 1 <= m_attach < n, got m_attach={m_attach}, n={n}")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(m_attach) for j in range(i + 1, m_attach)]
    deg = np.zeros(n)
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    for new in range(m_attach, n):
        w = deg[:new]
        prob = w / w.sum() if w.sum() > 0 else None
        targets = rng.choice(new, size=m_attach, replace=False, p=prob)
        for t in targets:
            edges.append((int(t), new))
            deg[t] += 1
        deg[new] = m_attach
    return Graph(n, tuple(edges))


def gen_rg(n: int, radius: float, seed: int, max_attempts: int = MAX_ATTEMPTS) -> Graph:
    """Connected random geometric graph on the unit square."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < radius <= math.sqrt(2):
        raise ValueError("radius must lie in (0, sqrt(2)]")
    iu = np.triu_indices(n, k=1)

    def draw(rng):
        pts = rng.random((n, 2))
        d = np.linalg.norm(pts[iu[0]] - pts[iu[1]], axis=1)
        # tolerance keeps the corner-to-corner pair inside at radius sqrt(2)
        mask = d <= radius * (1 + 1e-12)
        return Graph(n, tuple(zip(iu[0][mask].tolist(), iu[1][mask].tolist())))

    return _retry_connected(draw, seed, max_attempts, f"RG n={n} r={radius}")


def gen_sbm(
    params: SbmParams, seed: int, max_attempts: int = MAX_ATTEMPTS
) -> tuple[Graph, NodePartition]:
    """Connected stochastic block model graph with its ground-truth clusters.

    Node ``v`` belongs to cluster ``v // n_c``.
    """
    n = params.c * params.n_c
    if n < 2:
        raise ValueError("SBM needs at least 2 nodes")
    block = np.arange(n) // params.n_c
    iu = np.triu_indices(n, k=1)
    same = block[iu[0]] == block[iu[1]]
    prob = np.where(same, params.p_in, params.p_out)

    def draw(rng):
        mask = rng.random(iu[0].size) < prob
        return Graph(n, tuple(zip(iu[0][mask].tolist(), iu[1][mask].tolist())))

    g = _retry_connected(draw, seed, max_attempts, f"SBM {params}")
    return g, NodePartition(tuple(block.tolist()), params.c)


def partition_equal(g: Graph, c: int, seed: int) -> NodePartition:
    """Shuffle nodes and cut them into ``c`` chunks of near-equal size."""
    if not 1 <= c <= g.n:
        raise ValueError(f"cluster count {c} out of range [1, {g.n}]")
    order = np.random.default_rng(seed).permutation(g.n)
    assignment = [0] * g.n
    for cl, chunk in enumerate(np.array_split(order, c)):
        for v in chunk:
            assignment[int(v)] = cl
    return NodePartition(tuple(assignment), c)


# -- edge-list text format ---------------------------------------------------
#
#   n m
#   i j w      (one line per edge)
#
# partitions are written as "node cluster" lines.


def write_edgelist(g: Graph, path) -> None:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{i} {j} {w!r}" for (i, j), w in zip(g.edges, g.weights)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edgelist(path) -> Graph:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows:
        raise ValueError(f"{path}: empty edge list")
    n, m = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != m:
        raise ValueError(f"{path}: header says {m} edges, found {len(body)}")
    edges = tuple((int(r[0]), int(r[1])) for r in body)
    weights = tuple(float(r[2]) if len(r) > 2 else 1.0 for r in body)
    return Graph(n, edges, weights)


def write_partition(p: NodePartition, path) -> None:
    Path(path).write_text("".join(f"{v} {c}\n" for v, c in enumerate(p.assignment)))


def read_partition(path) -> NodePartition:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    pairs = sorted((int(a), int(b)) for a, b in rows)
    if [v for v, _ in pairs] != list(range(len(pairs))):
        raise ValueError(f"{path}: partition must list every node exactly once")
    assignment = tuple(c for _, c in pairs)
    return NodePartition(assignment, max(assignment) + 1)
