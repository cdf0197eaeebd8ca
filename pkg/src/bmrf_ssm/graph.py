"""Undirected simple graphs, BFS distances and the sparse-on-average metrics.

Vertices are dense indices ``0..n-1``. ``labels`` keeps the ids a graph was
read with (indices follow the numeric order of those ids) and ``rank`` is the
vertex order used by the edge partial order; it defaults to the index order
and can be overridden with an explicit permutation.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from bmrf_ssm import _accel
from bmrf_ssm.errors import InputError, ResourceError

DEFAULT_PATH_BUDGET = 10**8


class Graph:
    """Immutable simple undirected graph in CSR form."""

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int]] = (),
        labels: Sequence[int] | None = None,
        order: Sequence[int] | None = None,
    ):
        if n < 0:
            raise InputError("vertex count must be non-negative")
        pairs = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            e = (min(u, v), max(u, v))
            if e in pairs:
                raise InputError(f"duplicate edge {e}")
            pairs.add(e)
        self.n = n
        self.edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
        self.labels = tuple(range(n)) if labels is None else tuple(int(x) for x in labels)
        if len(self.labels) != n or len(set(self.labels)) != n:
            raise InputError("labels must be n distinct integers")
        if order is None:
            self.rank = np.arange(n, dtype=np.int64)
        else:
            rank = np.asarray(order, dtype=np.int64)
            if rank.shape != (n,) or sorted(rank.tolist()) != list(range(n)):
                raise InputError("order must be a permutation of 0..n-1")
            self.rank = rank

        m = self.edges.shape[0]
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        perm = np.lexsort((dst, src))
        self.indices = dst[perm]
        self.adj_edge = eid[perm]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self.indptr[1:])
        self.degree = np.diff(self.indptr)
        self._edge_index = {tuple(e): k for k, e in enumerate(self.edges.tolist())}
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        for arr in (self.edges, self.rank, self.indices, self.adj_edge, self.indptr, self.degree):
            arr.flags.writeable = False

    @classmethod
    def from_labeled_edges(
        cls, vertex_ids: Iterable[int], edges: Iterable[tuple[int, int]]
    ) -> Graph:
        """Build from arbitrary integer ids; indices follow the numeric id order."""
        ids = sorted(set(int(v) for v in vertex_ids))
        index = {lab: i for i, lab in enumerate(ids)}
        try:
            mapped = [(index[int(u)], index[int(v)]) for u, v in edges]
        except KeyError as exc:
            raise InputError(f"edge endpoint {exc.args[0]} is not a declared vertex") from None
        return cls(len(ids), mapped, labels=ids)

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def neighbors(self, v: int) -> np.ndarray:
        self.check_vertex(v)
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def check_vertex(self, v: int) -> int:
        if not (isinstance(v, (int, np.integer)) and 0 <= v < self.n):
            raise InputError(f"unknown vertex {v!r}")
        return int(v)

    def index_of(self, label: int) -> int:
        try:
            return self._label_index[int(label)]
        except KeyError:
            raise InputError(f"unknown vertex id {label}") from None

    def edge_id(self, u: int, v: int) -> int:
        try:
            return self._edge_index[(min(u, v), max(u, v))]
        except KeyError:
            raise InputError(f"({u}, {v}) is not an edge") from None

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._edge_index

    def max_degree(self) -> int:
        return int(self.degree.max()) if self.n else 0

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.labels == other.labels
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.rank, other.rank)
        )

    __hash__ = None


@dataclass(frozen=True)
class GraphMetrics:
    """Maximal path density ``m`` of a vertex at radius ``l`` and its derived averages."""

    vertex: int
    radius: int
    m: int
    witness: tuple[int, ...] = field(default=())

    degree: int = 0

    @property
    def delta(self) -> Fraction | None:
        if self.radius < 1:
            return None
        return Fraction(self.m - self.degree, self.radius)


def distances(g: Graph, v: int) -> np.ndarray:
    """BFS hop distances from ``v``; -1 marks unreachable vertices."""
    g.check_vertex(v)
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[v] = 0
    queue = deque([v])
    while queue:
        u = queue.popleft()
        for w in g.indices[g.indptr[u] : g.indptr[u + 1]]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(int(w))
    return dist


def distance_to_set(g: Graph, v: int, targets: Iterable[int]) -> float:
    """``min d(v, u)`` over ``targets``; ``inf`` if none is reachable or the set is empty."""
    dist = distances(g, v)
    reach = [int(dist[g.check_vertex(u)]) for u in targets]
    reach = [d for d in reach if d >= 0]
    return float(min(reach)) if reach else math.inf


def sphere(g: Graph, v: int, l: int) -> frozenset[int]:
    if l < 0:
        raise InputError("radius must be non-negative")
    dist = distances(g, v)
    return frozenset(int(u) for u in np.flatnonzero(dist == l))


def max_path_density(
    g: Graph, v: int, l: int, budget: int = DEFAULT_PATH_BUDGET
) -> GraphMetrics:
    """Maximum of ``sum(deg(u) for u in path)`` over self-avoiding paths from ``v``
    with at most ``l`` edges.

    Depth-first branch and bound; a path is cut as soon as even an all-max-degree
    continuation could not beat the incumbent. Raises ``ResourceError`` (with the
    best density found so far) once more than ``budget`` paths have been expanded.
    """
    v = g.check_vertex(v)
    if l < 0:
        raise InputError("radius must be non-negative")
    status, best, witness, expansions = _accel.kernels.path_density(
        g.indptr, g.indices, g.degree, v, int(l), int(budget)
    )
    if status != 0:
        raise ResourceError(
            f"path enumeration from vertex {v} exceeded {budget} expansions",
            partial={"lower_bound": int(best), "witness": [int(x) for x in witness]},
        )
    return GraphMetrics(
        vertex=v,
        radius=int(l),
        m=int(best),
        witness=tuple(int(x) for x in witness),
        degree=int(g.degree[v]),
    )


def max_avg_path_degree(g: Graph, v: int, l: int, budget: int = DEFAULT_PATH_BUDGET) -> Fraction:
    if l < 1:
        raise InputError("radius must be at least 1")
    return max_path_density(g, v, l, budget).delta


def max_avg_degree(g: Graph, l: int, budget: int = DEFAULT_PATH_BUDGET) -> Fraction:
    """``max_v (m(G, v, l) - deg v) / l`` as an exact fraction (0 for an empty graph)."""
    if l < 1:
        raise InputError("radius must be at least 1")
    return max((max_avg_path_degree(g, v, l, budget) for v in range(g.n)), default=Fraction(0))


def sparsity_radius(n: int, a: float) -> int:
    """Integer radius ``ceil(a log n)`` at which the average-degree condition is evaluated."""
    if n < 1 or a <= 0:
        raise InputError("need n >= 1 and a > 0")
    return max(1, math.ceil(a * math.log(n)))


def edge_compare(e: tuple[int, int], f: tuple[int, int], rank: Sequence[int] | None = None) -> str:
    """Compare two edges under the order induced by a vertex order.

    Returns 'greater', 'less' or 'incomparable'. Edges sharing a vertex always have
    different endpoint sums, so comparable edges never tie.
    """
    (i, j), (k, l) = e, f
    if {i, j} == {k, l}:
        raise InputError("edge_compare needs two distinct edges")
    if not {i, j} & {k, l}:
        return "incomparable"
    if rank is not None:
        i, j, k, l = (int(rank[x]) for x in (i, j, k, l))
    return "greater" if i + j > k + l else "less"


# -- generators -----------------------------------------------------------------

GENERATOR_KINDS = ("gnp", "cycle", "grid", "path", "complete", "regular_tree")


def gnp(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p). One uniform draw per pair, pairs in lexicographic order."""
    if n < 1 or not 0.0 <= p <= 1.0:
        raise InputError("gnp needs n >= 1 and 0 <= p <= 1")
    rng = np.random.default_rng(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    iu, ju = np.triu_indices(n, k=1)
    draws = rng.random(iu.shape[0])
    keep = draws < p
    return Graph(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def path_graph(n: int) -> Graph:
    if n < 1:
        raise InputError("path needs n >= 1")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InputError("cycle needs n >= 3")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> Graph:
    if n < 1:
        raise InputError("complete needs n >= 1")
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def grid_graph(rows: int, cols: int) -> Graph:
    if rows < 1 or cols < 1:
        raise InputError("grid needs rows, cols >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, edges)


def regular_tree(branching: int, height: int) -> Graph:
    """Complete ``branching``-ary tree of the given height, root 0, BFS numbering."""
    if branching < 1 or height < 0:
        raise InputError("regular_tree needs branching >= 1 and height >= 0")
    edges = []
    level = [0]
    n = 1
    for _ in range(height):
        nxt = []
        for u in level:
            for _ in range(branching):
                edges.append((u, n))
                nxt.append(n)
                n += 1
        level = nxt
    return Graph(n, edges)


def generate(kind: str, seed: int = 0, **params) -> Graph:
    """Dispatch to a named generator; ``seed`` is only consumed by ``gnp``."""
    try:
        if kind == "gnp":
            return gnp(int(params["n"]), float(params["p"]), seed)
        if kind == "cycle":
            return cycle_graph(int(params["n"]))
        if kind == "path":
            return path_graph(int(params["n"]))
        if kind == "complete":
            return complete_graph(int(params["n"]))
        if kind == "grid":
            return grid_graph(int(params["rows"]), int(params["cols"]))
        if kind == "regular_tree":
            return regular_tree(int(params["branching"]), int(params["height"]))
    except KeyError as exc:
        raise InputError(f"{kind} needs parameter {exc.args[0]!r}") from None
    raise InputError(f"unknown graph kind {kind!r}; expected one of {', '.join(GENERATOR_KINDS)}")
