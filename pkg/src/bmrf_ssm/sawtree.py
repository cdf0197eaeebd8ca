"""Self-avoiding walk trees.

The tree rooted at ``v`` holds one node per self-avoiding walk from ``v``. A
child that would revisit a vertex ``w`` already on the walk becomes a leaf with
a fixed spin: ``+`` when the edge closing the cycle is larger than the edge by
which the walk first left ``w``, ``-`` otherwise. Children copying a conditioned
vertex become leaves fixed to the conditioned spin, with nothing built below.

Trees are stored flat in breadth-first order (children after their parent,
siblings in ascending vertex order), which is what the recursion kernels walk.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from bmrf_ssm import _accel
from bmrf_ssm.errors import InputError, ResourceError
from bmrf_ssm.graph import Graph

FREE, FIXED_PLUS, FIXED_MINUS, FRONTIER = 0, 1, -1, 2
DEFAULT_MAX_NODES = 10**7


@dataclass(frozen=True)
class BuildLimits:
    max_depth: int | None = None
    max_nodes: int = DEFAULT_MAX_NODES

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise InputError("max_depth must be positive")
        if self.max_nodes < 1:
            raise InputError("max_nodes must be positive")


def condition_array(g: Graph, condition: Mapping[int, int] | None) -> np.ndarray:
    """Dense int8 spin vector (0 = free) from a ``{vertex: +1/-1}`` mapping."""
    cond = np.zeros(g.n, dtype=np.int8)
    for v, s in (condition or {}).items():
        v = g.check_vertex(v)
        if s not in (1, -1):
            raise InputError(f"spin for vertex {v} must be +1 or -1, got {s!r}")
        cond[v] = s
    return cond


@dataclass(frozen=True, eq=False)
class SawTree:
    graph: Graph
    root: int
    vertex: np.ndarray
    parent: np.ndarray
    depth: np.ndarray
    state: np.ndarray
    edge: np.ndarray
    truncated_at: int | None

    @property
    def size(self) -> int:
        return int(self.vertex.shape[0])

    @property
    def truncated(self) -> bool:
        return self.truncated_at is not None

    def level_counts(self) -> list[int]:
        return np.bincount(self.depth).tolist()

    def children(self, node: int) -> np.ndarray:
        return np.flatnonzero(self.parent == node)

    def walk(self, node: int) -> list[int]:
        """Graph vertices on the root-to-node path."""
        out = []
        while node >= 0:
            out.append(int(self.vertex[node]))
            node = int(self.parent[node])
        return out[::-1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SawTree):
            return NotImplemented
        return (
            self.root == other.root
            and self.truncated_at == other.truncated_at
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("vertex", "parent", "depth", "state", "edge")
            )
        )

    __hash__ = None


def build(
    g: Graph,
    root: int,
    condition: Mapping[int, int] | None = None,
    limits: BuildLimits | None = None,
) -> SawTree:
    """Build the self-avoiding walk tree of ``g`` rooted at ``root``.

    With ``limits.max_depth = t`` every node at depth ``t`` that still has
    unexplored neighbours is left as a spinless frontier leaf.
    """
    limits = limits or BuildLimits()
    root = g.check_vertex(root)
    cond = condition_array(g, condition)
    max_depth = -1 if limits.max_depth is None else int(limits.max_depth)
    status, vertex, parent, depth, state, edge, reached = _accel.kernels.saw_build(
        g.indptr, g.indices, g.adj_edge, g.rank, cond, root, max_depth, int(limits.max_nodes)
    )
    if status != 0:
        raise ResourceError(
            f"self-avoiding tree exceeded {limits.max_nodes} nodes at depth {reached}",
            partial={"depth_reached": int(reached), "nodes": int(limits.max_nodes)},
        )
    truncated = limits.max_depth if bool(np.any(state == FRONTIER)) else None
    return SawTree(
        graph=g,
        root=root,
        vertex=np.asarray(vertex, dtype=np.int64),
        parent=np.asarray(parent, dtype=np.int64),
        depth=np.asarray(depth, dtype=np.int64),
        state=np.asarray(state, dtype=np.int8),
        edge=np.asarray(edge, dtype=np.int64),
        truncated_at=truncated,
    )


def stats(t: SawTree) -> list[int]:
    """Node count per depth, fixed leaves included."""
    return t.level_counts()


_MARK = {FIXED_PLUS: " +", FIXED_MINUS: " -", FRONTIER: " ?", FREE: ""}


def export_dot(t: SawTree, name: str = "saw") -> str:
    labels = t.graph.labels
    lines = [f"digraph {name} {{"]
    for k in range(t.size):
        text = f"{labels[t.vertex[k]]}{_MARK[int(t.state[k])]}"
        lines.append(f'  n{k} [label="{text}"];')
    for k in range(1, t.size):
        lines.append(f"  n{t.parent[k]} -> n{k};")
    lines.append("}")
    return "\n".join(lines) + "\n"
