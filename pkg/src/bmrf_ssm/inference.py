"""Conditional marginals: brute force, tree recursion, and truncated recursion.

The tree recursion works on log-odds. For a node copying vertex ``i`` with
children ``j`` (odds ``R_j``),

    log R_i = 2 B_i + sum_j log((a_ij R_j + b_ij) / (c_ij R_j + d_ij)),

which is the same map as ``p_i = 1 / (1 + lambda_i prod_j f_ij(p_j))`` but stays
finite for fixed leaves (``R = 0`` or ``inf``) and for very large potentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from bmrf_ssm import _accel
from bmrf_ssm.errors import DomainError, InputError, PreconditionError, ResourceError
from bmrf_ssm.model import Bmrf, check_conditions, decay_bound, summarize
from bmrf_ssm.sawtree import BuildLimits, SawTree, build, condition_array

DEFAULT_MAX_FREE = 24


def expit(ell: float) -> float:
    if ell >= 0:
        return 1.0 / (1.0 + math.exp(-ell))
    z = math.exp(ell)
    return z / (1.0 + z)


@dataclass(frozen=True)
class LogPartition:
    log_z: float


@dataclass(frozen=True)
class MarginalResult:
    """Probability of ``+`` at the query vertex.

    ``log_odds`` is ``log(p / (1 - p))`` (infinite for forced spins). Truncated
    results carry the certified ``interval`` and, when the field condition holds,
    the decay bound ``bound`` on how far either end can be from the true value.
    """

    p: float
    log_odds: float
    method: str
    bound: float | None = None
    interval: tuple[float, float] | None = None
    boundary_plus: float | None = None
    boundary_minus: float | None = None

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def odds(self) -> float:
        return math.inf if self.log_odds == math.inf else math.exp(self.log_odds)

    @property
    def width(self) -> float:
        return 0.0 if self.interval is None else self.interval[1] - self.interval[0]

    def as_dict(self) -> dict:
        out = {"p": self.p, "q": self.q, "odds": self.odds, "log_odds": self.log_odds, "method": self.method}
        if self.interval is not None:
            out.update(
                interval=list(self.interval),
                width=self.width,
                boundary_plus=self.boundary_plus,
                boundary_minus=self.boundary_minus,
            )
        if self.method == "truncated":
            out["bound"] = self.bound
        return out


def _forced(spin: int, method: str) -> MarginalResult:
    return MarginalResult(
        p=1.0 if spin > 0 else 0.0, log_odds=math.inf if spin > 0 else -math.inf, method=method
    )


def _reduced_problem(m: Bmrf, cond: np.ndarray):
    """Fold fixed spins into fields/constants; returns kernel inputs over free vertices."""
    g = m.graph
    free = np.flatnonzero(cond == 0)
    idx = np.full(g.n, -1, dtype=np.int64)
    idx[free] = np.arange(free.shape[0])
    bit = (cond == 1).astype(np.int64)

    h = m.field[free][:, [1, 0]].copy()
    fixed = np.flatnonzero(cond != 0)
    const = float(m.field[fixed, 1 - bit[fixed]].sum())

    u, v = g.edges[:, 0], g.edges[:, 1]
    tab = m.oriented_tables(np.arange(g.m), np.zeros(g.m, dtype=bool))
    fu, fv = cond[u] == 0, cond[v] == 0
    both = fu & fv
    rows = np.flatnonzero(~fu & fv)
    for s in (0, 1):
        np.add.at(h[:, s], idx[v[rows]], tab[rows, 2 * bit[u[rows]] + s])
    rows = np.flatnonzero(fu & ~fv)
    for s in (0, 1):
        np.add.at(h[:, s], idx[u[rows]], tab[rows, 2 * s + bit[v[rows]]])
    rows = np.flatnonzero(~fu & ~fv)
    const += float(tab[rows, 2 * bit[u[rows]] + bit[v[rows]]].sum())
    return (
        np.ascontiguousarray(h),
        np.ascontiguousarray(idx[u[both]]),
        np.ascontiguousarray(idx[v[both]]),
        np.ascontiguousarray(tab[both]),
        const,
        free.shape[0],
    )


def exact_partition(
    m: Bmrf, condition: Mapping[int, int] | None = None, max_free: int = DEFAULT_MAX_FREE
) -> LogPartition:
    """``log Z`` restricted to configurations agreeing with ``condition``, by enumeration."""
    cond = condition_array(m.graph, condition)
    h, eu, ev, tab, const, k = _reduced_problem(m, cond)
    if k > max_free:
        raise ResourceError(
            f"{k} free vertices exceed the enumeration cap of {max_free}",
            partial={"free_vertices": k},
        )
    return LogPartition(float(_accel.kernels.log_partition(h, eu, ev, tab, const)))


def exact_marginal(
    m: Bmrf, v: int, condition: Mapping[int, int] | None = None, max_free: int = DEFAULT_MAX_FREE
) -> MarginalResult:
    v = m.graph.check_vertex(v)
    cond = dict(condition or {})
    condition_array(m.graph, cond)
    if v in cond:
        return _forced(cond[v], "exact")
    plus = exact_partition(m, {**cond, v: 1}, max_free).log_z
    minus = exact_partition(m, {**cond, v: -1}, max_free).log_z
    ell = plus - minus
    return MarginalResult(p=expit(ell), log_odds=ell, method="exact")


def _tree_inputs(t: SawTree, m: Bmrf):
    if t.graph is not m.graph and t.graph != m.graph:
        raise InputError("tree and model are built on different graphs")
    two_b = 2.0 * m.B[t.vertex]
    tab = np.zeros((t.size, 4))
    if t.size > 1:
        child = t.vertex[1:]
        par = t.vertex[t.parent[1:]]
        tab[1:] = m.oriented_tables(t.edge[1:], par > child)
    return two_b, tab


def _tree_logodds(t: SawTree, m: Bmrf, lo: float, hi: float) -> tuple[float, float]:
    two_b, tab = _tree_inputs(t, m)
    a, b = _accel.kernels.tree_logodds(t.parent, t.depth, t.state, two_b, tab, lo, hi)
    return float(a), float(b)


def tree_marginal(t: SawTree, m: Bmrf) -> MarginalResult:
    """Root marginal of a complete self-avoiding tree by the bottom-up recursion."""
    if t.truncated:
        raise PreconditionError("tree is truncated; use truncated_marginal")
    ell, _ = _tree_logodds(t, m, 0.0, 0.0)
    return MarginalResult(p=expit(ell), log_odds=ell, method="saw")


def saw_marginal(
    m: Bmrf, v: int, condition: Mapping[int, int] | None = None, limits: BuildLimits | None = None
) -> MarginalResult:
    limits = limits or BuildLimits()
    if limits.max_depth is not None:
        limits = BuildLimits(None, limits.max_nodes)
    return tree_marginal(build(m.graph, v, condition, limits), m)


def truncated_marginal(
    m: Bmrf,
    v: int,
    condition: Mapping[int, int] | None = None,
    t: int = 1,
    d: float | None = None,
    max_nodes: int | None = None,
) -> MarginalResult:
    """Depth-``t`` estimate with a guaranteed enclosure of the true marginal.

    The interval is the exact range of the root value over all spin assignments
    to the frontier leaves, obtained by propagating lower/upper log-odds through
    the recursion (each edge term is monotone in its child's odds). The true
    marginal is a mixture of such assignments, so it lies inside. The values with
    every frontier leaf ``+`` and every leaf ``-`` are reported alongside.

    When ``d`` is given and the field condition holds at ``d``, ``bound`` is the
    decay function at ``t`` with the root degree as prefactor degree.
    """
    if t < 1:
        raise InputError("truncation depth must be positive")
    limits = BuildLimits(t, max_nodes or BuildLimits().max_nodes)
    tree = build(m.graph, v, condition, limits)
    lo, hi = _tree_logodds(tree, m, -math.inf, math.inf)
    plus, _ = _tree_logodds(tree, m, math.inf, math.inf)
    minus, _ = _tree_logodds(tree, m, -math.inf, -math.inf)
    p_lo, p_hi = expit(lo), expit(hi)
    p = 0.5 * (p_lo + p_hi)
    ell = math.log(p) - math.log1p(-p) if 0.0 < p < 1.0 else (math.inf if p >= 1.0 else -math.inf)
    return MarginalResult(
        p=p,
        log_odds=ell,
        method="truncated",
        bound=certificate(m, tree.root, t, d),
        interval=(p_lo, p_hi),
        boundary_plus=expit(plus),
        boundary_minus=expit(minus),
    )


def certificate(m: Bmrf, v: int, t: float, d: float | None) -> float | None:
    """Decay bound ``f(t)`` for vertex ``v``, or ``None`` if the condition is not met."""
    if d is None:
        return None
    deg = int(m.graph.degree[v])
    if deg == 0:
        return 0.0
    try:
        verdict = check_conditions(m, d, "theorem1")
    except DomainError:
        return None
    if not verdict.satisfied:
        return None
    return decay_bound(summarize(m), d, deg, verdict.branch)(t)
