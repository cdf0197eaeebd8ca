"""Strong-spatial-mixing experiments and numeric checks of the supporting inequalities.

Every check reports ``lhs <= rhs`` with ``margin = rhs - lhs`` and passes when
``lhs <= rhs + TOL``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath
import numpy as np

from bmrf_ssm.errors import InputError, ResourceError
from bmrf_ssm.graph import Graph, distance_to_set, gnp, max_avg_degree, max_path_density
from bmrf_ssm.inference import certificate, exact_marginal, saw_marginal
from bmrf_ssm.model import Bmrf, PairPotential, edge_transfer
from bmrf_ssm.sawtree import BuildLimits, build

TOL = 1e-10
DEFAULT_GRID = 10**4
TARGETS = ("lemma1", "lemma3", "prop2_path", "prop2_sphere", "gamma_tanh", "f_range")


@dataclass(frozen=True)
class SsmExperiment:
    root: int
    sigma: Mapping[int, int]
    eta: Mapping[int, int]

    def __post_init__(self):
        if set(self.sigma) != set(self.eta):
            raise InputError("the two configurations must fix the same vertex set")
        if not self.theta:
            raise InputError("configurations agree everywhere: no perturbation")
        if self.root in self.theta:
            raise InputError("the query vertex lies in the perturbation set")

    @property
    def boundary(self) -> frozenset[int]:
        return frozenset(self.sigma)

    @property
    def theta(self) -> frozenset[int]:
        return frozenset(u for u in self.sigma if self.sigma[u] != self.eta[u])


@dataclass(frozen=True)
class SsmReport:
    t: float
    p_sigma: float
    p_eta: float
    method: str
    bound: float | None
    sparsity_ok: bool | None = None

    @property
    def measured(self) -> float:
        return abs(self.p_sigma - self.p_eta)

    @property
    def passed(self) -> bool | None:
        return None if self.bound is None else self.measured <= self.bound + TOL

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "p_sigma": self.p_sigma,
            "p_eta": self.p_eta,
            "measured": self.measured,
            "bound": self.bound,
            "pass": self.passed,
            "method": self.method,
            "sparsity_ok": self.sparsity_ok,
        }


def run_experiment(m: Bmrf, e: SsmExperiment, d: float | None = None, method: str = "exact") -> SsmReport:
    """Measure how much flipping the boundary on Θ moves the root marginal.

    The bound is attached when the field condition holds at ``d``. ``sparsity_ok``
    records whether the average-degree premise ``Δ(G, t-1) <= d`` also holds; it is
    informational and does not gate the bound.
    """
    g = m.graph
    root = g.check_vertex(e.root)
    if method == "exact":
        p_s = exact_marginal(m, root, e.sigma).p
        p_e = exact_marginal(m, root, e.eta).p
    elif method == "saw":
        p_s = saw_marginal(m, root, e.sigma).p
        p_e = saw_marginal(m, root, e.eta).p
    else:
        raise InputError(f"unknown method {method!r}")
    t = distance_to_set(g, root, e.theta)
    bound = certificate(m, root, t, d)
    sparse = None
    if d is not None and math.isfinite(t) and t >= 2:
        try:
            sparse = float(max_avg_degree(g, int(t) - 1)) <= d
        except ResourceError:
            sparse = None
    return SsmReport(t=t, p_sigma=p_s, p_eta=p_e, method=method, bound=bound, sparsity_ok=sparse)


@dataclass(frozen=True)
class CheckReport:
    target: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
            **({"detail": self.detail} if self.detail else {}),
        }


def _report(target: str, lhs, rhs, **detail) -> CheckReport:
    margin = rhs - lhs
    return CheckReport(target, float(lhs), float(rhs), float(margin), bool(margin >= -TOL), detail)


def _grid(n: int) -> np.ndarray:
    if n < 1:
        raise InputError("grid size must be positive")
    return np.linspace(0.0, 1.0, n + 2)


def check_lemma1(pair: PairPotential, grid: int = DEFAULT_GRID) -> CheckReport:
    """``max |h(x)|`` over the grid against ``gamma`` of the same orientation."""
    x = _grid(grid)
    _, h = edge_transfer(pair, x)
    k = int(np.argmax(np.abs(h)))
    return _report("lemma1", np.abs(h[k]), pair.gamma, argmax=float(x[k]))


def check_f_range(pair: PairPotential, grid: int = DEFAULT_GRID) -> CheckReport:
    """``e^{alpha_min} <= f(x) <= e^{alpha_max}``; the binding side is reported."""
    x = _grid(grid)
    f, _ = edge_transfer(pair, x)
    a_lo, a_hi = min(pair.alphas), max(pair.alphas)
    upper = math.exp(a_hi) - float(f.max())
    lower = float(f.min()) - math.exp(a_lo)
    detail = {"f_min": float(f.min()), "f_max": float(f.max()), "low": math.exp(a_lo), "high": math.exp(a_hi)}
    if upper <= lower:
        return _report("f_range", f.max(), math.exp(a_hi), **detail)
    return _report("f_range", math.exp(a_lo), f.min(), **detail)


def check_gamma_tanh(pair: PairPotential) -> CheckReport:
    return _report("gamma_tanh", 4.0 * math.tanh(abs(pair.J)), pair.gamma)


def check_lemma3(lam: Sequence[float]) -> CheckReport:
    """``(1 + geomean(lam))^n <= prod(1 + lam)``, both sides in 50-digit arithmetic."""
    vals = [float(x) for x in lam]
    if not vals:
        raise InputError("lemma3 needs a non-empty vector")
    if any(not math.isfinite(x) or x < 0 for x in vals):
        raise InputError("lemma3 needs finite non-negative entries")
    with mpmath.workdps(50):
        xs = [mpmath.mpf(x) for x in vals]
        n = len(xs)
        rhs = mpmath.fprod(1 + x for x in xs)
        lhs = (1 + mpmath.root(mpmath.fprod(xs), n)) ** n
        margin = rhs - lhs
        return CheckReport(
            "lemma3", float(lhs), float(rhs), float(margin), bool(margin >= -TOL), {"n": n}
        )


def check_prop2_path(g: Graph, l: int, j: int, v: int | None = None, budget: int = 10**8) -> CheckReport:
    """``m(G, v, jl) <= j max_u (m(G, u, l) - deg u) + deg v``; all vertices when ``v`` is None."""
    if l < 1 or j < 1:
        raise InputError("prop2_path needs positive l and j")
    excess = max(max_path_density(g, u, l, budget).m - int(g.degree[u]) for u in range(g.n))
    worst = None
    for u in range(g.n) if v is None else [g.check_vertex(v)]:
        lhs = max_path_density(g, u, j * l, budget).m
        rhs = j * excess + int(g.degree[u])
        if worst is None or rhs - lhs < worst[2] - worst[1]:
            worst = (u, lhs, rhs)
    u, lhs, rhs = worst
    return _report("prop2_path", lhs, rhs, vertex=u, l=l, j=j)


def check_prop2_sphere(g: Graph, l: int, v: int | None = None, budget: int = 10**8) -> CheckReport:
    """``|S(T_saw(v), v, l+1)| <= deg(v) (delta(G, v, l) - 1)^l`` in exact arithmetic.

    A negative base only arises when no walk of length ``l`` exists, so the level is
    empty; it is clamped to zero.
    """
    if l < 1:
        raise InputError("prop2_sphere needs l >= 1")
    worst = None
    for u in range(g.n) if v is None else [g.check_vertex(v)]:
        tree = build(g, u, None, BuildLimits(max_depth=l + 1))
        counts = tree.level_counts()
        lhs = counts[l + 1] if len(counts) > l + 1 else 0
        delta = max_path_density(g, u, l, budget).delta
        rhs = int(g.degree[u]) * max(delta - 1, Fraction(0)) ** l
        if worst is None or rhs - lhs < worst[2] - worst[1]:
            worst = (u, lhs, rhs, delta)
    u, lhs, rhs, delta = worst
    return _report("prop2_sphere", Fraction(lhs), rhs, vertex=u, l=l, delta=float(delta))


def verify_inequalities(target: str, **payload) -> CheckReport:
    checks = {
        "lemma1": check_lemma1,
        "lemma3": check_lemma3,
        "prop2_path": check_prop2_path,
        "prop2_sphere": check_prop2_sphere,
        "gamma_tanh": check_gamma_tanh,
        "f_range": check_f_range,
    }
    try:
        fn = checks[target]
    except KeyError:
        raise InputError(f"unknown target {target!r}; expected one of {', '.join(TARGETS)}") from None
    try:
        return fn(**payload)
    except TypeError as exc:
        raise InputError(f"bad payload for {target}: {exc}") from None


# -- seeded random suites --------------------------------------------------------


def random_pair(rng: np.random.Generator, scale: float = 2.0) -> PairPotential:
    return PairPotential(*rng.uniform(-scale, scale, 4).tolist())


def random_model(rng: np.random.Generator, g: Graph, beta: float = 2.0, h: float = 3.0) -> Bmrf:
    return Bmrf(g, rng.uniform(-h, h, (g.n, 2)), rng.uniform(-beta, beta, (g.m, 4)))


def random_sparse_graph(rng: np.random.Generator, n_max: int = 60, mean_degree: float = 3.0) -> Graph:
    n = int(rng.integers(5, n_max + 1))
    c = float(rng.uniform(0.5, mean_degree))
    return gnp(n, min(1.0, c / (n - 1)), int(rng.integers(2**63)))


def random_lambda(rng: np.random.Generator, n_max: int = 10) -> np.ndarray:
    n = int(rng.integers(1, n_max + 1))
    lam = np.exp(rng.uniform(-5.0, 5.0, n))
    lam[rng.random(n) < 0.1] = 0.0
    if rng.random() < 0.1:
        lam[:] = lam[0]  # equality case
    return lam


def _random_check(target: str, rng: np.random.Generator, grid: int) -> CheckReport:
    if target == "lemma1":
        return check_lemma1(random_pair(rng), grid)
    if target == "f_range":
        return check_f_range(random_pair(rng), grid)
    if target == "gamma_tanh":
        return check_gamma_tanh(random_pair(rng))
    if target == "lemma3":
        return check_lemma3(random_lambda(rng))
    g = random_sparse_graph(rng)
    if target == "prop2_path":
        l = int(rng.integers(1, 4))
        j = int(rng.integers(1, 6 // l + 1))
        return check_prop2_path(g, l, j)
    return check_prop2_sphere(g, int(rng.integers(1, 7)))


@dataclass
class SuiteReport:
    seed: int
    trials: int
    counts: dict = field(default_factory=dict)
    worst: CheckReport | None = None

    @property
    def failures(self) -> int:
        return sum(c["failed"] for c in self.counts.values())

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "failures": self.failures,
            "pass": self.passed,
            "targets": self.counts,
            "worst": None if self.worst is None else self.worst.as_dict(),
        }


def random_suite(kind: str, trials: int, seed: int, grid: int = DEFAULT_GRID) -> SuiteReport:
    """Run ``trials`` seeded random checks of one target, or of all targets in turn
    (``kind='mix'``). Same seed, same report."""
    if trials < 1:
        raise InputError("trials must be at least 1")
    if kind != "mix" and kind not in TARGETS:
        raise InputError(f"unknown target {kind!r}")
    rng = np.random.default_rng(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    counts: dict = defaultdict(lambda: {"trials": 0, "passed": 0, "failed": 0, "worst_margin": math.inf})
    report = SuiteReport(seed=seed, trials=trials)
    for i in range(trials):
        target = TARGETS[i % len(TARGETS)] if kind == "mix" else kind
        r = _random_check(target, rng, grid)
        c = counts[target]
        c["trials"] += 1
        c["passed" if r.passed else "failed"] += 1
        c["worst_margin"] = min(c["worst_margin"], r.margin)
        if report.worst is None or r.margin < report.worst.margin:
            report.worst = r
    report.counts = dict(counts)
    return report
