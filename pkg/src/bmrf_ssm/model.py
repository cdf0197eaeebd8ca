"""Binary Markov random fields and their derived parameters.

A model assigns each vertex a log-weight pair ``(h(+), h(-))`` and each edge a
2x2 log-weight table ``beta(s_i, s_j)``. Tables are stored oriented from the
smaller to the larger vertex index; looking an edge up the other way returns
the transposed table, so ``beta_ij(x, y) == beta_ji(y, x)`` always holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bmrf_ssm.errors import DomainError, InputError
from bmrf_ssm.graph import Graph

PLUS = 1
MINUS = -1

# above this |beta| the transfer functions are evaluated in log space
LOG_DOMAIN_THRESHOLD = 30.0
# slack for gamma * (d - 1) landing a rounding error below 4
_REGIME_SLACK = 1e-12


def _abs_exp_diff(x: float, y: float) -> float:
    """``|exp(x) - exp(y)|`` without cancellation."""
    hi, lo = max(x, y), min(x, y)
    return -math.exp(hi) * math.expm1(lo - hi)


@dataclass(frozen=True)
class VertexPotential:
    h_plus: float
    h_minus: float

    @property
    def B(self) -> float:
        return (self.h_plus - self.h_minus) / 2.0

    @property
    def lam(self) -> float:
        return math.exp(-2.0 * self.B)


@dataclass(frozen=True)
class PairPotential:
    """Edge table ``beta(+,+), beta(+,-), beta(-,+), beta(-,-)`` for an oriented edge (i, j)."""

    beta_pp: float
    beta_pm: float
    beta_mp: float
    beta_mm: float

    @classmethod
    def ising(cls, J: float) -> PairPotential:
        return cls(J, -J, -J, J)

    def transposed(self) -> PairPotential:
        return PairPotential(self.beta_pp, self.beta_mp, self.beta_pm, self.beta_mm)

    def as_array(self) -> np.ndarray:
        return np.array([self.beta_pp, self.beta_pm, self.beta_mp, self.beta_mm])

    @property
    def a(self) -> float:
        return math.exp(self.beta_pp)

    @property
    def b(self) -> float:
        return math.exp(self.beta_pm)

    @property
    def c(self) -> float:
        return math.exp(self.beta_mp)

    @property
    def d(self) -> float:
        return math.exp(self.beta_mm)

    @property
    def M(self) -> float:
        return self.c - self.d

    @property
    def N(self) -> float:
        return self.a - self.b

    @property
    def J(self) -> float:
        return (self.beta_pp + self.beta_mm - self.beta_mp - self.beta_pm) / 4.0

    @property
    def alphas(self) -> tuple[float, float]:
        """``(beta(-,-) - beta(+,-), beta(-,+) - beta(+,+))``: log of ``f`` at x=0 and x=1."""
        return (self.beta_mm - self.beta_pm, self.beta_mp - self.beta_pp)

    @property
    def gamma(self) -> float:
        """``|bc - ad| / min(ac, bd)`` for this orientation."""
        # |bc - ad|/(ac) = |b/a - d/c| and |bc - ad|/(bd) = |c/d - a/b|
        g1 = _abs_exp_diff(self.beta_pm - self.beta_pp, self.beta_mm - self.beta_mp)
        g2 = _abs_exp_diff(self.beta_mp - self.beta_mm, self.beta_pp - self.beta_pm)
        return max(g1, g2)

    @property
    def gamma_sym(self) -> float:
        """Max of ``gamma`` over both orientations of the edge."""
        return max(self.gamma, self.transposed().gamma)

    def max_abs(self) -> float:
        return max(abs(self.beta_pp), abs(self.beta_pm), abs(self.beta_mp), abs(self.beta_mm))


def edge_transfer(p: PairPotential, x):
    """Evaluate ``f(x) = (Mx + d)/(Nx + b)`` and ``h(x) = (ad - bc)/((Mx + d)(Nx + b))``.

    ``x`` may be a scalar or an array in [0, 1]. Both denominators are positive on
    [0, 1] since ``Mx + d = cx + d(1 - x)``; for large tables the evaluation moves
    to log space through that convex-combination form.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xs)) or np.any(xs < 0.0) or np.any(xs > 1.0):
        raise InputError("edge_transfer needs x in [0, 1]")
    if p.max_abs() <= LOG_DOMAIN_THRESHOLD:
        top = p.M * xs + p.d
        bottom = p.N * xs + p.b
        f = top / bottom
        h = (p.a * p.d - p.b * p.c) / (top * bottom)
    else:
        with np.errstate(divide="ignore"):
            lx, l1x = np.log(xs), np.log1p(-xs)
        log_top = np.logaddexp(p.beta_mp + lx, p.beta_mm + l1x)
        log_bottom = np.logaddexp(p.beta_pp + lx, p.beta_pm + l1x)
        f = np.exp(log_top - log_bottom)
        ad, bc = p.beta_pp + p.beta_mm, p.beta_pm + p.beta_mp
        sign = 1.0 if ad >= bc else -1.0
        log_num = max(ad, bc) + math.log(-math.expm1(-abs(ad - bc))) if ad != bc else -math.inf
        h = sign * np.exp(log_num - log_top - log_bottom)
    if np.ndim(x) == 0:
        return float(f), float(h)
    return f, h


class Bmrf:
    """Gibbs model on a graph: vertex fields ``(n, 2)`` and edge tables ``(m, 4)``.

    ``field[i] = (h_i(+), h_i(-))``; ``coupling[k] = (pp, pm, mp, mm)`` for edge
    ``graph.edges[k] = (u, v)`` with ``u < v``.
    """

    def __init__(self, graph: Graph, field, coupling):
        self.graph = graph
        self.field = np.array(field, dtype=float).reshape(graph.n, 2)
        self.coupling = np.array(coupling, dtype=float).reshape(graph.m, 4)
        if not (np.all(np.isfinite(self.field)) and np.all(np.isfinite(self.coupling))):
            raise InputError("potentials must be finite")
        self.field.flags.writeable = False
        self.coupling.flags.writeable = False

    @property
    def n(self) -> int:
        return self.graph.n

    def vertex(self, i: int) -> VertexPotential:
        i = self.graph.check_vertex(i)
        return VertexPotential(*map(float, self.field[i]))

    def pair(self, i: int, j: int) -> PairPotential:
        """Table of edge (i, j) oriented as ``beta_ij``."""
        k = self.graph.edge_id(i, j)
        p = PairPotential(*map(float, self.coupling[k]))
        return p if i < j else p.transposed()

    def pairs(self):
        for k, (u, v) in enumerate(self.graph.edges.tolist()):
            yield (u, v), PairPotential(*map(float, self.coupling[k]))

    @property
    def B(self) -> np.ndarray:
        return (self.field[:, 0] - self.field[:, 1]) / 2.0

    def oriented_tables(self, edge_ids: np.ndarray, flipped: np.ndarray) -> np.ndarray:
        """Kernel-layout tables (column ``2*s_row + s_col``, bit 1 = +) for the given
        edges, with the row side on the smaller endpoint unless ``flipped``."""
        pp, pm, mp, mm = (self.coupling[edge_ids, c] for c in range(4))
        tab = np.stack([mm, mp, pm, pp], axis=1)
        if np.any(flipped):
            tab[flipped] = np.stack([mm, pm, mp, pp], axis=1)[flipped]
        return tab

    def __repr__(self) -> str:
        return f"Bmrf(n={self.graph.n}, m={self.graph.m})"


def make_ising(g: Graph, J: float, B: float) -> Bmrf:
    field = np.tile([B, -B], (g.n, 1))
    coupling = np.tile([J, -J, -J, J], (g.m, 1))
    return Bmrf(g, field, coupling)


@dataclass(frozen=True)
class ModelSummary:
    """Extremes of the per-vertex/per-edge parameters. Edge-derived fields are
    ``None`` for an edgeless model."""

    J: float | None
    B_min: float
    B_max: float
    alpha_max: float | None
    alpha_min: float | None
    gamma: float | None

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("J", "B_min", "B_max", "alpha_max", "alpha_min", "gamma")}


def summarize(m: Bmrf) -> ModelSummary:
    # alpha and gamma range over both orientations: the tree uses every edge both ways
    if m.n == 0:
        raise InputError("empty model")
    B = m.B
    if m.graph.m == 0:
        return ModelSummary(None, float(B.min()), float(B.max()), None, None, None)
    J = max(abs(p.J) for _, p in m.pairs())
    alphas = [a for _, p in m.pairs() for q in (p, p.transposed()) for a in q.alphas]
    gamma = max(p.gamma_sym for _, p in m.pairs())
    return ModelSummary(J, float(B.min()), float(B.max()), max(alphas), min(alphas), gamma)


def ssm_threshold(d: float, alpha: float, gamma: float) -> float:
    """Field threshold ``(d-1)alpha/2 + log((sqrt(g(d-1)) + sqrt(g(d-1) - 4))/2)``.

    The log term is ``acosh(sqrt(gamma (d - 1)) / 2)``, which is exactly 0 at the
    boundary ``gamma (d - 1) = 4``.
    """
    if not d > 1:
        raise InputError("threshold needs d > 1")
    x = gamma * (d - 1.0)
    if x < 4.0 - _REGIME_SLACK:
        raise DomainError(
            f"gamma*(d-1) = {x:.12g} < 4: outside the (d-1)*tanh(J) >= 1 regime "
            "where the threshold is defined"
        )
    return (d - 1.0) * alpha / 2.0 + math.acosh(max(1.0, math.sqrt(max(x, 4.0)) / 2.0))


@dataclass(frozen=True)
class Verdict:
    mode: str
    d: float
    status: str  # 'satisfied', 'not-satisfied' or 'out-of-regime'
    regime_value: float  # (d - 1) tanh J
    branch: str | None = None
    threshold_upper: float | None = None  # B(d, alpha_max, gamma)
    threshold_lower: float | None = None  # -B(d, -alpha_min, gamma)
    violating: tuple[int, ...] = field(default=())

    @property
    def satisfied(self) -> bool:
        return self.status == "satisfied"


def _require_edges(s: ModelSummary) -> None:
    if s.gamma is None:
        raise DomainError("model has no edges: alpha and gamma are undefined, no threshold applies")


def check_conditions(m: Bmrf, d: float | None = None, mode: str = "theorem1") -> Verdict:
    """Test the external-field conditions for strong spatial mixing.

    ``theorem1`` compares the uniform bounds ``B_min``/``B_max`` against the thresholds
    at average degree ``d``. ``corollary1`` ignores ``d``, uses the maximum degree of the
    graph and checks every vertex separately, listing the ones that fail both sides.
    """
    s = summarize(m)
    _require_edges(s)
    if mode == "corollary1":
        d = float(m.graph.max_degree())
    elif mode != "theorem1":
        raise InputError(f"unknown mode {mode!r}")
    if d is None or not d > 1:
        raise InputError("conditions need d > 1")
    regime = (d - 1.0) * math.tanh(s.J)
    if regime < 1.0:
        return Verdict(mode, d, "out-of-regime", regime)
    upper = ssm_threshold(d, s.alpha_max, s.gamma)
    lower = -ssm_threshold(d, -s.alpha_min, s.gamma)
    if mode == "theorem1":
        branch = "bmin" if s.B_min > upper else "bmax" if s.B_max < lower else None
        status = "satisfied" if branch else "not-satisfied"
        return Verdict(mode, d, status, regime, branch, upper, lower)
    B = m.B
    bad = tuple(int(i) for i in np.flatnonzero(~((B > upper) | (B < lower))))
    status = "not-satisfied" if bad else "satisfied"
    return Verdict(mode, d, status, regime, None, upper, lower, bad)


@dataclass(frozen=True)
class DecayBound:
    """``f(t) = prefactor * ratio**(t - 1)``."""

    ratio: float
    prefactor: float
    branch: str

    def __call__(self, t: float) -> float:
        if t < 1:
            raise InputError("decay bound is defined for t >= 1")
        if math.isinf(t):
            return 0.0
        return self.prefactor * self.ratio ** (t - 1)

    def log(self, t: float) -> float:
        return math.log(self.prefactor) + (t - 1) * math.log(self.ratio)


def decay_bound(s: ModelSummary, d: float, delta_root: int, branch: str = "bmin") -> DecayBound:
    """Geometric decay function for a satisfied field condition.

    ``bmin``: base ``(d-1) gamma e^y / (1 + e^y)^2`` with ``y = 2 B_min - (d-1) alpha_max``.
    ``bmax``: the same with ``B_max`` and ``alpha_min``, as printed in the source; the
    pairing is consistent with the ``bmax`` threshold, which bounds exactly this ``y``.
    """
    _require_edges(s)
    if delta_root < 1:
        raise InputError("delta_root must be a positive degree")
    if branch == "bmin":
        ok = s.B_min > ssm_threshold(d, s.alpha_max, s.gamma)
        y = 2.0 * s.B_min - (d - 1.0) * s.alpha_max
    elif branch == "bmax":
        ok = s.B_max < -ssm_threshold(d, -s.alpha_min, s.gamma)
        y = 2.0 * s.B_max - (d - 1.0) * s.alpha_min
    else:
        raise InputError(f"unknown branch {branch!r}")
    if not ok:
        raise DomainError(f"{branch} field condition does not hold at d={d}")
    # e^y / (1 + e^y)^2 = 1 / (4 cosh^2(y/2))
    if abs(y) < 700.0:
        ratio = (d - 1.0) * s.gamma / (4.0 * math.cosh(y / 2.0) ** 2)
    else:
        ratio = (d - 1.0) * s.gamma * math.exp(-abs(y))
    assert ratio < 1.0, ratio
    return DecayBound(ratio=ratio, prefactor=delta_root * s.gamma / 4.0, branch=branch)
