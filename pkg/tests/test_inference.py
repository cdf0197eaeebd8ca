import math

import numpy as np
import pytest

import oracles
from conftest import labeled
from bmrf_ssm.errors import InputError, PreconditionError, ResourceError
from bmrf_ssm.graph import Graph, complete_graph, cycle_graph, gnp, path_graph
from bmrf_ssm.inference import (
    certificate,
    exact_marginal,
    exact_partition,
    expit,
    saw_marginal,
    tree_marginal,
    truncated_marginal,
)
from bmrf_ssm.model import Bmrf, make_ising
from bmrf_ssm.sawtree import BuildLimits, build
from bmrf_ssm.verify import random_model

LOGZ_TRIANGLE = 2.7338585971788338  # log(2 e^1.8 + 6 e^-0.6), Ising triangle with J = 0.6
E_OVER_1_PLUS_E = 0.7310585786300049


def triangle(J=0.5, B=0.0):
    return make_ising(labeled([(1, 2), (2, 3), (1, 3)]), J, B)


class TestExact:
    def test_single_vertex(self, backend):
        m = Bmrf(Graph(1), [[0.5, -0.5]], np.zeros((0, 4)))
        assert exact_marginal(m, 0).p == pytest.approx(E_OVER_1_PLUS_E, abs=1e-15)
        assert exact_partition(m).log_z == pytest.approx(math.log(math.exp(0.5) + math.exp(-0.5)))

    def test_triangle_partition(self, backend):
        m = triangle(0.6)
        assert exact_partition(m).log_z == pytest.approx(LOGZ_TRIANGLE, abs=1e-13)
        assert exact_partition(m).log_z == pytest.approx(oracles.log_partition(m), abs=1e-13)

    def test_symmetric_marginal(self, backend):
        assert exact_marginal(triangle(0.9), 1).p == pytest.approx(0.5, abs=1e-15)

    def test_conditioned_vertex_is_forced(self, backend):
        m = triangle()
        r = exact_marginal(m, 2, {2: -1})
        assert r.p == 0.0 and r.log_odds == -math.inf

    def test_against_oracle(self, backend, rng):
        for seed in range(40):
            n = int(rng.integers(1, 8))
            g = gnp(n, 0.5, seed)
            m = random_model(rng, g)
            cond = {int(u): int(rng.choice([-1, 1])) for u in rng.choice(n, size=int(rng.integers(0, 3)))}
            v = int(rng.integers(n))
            assert exact_partition(m, cond).log_z == pytest.approx(oracles.log_partition(m, cond), abs=1e-10)
            assert exact_marginal(m, v, cond).p == pytest.approx(oracles.marginal(m, v, cond), abs=1e-12)

    def test_complementary(self, backend, rng):
        m = random_model(rng, gnp(7, 0.5, 1))
        r = exact_marginal(m, 3, {0: 1})
        assert r.p + r.q == 1.0
        flipped = Bmrf(m.graph, m.field[:, ::-1], m.coupling[:, ::-1])
        # swapping + and - everywhere mirrors the marginal
        assert exact_marginal(flipped, 3, {0: -1}).p == pytest.approx(r.q, abs=1e-13)

    def test_large_potentials_stay_finite(self, backend):
        m = make_ising(path_graph(4), 300.0, 1.0)
        assert 0.0 < exact_partition(m).log_z < math.inf
        # the chain is locked into one spin, which sees the total field 4 * 2B
        assert exact_marginal(m, 0).p == pytest.approx(expit(8.0), abs=1e-14)

    def test_cap(self, backend):
        m = make_ising(path_graph(10), 0.1, 0.0)
        with pytest.raises(ResourceError) as exc:
            exact_partition(m, max_free=5)
        assert exc.value.partial["free_vertices"] == 10
        exact_partition(m, {i: 1 for i in range(5)}, max_free=5)

    def test_bad_inputs(self, backend):
        m = triangle()
        with pytest.raises(InputError):
            exact_marginal(m, 9)
        with pytest.raises(InputError):
            exact_marginal(m, 0, {1: 0})


class TestTreeRecursion:
    def test_matches_tree_model(self, backend, rng):
        for seed in range(25):
            g = gnp(int(rng.integers(2, 6)), 0.6, seed)
            m = random_model(rng, g)
            cond = {int(rng.integers(g.n)): 1} if rng.random() < 0.5 else {}
            root = int(rng.integers(g.n))
            t = build(g, root, cond)
            if t.size > 18:
                continue
            want = oracles.tree_model_marginal(m, oracles.saw_tree(g, root, cond))
            assert tree_marginal(t, m).p == pytest.approx(want, abs=1e-12)

    def test_saw_equals_exact(self, backend, rng):
        for seed in range(40):
            g = gnp(int(rng.integers(1, 9)), float(rng.uniform(0.2, 0.6)), seed)
            m = random_model(rng, g, beta=1.0, h=1.0)
            cond = {int(u): int(rng.choice([-1, 1])) for u in rng.choice(g.n, size=int(rng.integers(0, 3)))}
            v = int(rng.integers(g.n))
            assert saw_marginal(m, v, cond).p == pytest.approx(exact_marginal(m, v, cond).p, abs=1e-10)

    def test_huge_couplings(self, backend):
        m = make_ising(complete_graph(4), 80.0, -0.5)
        assert saw_marginal(m, 0).p == pytest.approx(exact_marginal(m, 0).p, abs=1e-12)

    def test_edgeless(self, backend):
        m = Bmrf(Graph(3), [[1.0, 0.0]] * 3, np.zeros((0, 4)))
        assert saw_marginal(m, 1).p == pytest.approx(expit(1.0))

    def test_rejects_truncated(self, backend):
        m = make_ising(cycle_graph(5), 0.5, 0.0)
        t = build(m.graph, 0, limits=BuildLimits(max_depth=2))
        with pytest.raises(PreconditionError):
            tree_marginal(t, m)

    def test_rejects_foreign_tree(self, backend):
        t = build(cycle_graph(5), 0)
        with pytest.raises(InputError):
            tree_marginal(t, make_ising(path_graph(5), 0.5, 0.0))


class TestTruncated:
    def test_interval_encloses_truth(self, backend, rng):
        for seed in range(30):
            g = gnp(8, 0.4, seed)
            m = random_model(rng, g, beta=1.5, h=1.0)
            v = int(rng.integers(g.n))
            truth = exact_marginal(m, v).p
            for t in (1, 2, 3, 4):
                r = truncated_marginal(m, v, t=t)
                lo, hi = r.interval
                assert lo - 1e-12 <= truth <= hi + 1e-12
                assert lo - 1e-12 <= min(r.boundary_plus, r.boundary_minus)
                assert max(r.boundary_plus, r.boundary_minus) <= hi + 1e-12

    def test_deep_enough_is_exact(self, backend):
        m = make_ising(cycle_graph(6), 0.4, 0.3)
        r = truncated_marginal(m, 0, t=10)
        assert r.width == 0.0
        assert r.p == pytest.approx(exact_marginal(m, 0).p, abs=1e-12)

    def test_ferromagnet_boundaries_are_the_ends(self, backend):
        m = make_ising(path_graph(6), 0.6, 0.2)
        r = truncated_marginal(m, 0, t=3)
        assert r.interval[0] == pytest.approx(r.boundary_minus, abs=1e-15)
        assert r.interval[1] == pytest.approx(r.boundary_plus, abs=1e-15)

    def test_width_shrinks(self, backend):
        m = make_ising(path_graph(8), 0.6, 2.0)
        widths = [truncated_marginal(m, 0, t=t).width for t in range(1, 7)]
        assert all(a >= b for a, b in zip(widths, widths[1:]))

    def test_certificate(self, backend):
        m = make_ising(path_graph(6), 0.6, 2.0)
        r = truncated_marginal(m, 0, t=3, d=3)
        assert r.bound == pytest.approx(certificate(m, 0, 3, 3))
        assert r.width <= r.bound
        assert truncated_marginal(m, 0, t=3).bound is None
        assert certificate(make_ising(path_graph(6), 0.6, 0.0), 0, 3, 3) is None

    def test_depth_validation(self):
        with pytest.raises(InputError):
            truncated_marginal(triangle(), 0, t=0)

    def test_record_shape(self, backend):
        d = truncated_marginal(triangle(), 0, t=1).as_dict()
        assert set(d) >= {"p", "q", "odds", "interval", "width", "bound", "boundary_plus", "boundary_minus"}
