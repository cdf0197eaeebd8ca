"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each workload runs once per backend to warm up (JIT compile for numba), then
``--repeat`` timed runs; the best time is reported. Results of the two
backends are compared so a speedup never hides a wrong answer.
"""

import argparse
import time

import numpy as np

from bmrf_ssm import _accel
from bmrf_ssm.graph import gnp, grid_graph
from bmrf_ssm.inference import _reduced_problem, _tree_inputs
from bmrf_ssm.model import make_ising
from bmrf_ssm.sawtree import BuildLimits, build, condition_array
from bmrf_ssm.verify import random_model


def workloads():
    rng = np.random.default_rng(0)

    m = random_model(rng, gnp(20, 0.2, 1))
    reduced = _reduced_problem(m, condition_array(m.graph, {}))
    yield "log_partition n=20", lambda k: k.log_partition(*reduced[:5])

    g = grid_graph(4, 4)
    yield "saw_build 4x4 grid", lambda k: k.saw_build(
        g.indptr, g.indices, g.adj_edge, g.rank, condition_array(g, {}), 0, -1, 10**7
    )[0]

    mg = make_ising(g, 0.6, 2.0)
    tree = build(g, 0, limits=BuildLimits(max_depth=10))
    two_b, tab = _tree_inputs(tree, mg)
    yield f"tree_logodds {tree.size} nodes", lambda k: k.tree_logodds(
        tree.parent, tree.depth, tree.state, two_b, tab, -np.inf, np.inf
    )

    sparse = gnp(200, 3.0 / 199, 7)
    yield "path_density n=200 l=8", lambda k: k.path_density(
        sparse.indptr, sparse.indices, sparse.degree, 0, 8, 10**8
    )[1]


def best_of(fn, kernels, repeat):
    fn(kernels)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(kernels)
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = {name: _accel.load(name) for name in _accel.available()}
    print(f"{'workload':32s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in workloads():
        results = {b: best_of(fn, k, args.repeat) for b, k in backends.items()}
        outs = [np.asarray(r[1], dtype=float) for r in results.values()]
        agree = all(np.allclose(o, outs[0], rtol=1e-9, atol=1e-9) for o in outs)
        row = f"{name:32s}" + "".join(f"{results[b][0]:11.4f}s" for b in backends)
        if "numba" in results:
            row += f"  {results['numpy'][0] / results['numba'][0]:9.1f}x"
        print(row + ("" if agree else "   MISMATCH"))


if __name__ == "__main__":
    main()
