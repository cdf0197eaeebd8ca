"""``bmrf-ssm`` command line tool.

Every invocation writes one JSON record to stdout. Exit codes: 0 success,
2 input/usage error, 3 resource budget exhausted, 4 domain error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

from bmrf_ssm import __version__, _accel
from bmrf_ssm.errors import BmrfError, InputError
from bmrf_ssm.graph import GENERATOR_KINDS, generate, max_path_density
from bmrf_ssm.inference import exact_marginal, saw_marginal, truncated_marginal
from bmrf_ssm.io import emit_model, parse_condition, parse_model
from bmrf_ssm.model import Bmrf, check_conditions, make_ising, ssm_threshold, summarize
from bmrf_ssm.sawtree import BuildLimits, build, export_dot
from bmrf_ssm.verify import TARGETS, SsmExperiment, random_suite, run_experiment

SIG_DIGITS = 12


def _render(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(x, dict):
        return {str(k): _render(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_render(v) for v in x]
    if hasattr(x, "item"):
        return _render(x.item())
    return _render(float(x))


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_model(path: str) -> tuple[Bmrf, str]:
    text = _read(path)
    return parse_model(text), hashlib.sha256(text.encode()).hexdigest()


def _load_condition(path: str | None, m: Bmrf) -> dict[int, int]:
    return {} if path is None else parse_condition(_read(path), m.graph)


def _label_condition(cond: dict[int, int], m: Bmrf) -> dict:
    return {str(m.graph.labels[v]): "+" if s > 0 else "-" for v, s in sorted(cond.items())}


def cmd_marginal(args) -> dict:
    m, digest = _load_model(args.model)
    cond = _load_condition(args.condition, m)
    v = m.graph.index_of(args.vertex)
    if args.method == "exact":
        res = exact_marginal(m, v, cond, max_free=args.max_free)
    elif args.method == "saw":
        res = saw_marginal(m, v, cond, BuildLimits(max_nodes=args.max_nodes))
    else:
        if args.depth is None:
            raise InputError("--method truncated needs --depth")
        res = truncated_marginal(m, v, cond, args.depth, args.d, max_nodes=args.max_nodes)
    return {"model_sha256": digest, "condition": _label_condition(cond, m), **res.as_dict()}


def cmd_metrics(args) -> dict:
    m, digest = _load_model(args.model)
    g = m.graph
    vertices = range(g.n) if args.vertex is None else [g.index_of(args.vertex)]
    rows = []
    for v in vertices:
        met = max_path_density(g, v, args.radius, args.budget)
        row = {"vertex": g.labels[v], "degree": met.degree, "m": met.m,
               "witness": [g.labels[u] for u in met.witness]}
        if met.delta is not None:
            row["delta"] = [met.delta.numerator, met.delta.denominator]
            row["delta_value"] = float(met.delta)
        rows.append(row)
    out = {"model_sha256": digest, "radius": args.radius, "vertices": rows}
    if args.radius >= 1 and args.vertex is None:
        big = max((m_ for m_ in (r["delta"] for r in rows)), key=lambda fr: fr[0] / fr[1], default=[0, 1])
        out["Delta"] = big
        out["Delta_value"] = big[0] / big[1]
    return out


def cmd_threshold(args) -> dict:
    return {"B": ssm_threshold(args.d, args.alpha, args.gamma)}


def cmd_check(args) -> dict:
    m, digest = _load_model(args.model)
    if args.mode == "theorem1" and args.d is None:
        raise InputError("--mode theorem1 needs --d")
    verdict = check_conditions(m, args.d, args.mode)
    return {
        "model_sha256": digest,
        "summary": summarize(m).as_dict(),
        "status": verdict.status,
        "satisfied": verdict.satisfied,
        "d": verdict.d,
        "regime_value": verdict.regime_value,
        "branch": verdict.branch,
        "threshold_upper": verdict.threshold_upper,
        "threshold_lower": verdict.threshold_lower,
        "violating": [m.graph.labels[v] for v in verdict.violating],
    }


def cmd_saw_tree(args) -> dict:
    m, digest = _load_model(args.model)
    cond = _load_condition(args.condition, m)
    tree = build(m.graph, m.graph.index_of(args.root), cond, BuildLimits(args.depth, args.max_nodes))
    out = {
        "model_sha256": digest,
        "levels": tree.level_counts(),
        "nodes": tree.size,
        "truncated": tree.truncated,
        "fixed_plus": int((tree.state == 1).sum()),
        "fixed_minus": int((tree.state == -1).sum()),
        "frontier": int((tree.state == 2).sum()),
    }
    if args.dot:
        Path(args.dot).write_text(export_dot(tree))
        out["dot"] = args.dot
    return out


def cmd_ssm_verify(args) -> dict:
    m, digest = _load_model(args.model)
    a = _load_condition(args.condition_a, m)
    b = _load_condition(args.condition_b, m)
    e = SsmExperiment(m.graph.index_of(args.vertex), a, b)
    report = run_experiment(m, e, args.d, args.method)
    return {
        "model_sha256": digest,
        "theta": sorted(m.graph.labels[v] for v in e.theta),
        **report.as_dict(),
    }


def cmd_verify(args) -> dict:
    return random_suite(args.target, args.trials, args.seed, args.grid).as_dict()


def cmd_gen(args) -> dict:
    params = {k: getattr(args, k) for k in ("n", "p", "rows", "cols", "branching", "height")
              if getattr(args, k) is not None}
    g = generate(args.kind, args.seed, **params)
    m = make_ising(g, args.ising_j, args.ising_b)
    text = emit_model(m)
    out = {"n": g.n, "m": g.m, "model_sha256": hashlib.sha256(text.encode()).hexdigest()}
    if args.out:
        Path(args.out).write_text(text)
        out["out"] = args.out
    else:
        out["model"] = text
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bmrf-ssm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--timing", action="store_true", help="also put timing into the stdout record")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("marginal", help="conditional marginal of one vertex")
    s.add_argument("--model", required=True)
    s.add_argument("--vertex", type=int, required=True)
    s.add_argument("--condition")
    s.add_argument("--method", choices=("exact", "saw", "truncated"), default="exact")
    s.add_argument("--depth", type=int)
    s.add_argument("--d", type=float)
    s.add_argument("--max-free", type=int, default=24)
    s.add_argument("--max-nodes", type=int, default=10**7)
    s.set_defaults(func=cmd_marginal)

    s = sub.add_parser("metrics", help="maximal path density and average degrees")
    s.add_argument("--model", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--vertex", type=int)
    s.add_argument("--budget", type=int, default=10**8)
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("threshold", help="external-field threshold B(d, alpha, gamma)")
    s.add_argument("--d", type=float, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--gamma", type=float, required=True)
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("check", help="test the strong-spatial-mixing field conditions")
    s.add_argument("--model", required=True)
    s.add_argument("--mode", choices=("theorem1", "corollary1"), default="theorem1")
    s.add_argument("--d", type=float)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("saw-tree", help="build a self-avoiding walk tree")
    s.add_argument("--model", required=True)
    s.add_argument("--root", type=int, required=True)
    s.add_argument("--depth", type=int)
    s.add_argument("--condition")
    s.add_argument("--dot")
    s.add_argument("--max-nodes", type=int, default=10**7)
    s.set_defaults(func=cmd_saw_tree)

    s = sub.add_parser("ssm-verify", help="boundary-perturbation experiment")
    s.add_argument("--model", required=True)
    s.add_argument("--vertex", type=int, required=True)
    s.add_argument("--condition-a", required=True)
    s.add_argument("--condition-b", required=True)
    s.add_argument("--d", type=float)
    s.add_argument("--method", choices=("exact", "saw"), default="exact")
    s.set_defaults(func=cmd_ssm_verify)

    s = sub.add_parser("verify", help="seeded random inequality checks")
    s.add_argument("--target", choices=(*TARGETS, "mix"), required=True)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--grid", type=int, default=10**4)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gen", help="generate an Ising model file on a standard graph")
    s.add_argument("--kind", choices=GENERATOR_KINDS, required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--rows", type=int)
    s.add_argument("--cols", type=int)
    s.add_argument("--branching", type=int)
    s.add_argument("--height", type=int)
    s.add_argument("--ising-j", type=float, default=0.0)
    s.add_argument("--ising-b", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    inputs = {k: v for k, v in vars(args).items() if k not in ("func", "command", "timing")}
    start = time.perf_counter()
    try:
        result = args.func(args)
    except BmrfError as exc:
        print(f"bmrf-ssm {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    elapsed = time.perf_counter() - start
    timing = {"elapsed_s": elapsed, "backend": _accel.BACKEND}
    record = {
        "tool": "bmrf-ssm",
        "version": __version__,
        "subcommand": args.command,
        "inputs": inputs,
        "result": result,
    }
    if args.timing:
        record["timing"] = timing
    print(json.dumps(_render(timing)), file=sys.stderr)
    print(json.dumps(_render(record)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
