"""Text formats for models and partial configurations.

Model file::

    mrf v1
    # comment
    vertex <id> <h_plus> <h_minus>
    edge <i> <j> <b_pp> <b_pm> <b_mp> <b_mm>

Condition file: one ``fix <id> <+|->`` per line. Fields may be separated by any
run of spaces or tabs; emitted files use single spaces, LF newlines, vertices
in id order and edges in (smaller id, larger id) order with the table
transposed where needed.
"""

from __future__ import annotations

import math
from typing import Mapping

from bmrf_ssm.errors import ParseError, SemanticError
from bmrf_ssm.graph import Graph
from bmrf_ssm.model import Bmrf

HEADER = "mrf v1"


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def _int(tok: str, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer vertex id, got {tok!r}", no) from None


def _float(tok: str, no: int) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", no) from None
    if not math.isfinite(x):
        raise ParseError(f"potential must be finite, got {tok!r}", no)
    return x


def parse_model(text: str) -> Bmrf:
    lines = _lines(text)
    first = next(lines, None)
    if first is None or " ".join(first[1]) != HEADER:
        raise ParseError(f"missing '{HEADER}' header", first[0] if first else 1)
    vertices: dict[int, tuple[float, float]] = {}
    edges: dict[tuple[int, int], tuple[list[float], int]] = {}
    for no, tok in lines:
        kind = tok[0]
        if kind == "vertex":
            if len(tok) != 4:
                raise ParseError("vertex line needs: vertex <id> <h_plus> <h_minus>", no)
            vid = _int(tok[1], no)
            if vid in vertices:
                raise SemanticError(f"duplicate vertex {vid}", no)
            vertices[vid] = (_float(tok[2], no), _float(tok[3], no))
        elif kind == "edge":
            if len(tok) != 7:
                raise ParseError("edge line needs: edge <i> <j> <b_pp> <b_pm> <b_mp> <b_mm>", no)
            i, j = _int(tok[1], no), _int(tok[2], no)
            if i == j:
                raise SemanticError(f"self-loop at vertex {i}", no)
            pp, pm, mp, mm = (_float(x, no) for x in tok[3:])
            key = (min(i, j), max(i, j))
            if key in edges:
                raise SemanticError(f"duplicate edge {key}", no)
            edges[key] = ([pp, pm, mp, mm] if i < j else [pp, mp, pm, mm], no)
        else:
            raise ParseError(f"unknown record {kind!r}", no)
    for (i, j), (_, no) in edges.items():
        for x in (i, j):
            if x not in vertices:
                raise SemanticError(f"edge endpoint {x} is not a declared vertex", no)
    g = Graph.from_labeled_edges(vertices, edges)
    field = [vertices[lab] for lab in g.labels]
    coupling = [edges[(g.labels[u], g.labels[v])][0] for u, v in g.edges.tolist()]
    return Bmrf(g, field, coupling)


def emit_model(m: Bmrf) -> str:
    g = m.graph
    out = [HEADER]
    for i, lab in enumerate(g.labels):
        hp, hm = m.field[i]
        out.append(f"vertex {lab} {float(hp)!r} {float(hm)!r}")
    rows = []
    for k, (u, v) in enumerate(g.edges.tolist()):
        pp, pm, mp, mm = (float(x) for x in m.coupling[k])
        lu, lv = g.labels[u], g.labels[v]
        if lu > lv:
            lu, lv, pm, mp = lv, lu, mp, pm
        rows.append((lu, lv, f"edge {lu} {lv} {pp!r} {pm!r} {mp!r} {mm!r}"))
    out.extend(r[2] for r in sorted(rows))
    return "\n".join(out) + "\n"


def parse_condition(text: str, g: Graph) -> dict[int, int]:
    """``{vertex index: spin}`` from a condition file, ids resolved against ``g``."""
    out: dict[int, int] = {}
    for no, tok in _lines(text):
        if len(tok) != 3 or tok[0] != "fix" or tok[2] not in ("+", "-"):
            raise ParseError("expected: fix <id> <+|->", no)
        lab = _int(tok[1], no)
        try:
            v = g.index_of(lab)
        except ValueError:
            raise SemanticError(f"vertex {lab} is not in the model", no) from None
        if v in out:
            raise SemanticError(f"vertex {lab} fixed twice", no)
        out[v] = 1 if tok[2] == "+" else -1
    return out


def emit_condition(condition: Mapping[int, int], g: Graph) -> str:
    rows = sorted((g.labels[v], "+" if s > 0 else "-") for v, s in condition.items())
    return "".join(f"fix {lab} {s}\n" for lab, s in rows)
