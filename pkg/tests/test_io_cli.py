import json
import subprocess
import sys

import numpy as np
import pytest

from bmrf_ssm.cli import main
from bmrf_ssm.errors import ParseError, SemanticError
from bmrf_ssm.graph import cycle_graph
from bmrf_ssm.io import emit_condition, emit_model, parse_condition, parse_model
from bmrf_ssm.model import make_ising
from bmrf_ssm.verify import random_model

TRIANGLE = """mrf v1
# Ising triangle, J = 0.6
vertex 1 0 0
vertex 2 0 0
vertex 3 0 0
edge 1 2 0.6 -0.6 -0.6 0.6
edge 2 3 0.6 -0.6 -0.6 0.6
edge 1 3 0.6 -0.6 -0.6 0.6
"""


class TestModelFormat:
    def test_parse(self):
        m = parse_model(TRIANGLE)
        assert m.n == 3 and m.graph.m == 3
        assert m.graph.labels == (1, 2, 3)

    def test_reversed_edge_is_transposed(self):
        text = "mrf v1\nvertex 1 0 0\nvertex 2 0 0\nedge 2 1 1 2 3 4\n"
        p = parse_model(text).pair(0, 1)
        assert (p.beta_pp, p.beta_pm, p.beta_mp, p.beta_mm) == (1, 3, 2, 4)

    def test_round_trip(self, rng):
        g = cycle_graph(6)
        m = random_model(rng, g)
        text = emit_model(m)
        back = parse_model(text)
        assert np.array_equal(back.field, m.field) and np.array_equal(back.coupling, m.coupling)
        assert emit_model(back) == text

    def test_tabs_and_comments(self):
        text = "mrf v1  # header\nvertex\t5\t0.1 -0.1\n\n"
        assert parse_model(text).vertex(0).B == pytest.approx(0.1)

    @pytest.mark.parametrize(
        "text, err, line",
        [
            ("vertex 1 0 0\n", ParseError, 1),
            ("mrf v1\nvertex 1 0\n", ParseError, 2),
            ("mrf v1\nvertex 1 0 x\n", ParseError, 2),
            ("mrf v1\nvertex 1 0 nan\n", ParseError, 2),
            ("mrf v1\nnode 1\n", ParseError, 2),
            ("mrf v1\nvertex 1 0 0\nvertex 1 0 0\n", SemanticError, 3),
            ("mrf v1\nvertex 1 0 0\nvertex 2 0 0\nedge 1 2 0 0 0 0\nedge 2 1 0 0 0 0\n", SemanticError, 5),
            ("mrf v1\nvertex 1 0 0\nedge 1 9 0 0 0 0\n", SemanticError, 3),
            ("mrf v1\nvertex 1 0 0\nedge 1 1 0 0 0 0\n", SemanticError, 3),
        ],
    )
    def test_errors_carry_line(self, text, err, line):
        with pytest.raises(err) as exc:
            parse_model(text)
        assert exc.value.line == line
        assert f"line {line}" in str(exc.value)


class TestConditionFormat:
    def test_round_trip(self):
        g = parse_model(TRIANGLE).graph
        cond = parse_condition("fix 3 -\nfix 1 +\n", g)
        assert cond == {2: -1, 0: 1}
        assert emit_condition(cond, g) == "fix 1 +\nfix 3 -\n"

    @pytest.mark.parametrize("text, err", [("fix 9 +", SemanticError), ("fix 1 0", ParseError),
                                           ("fix 1 +\nfix 1 -", SemanticError)])
    def test_errors(self, text, err):
        with pytest.raises(err):
            parse_condition(text, parse_model(TRIANGLE).graph)


@pytest.fixture
def files(tmp_path):
    model = tmp_path / "tri.mrf"
    model.write_text(TRIANGLE)
    plus = tmp_path / "plus.cond"
    plus.write_text("fix 3 +\n")
    minus = tmp_path / "minus.cond"
    minus.write_text("fix 3 -\n")
    return model, plus, minus


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


class TestCli:
    def test_marginal(self, capsys, files):
        code, rec, err = run(capsys, "marginal", "--model", files[0], "--vertex", 1)
        assert code == 0
        assert rec["tool"] == "bmrf-ssm" and rec["subcommand"] == "marginal"
        assert rec["result"]["p"] == 0.5
        assert "timing" not in rec and "elapsed_s" in err

    def test_timing_flag(self, capsys, files):
        _, rec, _ = run(capsys, "--timing", "marginal", "--model", files[0], "--vertex", 1)
        assert rec["timing"]["elapsed_s"] >= 0

    def test_methods_agree(self, capsys, files):
        ps = []
        for method in ("exact", "saw"):
            _, rec, _ = run(capsys, "marginal", "--model", files[0], "--vertex", 1,
                            "--condition", files[1], "--method", method)
            ps.append(rec["result"]["p"])
        assert ps[0] == ps[1] > 0.5

    def test_truncated_needs_depth(self, capsys, files):
        code, rec, err = run(capsys, "marginal", "--model", files[0], "--vertex", 1, "--method", "truncated")
        assert code == 2 and rec is None and "depth" in err

    def test_threshold(self, capsys):
        code, rec, _ = run(capsys, "threshold", "--d", 3, "--alpha", 1.2, "--gamma", 3.018922)
        assert code == 0 and rec["result"]["B"] == 1.86390712898

    def test_domain_error(self, capsys):
        code, _, err = run(capsys, "threshold", "--d", 3, "--alpha", 0, "--gamma", 1)
        assert code == 4 and "error" in err

    def test_check(self, capsys, files):
        code, rec, _ = run(capsys, "check", "--model", files[0], "--d", 3)
        assert code == 0 and rec["result"]["status"] == "not-satisfied"
        code, _, _ = run(capsys, "check", "--model", files[0])
        assert code == 2

    def test_metrics(self, capsys, files):
        _, rec, _ = run(capsys, "metrics", "--model", files[0], "--radius", 2)
        rows = rec["result"]["vertices"]
        assert [r["m"] for r in rows] == [6, 6, 6]
        assert rec["result"]["Delta"] == [2, 1]

    def test_saw_tree_dot(self, capsys, files, tmp_path):
        dot = tmp_path / "t.dot"
        _, rec, _ = run(capsys, "saw-tree", "--model", files[0], "--root", 1, "--dot", dot)
        assert rec["result"]["levels"] == [1, 2, 2, 2]
        assert dot.read_text().count("[label=") == 7

    def test_ssm_verify(self, capsys, files):
        _, rec, _ = run(capsys, "ssm-verify", "--model", files[0], "--vertex", 1,
                        "--condition-a", files[1], "--condition-b", files[2], "--d", 2)
        res = rec["result"]
        assert res["theta"] == [3] and res["t"] == 1 and res["measured"] > 0

    def test_verify(self, capsys):
        code, rec, _ = run(capsys, "verify", "--target", "lemma3", "--trials", 20, "--seed", 3)
        assert code == 0 and rec["result"]["pass"]

    def test_gen_round_trip(self, capsys, tmp_path):
        out = tmp_path / "g.mrf"
        _, rec, _ = run(capsys, "gen", "--kind", "gnp", "--n", 12, "--p", 0.3, "--seed", 4,
                        "--ising-j", 0.5, "--out", out)
        m = parse_model(out.read_text())
        assert m.graph.m == rec["result"]["m"]
        assert np.allclose(m.coupling[:, 0], 0.5)

    def test_missing_file(self, capsys, tmp_path):
        code, rec, err = run(capsys, "marginal", "--model", tmp_path / "nope", "--vertex", 1)
        assert code == 2 and rec is None and "cannot read" in err

    def test_parse_error_exit_code(self, capsys, tmp_path):
        bad = tmp_path / "bad.mrf"
        bad.write_text("mrf v1\nvertex 1 0\n")
        code, _, err = run(capsys, "marginal", "--model", bad, "--vertex", 1)
        assert code == 2 and "line 2" in err

    def test_resource_exit_code(self, capsys, tmp_path):
        path = tmp_path / "c.mrf"
        path.write_text(emit_model(make_ising(cycle_graph(30), 0.1, 0.0)))
        code, _, _ = run(capsys, "marginal", "--model", path, "--vertex", 0, "--max-free", 10)
        assert code == 3

    def test_module_entry_point(self):
        out = subprocess.run([sys.executable, "-m", "bmrf_ssm", "threshold", "--d", "2", "--alpha", "0",
                              "--gamma", "4"], capture_output=True, text=True, check=True)
        assert json.loads(out.stdout)["result"]["B"] == 0.0
