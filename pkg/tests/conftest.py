import sys
from pathlib import Path

import numpy as np
import pytest

from bmrf_ssm import _accel
from bmrf_ssm.graph import Graph

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> list of (part, passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture(params=_accel.available())
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    monkeypatch.setattr(_accel, "kernels", _accel.load(request.param))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def labeled(edges, ids=None):
    """Graph from 1-based style labelled edges, e.g. the path 1-2-3."""
    ids = ids if ids is not None else sorted({x for e in edges for x in e})
    return Graph.from_labeled_edges(ids, edges)


def acceptance_lines() -> list[str]:
    lines = []
    for num in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[num]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{name}: {'ok' if ok else 'FAILED'} ({info})" for name, ok, info in parts)
        lines.append(f"criterion {num}: {verdict}  {detail}")
    return lines


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
