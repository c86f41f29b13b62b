"""Shared fixtures: preset domains and cached sampling graphs."""

from __future__ import annotations

import pytest

from qhgeo.graph import SamplingParams, build_graph
from qhgeo.presets import generate_domain


@pytest.fixture(scope="session")
def graph_cache(request):
    return str(request.config.cache.mkdir("qhgeo-graphs"))


@pytest.fixture(scope="session")
def make_graph(graph_cache):
    """``make_graph(kind, resolution, **params)`` with memoization across the session."""
    memo = {}

    def make(kind: str, resolution: float = 64, **params):
        key = (kind, float(resolution), tuple(sorted(params.items())))
        if key not in memo:
            dom = generate_domain(kind, **params)
            memo[key] = build_graph(dom, SamplingParams.at_resolution(resolution), cache_dir=graph_cache)
        return memo[key]

    return make


@pytest.fixture(scope="session")
def disk():
    return generate_domain("disk")


@pytest.fixture(scope="session")
def square():
    return generate_domain("square")


@pytest.fixture(scope="session")
def slit_disk():
    return generate_domain("slit_disk")


@pytest.fixture(scope="session")
def disk16(make_graph):
    return make_graph("disk", 16)


@pytest.fixture(scope="session")
def square16(make_graph):
    return make_graph("square", 16)


@pytest.fixture(scope="session")
def disk32(make_graph):
    return make_graph("disk", 32)


ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def record():
    """``record(n, ok, detail)`` prints and stores one acceptance line."""

    def rec(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[n] = line
        print(line)
        return ok

    return rec


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in range(1, 12):
        terminalreporter.write_line(ACCEPTANCE.get(n, f"criterion {n:2d}: NOT RUN"))
