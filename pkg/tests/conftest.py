"""Shared fixtures and brute-force reference implementations.

The helpers here deliberately avoid the package's own distance and Reach
code so they can serve as independent oracles.
"""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from graphbisect import Graph, dijkstra_all_pairs


def floyd_warshall(graph: Graph) -> list[list[int]]:
    INF = float("inf")
    n = graph.n
    d = [[0 if i == j else INF for j in range(n)] for i in range(n)]
    for a in graph.arcs:
        d[a.source][a.target] = min(d[a.source][a.target], a.weight)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return d


def simple_paths(graph: Graph, u: int, w: int):
    """All simple u->w paths as arc-index lists (tiny graphs only)."""
    out = []

    def walk(x, seen, arcs):
        if x == w:
            out.append(list(arcs))
            return
        for i in graph.out_arcs[x]:
            y = graph.arcs[i].target
            if y not in seen:
                seen.add(y)
                arcs.append(i)
                walk(y, seen, arcs)
                arcs.pop()
                seen.discard(y)

    walk(u, {u}, [])
    return out


def brute_reach(graph: Graph, u: int, arc: int) -> set[int]:
    """Vertices w with some minimum-weight u->w path starting with ``arc``."""
    result = set()
    for w in range(graph.n):
        if w == u:
            continue
        paths = simple_paths(graph, u, w)
        best = min(sum(graph.arcs[i].weight for i in p) for p in paths)
        if any(p[0] == arc and sum(graph.arcs[i].weight for i in p) == best for p in paths):
            result.add(w)
    return result


def component_side(graph: Graph, u: int, v: int, t: int) -> int:
    """BFS from each endpoint with edge {u, v} removed."""
    def comp(start, banned):
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            for y in graph.neighbors(x):
                if {x, y} == banned or y in seen:
                    continue
                seen.add(y)
                stack.append(y)
        return seen

    return u if t in comp(u, {u, v}) else v


@st.composite
def connected_graphs(draw, min_n=1, max_n=9, wmax=4, directed=False):
    """Random connected undirected (or strongly connected directed) graphs."""
    n = draw(st.integers(min_n, max_n))
    edges = {}
    order = draw(st.permutations(range(n)))
    for i in range(1, n):
        parent = order[draw(st.integers(0, i - 1))]
        edges[(parent, order[i])] = draw(st.integers(1, wmax))
    if directed and n > 1:
        # close a Hamiltonian cycle so the digraph is strongly connected
        for i in range(n):
            a, b = order[i], order[(i + 1) % n]
            if (a, b) not in edges:
                edges[(a, b)] = draw(st.integers(1, wmax))
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    extra = draw(st.lists(st.sampled_from(pairs), max_size=2 * n)) if pairs else []
    for a, b in extra:
        if (a, b) in edges or (not directed and (b, a) in edges):
            continue
        edges[(a, b)] = draw(st.integers(1, wmax))
    return Graph.from_edges(n, [(a, b, w) for (a, b), w in edges.items()], directed=directed)


def with_dist(graph: Graph):
    return graph, dijkstra_all_pairs(graph)


@pytest.fixture
def path3():
    return with_dist(Graph.from_edges(3, [(0, 1), (1, 2)]))


@pytest.fixture
def cycle4_undirected():
    return with_dist(Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]))


@pytest.fixture
def cycle4_directed():
    return with_dist(Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)], directed=True))


@pytest.fixture
def star5():
    return with_dist(Graph.from_edges(5, [(0, i) for i in range(1, 5)]))


def random_graph(rng: np.random.Generator, n: int, extra: int, wmax: int = 1) -> Graph:
    """Random spanning tree plus ``extra`` random edges."""
    edges = {}
    perm = rng.permutation(n)
    for i in range(1, n):
        a, b = int(perm[int(rng.integers(i))]), int(perm[i])
        edges[(min(a, b), max(a, b))] = int(rng.integers(1, wmax + 1))
    for _ in range(extra if n >= 2 else 0):
        a, b = sorted(int(x) for x in rng.choice(n, 2, replace=False))
        edges.setdefault((a, b), int(rng.integers(1, wmax + 1)))
    return Graph.from_edges(n, [(a, b, w) for (a, b), w in sorted(edges.items())])


# Lines recorded by the acceptance suite, echoed in the terminal summary so
# they survive output capture.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
