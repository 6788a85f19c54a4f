"""Exhaustive minimax over candidate bitsets for small instances (n <= 20).

``OPT(S) = 0`` when ``|S| <= 1``; otherwise the best query minimizes one plus
the worst surviving subproblem over responses consistent with some candidate.
Querying the target is terminal and contributes 0.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from enum import Enum

from .graph import DistanceMatrix, Graph, GraphError, reach_dist_mask, reach_mask
from .oracles import TreeIndex

MAX_N = 20


class QueryModel(str, Enum):
    VERTEX = "vertex"
    VERTEX_DIRECTED = "vertex-directed"
    DISTANCE_INFORMED = "distance-informed"
    EDGE_TREE = "edge-tree"


@dataclass
class OptTable:
    n: int
    model: QueryModel
    memo: dict[int, int] = field(default_factory=dict)
    # per query: (label, [(response label, response mask), ...], queried-vertex bit)
    moves: list[tuple[object, list[tuple[str, int]], int]] = field(default_factory=list)

    @property
    def root(self) -> int:
        return 0 if self.n <= 1 else self.memo[(1 << self.n) - 1]


def _bits(mask) -> int:
    out = 0
    for i, b in enumerate(mask):
        if b:
            out |= 1 << i
    return out


def _moves(graph: Graph, dist: DistanceMatrix, model: QueryModel) -> list[tuple[object, list[tuple[str, int]], int]]:
    moves = []
    if model is QueryModel.EDGE_TREE:
        index = TreeIndex(graph)
        for u, v, _ in graph.edges:
            side_v = sum(1 << t for t in range(graph.n) if index.side(u, v, t) == v)
            side_u = ((1 << graph.n) - 1) & ~side_v
            moves.append(((u, v), [(f"side {u}", side_u), (f"side {v}", side_v)], 0))
        return moves
    for q in range(graph.n):
        responses = []
        for i in graph.out_arcs[q]:
            a = graph.arcs[i]
            if model is QueryModel.DISTANCE_INFORMED:
                for ell in sorted({int(x) for x in dist.d[q][reach_mask(graph, dist, q, i)]}):
                    responses.append((f"edge {q} {a.target} dist {ell}", _bits(reach_dist_mask(graph, dist, q, i, ell))))
            else:
                responses.append((f"edge {q} {a.target}", _bits(reach_mask(graph, dist, q, i))))
        moves.append((q, responses, 1 << q))
    return moves


def _check_model(graph: Graph, model: QueryModel) -> None:
    if graph.n > MAX_N:
        raise GraphError(f"exact solving is limited to n <= {MAX_N} (got n={graph.n})")
    if model is QueryModel.VERTEX and graph.directed:
        raise GraphError("model 'vertex' needs an undirected graph")
    if model is QueryModel.VERTEX_DIRECTED and not graph.directed:
        raise GraphError("model 'vertex-directed' needs a directed graph")
    if model is QueryModel.EDGE_TREE and not graph.is_tree():
        raise GraphError("model 'edge-tree' needs an undirected tree")


def _outcomes(S: int, move) -> list[tuple[str, int]] | None:
    """Surviving subsets per consistent response, or None if some response makes no progress."""
    _, responses, qbit = move
    out = []
    for label, mask in responses:
        sub = S & mask & ~qbit
        if sub == S:
            return None
        if sub:
            out.append((label, sub))
    return out


def solve(graph: Graph, dist: DistanceMatrix, model: QueryModel | str) -> OptTable:
    model = QueryModel(model)
    _check_model(graph, model)
    table = OptTable(graph.n, model, moves=_moves(graph, dist, model))
    memo, moves = table.memo, table.moves

    def opt(S: int) -> int:
        if S & (S - 1) == 0:
            return 0
        hit = memo.get(S)
        if hit is not None:
            return hit
        best = S.bit_count()  # querying the members one by one always works
        for move in moves:
            outs = _outcomes(S, move)
            if outs is None:
                continue
            worst = 0
            for _, sub in outs:
                worst = max(worst, opt(sub))
                if worst + 1 >= best:
                    break
            best = min(best, worst + 1)
            if best == 1:
                break
        memo[S] = best
        return best

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 10_000))
    try:
        opt((1 << graph.n) - 1)
    finally:
        sys.setrecursionlimit(old)
    table.opt = opt  # type: ignore[attr-defined]
    return table


def opt_queries(graph: Graph, dist: DistanceMatrix, model: QueryModel | str) -> int:
    return solve(graph, dist, model).root


@dataclass
class StrategyNode:
    query: object
    children: list[tuple[str, StrategyNode | int]]


def opt_strategy_tree(graph: Graph, dist: DistanceMatrix, model: QueryModel | str) -> StrategyNode | None:
    """One optimal decision tree (first minimizing query in id order); ``None`` when n = 1."""
    table = solve(graph, dist, model)
    opt = table.opt  # type: ignore[attr-defined]

    def build(S: int) -> StrategyNode | int:
        if S & (S - 1) == 0:
            return S.bit_length() - 1
        target = opt(S)
        for move in table.moves:
            outs = _outcomes(S, move)
            if outs is None or 1 + max((opt(sub) for _, sub in outs), default=0) != target:
                continue
            label, _, qbit = move
            children: list[tuple[str, StrategyNode | int]] = []
            if qbit & S:
                children.append(("target", label))
            children.extend((resp, build(sub)) for resp, sub in outs)
            return StrategyNode(label, children)
        raise AssertionError("no move attains the memoized optimum")

    root = build((1 << graph.n) - 1)
    if isinstance(root, int):
        return None
    return root


def _query_text(query: object) -> str:
    if isinstance(query, tuple):
        return f"query edge {query[0]} {query[1]}"
    return f"query {query}"


def format_strategy_tree(node: StrategyNode | None) -> str:
    """Indented text, one node per line::

        query 3
          on edge 3 1: query 1
            on target: found 1
            on edge 1 0: found 0
    """
    if node is None:
        return ""
    lines = [_query_text(node.query)]

    def walk(n: StrategyNode, depth: int) -> None:
        pad = "  " * depth
        for resp, child in n.children:
            if isinstance(child, StrategyNode):
                lines.append(f"{pad}on {resp}: {_query_text(child.query)}")
                walk(child, depth + 1)
            else:
                lines.append(f"{pad}on {resp}: found {child}")

    walk(node, 1)
    return "\n".join(lines) + "\n"


def tree_depth(node: StrategyNode | int | None) -> int:
    if node is None or isinstance(node, int):
        return 0
    return 1 + max((tree_depth(c) for _, c in node.children), default=0)
