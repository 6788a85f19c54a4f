"""The answering side of the search game.

Every oracle owns one PCG64 stream seeded from ``rng_seed`` and consumes
exactly two uniforms per query (a truth coin and a choice value), so query
``k`` always sees draws ``2k`` and ``2k+1`` regardless of what happened
before it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .graph import CandidateSet, DistanceMatrix, Graph, GraphError, reach_dist_mask, reach_mask
from .median import WeightVector


class CorrectPolicy(str, Enum):
    MIN_EDGE_ID = "min-edge-id"
    ADVERSARIAL = "adversarial-max-survivor"
    RANDOM = "seeded-random"


class LiePolicy(str, Enum):
    UNIFORM = "uniform"
    MIRRORED = "adversarial-mirrored"


@dataclass(frozen=True)
class Target:
    vertex: int


@dataclass(frozen=True)
class EdgeResponse:
    arc: int


@dataclass(frozen=True)
class EdgeDist:
    arc: int
    dist: int


@dataclass(frozen=True)
class Side:
    vertex: int


QueryResponse = Union[Target, EdgeResponse, EdgeDist, Side]


def format_response(graph: Graph, r: QueryResponse) -> str:
    """Textual form shared by transcripts and the interactive prompt."""
    if isinstance(r, Target):
        return "target"
    if isinstance(r, Side):
        return f"side {r.vertex}"
    a = graph.arcs[r.arc]
    if isinstance(r, EdgeDist):
        return f"edge {a.source} {a.target} dist {r.dist}"
    return f"edge {a.source} {a.target}"


def parse_response(graph: Graph, text: str, q: int | tuple[int, int]) -> QueryResponse:
    """Parse ``target``, ``edge u v``, ``edge u v dist l`` or ``side u``.

    Checks legality for the query (the arc leaves ``q``, the side is an
    endpoint of the queried edge) but not truthfulness. Raises ``ValueError``.
    """
    parts = text.split()
    if not parts:
        raise ValueError("empty response")
    word = parts[0].lower()
    try:
        nums = [int(x) for x in parts[1:] if x != "dist"]
    except ValueError:
        raise ValueError(f"malformed response {text!r}") from None
    if word == "target" and len(parts) == 1:
        if isinstance(q, tuple):
            raise ValueError("edge queries are answered with 'side <u>'")
        return Target(q)
    if word == "side" and len(nums) == 1:
        if not isinstance(q, tuple):
            raise ValueError("'side' only answers edge queries")
        if nums[0] not in q:
            raise ValueError(f"vertex {nums[0]} is not an endpoint of the queried edge {q}")
        return Side(nums[0])
    if word == "edge" and len(nums) in (2, 3) and (len(nums) == 2) == ("dist" not in parts):
        if isinstance(q, tuple):
            raise ValueError("edge queries are answered with 'side <u>'")
        u, v = nums[0], nums[1]
        if u != q:
            raise ValueError(f"arc ({u}, {v}) does not leave the queried vertex {q}")
        try:
            arc = graph.find_arc(u, v)
        except (GraphError, IndexError):
            raise ValueError(f"there is no arc ({u}, {v})") from None
        if len(nums) == 3:
            if nums[2] < 1:
                raise ValueError("distance to a non-queried target is at least 1")
            return EdgeDist(arc, nums[2])
        return EdgeResponse(arc)
    raise ValueError(f"malformed response {text!r}")


def response_ordinal(r: QueryResponse) -> int:
    """Fixed response order: Target first, then arcs by index."""
    if isinstance(r, Target):
        return 0
    if isinstance(r, (EdgeResponse, EdgeDist)):
        return r.arc + 1
    return r.vertex + 1


@dataclass(frozen=True)
class OracleState:
    target: int
    correct_policy: CorrectPolicy = CorrectPolicy.MIN_EDGE_ID
    lie_policy: LiePolicy = LiePolicy.UNIFORM
    p: float = 1.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.5 < self.p <= 1.0:
            raise ValueError(f"p must lie in (1/2, 1], got {self.p}")
        object.__setattr__(self, "correct_policy", CorrectPolicy(self.correct_policy))
        object.__setattr__(self, "lie_policy", LiePolicy(self.lie_policy))


class _Uniforms:
    """Two uniforms per query index from one PCG64 stream, drawn in blocks."""

    BLOCK = 4096

    def __init__(self, seed: int) -> None:
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self._buf = np.empty(0)
        self._pos = 0

    def pair(self) -> tuple[float, float]:
        if self._pos + 2 > len(self._buf):
            self._buf = self._gen.random(self.BLOCK)
            self._pos = 0
        a, b = self._buf[self._pos], self._buf[self._pos + 1]
        self._pos += 2
        return float(a), float(b)


def _mirror_set(mirror: CandidateSet | WeightVector | None, n: int) -> np.ndarray:
    if mirror is None:
        return np.ones(n, dtype=bool)
    if isinstance(mirror, WeightVector):
        return mirror.mu > 0
    return mirror.to_mask()


class VertexOracle:
    """Vertex-query oracle, truthful (``p == 1``) or noisy.

    ``lies`` records, per query, whether the truth coin came up tails; a lie
    may still coincide with a correct answer.
    """

    def __init__(self, graph: Graph, dist: DistanceMatrix, state: OracleState) -> None:
        if not 0 <= state.target < graph.n:
            raise ValueError(f"target {state.target} is not a vertex")
        self.graph = graph
        self.dist = dist
        self.state = state
        self.queries = 0
        self.lies: list[bool] = []
        self._uniforms = _Uniforms(state.rng_seed)

    @property
    def target(self) -> int:
        return self.state.target

    def correct_arcs(self, q: int) -> list[int]:
        t = self.target
        d = self.dist.d
        return [i for i in self.graph.out_arcs[q] if d[q, t] == self.graph.arcs[i].weight + d[self.graph.arcs[i].target, t]]

    def _pick_correct(self, q: int, mirror, u: float, survivors) -> int:
        arcs = self.correct_arcs(q)
        if not arcs:
            raise GraphError(f"no correct arc out of {q}; graph is not strongly connected")
        policy = self.state.correct_policy
        if policy is CorrectPolicy.MIN_EDGE_ID or len(arcs) == 1:
            return arcs[0]
        if policy is CorrectPolicy.RANDOM:
            return arcs[min(int(u * len(arcs)), len(arcs) - 1)]
        mask = _mirror_set(mirror, self.graph.n)
        counts = [int(np.count_nonzero(mask & survivors(i))) for i in arcs]
        return arcs[int(np.argmax(counts))]

    def _truthful(self, q: int, mirror, u: float) -> QueryResponse:
        if q == self.target:
            return Target(q)
        arc = self._pick_correct(q, mirror, u, lambda i: reach_mask(self.graph, self.dist, q, i))
        return EdgeResponse(arc)

    def answer_truthful(self, q: int, mirror: CandidateSet | WeightVector | None = None) -> QueryResponse:
        _, u = self._uniforms.pair()
        self.queries += 1
        self.lies.append(False)
        return self._truthful(q, mirror, u)

    def _responses(self, q: int) -> list[QueryResponse]:
        return [Target(q)] + [EdgeResponse(i) for i in self.graph.out_arcs[q]]

    def _consistent_mask(self, q: int, r: QueryResponse) -> np.ndarray:
        if isinstance(r, Target):
            mask = np.zeros(self.graph.n, dtype=bool)
            mask[q] = True
            return mask
        return reach_mask(self.graph, self.dist, q, r.arc)

    def _mirrored_lie(self, q: int, weights: WeightVector) -> QueryResponse:
        p, t, mu = self.state.p, self.target, weights.mu
        best, best_ratio = None, -1.0
        for r in self._responses(q):
            c = self._consistent_mask(q, r)
            inside = float(mu[c].sum())
            total = p * inside + (1 - p) * (mu.sum() - inside)
            t_w = mu[t] * (p if c[t] else 1 - p)
            ratio = max(total - t_w, 0.0) / t_w if t_w > 0 else np.inf
            if ratio > best_ratio:
                best, best_ratio = r, ratio
        return best

    def answer_noisy(self, q: int, mirror_weights: WeightVector | None = None) -> QueryResponse:
        p = self.state.p
        if not 0.5 < p < 1:
            raise ValueError(f"noisy answers need 1/2 < p < 1, got {p}")
        coin, u = self._uniforms.pair()
        self.queries += 1
        truthful = coin < p
        self.lies.append(not truthful)
        if truthful:
            return self._truthful(q, mirror_weights, u)
        if self.state.lie_policy is LiePolicy.UNIFORM or mirror_weights is None or mirror_weights.empty:
            options = self._responses(q)
            return options[min(int(u * len(options)), len(options) - 1)]
        return self._mirrored_lie(q, mirror_weights)

    def answer(self, q: int, mirror: CandidateSet | WeightVector | None = None) -> QueryResponse:
        if self.state.p == 1.0:
            return self.answer_truthful(q, mirror)
        return self.answer_noisy(q, mirror if isinstance(mirror, WeightVector) else None)


class DistanceOracle(VertexOracle):
    """Noise-free oracle that reveals ``d(q, t)`` along with a shortest-path arc."""

    def __init__(self, graph: Graph, dist: DistanceMatrix, state: OracleState) -> None:
        if state.p != 1.0:
            raise ValueError("the distance-informed oracle is noise-free (p = 1)")
        super().__init__(graph, dist, state)

    def answer_distance_informed(self, q: int, mirror: CandidateSet | None = None) -> QueryResponse:
        _, u = self._uniforms.pair()
        self.queries += 1
        self.lies.append(False)
        if q == self.target:
            return Target(q)
        ell = int(self.dist.d[q, self.target])
        arc = self._pick_correct(q, mirror, u, lambda i: reach_dist_mask(self.graph, self.dist, q, i, ell))
        return EdgeDist(arc, ell)

    answer = answer_distance_informed


class TreeIndex:
    """Rooted DFS numbering of a tree for O(1) subtree tests."""

    def __init__(self, tree: Graph) -> None:
        if not tree.is_tree():
            raise GraphError("edge queries need an undirected tree")
        n = tree.n
        self.parent = [-1] * n
        self.tin = [0] * n
        self.tout = [0] * n
        clock = 0
        stack = [(0, iter(tree.neighbors(0)))]
        self.tin[0] = clock
        clock += 1
        while stack:
            u, it = stack[-1]
            for v in it:
                if v != self.parent[u]:
                    self.parent[v] = u
                    self.tin[v] = clock
                    clock += 1
                    stack.append((v, iter(tree.neighbors(v))))
                    break
            else:
                self.tout[u] = clock
                stack.pop()

    def side(self, u: int, v: int, t: int) -> int:
        """Endpoint of edge ``{u, v}`` whose component (edge removed) holds ``t``."""
        if self.parent[v] == u:
            child, other = v, u
        elif self.parent[u] == v:
            child, other = u, v
        else:
            raise GraphError(f"{{{u}, {v}}} is not an edge of the tree")
        return child if self.tin[child] <= self.tin[t] < self.tout[child] else other


class EdgeQueryOracle:
    """Tree edge-query oracle: answers which endpoint's side holds the target."""

    def __init__(self, tree: Graph, target: int) -> None:
        if not 0 <= target < tree.n:
            raise ValueError(f"target {target} is not a vertex")
        self.tree = tree
        self.target = target
        self.index = TreeIndex(tree)
        self.queries = 0

    def answer_edge_query(self, u: int, v: int) -> Side:
        self.queries += 1
        return Side(self.index.side(u, v, self.target))

    answer_edge = answer_edge_query
