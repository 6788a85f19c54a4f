"""Weighted (di)graphs, exact all-pairs distances and Reach sets.

Vertex ids are ``0..n-1``. An undirected edge ``{u, v}`` is stored as the two
arcs ``(u, v)`` and ``(v, u)`` with consecutive arc indices, so every algorithm
works on arcs regardless of orientation.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

# Total weight bound for the float64 route (every path length stays exact).
_FLOAT_EXACT = 2**53
_WEIGHT_LIMIT = 2**62


class GraphError(ValueError):
    """Raised for malformed graph input or graph-level usage errors."""


class Arc(NamedTuple):
    source: int
    target: int
    weight: int


class CandidateSet:
    """Immutable vertex set over ``0..n-1`` backed by an integer bitmask."""

    __slots__ = ("bits", "n")

    def __init__(self, bits: int, n: int) -> None:
        if bits < 0 or bits >> n:
            raise ValueError("bitmask has members outside 0..n-1")
        self.bits = bits
        self.n = n

    @classmethod
    def full(cls, n: int) -> CandidateSet:
        return cls((1 << n) - 1, n)

    @classmethod
    def empty(cls, n: int) -> CandidateSet:
        return cls(0, n)

    @classmethod
    def of(cls, n: int, members: Iterable[int]) -> CandidateSet:
        bits = 0
        for v in members:
            if not 0 <= v < n:
                raise ValueError(f"vertex {v} out of range for n={n}")
            bits |= 1 << v
        return cls(bits, n)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> CandidateSet:
        packed = np.packbits(np.asarray(mask, dtype=bool), bitorder="little")
        return cls(int.from_bytes(packed.tobytes(), "little"), len(mask))

    def to_mask(self) -> np.ndarray:
        nbytes = (self.n + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, count=self.n, bitorder="little").astype(bool)

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def __iter__(self) -> Iterator[int]:
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def __contains__(self, v: object) -> bool:
        return isinstance(v, (int, np.integer)) and 0 <= v < self.n and bool(self.bits >> int(v) & 1)

    def _check(self, other: CandidateSet) -> None:
        if self.n != other.n:
            raise ValueError("candidate sets over different vertex counts")

    def __and__(self, other: CandidateSet) -> CandidateSet:
        self._check(other)
        return CandidateSet(self.bits & other.bits, self.n)

    def __or__(self, other: CandidateSet) -> CandidateSet:
        self._check(other)
        return CandidateSet(self.bits | other.bits, self.n)

    def __sub__(self, other: CandidateSet) -> CandidateSet:
        self._check(other)
        return CandidateSet(self.bits & ~other.bits, self.n)

    def __le__(self, other: CandidateSet) -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CandidateSet):
            return self.bits == other.bits and self.n == other.n
        if isinstance(other, (set, frozenset)):
            return set(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.bits, self.n))

    def __repr__(self) -> str:
        return f"CandidateSet({sorted(self)}, n={self.n})"

    def only(self) -> int:
        """The single member; raises if the set is not a singleton."""
        if self.bits == 0 or self.bits & (self.bits - 1):
            raise ValueError(f"expected a singleton, got {len(self)} members")
        return self.bits.bit_length() - 1


@dataclass(frozen=True, eq=False)
class Graph:
    """Positively integer-weighted, (strongly) connected graph.

    ``edges`` keeps the input edge list (each undirected edge once) and is
    what gets written back to the text format.
    """

    directed: bool
    n: int
    edges: tuple[Arc, ...]
    arcs: tuple[Arc, ...] = field(init=False, repr=False)
    out_arcs: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise GraphError("graph needs at least one vertex")
        arcs: list[Arc] = []
        seen: set[tuple[int, int]] = set()
        for raw in self.edges:
            u, v, w = (int(x) for x in raw)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{self.n - 1}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if w < 1:
                raise GraphError(f"edge ({u}, {v}) has non-positive weight {w}")
            pairs = [(u, v)] if self.directed else [(u, v), (v, u)]
            for a, b in pairs:
                if (a, b) in seen:
                    raise GraphError(f"duplicate arc ({a}, {b}); multigraphs are not supported")
                seen.add((a, b))
                arcs.append(Arc(a, b, w))
        if sum(a.weight for a in arcs) >= _WEIGHT_LIMIT:
            raise GraphError("total edge weight risks 64-bit overflow (must be < 2^62)")
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, a in enumerate(arcs):
            out[a.source].append(i)
        object.__setattr__(self, "edges", tuple(Arc(int(u), int(v), int(w)) for u, v, w in self.edges))
        object.__setattr__(self, "arcs", tuple(arcs))
        object.__setattr__(self, "out_arcs", tuple(tuple(x) for x in out))
        self._check_connected()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int] | tuple[int, int, int]], directed: bool = False) -> Graph:
        """Build from ``(u, v)`` or ``(u, v, w)`` tuples; missing weights are 1."""
        full = [Arc(e[0], e[1], e[2] if len(e) > 2 else 1) for e in edges]
        return cls(directed=directed, n=n, edges=tuple(full))

    def _check_connected(self) -> None:
        def reached(adj: list[list[int]]) -> int:
            seen = [False] * self.n
            seen[0] = True
            queue = deque([0])
            count = 1
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        count += 1
                        queue.append(v)
            return count

        fwd: list[list[int]] = [[] for _ in range(self.n)]
        rev: list[list[int]] = [[] for _ in range(self.n)]
        for a in self.arcs:
            fwd[a.source].append(a.target)
            rev[a.target].append(a.source)
        if reached(fwd) != self.n or (self.directed and reached(rev) != self.n):
            kind = "strongly connected" if self.directed else "connected"
            raise GraphError(f"graph is not {kind}")

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return len(self.out_arcs[u])

    def neighbors(self, u: int) -> list[int]:
        return [self.arcs[i].target for i in self.out_arcs[u]]

    def find_arc(self, u: int, v: int) -> int:
        """Index of the arc ``u -> v``."""
        for i in self.out_arcs[u]:
            if self.arcs[i].target == v:
                return i
        raise GraphError(f"no arc ({u}, {v})")

    def is_tree(self) -> bool:
        return not self.directed and self.m == self.n - 1

    @cached_property
    def arc_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        src = np.fromiter((a.source for a in self.arcs), dtype=np.int64, count=len(self.arcs))
        dst = np.fromiter((a.target for a in self.arcs), dtype=np.int64, count=len(self.arcs))
        w = np.fromiter((a.weight for a in self.arcs), dtype=np.int64, count=len(self.arcs))
        return src, dst, w

    # -- text format -------------------------------------------------------

    def to_text(self) -> str:
        kind = "directed" if self.directed else "undirected"
        lines = [f"{kind} {self.n} {self.m}"]
        lines.extend(f"{u} {v} {w}" for u, v, w in self.edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Graph:
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            body = line.split("#", 1)[0].strip()
            if body:
                rows.append((lineno, body.split()))
        if not rows:
            raise GraphError("empty graph file")
        lineno, head = rows[0]
        if len(head) != 3 or head[0] not in ("directed", "undirected"):
            raise GraphError(f"line {lineno}: expected 'directed|undirected <n> <m>'")
        try:
            n, m = int(head[1]), int(head[2])
        except ValueError:
            raise GraphError(f"line {lineno}: n and m must be integers") from None
        body = rows[1:]
        if len(body) != m:
            raise GraphError(f"header declares {m} edges but {len(body)} edge lines follow")
        edges = []
        for lineno, parts in body:
            if len(parts) != 3:
                raise GraphError(f"line {lineno}: expected '<u> <v> <w>'")
            try:
                edges.append(Arc(*(int(x) for x in parts)))
            except ValueError:
                raise GraphError(f"line {lineno}: non-integer field") from None
        return cls(directed=head[0] == "directed", n=n, edges=tuple(edges))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> Graph:
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """``d[u, v]`` is the exact shortest ``u -> v`` path length (int64)."""

    d: np.ndarray

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def __getitem__(self, key):
        return self.d[key]

    @cached_property
    def as_float(self) -> np.ndarray:
        f = self.d.astype(np.float64)
        f.flags.writeable = False
        return f


def _dijkstra_python(graph: Graph) -> np.ndarray:
    adj: list[list[tuple[int, int]]] = [[] for _ in range(graph.n)]
    for a in graph.arcs:
        adj[a.source].append((a.target, a.weight))
    out = np.zeros((graph.n, graph.n), dtype=np.int64)
    for s in range(graph.n):
        best: dict[int, int] = {s: 0}
        done = [False] * graph.n
        heap = [(0, s)]
        while heap:
            du, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            out[s, u] = du
            for v, w in adj[u]:
                nd = du + w
                if nd < best.get(v, nd + 1):
                    best[v] = nd
                    heapq.heappush(heap, (nd, v))
    return out


def dijkstra_all_pairs(graph: Graph) -> DistanceMatrix:
    """Exact all-pairs shortest path lengths.

    Uses scipy's Dijkstra when every path length fits in the float64 mantissa
    and a pure-Python heap Dijkstra otherwise.
    """
    total = sum(a.weight for a in graph.arcs)
    if total < _FLOAT_EXACT:
        src, dst, w = graph.arc_arrays
        mat = csr_matrix((w.astype(np.float64), (src, dst)), shape=(graph.n, graph.n))
        raw = dijkstra(mat, directed=True)
        if not np.all(np.isfinite(raw)):
            raise GraphError("graph is not strongly connected")
        d = raw.astype(np.int64)
    else:
        d = _dijkstra_python(graph)
    d.flags.writeable = False
    return DistanceMatrix(d)


def _arc(graph: Graph, u: int, e: int | Arc) -> Arc:
    if isinstance(e, Arc):
        arc = e
        if arc.source != u or arc not in (graph.arcs[i] for i in graph.out_arcs[u]):
            raise GraphError(f"{arc} is not an arc out of {u}")
        return arc
    if not 0 <= e < len(graph.arcs) or graph.arcs[e].source != u:
        raise GraphError(f"arc index {e} is not an arc out of {u}")
    return graph.arcs[e]


def reach_mask(graph: Graph, dist: DistanceMatrix, u: int, e: int | Arc) -> np.ndarray:
    """Boolean mask of ``Reach(u, e)``: vertices ``w`` with ``d(u,w) = w(e) + d(v,w)``."""
    arc = _arc(graph, u, e)
    return dist.d[u] == arc.weight + dist.d[arc.target]


def reach(graph: Graph, dist: DistanceMatrix, u: int, e: int | Arc) -> CandidateSet:
    return CandidateSet.from_mask(reach_mask(graph, dist, u, e))


def reach_dist_mask(graph: Graph, dist: DistanceMatrix, u: int, e: int | Arc, ell: int) -> np.ndarray:
    if ell < 0:
        raise GraphError("distance must be non-negative")
    return reach_mask(graph, dist, u, e) & (dist.d[u] == ell)


def reach_dist(graph: Graph, dist: DistanceMatrix, u: int, e: int | Arc, ell: int) -> CandidateSet:
    return CandidateSet.from_mask(reach_dist_mask(graph, dist, u, e, ell))


@dataclass(frozen=True)
class GraphMetadata:
    n: int
    m: int
    max_degree: int
    diameter: int
    cycle_constant: Fraction


def metadata(graph: Graph, dist: DistanceMatrix) -> GraphMetadata:
    """Counts, max out-degree, diameter, and the cycle constant ``c``.

    ``c`` is the largest ``(w(e) + d(v, u)) / w(e)`` over arcs ``e = (u, v)``:
    every arc closes a cycle of weight at most ``c * w(e)``. It is exactly 2
    for undirected graphs and never reported below 2.
    """
    c = Fraction(2)
    for a in graph.arcs:
        c = max(c, Fraction(a.weight + int(dist.d[a.target, a.source]), a.weight))
    return GraphMetadata(
        n=graph.n,
        m=graph.m,
        max_degree=max((graph.degree(u) for u in range(graph.n)), default=0),
        diameter=int(dist.d.max()) if graph.n else 0,
        cycle_constant=c,
    )
