"""Search strategies: each runs against an oracle and returns a transcript.

Vertex-query oracles expose ``answer(q, mirror)`` where ``mirror`` is the
strategy's current candidate set or weight vector; edge-query oracles expose
``answer_edge(u, v)``. The human oracle of the interactive CLI implements the
same two methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Protocol

import numpy as np

from .graph import CandidateSet, DistanceMatrix, Graph, GraphError, reach_dist_mask, reach_mask
from .median import WeightVector, argmin_tol, dir_potentials, potentials, weighted_potentials
from .oracles import EdgeDist, EdgeResponse, QueryResponse, Side, Target, format_response, response_ordinal


class ProtocolViolation(RuntimeError):
    """The oracle gave a response that no candidate is consistent with."""


class VertexOracleLike(Protocol):
    def answer(self, q: int, mirror: Any = None) -> QueryResponse: ...


class EdgeOracleLike(Protocol):
    def answer_edge(self, u: int, v: int) -> Side: ...


@dataclass
class TranscriptEntry:
    step: int
    query: int | tuple[int, int]
    response: QueryResponse
    potential: int | float | None = None
    candidate_count: int | None = None
    log2_total: float | None = None
    phase: int | None = None

    def to_record(self, graph: Graph) -> dict[str, Any]:
        return {
            "step": self.step,
            "query": list(self.query) if isinstance(self.query, tuple) else self.query,
            "response": format_response(graph, self.response),
            "potential": self.potential,
            "candidate_count": self.candidate_count,
            "log2_total": self.log2_total,
            "phase": self.phase,
        }


@dataclass
class StrategyOutcome:
    returned: int | None
    query_count: int
    transcript: list[TranscriptEntry] = field(default_factory=list)
    success: bool | None = None
    extras: dict[str, Any] = field(default_factory=dict)


def transcript_lines(graph: Graph, transcript: list[TranscriptEntry]) -> str:
    """One JSON object per entry, keys in fixed order."""
    import json

    return "".join(json.dumps(e.to_record(graph)) + "\n" for e in transcript)


def _apply_vertex_response(
    graph: Graph, dist: DistanceMatrix, S: CandidateSet, q: int, r: QueryResponse, with_dist: bool
) -> CandidateSet:
    if with_dist:
        if not isinstance(r, EdgeDist):
            raise ProtocolViolation(f"expected an edge with distance, got {r!r}")
        mask = reach_dist_mask(graph, dist, q, r.arc, r.dist)
    else:
        if not isinstance(r, EdgeResponse):
            raise ProtocolViolation(f"expected an edge response, got {r!r}")
        mask = reach_mask(graph, dist, q, r.arc)
    new = S & CandidateSet.from_mask(mask)
    if not new:
        raise ProtocolViolation(f"response {format_response(graph, r)} to query {q} leaves no candidate")
    return new


def _median_search(graph: Graph, dist: DistanceMatrix, oracle: VertexOracleLike, with_dist: bool) -> StrategyOutcome:
    S = CandidateSet.full(graph.n)
    transcript: list[TranscriptEntry] = []
    while len(S) > 1:
        pots = dir_potentials(dist, S) if with_dist else potentials(dist, S)
        q = int(np.argmin(pots))
        r = oracle.answer(q, S)
        entry = TranscriptEntry(len(transcript), q, r, int(pots[q]))
        transcript.append(entry)
        if isinstance(r, Target):
            if q not in S:
                raise ProtocolViolation(f"vertex {q} was already ruled out but was reported as the target")
            entry.candidate_count = 1
            return StrategyOutcome(q, len(transcript), transcript)
        S = _apply_vertex_response(graph, dist, S, q, r, with_dist)
        entry.candidate_count = len(S)
    return StrategyOutcome(S.only(), len(transcript), transcript)


def deterministic_search(graph: Graph, dist: DistanceMatrix, oracle: VertexOracleLike) -> StrategyOutcome:
    """Repeatedly query a 1-median of the candidates (undirected graphs)."""
    if graph.directed:
        raise GraphError("deterministic_search needs an undirected graph; use almost_undirected_search")
    return _median_search(graph, dist, oracle, with_dist=False)


def almost_undirected_search(graph: Graph, dist: DistanceMatrix, oracle: VertexOracleLike) -> StrategyOutcome:
    """The median strategy on directed distances; also accepts undirected graphs."""
    return _median_search(graph, dist, oracle, with_dist=False)


def distance_informed_search(graph: Graph, dist: DistanceMatrix, oracle: VertexOracleLike) -> StrategyOutcome:
    """Median strategy under the directed potential, for oracles that reveal d(q, t)."""
    return _median_search(graph, dist, oracle, with_dist=True)


# -- noisy search -------------------------------------------------------------


def binary_entropy(p: float) -> float:
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@dataclass
class NoisyConfig:
    p: float
    delta: float
    n: int
    delta_prime: float = field(init=False)
    entropy: float = field(init=False)
    capacity: float = field(init=False)
    lambda1: float = field(init=False)
    lambda2: float = field(init=False)
    k1: int = field(init=False)
    k2: int | None = None
    reps: int | None = None

    def __post_init__(self) -> None:
        p, n = self.p, self.n
        self.delta_prime = self.delta / 3
        self.entropy = binary_entropy(p)
        self.capacity = 1 - self.entropy
        lr = self.log_ratio
        loglog = max(1.0, math.log2(math.log2(n))) if n > 2 else 1.0
        # The asymptotic choice of lambda1 can violate lambda < C/log(p/(1-p)) at small n.
        self.lambda1 = min(math.sqrt(1 / max(1 / self.delta_prime, loglog)), self.capacity / (2 * lr))
        self.lambda2 = self.capacity / (2 * lr)
        self.k1 = self.iterations(n, self.lambda1)

    @property
    def log_ratio(self) -> float:
        return math.log2(self.p / (1 - self.p))

    def iterations(self, size: int, lam: float) -> int:
        info = math.log2(size) / (self.capacity - lam * self.log_ratio) if size > 0 else 0.0
        conf = math.log(1 / self.delta_prime) / (2 * lam**2)
        return math.ceil(max(info, conf))

    def set_second_phase(self, s1_size: int) -> int:
        self.k2 = self.iterations(max(s1_size, 1), self.lambda2)
        return self.k2

    def repetitions(self, s2_size: int) -> int:
        self.reps = math.ceil(2 * math.log2(s2_size / self.delta_prime) / (2 * self.p - 1) ** 2)
        return self.reps

    def budget(self, s2_size: int) -> int:
        k2 = self.k2 if self.k2 is not None else -1
        reps = self.reps if self.reps is not None else 0
        return (self.k1 + 1) + (k2 + 1) + s2_size * reps

    def as_dict(self) -> dict[str, Any]:
        keys = ("p", "delta", "n", "delta_prime", "entropy", "capacity", "lambda1", "lambda2", "k1", "k2", "reps")
        return {k: getattr(self, k) for k in keys}


@dataclass
class MultiWeightsResult:
    marked: list[int]
    iterations: int
    queries: int
    weights: WeightVector
    log2_history: list[float]
    transcript: list[TranscriptEntry]


def _check_p(p: float) -> None:
    if not 0.5 < p < 1:
        raise ValueError(f"noisy search needs 1/2 < p < 1, got {p}")


def multiweights(
    graph: Graph, dist: DistanceMatrix, S: CandidateSet, K: int, p: float, oracle: VertexOracleLike
) -> MultiWeightsResult:
    """Multiplicative-weights search over ``S`` for ``K + 1`` iterations.

    A weighted median holding at least half the weight is marked and zeroed
    without a query; otherwise it is queried and consistent vertices are
    scaled by ``p``, the rest by ``1 - p``. ``log2_history[i]`` is the log2
    total weight after iteration ``i``, starting from 0.
    """
    _check_p(p)
    weights = WeightVector.uniform(S)
    marked: list[int] = []
    history: list[float] = [weights.log2_total]
    transcript: list[TranscriptEntry] = []
    iterations = 0
    for _ in range(K + 1):
        if weights.empty:
            break
        iterations += 1
        pots = weighted_potentials(dist, weights)
        q = argmin_tol(pots)
        mu = weights.mu
        if mu[q] >= 0.5 * mu.sum():
            marked.append(q)
            factors = np.ones(graph.n)
            factors[q] = 0.0
            weights.scale(factors)
        else:
            r = oracle.answer(q, weights)
            if isinstance(r, Target):
                consistent = np.zeros(graph.n, dtype=bool)
                consistent[q] = True
            elif isinstance(r, EdgeResponse):
                consistent = reach_mask(graph, dist, q, r.arc)
            else:
                raise ProtocolViolation(f"unexpected response {r!r}")
            weights.scale(np.where(consistent, p, 1 - p))
            transcript.append(
                TranscriptEntry(len(transcript), q, r, float(pots[q]), log2_total=weights.log2_total)
            )
        history.append(weights.log2_total)
    return MultiWeightsResult(marked, iterations, len(transcript), weights, history, transcript)


def _check_noisy_args(graph: Graph, p: float, delta: float, allow_one: bool = False) -> None:
    if graph.directed:
        raise GraphError("noisy search needs a connected undirected graph")
    _check_p(p)
    if not (0 < delta < 1 or allow_one and delta == 1):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def noisy_search(
    graph: Graph,
    dist: DistanceMatrix,
    p: float,
    delta: float,
    oracle: VertexOracleLike,
    rng: np.random.Generator | None = None,
) -> StrategyOutcome:
    """Two multiplicative-weights phases followed by repeated confirmation queries.

    Needs ``delta <= 1 / log2 n``; see :func:`noisy_search_amortized` for
    larger ``delta``. Returns ``returned=None`` when no survivor is confirmed.
    """
    _check_noisy_args(graph, p, delta)
    n = graph.n
    if n > 2 and delta > 1 / math.log2(n) * (1 + 1e-12):
        raise ValueError(f"delta={delta} exceeds 1/log2(n)={1 / math.log2(n):.6g}; use noisy_search_amortized")
    cfg = NoisyConfig(p, delta, n)
    transcript: list[TranscriptEntry] = []

    first = multiweights(graph, dist, CandidateSet.full(n), cfg.k1, p, oracle)
    transcript.extend(first.transcript)
    s1 = CandidateSet.of(n, first.marked)
    cfg.set_second_phase(len(s1))
    extras: dict[str, Any] = {"config": cfg, "phase1": first, "phase2": None, "s1": first.marked, "s2": []}
    if not s1:
        extras["budget"] = cfg.budget(0)
        return _renumber(StrategyOutcome(None, len(transcript), transcript, extras=extras))

    second = multiweights(graph, dist, s1, cfg.k2, p, oracle)
    transcript.extend(second.transcript)
    extras["phase2"] = second
    s2 = second.marked
    extras["s2"] = s2
    if not s2:
        extras["budget"] = cfg.budget(0)
        return _renumber(StrategyOutcome(None, len(transcript), transcript, extras=extras))

    reps = cfg.repetitions(len(s2))
    extras["budget"] = cfg.budget(len(s2))
    mirror = WeightVector.uniform(CandidateSet.of(n, s2))
    for v in s2:
        hits = 0
        for _ in range(reps):
            r = oracle.answer(v, mirror)
            hits += isinstance(r, Target)
            transcript.append(TranscriptEntry(0, v, r))
        if 2 * hits >= reps:
            return _renumber(StrategyOutcome(v, len(transcript), transcript, extras=extras))
    return _renumber(StrategyOutcome(None, len(transcript), transcript, extras=extras))


def _renumber(outcome: StrategyOutcome) -> StrategyOutcome:
    for i, e in enumerate(outcome.transcript):
        e.step = i
    return outcome


def noisy_search_amortized(
    graph: Graph,
    dist: DistanceMatrix,
    p: float,
    delta: float,
    oracle: VertexOracleLike,
    rng: np.random.Generator,
) -> StrategyOutcome:
    """For ``delta >= 1/log2 n``: with probability ``delta - 1/log2 n`` answer vertex 0
    without querying, otherwise run :func:`noisy_search` at ``1/log2 n``."""
    _check_noisy_args(graph, p, delta, allow_one=True)
    if graph.n < 3:
        raise ValueError("the amortized wrapper needs n >= 3")
    inv_log = 1 / math.log2(graph.n)
    if delta < inv_log * (1 - 1e-12):
        raise ValueError(f"delta={delta} is below 1/log2(n)={inv_log:.6g}; call noisy_search directly")
    if rng.random() < delta - inv_log:
        return StrategyOutcome(0, 0, [], extras={"short_branch": True, "budget": 0})
    outcome = noisy_search(graph, dist, p, min(inv_log, delta), oracle)
    outcome.extras["short_branch"] = False
    return outcome


def majority_reps(n: int, p: float, delta: float) -> int:
    rounds = math.ceil(math.log2(n)) if n > 1 else 0
    if rounds == 0:
        return 0
    return math.ceil(2 * math.log(rounds / delta) / (2 * p - 1) ** 2)


def majority_tree_baseline(
    tree: Graph,
    dist: DistanceMatrix,
    p: float,
    delta: float,
    oracle: VertexOracleLike,
    rng: np.random.Generator | None = None,
) -> StrategyOutcome:
    """Deterministic median search on a tree, each query repeated and decided by plurality.

    Ties in the vote go to the lowest response ordinal. A vote that rules out
    every candidate ends the run with ``returned=None``.
    """
    if not tree.is_tree():
        raise GraphError("the majority-vote baseline only works on trees")
    _check_p(p)
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    reps = majority_reps(tree.n, p, delta)
    S = CandidateSet.full(tree.n)
    transcript: list[TranscriptEntry] = []
    extras: dict[str, Any] = {"reps": reps, "rounds": 0}
    while len(S) > 1:
        pots = potentials(dist, S)
        q = int(np.argmin(pots))
        votes: dict[int, list[QueryResponse]] = {}
        for _ in range(reps):
            r = oracle.answer(q, S)
            votes.setdefault(response_ordinal(r), []).append(r)
            transcript.append(TranscriptEntry(len(transcript), q, r, int(pots[q])))
        extras["rounds"] += 1
        ordinal = max(sorted(votes), key=lambda k: len(votes[k]))
        winner = votes[ordinal][0]
        if isinstance(winner, Target):
            return StrategyOutcome(q, len(transcript), transcript, extras=extras)
        new = S & CandidateSet.from_mask(reach_mask(tree, dist, q, winner.arc))
        if not new:
            return StrategyOutcome(None, len(transcript), transcript, extras=extras)
        S = new
        transcript[-1].candidate_count = len(S)
    return StrategyOutcome(S.only(), len(transcript), transcript, extras=extras)


def follow_edge_baseline(
    graph: Graph, dist: DistanceMatrix, oracle: VertexOracleLike, start: int = 0
) -> StrategyOutcome:
    """Walk along revealed edges from ``start``, stopping once one candidate is left."""
    if graph.directed:
        raise GraphError("follow_edge_baseline needs an undirected graph")
    S = CandidateSet.full(graph.n)
    q = start
    transcript: list[TranscriptEntry] = []
    while len(S) > 1:
        r = oracle.answer(q, S)
        entry = TranscriptEntry(len(transcript), q, r)
        transcript.append(entry)
        if isinstance(r, Target):
            if q not in S:
                raise ProtocolViolation(f"vertex {q} was already ruled out but was reported as the target")
            entry.candidate_count = 1
            return StrategyOutcome(q, len(transcript), transcript)
        S = _apply_vertex_response(graph, dist, S, q, r, with_dist=False)
        entry.candidate_count = len(S)
        q = graph.arcs[r.arc].target
    return StrategyOutcome(S.only(), len(transcript), transcript)


# -- edge queries on trees ---------------------------------------------------


@dataclass
class Phase:
    separator: int
    start_size: int
    queries: int = 0
    end_size: int | None = None
    case: int | None = None

    def shrink_ok(self) -> bool:
        """Shrink guarantee for a closed phase; the final two-vertex step is exempt."""
        k = self.queries
        if self.case == 1:
            return self.start_size >= (k + 1) * self.end_size
        if self.case == 2:
            return 2 * self.start_size >= (k + 2) * self.end_size
        return True


class _SubTree:
    def __init__(self, tree: Graph) -> None:
        self.adj = [sorted(tree.neighbors(u)) for u in range(tree.n)]
        self.alive = bytearray([1]) * tree.n
        self.size = tree.n
        self._stamp = [0] * tree.n
        self._clock = 0

    def components(self, v: int) -> list[tuple[int, list[int]]]:
        """Components of the current subtree minus ``v``, keyed by neighbor, in id order."""
        self._clock += 1
        stamp, clock, alive, adj = self._stamp, self._clock, self.alive, self.adj
        stamp[v] = clock
        out = []
        for u in adj[v]:
            if not alive[u]:
                continue
            stamp[u] = clock
            members = [u]
            i = 0
            while i < len(members):
                x = members[i]
                i += 1
                for y in adj[x]:
                    if alive[y] and stamp[y] != clock:
                        stamp[y] = clock
                        members.append(y)
            out.append((u, members))
        return out

    def is_separator(self, v: int, comps: list[tuple[int, list[int]]]) -> bool:
        return self.alive[v] and all(2 * len(m) <= self.size for _, m in comps)

    def lowest_separator(self) -> int:
        alive, adj = self.alive, self.adj
        root = alive.index(1)
        parent = {root: -1}
        order = [root]
        i = 0
        while i < len(order):
            x = order[i]
            i += 1
            for y in adj[x]:
                if alive[y] and y not in parent:
                    parent[y] = x
                    order.append(y)
        sub = dict.fromkeys(order, 1)
        heaviest = dict.fromkeys(order, 0)
        for x in reversed(order):
            px = parent[x]
            if px >= 0:
                sub[px] += sub[x]
                heaviest[px] = max(heaviest[px], sub[x])
        return min(x for x in order if 2 * max(heaviest[x], self.size - sub[x]) <= self.size)

    def keep_only(self, members: list[int]) -> None:
        self.alive = bytearray(len(self.alive))
        for x in members:
            self.alive[x] = 1
        self.size = len(members)

    def remove(self, members: list[int]) -> None:
        for x in members:
            self.alive[x] = 0
        self.size -= len(members)


def tree_edge_search(tree: Graph, oracle: EdgeOracleLike) -> StrategyOutcome:
    """Edge-query search on an unweighted tree around a sticky separator.

    Each query cuts the edge from the separator to its largest remaining
    subtree. ``extras["phases"]`` lists the maximal runs sharing a separator
    with their start/end sizes and how they ended (1: separator cut away,
    2: separator stopped being one, 3: search finished on a two-vertex tree).
    """
    if not tree.is_tree():
        raise GraphError("tree_edge_search needs an undirected tree")
    if any(a.weight != 1 for a in tree.arcs):
        raise GraphError("tree_edge_search works on unweighted trees")
    sub = _SubTree(tree)
    transcript: list[TranscriptEntry] = []
    phases: list[Phase] = []
    v = sub.lowest_separator()
    phase = Phase(v, sub.size)
    while sub.size > 1:
        comps = sub.components(v) if sub.alive[v] else []
        if not sub.is_separator(v, comps):
            phase.end_size = sub.size
            phase.case = 1 if not sub.alive[v] else 2
            phases.append(phase)
            v = sub.lowest_separator()
            comps = sub.components(v)
            phase = Phase(v, sub.size)
        u, members = max(comps, key=lambda c: len(c[1]))
        final_step = sub.size == 2
        r = oracle.answer_edge(v, u)
        if r.vertex == u:
            sub.keep_only(members)
        elif r.vertex == v:
            sub.remove(members)
        else:
            raise ProtocolViolation(f"side {r.vertex} is not an endpoint of edge ({v}, {u})")
        if final_step:
            phase.case = 3
        else:
            phase.queries += 1
        transcript.append(TranscriptEntry(len(transcript), (v, u), r, candidate_count=sub.size, phase=len(phases)))
    if phase.queries or phase.case == 3:
        phase.end_size = sub.size
        if phase.case is None:
            phase.case = 1 if not sub.alive[v] else 2
        phases.append(phase)
    returned = sub.alive.index(1)
    return StrategyOutcome(returned, len(transcript), transcript, extras={"phases": phases})


# -- closed-form query bounds ------------------------------------------------


def log2_floor(n: int) -> int:
    return n.bit_length() - 1


def almost_undirected_bound(n: int, c: Fraction) -> int:
    """Least ``k`` with ``(c/(c-1))^k >= n``, evaluated in exact rationals."""
    ratio = Fraction(c) / (Fraction(c) - 1)
    k, power = 0, Fraction(1)
    while power < n:
        power *= ratio
        k += 1
    return k


def tree_edge_bound(n: int, max_degree: int) -> float:
    if max_degree <= 1:
        return 1.0
    return 1 + (max_degree - 1) / (math.log2(max_degree + 1) - 1) * math.log2(n)
