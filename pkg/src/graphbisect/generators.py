"""Seeded instance families.

Random families draw from numpy's PCG64 bit generator seeded with the GeneratorSpec's
64-bit seed, so a spec always produces the same graph.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .graph import Arc, Graph, GraphError

MAX_ATTEMPTS = 1000


class Family(str, Enum):
    PATH = "path"
    STAR = "star"
    COMPLETE_BINARY_TREE = "complete-binary-tree"
    RANDOM_TREE = "random-tree"
    GRID = "grid"
    ER_CONNECTED = "er-connected"
    DIRECTED_CYCLE = "directed-cycle"
    NEST_CYCLE = "nest-cycle"
    RANDOM_STRONGLY_CONNECTED = "random-strongly-connected"


@dataclass(frozen=True)
class GeneratorSpec:
    family: Family
    n: int | None = None
    max_degree: int | None = None
    width: int | None = None
    height: int | None = None
    m: int | None = None
    c: int | None = None
    k: int | None = None
    seed: int = 0
    wmax: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        for name in ("n", "max_degree", "width", "height", "m", "c"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise GraphError(f"{name} must be positive")
        if self.k is not None and self.k < 0:
            raise GraphError("k must be non-negative")
        if self.wmax < 1:
            raise GraphError("wmax must be at least 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return {k: v for k, v in d.items() if v is not None}

    @property
    def graph_id(self) -> str:
        parts = [self.family.value] + [f"{k}={v}" for k, v in self.to_dict().items() if k != "family"]
        return ":".join(parts)


def _need(spec: GeneratorSpec, *names: str) -> list[int]:
    values = [getattr(spec, name) for name in names]
    missing = [name for name, v in zip(names, values) if v is None]
    if missing:
        raise GraphError(f"{spec.family.value} needs parameter(s): {', '.join(missing)}")
    return values


def _weighted(pairs, rng: np.random.Generator, wmax: int) -> tuple[Arc, ...]:
    pairs = list(pairs)
    if wmax == 1:
        return tuple(Arc(u, v, 1) for u, v in pairs)
    ws = rng.integers(1, wmax, size=len(pairs), endpoint=True)
    return tuple(Arc(u, v, int(w)) for (u, v), w in zip(pairs, ws))


def nest_cycle_arcs(c: int, k: int) -> list[tuple[int, int]]:
    """Arcs of NestCycle(c, k); copy ``i`` owns ids ``[i*c^(k-1), (i+1)*c^(k-1))``."""
    if c < 2:
        raise GraphError("NestCycle needs c >= 2")
    if k == 0:
        return []
    inner = nest_cycle_arcs(c, k - 1)
    block = c ** (k - 1)
    arcs = [(u + i * block, v + i * block) for i in range(c) for u, v in inner]
    arcs.extend((i * block, ((i + 1) % c) * block) for i in range(c))
    return arcs


def _random_tree(n: int, max_degree: int | None, rng: np.random.Generator) -> list[tuple[int, int]]:
    if max_degree is not None and max_degree == 1 and n > 2:
        raise GraphError("a tree with more than two vertices needs max_degree >= 2")
    degree = [0] * n
    open_ = [0]
    edges = []
    for v in range(1, n):
        i = int(rng.integers(len(open_)))
        u = open_[i]
        edges.append((u, v))
        degree[u] += 1
        degree[v] = 1
        if max_degree is not None and degree[u] >= max_degree:
            open_[i] = open_[-1]
            open_.pop()
        if max_degree is None or max_degree > 1:
            open_.append(v)
    return edges


def _connected(n: int, pairs: list[tuple[int, int]], directed: bool) -> bool:
    try:
        Graph(directed=directed, n=n, edges=tuple(Arc(u, v, 1) for u, v in pairs))
    except GraphError:
        return False
    return True


def _random_pairs(n: int, m: int, directed: bool, rng: np.random.Generator) -> list[tuple[int, int]]:
    if directed:
        universe = [(u, v) for u in range(n) for v in range(n) if u != v]
    else:
        universe = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if m > len(universe):
        raise GraphError(f"m={m} exceeds the {len(universe)} possible edges")
    picks = np.sort(rng.choice(len(universe), size=m, replace=False))
    return [universe[i] for i in picks]


def generate(spec: GeneratorSpec) -> Graph:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    fam = spec.family
    directed = fam in (Family.DIRECTED_CYCLE, Family.NEST_CYCLE, Family.RANDOM_STRONGLY_CONNECTED)

    if fam is Family.PATH:
        (n,) = _need(spec, "n")
        pairs = [(i, i + 1) for i in range(n - 1)]
    elif fam is Family.STAR:
        (n,) = _need(spec, "n")
        pairs = [(0, i) for i in range(1, n)]
    elif fam is Family.COMPLETE_BINARY_TREE:
        (n,) = _need(spec, "n")
        pairs = [((i - 1) // 2, i) for i in range(1, n)]
    elif fam is Family.RANDOM_TREE:
        (n,) = _need(spec, "n")
        pairs = _random_tree(n, spec.max_degree, rng)
    elif fam is Family.GRID:
        w, h = _need(spec, "width", "height")
        n = w * h
        pairs = [(r * w + c, r * w + c + 1) for r in range(h) for c in range(w - 1)]
        pairs += [(r * w + c, (r + 1) * w + c) for r in range(h - 1) for c in range(w)]
    elif fam is Family.DIRECTED_CYCLE:
        (n,) = _need(spec, "n")
        if n < 2:
            raise GraphError("a directed cycle needs n >= 2")
        pairs = [(i, (i + 1) % n) for i in range(n)]
    elif fam is Family.NEST_CYCLE:
        c, k = _need(spec, "c", "k")
        n = c**k
        pairs = nest_cycle_arcs(c, k)
    elif fam in (Family.ER_CONNECTED, Family.RANDOM_STRONGLY_CONNECTED):
        n, m = _need(spec, "n", "m")
        for _ in range(MAX_ATTEMPTS):
            pairs = _random_pairs(n, m, directed, rng)
            if _connected(n, pairs, directed):
                break
        else:
            raise GraphError(f"no {'strongly ' if directed else ''}connected sample in {MAX_ATTEMPTS} attempts")
    else:  # pragma: no cover
        raise GraphError(f"unknown family {fam}")

    return Graph(directed=directed, n=n, edges=_weighted(pairs, rng, spec.wmax))
