"""Experiment runner, bound checking, reports and the interactive session.

Per-trial seeds come from :func:`derive_seed`: the first 8 bytes (little
endian) of BLAKE2b over the ``|``-joined string forms of its arguments. The
trial seed is ``derive_seed(master_seed, graph_id, target, trial)``; the
oracle and strategy streams are ``derive_seed(trial_seed, "oracle")`` and
``derive_seed(trial_seed, "strategy")``. Nothing depends on execution order,
so serial and parallel runs produce identical reports.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, TextIO

import numpy as np

from .generators import GeneratorSpec, generate
from .graph import CandidateSet, DistanceMatrix, Graph, GraphError, dijkstra_all_pairs, metadata, reach_mask
from .oracles import (
    CorrectPolicy,
    DistanceOracle,
    EdgeDist,
    EdgeQueryOracle,
    EdgeResponse,
    LiePolicy,
    OracleState,
    QueryResponse,
    Side,
    Target,
    VertexOracle,
    parse_response,
)
from .strategies import (
    StrategyOutcome,
    almost_undirected_bound,
    almost_undirected_search,
    deterministic_search,
    distance_informed_search,
    follow_edge_baseline,
    log2_floor,
    majority_reps,
    majority_tree_baseline,
    noisy_search,
    noisy_search_amortized,
    tree_edge_bound,
    tree_edge_search,
)

STRATEGIES = (
    "deterministic",
    "almost-undirected",
    "distance-informed",
    "noisy",
    "noisy-amortized",
    "tree-edge",
    "follow-edge",
    "majority-tree",
)
NOISY = {"noisy", "noisy-amortized", "majority-tree"}

RUN_FIELDS = (
    "graph_id",
    "strategy",
    "target",
    "trial",
    "seed",
    "query_count",
    "returned",
    "success",
    "budget",
    "bound",
    "bound_ok",
    "checks_ok",
)
HALVING_SLACK = 1e-9


def derive_seed(*parts: object) -> int:
    data = "|".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


@dataclass
class ExperimentConfig:
    strategy: str
    graph_file: str | None = None
    generator: GeneratorSpec | None = None
    correct_policy: str = CorrectPolicy.MIN_EDGE_ID.value
    lie_policy: str = LiePolicy.UNIFORM.value
    p: float = 1.0
    delta: float | None = None
    targets: str | int = "all"
    trials: int = 1
    seed: int = 0
    workers: int = 1
    json_out: str | None = None
    csv_out: str | None = None

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}")
        CorrectPolicy(self.correct_policy)
        LiePolicy(self.lie_policy)
        if isinstance(self.generator, dict):
            self.generator = GeneratorSpec(**self.generator)
        if (self.graph_file is None) == (self.generator is None):
            raise ValueError("give exactly one of graph_file or generator")
        if self.targets != "all":
            self.targets = int(self.targets)
            if self.targets < 1:
                raise ValueError("target sample count must be >= 1")
        if self.trials < 1 or self.workers < 1:
            raise ValueError("trials and workers must be >= 1")
        if self.strategy in NOISY:
            if self.delta is None:
                raise ValueError(f"strategy {self.strategy} needs delta")
            if not 0.5 < self.p < 1:
                raise ValueError(f"strategy {self.strategy} needs 1/2 < p < 1")
        elif self.p != 1.0:
            raise ValueError(f"strategy {self.strategy} runs against a truthful oracle (p = 1)")

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentConfig:
        return cls(**json.loads(Path(path).read_text()))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["generator"] = self.generator.to_dict() if self.generator else None
        for key in ("json_out", "csv_out", "workers"):
            d.pop(key)
        return d

    @property
    def graph_id(self) -> str:
        return self.generator.graph_id if self.generator else Path(self.graph_file).name

    def load_graph(self) -> Graph:
        return generate(self.generator) if self.generator else Graph.load(self.graph_file)


@dataclass
class RunReport:
    config: dict[str, Any]
    runs: list[dict[str, Any]] = field(default_factory=list)
    success_target: float | None = None

    @property
    def aggregates(self) -> dict[str, Any]:
        counts = [r["query_count"] for r in self.runs]
        successes = [bool(r["success"]) for r in self.runs]
        total = len(self.runs)
        frac = sum(successes) / total if total else 1.0
        threshold = success_threshold(self.success_target, total) if total else None
        return {
            "runs": total,
            "max_queries": max(counts, default=0),
            "mean_queries": statistics.fmean(counts) if counts else 0.0,
            "median_queries": statistics.median(counts) if counts else 0.0,
            "p90_queries": float(np.quantile(counts, 0.9)) if counts else 0.0,
            "success_fraction": frac,
            "success_threshold": threshold,
            "bound_violations": sum(not r["bound_ok"] for r in self.runs),
            "check_failures": sum(not r["checks_ok"] for r in self.runs),
        }

    @property
    def passed(self) -> bool:
        agg = self.aggregates
        gate = agg["success_threshold"] is None or agg["success_fraction"] >= agg["success_threshold"]
        return agg["bound_violations"] == 0 and agg["check_failures"] == 0 and gate


def success_threshold(prob: float | None, trials: int) -> float:
    """Guaranteed success probability minus a 3-sigma binomial margin."""
    prob = 1.0 if prob is None else prob
    return prob - 3 * math.sqrt(prob * (1 - prob) / trials)


def success_probability(strategy: str, n: int, delta: float | None) -> float:
    if strategy in ("noisy", "majority-tree"):
        return 1 - delta
    if strategy == "noisy-amortized":
        inv = 1 / math.log2(n)
        return (1 - delta + inv) * (1 - inv)
    return 1.0


# -- per-run invariant checks ------------------------------------------------


def _halving_ok(outcome: StrategyOutcome, n: int, ratio: Fraction | None = None) -> bool:
    before = n
    for e in outcome.transcript:
        if e.candidate_count is None:
            continue
        after = e.candidate_count
        if ratio is None:
            if after > before // 2:
                return False
        elif after > ratio * before:
            return False
        before = after
    return True


def _weights_ok(outcome: StrategyOutcome) -> bool:
    for key in ("phase1", "phase2"):
        mw = outcome.extras.get(key)
        if mw is None:
            continue
        hist = mw.log2_history
        for a, b in zip(hist, hist[1:]):
            if b != -math.inf and b > a - 1 + HALVING_SLACK:
                return False
    return True


# -- trial execution ---------------------------------------------------------


@dataclass
class _Context:
    graph: Graph
    dist: DistanceMatrix
    meta: Any
    config: ExperimentConfig
    graph_id: str


_WORKER: _Context | None = None


def _make_context(config: ExperimentConfig) -> _Context:
    graph = config.load_graph()
    dist = dijkstra_all_pairs(graph)
    return _Context(graph, dist, metadata(graph, dist), config, config.graph_id)


def _init_worker(config: ExperimentConfig) -> None:
    global _WORKER
    _WORKER = _make_context(config)


def _bound(ctx: _Context, outcome: StrategyOutcome) -> int | float:
    cfg, n, meta = ctx.config, ctx.graph.n, ctx.meta
    s = cfg.strategy
    if s in ("deterministic", "distance-informed"):
        return log2_floor(n)
    if s == "almost-undirected":
        return almost_undirected_bound(n, meta.cycle_constant)
    if s == "tree-edge":
        return tree_edge_bound(n, meta.max_degree)
    if s == "follow-edge":
        return meta.diameter
    if s == "majority-tree":
        return majority_reps(n, cfg.p, cfg.delta) * log2_floor(n)
    return outcome.extras.get("budget", 0)


def run_trial(ctx: _Context, target: int, trial: int) -> dict[str, Any]:
    cfg, graph, dist = ctx.config, ctx.graph, ctx.dist
    seed = derive_seed(cfg.seed, ctx.graph_id, target, trial)
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "strategy")))
    state = OracleState(target, cfg.correct_policy, cfg.lie_policy, cfg.p, derive_seed(seed, "oracle"))
    s = cfg.strategy
    checks = True
    if s == "tree-edge":
        outcome = tree_edge_search(graph, EdgeQueryOracle(graph, target))
        checks = all(ph.shrink_ok() for ph in outcome.extras["phases"])
    elif s == "distance-informed":
        outcome = distance_informed_search(graph, dist, DistanceOracle(graph, dist, state))
        checks = _halving_ok(outcome, graph.n)
    else:
        oracle = VertexOracle(graph, dist, state)
        if s == "deterministic":
            outcome = deterministic_search(graph, dist, oracle)
            checks = _halving_ok(outcome, graph.n)
        elif s == "almost-undirected":
            outcome = almost_undirected_search(graph, dist, oracle)
            c = ctx.meta.cycle_constant
            checks = _halving_ok(outcome, graph.n, (c - 1) / c)
        elif s == "follow-edge":
            outcome = follow_edge_baseline(graph, dist, oracle)
        elif s == "noisy":
            outcome = noisy_search(graph, dist, cfg.p, cfg.delta, oracle, rng)
            checks = _weights_ok(outcome)
        elif s == "noisy-amortized":
            outcome = noisy_search_amortized(graph, dist, cfg.p, cfg.delta, oracle, rng)
            checks = _weights_ok(outcome)
        else:
            outcome = majority_tree_baseline(graph, dist, cfg.p, cfg.delta, oracle, rng)
            checks = outcome.query_count == outcome.extras["reps"] * outcome.extras["rounds"]
    outcome.success = outcome.returned == target
    bound = _bound(ctx, outcome)
    budget = outcome.extras.get("budget")
    return {
        "graph_id": ctx.graph_id,
        "strategy": s,
        "target": target,
        "trial": trial,
        "seed": seed,
        "query_count": outcome.query_count,
        "returned": outcome.returned,
        "success": outcome.success,
        "budget": budget,
        "bound": bound,
        "bound_ok": outcome.query_count <= bound + 1e-9,
        "checks_ok": bool(checks),
    }


def _run_chunk(tasks: list[tuple[int, int]]) -> list[dict[str, Any]]:
    assert _WORKER is not None
    return [run_trial(_WORKER, t, k) for t, k in tasks]


def _check_compatible(ctx: _Context) -> None:
    g, s = ctx.graph, ctx.config.strategy
    if s in ("tree-edge", "majority-tree") and not g.is_tree():
        raise GraphError(f"strategy {s} needs a tree")
    if s in ("deterministic", "noisy", "noisy-amortized", "follow-edge") and g.directed:
        raise GraphError(f"strategy {s} needs an undirected graph")
    if s == "noisy-amortized" and g.n < 3:
        raise GraphError("noisy-amortized needs n >= 3")


def select_targets(config: ExperimentConfig, n: int, graph_id: str) -> list[int]:
    if config.targets == "all" or config.targets >= n:
        return list(range(n))
    rng = np.random.Generator(np.random.PCG64(derive_seed(config.seed, graph_id, "targets")))
    return sorted(int(x) for x in rng.choice(n, size=config.targets, replace=False))


def run_experiment(config: ExperimentConfig) -> RunReport:
    ctx = _make_context(config)
    _check_compatible(ctx)
    targets = select_targets(config, ctx.graph.n, ctx.graph_id)
    tasks = [(t, k) for t in targets for k in range(config.trials)]
    if config.workers > 1 and len(tasks) > 1:
        chunks = [tasks[i :: config.workers] for i in range(config.workers)]
        with ProcessPoolExecutor(config.workers, initializer=_init_worker, initargs=(config,)) as pool:
            runs = [r for part in pool.map(_run_chunk, chunks) for r in part]
    else:
        runs = [run_trial(ctx, t, k) for t, k in tasks]
    runs.sort(key=lambda r: (r["target"], r["trial"]))
    prob = success_probability(config.strategy, ctx.graph.n, config.delta)
    return RunReport(config.to_dict(), runs, prob)


# -- report emission ---------------------------------------------------------


def _fmt(value: Any) -> Any:
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return str(value)
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {k: _fmt(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_fmt(v) for v in value]
    return value


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def render_report(report: RunReport, fmt: str) -> str:
    if fmt == "json":
        body = {"config": report.config, "aggregates": report.aggregates, "passed": report.passed, "runs": report.runs}
        return json.dumps(_fmt(body), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RUN_FIELDS)
        for r in report.runs:
            writer.writerow([_csv_cell(r[k]) for k in RUN_FIELDS])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(report: RunReport, fmt: str, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.write_text(render_report(report, fmt))
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


# -- interactive session -----------------------------------------------------


INTERACTIVE_MODELS = ("vertex", "distance-informed", "edge-tree")


class HumanOracle:
    """Reads responses from a text stream, re-prompting until one is legal.

    Responses need not be truthful, but one that contradicts every remaining
    candidate is refused.
    """

    def __init__(self, graph: Graph, dist: DistanceMatrix, model: str, inp: TextIO, out: TextIO) -> None:
        self.graph, self.dist, self.model = graph, dist, model
        self.inp, self.out = inp, out

    def _read(self, prompt: str, check: Callable[[str], QueryResponse]) -> QueryResponse:
        while True:
            self.out.write(prompt)
            self.out.flush()
            line = self.inp.readline()
            if not line:
                raise EOFError("input ended before the search finished")
            if not line.strip():
                continue
            try:
                return check(line)
            except ValueError as exc:
                self.out.write(f"rejected: {exc}\n")

    def answer(self, q: int, mirror: CandidateSet | None = None) -> QueryResponse:
        def check(line: str) -> QueryResponse:
            r = parse_response(self.graph, line, q)
            if self.model == "distance-informed" and isinstance(r, EdgeResponse):
                raise ValueError("this model expects 'edge <u> <v> dist <l>'")
            if self.model == "vertex" and isinstance(r, EdgeDist):
                raise ValueError("this model expects 'edge <u> <v>' without a distance")
            if mirror is not None:
                if isinstance(r, Target):
                    ok = q in mirror
                else:
                    mask = reach_mask(self.graph, self.dist, q, r.arc)
                    if isinstance(r, EdgeDist):
                        mask &= self.dist.d[q] == r.dist
                    ok = bool(mirror & CandidateSet.from_mask(mask))
                if not ok:
                    raise ValueError("that answer contradicts every remaining candidate")
            return r

        return self._read(f"query {q}> ", check)

    def answer_edge(self, u: int, v: int) -> Side:
        return self._read(f"query edge {u} {v}> ", lambda line: parse_response(self.graph, line, (u, v)))


def interactive_session(
    graph: Graph, model: str, inp: TextIO | None = None, out: TextIO | None = None
) -> StrategyOutcome:
    """Run the model's strategy with a human typing the oracle's responses."""
    inp = sys.stdin if inp is None else inp
    out = sys.stdout if out is None else out
    if model not in INTERACTIVE_MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {', '.join(INTERACTIVE_MODELS)}")
    dist = dijkstra_all_pairs(graph)
    oracle = HumanOracle(graph, dist, model, inp, out)
    out.write(
        {
            "vertex": "Answer 'target' or 'edge <q> <v>' (an arc on a shortest path to the target).\n",
            "distance-informed": "Answer 'target' or 'edge <q> <v> dist <l>'.\n",
            "edge-tree": "Answer 'side <u>' naming the endpoint whose side holds the target.\n",
        }[model]
    )
    if model == "edge-tree":
        outcome = tree_edge_search(graph, oracle)
    elif model == "distance-informed":
        outcome = distance_informed_search(graph, dist, oracle)
    elif graph.directed:
        outcome = almost_undirected_search(graph, dist, oracle)
    else:
        outcome = deterministic_search(graph, dist, oracle)
    out.write(f"target is {outcome.returned} ({outcome.query_count} queries)\n")
    return outcome


__all__ = [
    "ExperimentConfig",
    "HumanOracle",
    "RunReport",
    "STRATEGIES",
    "derive_seed",
    "emit_report",
    "interactive_session",
    "render_report",
    "run_experiment",
    "success_threshold",
]
