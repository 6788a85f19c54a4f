"""Command-line interface: ``gen``, ``run``, ``solve-opt``, ``interactive``, ``validate``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .exact import QueryModel, format_strategy_tree, opt_strategy_tree, solve
from .generators import Family, GeneratorSpec, generate
from .graph import Graph, GraphError, dijkstra_all_pairs, metadata
from .harness import STRATEGIES, ExperimentConfig, emit_report, interactive_session, render_report, run_experiment
from .oracles import CorrectPolicy, LiePolicy

TREE_FORMAT_HELP = """\
strategy tree format: one node per line, children indented two spaces:
  query <v>                     (or 'query edge <u> <v>' for edge queries)
    on <response>: query <w>    response is 'target', 'edge <u> <v>',
    on <response>: found <w>    'edge <u> <v> dist <l>' or 'side <u>'
"""


def _add_generator_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--family", choices=[f.value for f in Family], required=required)
    p.add_argument("--n", type=int)
    p.add_argument("--max-degree", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--c", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--wmax", type=int, default=1)
    p.add_argument("--graph-seed", type=int, default=0, help="seed for random graph families")


def _spec(args: argparse.Namespace) -> GeneratorSpec:
    return GeneratorSpec(
        family=args.family,
        n=args.n,
        max_degree=args.max_degree,
        width=args.width,
        height=args.height,
        m=args.m,
        c=args.c,
        k=args.k,
        seed=args.graph_seed,
        wmax=args.wmax,
    )


def cmd_gen(args: argparse.Namespace) -> int:
    text = generate(_spec(args)).to_text()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    status = 0
    for path in args.graphs:
        try:
            g = Graph.load(path)
        except (GraphError, OSError) as exc:
            print(f"{path}: invalid: {exc}")
            status = 1
            continue
        meta = metadata(g, dijkstra_all_pairs(g))
        kind = "directed" if g.directed else "undirected"
        print(
            f"{path}: ok {kind} n={meta.n} m={meta.m} max_degree={meta.max_degree} "
            f"diameter={meta.diameter} c={meta.cycle_constant} tree={g.is_tree()}"
        )
    return status


def cmd_run(args: argparse.Namespace) -> int:
    if args.config:
        config = ExperimentConfig.from_file(args.config)
    else:
        config = ExperimentConfig(
            strategy=args.strategy,
            graph_file=args.graph,
            generator=_spec(args) if args.family else None,
            correct_policy=args.policy,
            lie_policy=args.lie_policy,
            p=args.p,
            delta=args.delta,
            targets=args.targets,
            trials=args.trials,
            seed=args.seed,
            workers=args.workers,
            json_out=args.json,
            csv_out=args.csv,
        )
    if args.workers != 1:
        config.workers = args.workers
    report = run_experiment(config)
    if config.json_out:
        emit_report(report, "json", config.json_out)
    if config.csv_out:
        emit_report(report, "csv", config.csv_out)
    agg = report.aggregates
    print(json.dumps({"aggregates": json.loads(render_report(report, "json"))["aggregates"], "passed": report.passed}))
    return 0 if report.passed and agg["bound_violations"] == 0 else 1


def cmd_solve(args: argparse.Namespace) -> int:
    g = Graph.load(args.graph)
    dist = dijkstra_all_pairs(g)
    model = args.model or ("vertex-directed" if g.directed else "vertex")
    table = solve(g, dist, model)
    print(f"OPT = {table.root}")
    if args.tree:
        sys.stdout.write(format_strategy_tree(opt_strategy_tree(g, dist, model)))
    return 0


def cmd_interactive(args: argparse.Namespace) -> int:
    g = Graph.load(args.graph)
    try:
        interactive_session(g, args.model)
    except EOFError as exc:
        print(f"\n{exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphbisect", description="Binary search on graphs: simulator and bound checker.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated graph in the text format")
    _add_generator_args(p, required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="lint graph files")
    p.add_argument("graphs", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run an experiment; exit code 0 iff all bounds and gates pass")
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--strategy", choices=STRATEGIES, default="deterministic")
    p.add_argument("--graph", help="graph file (alternative to --family)")
    _add_generator_args(p, required=False)
    p.add_argument("--policy", choices=[c.value for c in CorrectPolicy], default=CorrectPolicy.MIN_EDGE_ID.value)
    p.add_argument("--lie-policy", choices=[c.value for c in LiePolicy], default=LiePolicy.UNIFORM.value)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--delta", type=float)
    p.add_argument("--targets", default="all", help="'all' or a sample size")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser(
        "solve-opt",
        help="exact optimal worst-case query count (n <= 20)",
        epilog=TREE_FORMAT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("graph")
    p.add_argument("--model", choices=[m.value for m in QueryModel])
    p.add_argument("--tree", action="store_true", help="also print one optimal strategy tree")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("interactive", help="play the oracle yourself")
    p.add_argument("graph")
    p.add_argument("--model", choices=["vertex", "distance-informed", "edge-tree"], default="vertex")
    p.set_defaults(func=cmd_interactive)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
