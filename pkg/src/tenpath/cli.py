"""Command-line interface: optimize, evaluate, bench, and gen subcommands.

Structured output (JSON or CSV) goes to stdout, human-readable summaries and
warnings to stderr. Exit codes: 0 success, 1 input or validation error,
2 budget misconfiguration, 3 nothing to run.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
from pathlib import Path

from .costs import UnknownCostFnError, registered_names, spec_from_name
from .evaluate import PathValidationError, contraction_tree, evaluate, format_tree
from .exprio import (
    InstanceDocument,
    InstanceFormatError,
    gen_grid_network,
    gen_random_network,
    gen_regular_network,
    parse_einsum_string,
    parse_instance_file,
    parse_path,
    serialize_instance,
    serialize_path,
)
from .greedy import BudgetConfigError, OptimizeConfig, OptimizeReport, optimize
from .model import NetworkValidationError, PathStats, TensorNetwork

__all__ = ["main"]

_OPTIMIZE_CSV_COLUMNS = (
    "name,num_terms,objective,best_flops,best_max_size,tree_depth,"
    "selected_cost_fn,paths_evaluated,elapsed_ms,path"
)
_BENCH_CSV_COLUMNS = (
    "name,num_terms,best_flops,best_max_size,selected_cost_fn,"
    "paths_evaluated,elapsed_ms"
)


def _num(value: float):
    """Render integral finite floats as ints for stable, readable output."""
    if math.isfinite(value) and value == int(value) and abs(value) <= 2**53:
        return int(value)
    return value


def _stats_dict(stats: PathStats) -> dict:
    return {
        "path": [list(step) for step in stats.path],
        "total_flops": _num(stats.total_flops),
        "max_intermediate_size": _num(stats.max_intermediate_size),
        "cost_fn": stats.cost_fn_used,
        "tree_depth": stats.tree_depth,
    }


def _report_dict(name: str, network: TensorNetwork, report: OptimizeReport) -> dict:
    return {
        "name": name,
        "num_terms": network.num_terms,
        "objective": report.objective,
        "selected_cost_fn": report.selected_cost_fn,
        "paths_evaluated": report.paths_evaluated,
        "elapsed_ms": report.elapsed_ms,
        "best": _stats_dict(report.best),
        "per_cost_fn": {
            fn: _stats_dict(stats) for fn, stats in report.per_cost_fn.items()
        },
    }


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _parse_sizes_flag(text: str) -> dict[str, int]:
    sizes: dict[str, int] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        label, sep, extent = item.partition("=")
        if not sep:
            raise InstanceFormatError(
                f"--sizes entries must look like label=extent, got {item!r}"
            )
        try:
            sizes[label] = int(extent)
        except ValueError:
            raise InstanceFormatError(
                f"extent of {label!r} must be an integer, got {extent!r}"
            ) from None
    return sizes


def _load_network(args) -> tuple[str, TensorNetwork]:
    if args.input is not None:
        text = _read_text(args.input)
        network = parse_instance_file(text)
        name = args.input if args.input != "-" else "stdin"
        try:
            doc_name = json.loads(text).get("name")
            if isinstance(doc_name, str) and doc_name:
                name = doc_name
        except (json.JSONDecodeError, AttributeError):
            pass
        return name, network
    sizes = _parse_sizes_flag(args.sizes or "")
    return args.expr, parse_einsum_string(args.expr, sizes)


def _budget_kwargs(args) -> dict:
    if args.paths is not None and args.timeout_ms is not None:
        raise BudgetConfigError("set either --paths or --timeout-ms, not both")
    if args.paths is None and args.timeout_ms is None:
        return {"path_count": 128}
    if args.paths is not None:
        return {"path_count": args.paths}
    return {"wall_clock_ms": args.timeout_ms}


def _make_config(args) -> OptimizeConfig:
    cost_fns = "auto" if args.cost_fn == "auto" else [spec_from_name(args.cost_fn)]
    return OptimizeConfig(
        objective=args.objective,
        seed=args.seed,
        cost_fns=cost_fns,
        threads=args.threads,
        top_b=args.top_b,
        tau=args.tau,
        **_budget_kwargs(args),
    )


def _optimize_csv_row(name: str, network: TensorNetwork, report: OptimizeReport) -> str:
    best = report.best
    path_text = serialize_path(best.path)
    return ",".join(
        str(x)
        for x in (
            name,
            network.num_terms,
            report.objective,
            _num(best.total_flops),
            _num(best.max_intermediate_size),
            best.tree_depth,
            report.selected_cost_fn,
            report.paths_evaluated,
            report.elapsed_ms,
            f'"{path_text}"',
        )
    )


def cmd_optimize(args) -> int:
    name, network = _load_network(args)
    report = optimize(network, _make_config(args))
    best = report.best
    if args.output == "json":
        print(json.dumps(_report_dict(name, network, report)))
    elif args.output == "csv":
        print(_OPTIMIZE_CSV_COLUMNS)
        print(_optimize_csv_row(name, network, report))
    else:
        print(serialize_path(best.path))
    print(
        f"{name}: best {report.objective}="
        f"{_num(best.total_flops if report.objective == 'flops' else best.max_intermediate_size)} "
        f"via {report.selected_cost_fn} "
        f"({report.paths_evaluated} paths, {report.elapsed_ms} ms)",
        file=sys.stderr,
    )
    return 0


def cmd_evaluate(args) -> int:
    name, network = _load_network(args)
    try:
        path = parse_path(args.path)
    except InstanceFormatError:
        # Not inline path text; fall back to reading it as a file.
        try:
            is_file = Path(args.path).is_file()
        except OSError:
            is_file = False
        if not is_file:
            raise
        path = parse_path(Path(args.path).read_text(encoding="utf-8"))
    stats = evaluate(network, path, cost_fn_used="given")
    doc = _stats_dict(stats)
    doc["name"] = name
    doc["num_terms"] = network.num_terms
    print(json.dumps(doc))
    if args.tree is not None:
        tree = contraction_tree(network, path)
        text = format_tree(tree)
        if args.tree == "-":
            sys.stderr.write(text)
        else:
            Path(args.tree).write_text(text, encoding="utf-8")
    return 0


def cmd_bench(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        print(f"bench: {args.dir} is not a directory", file=sys.stderr)
        return 1
    files = sorted(p for p in directory.iterdir() if p.is_file())
    rows = []
    for file in files:
        try:
            text = file.read_text(encoding="utf-8")
            network = parse_instance_file(text)
        except (OSError, ValueError) as exc:
            print(f"bench: skipping {file.name}: {exc}", file=sys.stderr)
            continue
        name = file.stem
        try:
            doc_name = json.loads(text).get("name")
            if isinstance(doc_name, str) and doc_name:
                name = doc_name
        except json.JSONDecodeError:
            pass
        config = _make_config(args)
        reports = [optimize(network, config) for _ in range(args.repeats)]
        report = reports[0]
        elapsed = int(statistics.median(r.elapsed_ms for r in reports))
        rows.append((name, network, report, elapsed))
        print(f"bench: {name}: done ({args.repeats} repeats)", file=sys.stderr)
    if not rows:
        print("bench: no usable instance files", file=sys.stderr)
        return 3
    if args.output == "json":
        out = []
        for name, network, report, elapsed in rows:
            doc = _report_dict(name, network, report)
            doc["elapsed_ms"] = elapsed
            out.append(doc)
        print(json.dumps(out))
    else:
        print(_BENCH_CSV_COLUMNS)
        for name, network, report, elapsed in rows:
            best = report.best
            print(
                ",".join(
                    str(x)
                    for x in (
                        name,
                        network.num_terms,
                        _num(best.total_flops),
                        _num(best.max_intermediate_size),
                        report.selected_cost_fn,
                        report.paths_evaluated,
                        elapsed,
                    )
                )
            )
    return 0


def cmd_gen(args) -> int:
    if args.family == "grid":
        network = gen_grid_network(args.rows, args.cols, args.extent, args.seed)
        default_name = f"grid-{args.rows}x{args.cols}-d{args.extent}-s{args.seed}"
    elif args.family == "regular":
        network = gen_regular_network(args.nodes, args.degree, args.extent, args.seed)
        default_name = f"regular-{args.nodes}n-{args.degree}d-d{args.extent}-s{args.seed}"
    else:
        network = gen_random_network(
            args.nodes, args.edge_prob, args.extent, args.seed
        )
        default_name = f"random-{args.nodes}n-p{args.edge_prob:g}-d{args.extent}-s{args.seed}"
    doc = InstanceDocument.from_network(
        network, name=args.name or default_name, family=args.family
    )
    text = serialize_instance(doc)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"gen: wrote {args.out} ({network.num_terms} terms)", file=sys.stderr)
    return 0


def _add_instance_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--input",
        metavar="FILE",
        help="instance document to load ('-' reads stdin)",
    )
    sub.add_argument(
        "--expr", metavar="STRING", help="einsum expression like 'ijk,kln->ijln'"
    )
    sub.add_argument(
        "--sizes",
        metavar="K=V,...",
        help="comma-separated index extents for --expr, e.g. i=3,j=2",
    )


def _add_optimize_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--objective", choices=("flops", "size"), default="flops",
        help="quantity to minimize (default: flops)",
    )
    sub.add_argument(
        "--paths", type=int, metavar="N",
        help="budget: total number of paths to generate (default: 128)",
    )
    sub.add_argument(
        "--timeout-ms", type=int, metavar="T",
        help="budget: stop starting new passes after T milliseconds",
    )
    sub.add_argument("--seed", type=int, default=0, help="base random seed (default: 0)")
    sub.add_argument(
        "--cost-fn", default="auto", metavar="NAME",
        help="cost function name, or 'auto' for the full default set "
        f"(names: {', '.join(registered_names())})",
    )
    sub.add_argument(
        "--threads", type=int, default=1,
        help="parallel randomized passes (default: 1; results are seed-stable)",
    )
    sub.add_argument("--top-b", type=int, default=4, help="sampling pool size (default: 4)")
    sub.add_argument("--tau", type=float, default=1.0, help="sampling temperature (default: 1.0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tenpath",
        description="Contraction-path search for einsum tensor networks.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    opt = subs.add_parser(
        "optimize",
        help="search for a contraction path",
        description="Search for a contraction path. CSV columns: "
        + _OPTIMIZE_CSV_COLUMNS,
    )
    _add_instance_flags(opt)
    _add_optimize_flags(opt)
    opt.add_argument(
        "--output", choices=("json", "csv", "path"), default="json",
        help="stdout format (default: json)",
    )
    opt.set_defaults(func=cmd_optimize)

    ev = subs.add_parser(
        "evaluate",
        help="validate and score a given path",
        description="Replay a path and print its statistics as JSON.",
    )
    _add_instance_flags(ev)
    ev.add_argument(
        "--path", required=True, metavar="FILE-or-inline",
        help="path text like [[0,1],[0,1]] or a file containing it",
    )
    ev.add_argument(
        "--tree", metavar="FILE",
        help="also write the contraction tree as text ('-' prints to stderr)",
    )
    ev.set_defaults(func=cmd_evaluate)

    bench = subs.add_parser(
        "bench",
        help="run the optimizer over a directory of instances",
        description="One row per instance. CSV columns: " + _BENCH_CSV_COLUMNS
        + ". elapsed_ms is the median over --repeats runs.",
    )
    bench.add_argument("--dir", required=True, help="directory of instance documents")
    bench.add_argument(
        "--repeats", type=int, default=5,
        help="repeat each instance and report the median elapsed time (default: 5)",
    )
    _add_optimize_flags(bench)
    bench.add_argument(
        "--output", choices=("csv", "json"), default="csv",
        help="stdout format (default: csv)",
    )
    bench.set_defaults(func=cmd_bench)

    gen = subs.add_parser(
        "gen",
        help="generate a synthetic instance",
        description="Write an instance document for a synthetic graph family.",
    )
    gen.add_argument(
        "--family", required=True, choices=("grid", "regular", "random")
    )
    gen.add_argument("--rows", type=int, help="grid: number of rows")
    gen.add_argument("--cols", type=int, help="grid: number of columns")
    gen.add_argument("--nodes", type=int, help="regular/random: number of nodes")
    gen.add_argument("--degree", type=int, help="regular: node degree")
    gen.add_argument("--edge-prob", type=float, help="random: edge probability")
    gen.add_argument("--extent", type=int, default=2, help="index extent (default: 2)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--name", help="instance name stored in the document")
    gen.add_argument("--out", default="-", help="output file (default: stdout)")
    gen.set_defaults(func=cmd_gen)

    return parser


def _missing_gen_flags(args) -> str | None:
    needed = {
        "grid": ("rows", "cols"),
        "regular": ("nodes", "degree"),
        "random": ("nodes", "edge_prob"),
    }[args.family]
    missing = [flag for flag in needed if getattr(args, flag) is None]
    if missing:
        flags = ", ".join("--" + flag.replace("_", "-") for flag in missing)
        return f"gen --family {args.family} requires {flags}"
    return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("optimize", "evaluate"):
        if (args.input is None) == (args.expr is None):
            print(
                f"{args.command}: give exactly one of --input or --expr",
                file=sys.stderr,
            )
            return 1
        if args.expr is not None and args.sizes is None:
            print(f"{args.command}: --expr requires --sizes", file=sys.stderr)
            return 1
    if args.command == "gen":
        problem = _missing_gen_flags(args)
        if problem is not None:
            print(problem, file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except BudgetConfigError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2
    except (
        NetworkValidationError,
        InstanceFormatError,
        PathValidationError,
        UnknownCostFnError,
        ValueError,
    ) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
