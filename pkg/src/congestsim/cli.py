"""Command-line front end: generate graphs, run algorithms, sweep, verify.

Exit codes: 0 success (and valid where applicable), 2 invalid output,
3 round-cap timeout, 4 configuration error, 5 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import lowerbound
from .algorithms import ALGORITHMS, make_factory, member_set, parse_params, verify_mode
from .engine import DEFAULT_MAX_WORDS, EngineError, WordBudget, run
from .graph import Graph, GraphError, GraphFamilySpec, load_edge_list, parse_family_spec, save_edge_list
from .verify import verify_categories, verify_ruling_set

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_TIMEOUT = 3
EXIT_CONFIG = 4
EXIT_IO = 5

SEED_ENV_VAR = "CONGESTSIM_SEED"


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV_VAR, "1"))


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _kv_pairs(items: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items:
        if "=" not in item:
            raise CliError(f"expected key=value, got {item!r}", EXIT_CONFIG)
        key, _, val = item.partition("=")
        out[key] = val
    return out


def _graph_from_arg(text: str, seed: int) -> tuple[Graph, GraphFamilySpec | None]:
    try:
        spec = parse_family_spec(text, seed=seed)
        return spec.build(), spec
    except GraphError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    except FileNotFoundError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    except (KeyError, ValueError) as exc:
        raise CliError(f"bad graph spec {text!r}: {exc}", EXIT_CONFIG) from exc


# -- gen -------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    params = _kv_pairs(args.params)
    seed = int(params.pop("seed", args.seed))
    try:
        spec = GraphFamilySpec(args.family, params, seed=seed)
        graph = spec.build()
    except (GraphError, KeyError, ValueError) as exc:
        raise CliError(f"cannot build graph: {exc}", EXIT_CONFIG) from exc
    if args.out:
        try:
            save_edge_list(graph, args.out)
        except OSError as exc:
            raise CliError(str(exc), EXIT_IO) from exc
    print(
        json.dumps(
            {
                "family": spec.describe(),
                "seed": seed,
                "n": graph.n,
                "m": graph.m,
                "max_degree": graph.max_degree,
                "out": args.out,
            }
        )
    )
    return EXIT_OK


# -- run -------------------------------------------------------------------


def _resolved_config(args, algo_params, graph_text, seed) -> dict:
    return {
        "algorithm": args.algorithm,
        "params": {k: algo_params[k] for k in sorted(algo_params)},
        "graph": graph_text,
        "seed": seed,
        "round_cap": args.round_cap,
        "max_words": args.max_words,
    }


def _run_once(graph: Graph, name: str, algo_params: dict, seed: int, round_cap, max_words):
    factory = make_factory(name, **algo_params)
    budget = WordBudget.for_graph(graph.n, max_words)
    return run(graph, factory, seed, budget, round_cap)


def _verdict(graph: Graph, name: str, algo_params: dict, outputs) -> tuple[bool, float | None, dict]:
    alpha, beta = verify_mode(name, algo_params)
    members = member_set(outputs)
    extra: dict = {}
    if beta is None:
        report = verify_ruling_set(graph, members, alpha, graph.n)
        valid = not report.alpha_violations
        achieved = None
    else:
        report = verify_ruling_set(graph, members, alpha, beta)
        valid = report.valid
        achieved = report.achieved_beta
    if name == "2rs-msg":
        cat = verify_categories(graph, list(outputs))
        extra["categories"] = cat.verdict
        valid = valid and cat.verdict == "valid"
    return valid, achieved, extra


def cmd_run(args: argparse.Namespace) -> int:
    seed = args.seed
    try:
        algo_params = parse_params(args.algorithm, _kv_pairs(args.params))
    except KeyError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    graph, _spec = _graph_from_arg(args.graph, seed)
    try:
        result = _run_once(graph, args.algorithm, algo_params, seed, args.round_cap, args.max_words)
    except EngineError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    timeout = not result.stats.halted_all
    valid, achieved, extra = _verdict(graph, args.algorithm, algo_params, result.outputs)
    record = {
        "config": _resolved_config(args, algo_params, args.graph, seed),
        "n": graph.n,
        "m": graph.m,
        "max_degree": graph.max_degree,
        "rounds": result.stats.rounds,
        "messages_total": result.stats.messages_total,
        "messages_by_tag": dict(sorted(result.stats.messages_by_tag.items())),
        "budget_violations": result.stats.budget_violations,
        "timeout": timeout,
        "valid": valid and not timeout,
        "achieved_beta": (
            None if achieved is None or math.isinf(achieved) else achieved
        ),
        **extra,
    }
    print(json.dumps(record))
    if timeout:
        return EXIT_TIMEOUT
    return EXIT_OK if valid else EXIT_INVALID


# -- verify ------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        graph = load_edge_list(args.graph)
    except (GraphError, OSError) as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    try:
        lines = Path(args.set_file).read_text(encoding="utf-8").split()
        members = [int(tok) for tok in lines]
    except OSError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    except ValueError as exc:
        raise CliError(f"bad set file: {exc}", EXIT_IO) from exc
    try:
        report = verify_ruling_set(graph, members, args.alpha, args.beta)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    print(report.to_json())
    return EXIT_OK if report.valid else EXIT_INVALID


# -- experiment ----------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """A sweep: one algorithm over graph sizes x seeds, with stats per run."""

    algorithm: str
    params: dict
    family: str
    family_params: dict
    sizes: list[int]
    trials: int
    base_seed: int
    round_cap: int | None = None
    max_words: int = DEFAULT_MAX_WORDS
    out: str | None = None
    fmt: str = "csv"

    def resolved(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "params": {k: self.params[k] for k in sorted(self.params)},
            "family": self.family,
            "family_params": {k: self.family_params[k] for k in sorted(self.family_params)},
            "sizes": self.sizes,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "round_cap": self.round_cap,
            "max_words": self.max_words,
        }


SWEEP_COLUMNS = [
    "kind", "n", "m", "max_degree", "seed", "rounds", "messages", "valid",
    "rounds_per_log2n", "messages_per_nlog2sq", "messages_per_m",
]


def _family_spec_for_size(config: ExperimentConfig, n: int, seed: int) -> GraphFamilySpec:
    params = dict(config.family_params)
    params["n"] = n
    if config.family == "gnp" and "p" in params and str(params["p"]).endswith("/n"):
        # Allow scalings like p=8/n in sweeps.
        params["p"] = float(str(params["p"])[:-2]) / n
    return GraphFamilySpec(config.family, params, seed=seed)


def _norm_row(kind, n, m, max_degree, seed, rounds, messages, valid):
    log_n = max(1.0, math.log2(n))
    return {
        "kind": kind,
        "n": n,
        "m": m,
        "max_degree": max_degree,
        "seed": seed,
        "rounds": rounds,
        "messages": messages,
        "valid": valid,
        "rounds_per_log2n": round(rounds / log_n, 4),
        "messages_per_nlog2sq": round(messages / (n * log_n * log_n), 4),
        "messages_per_m": round(messages / m, 4) if m else "",
    }


def run_sweep(config: ExperimentConfig) -> tuple[list[dict], bool]:
    """Execute the sweep; rows are per-run plus median/max aggregate rows."""
    import statistics

    rows: list[dict] = []
    all_valid = True
    for n in config.sizes:
        per_size: list[dict] = []
        for t in range(config.trials):
            seed = config.base_seed + t
            spec = _family_spec_for_size(config, n, seed)
            graph = spec.build()
            factory = make_factory(config.algorithm, **config.params)
            budget = WordBudget.for_graph(graph.n, config.max_words)
            result = run(graph, factory, seed, budget, config.round_cap)
            valid, _achieved, _extra = _verdict(
                graph, config.algorithm, config.params, result.outputs
            )
            valid = valid and result.stats.halted_all
            all_valid = all_valid and valid
            per_size.append(
                _norm_row(
                    "run", n, graph.m, graph.max_degree, seed,
                    result.stats.rounds, result.stats.messages_total, valid,
                )
            )
        rows.extend(per_size)
        med = statistics.median
        rows.append(
            _norm_row(
                "median", n, med(r["m"] for r in per_size),
                med(r["max_degree"] for r in per_size), "",
                med(r["rounds"] for r in per_size),
                med(r["messages"] for r in per_size),
                all(r["valid"] for r in per_size),
            )
        )
        rows.append(
            _norm_row(
                "max", n, max(r["m"] for r in per_size),
                max(r["max_degree"] for r in per_size), "",
                max(r["rounds"] for r in per_size),
                max(r["messages"] for r in per_size),
                all(r["valid"] for r in per_size),
            )
        )
    return rows, all_valid


def _emit_rows(rows: list[dict], columns: list[str], config_line: dict, out: str | None, fmt: str) -> None:
    if fmt == "json":
        payload = json.dumps({"config": config_line, "rows": rows}, indent=2)
        if out:
            Path(out).write_text(payload + "\n", encoding="utf-8")
        else:
            print(payload)
        return
    target = open(out, "w", newline="", encoding="utf-8") if out else sys.stdout
    try:
        writer = csv.DictWriter(target, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    finally:
        if out:
            target.close()
    if out:
        print(json.dumps({"config": config_line, "rows_written": len(rows), "out": out}))


def cmd_experiment_sweep(args: argparse.Namespace) -> int:
    try:
        algo_params = parse_params(args.algorithm, _kv_pairs(args.params))
    except KeyError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    sizes = [int(s) for s in args.sizes.split(",")]
    if sizes != sorted(set(sizes)):
        raise CliError("sweep sizes must be strictly increasing", EXIT_CONFIG)
    family_params = _kv_pairs(args.family_params)
    config = ExperimentConfig(
        algorithm=args.algorithm,
        params=algo_params,
        family=args.family,
        family_params=family_params,
        sizes=sizes,
        trials=args.trials,
        base_seed=args.seed,
        round_cap=args.round_cap,
        max_words=args.max_words,
        out=args.out,
        fmt=args.format,
    )
    try:
        rows, all_valid = run_sweep(config)
    except (GraphError, EngineError, KeyError, ValueError) as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    _emit_rows(rows, SWEEP_COLUMNS, config.resolved(), args.out, args.format)
    return EXIT_OK if all_valid else EXIT_INVALID


BRIDGE_COLUMNS = [
    "n", "algo", "mu", "trials", "crossing_rate", "messages_mean",
    "hist_LLp", "hist_LRp", "hist_RLp", "hist_RRp", "hist_invalid", "hist_incomplete",
]


def cmd_experiment_bridge(args: argparse.Namespace) -> int:
    try:
        algo_params = parse_params(args.algorithm, _kv_pairs(args.params))
    except KeyError as exc:
        raise CliError(str(exc), EXIT_CONFIG) from exc
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = []
    for n in sizes:
        try:
            agg = lowerbound.bridge_experiment(
                n,
                make_factory(args.algorithm, **algo_params),
                mu=args.mu,
                trials=args.trials,
                seed=args.seed,
                algo_name=args.algorithm,
            )
        except (ValueError, EngineError) as exc:
            raise CliError(str(exc), EXIT_CONFIG) from exc
        rows.append(agg.to_json_dict())
    config_line = {
        "experiment": "bridge",
        "algorithm": args.algorithm,
        "sizes": sizes,
        "mu": args.mu,
        "trials": args.trials,
        "seed": args.seed,
    }
    _emit_rows(rows, BRIDGE_COLUMNS, config_line, args.out, args.format)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="congestsim",
        description="Deterministic CONGEST-model simulator with ruling-set algorithms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a graph file")
    gen.add_argument("family", help="graph family (cycle, gnp, bridge, disconnected, tight, bipartite)")
    gen.add_argument("params", nargs="*", help="family parameters as key=value")
    gen.add_argument("--seed", type=int, default=_default_seed())
    gen.add_argument("--out", help="edge-list output path")
    gen.set_defaults(func=cmd_gen)

    runp = sub.add_parser("run", help="run one algorithm once and verify the output")
    runp.add_argument("algorithm", choices=sorted(ALGORITHMS))
    runp.add_argument("--graph", required=True, help="graph file or inline spec family:k=v,...")
    runp.add_argument("--seed", type=int, default=_default_seed())
    runp.add_argument("--round-cap", type=_positive_int, default=None)
    runp.add_argument("--max-words", type=_positive_int, default=DEFAULT_MAX_WORDS)
    runp.add_argument("--params", nargs="*", default=[], help="algorithm parameters key=value")
    runp.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="check a node set against a graph file")
    ver.add_argument("graph")
    ver.add_argument("set_file", help="file with one node index per line")
    ver.add_argument("--alpha", type=int, default=2)
    ver.add_argument("--beta", type=int, default=2)
    ver.set_defaults(func=cmd_verify)

    exp = sub.add_parser("experiment", help="sweeps and lower-bound experiments")
    expsub = exp.add_subparsers(dest="experiment", required=True)

    sweep = expsub.add_parser("sweep", help="algorithm over a size sweep")
    sweep.add_argument("--algo", dest="algorithm", required=True, choices=sorted(ALGORITHMS))
    sweep.add_argument("--family", required=True)
    sweep.add_argument("--family-params", nargs="*", default=[], help="e.g. p=0.02 or p=8/n")
    sweep.add_argument("--sizes", required=True, help="comma-separated, strictly increasing")
    sweep.add_argument("--trials", type=_positive_int, default=10)
    sweep.add_argument("--seed", type=int, default=_default_seed())
    sweep.add_argument("--round-cap", type=_positive_int, default=None)
    sweep.add_argument("--max-words", type=_positive_int, default=DEFAULT_MAX_WORDS)
    sweep.add_argument("--params", nargs="*", default=[])
    sweep.add_argument("--out")
    sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    sweep.set_defaults(func=cmd_experiment_sweep)

    bridge = expsub.add_parser("bridge", help="bridge-crossing experiment")
    bridge.add_argument("--algo", dest="algorithm", required=True, choices=sorted(ALGORITHMS))
    bridge.add_argument("--sizes", required=True, help="comma-separated n values (divisible by 4)")
    bridge.add_argument("--trials", type=_positive_int, default=100)
    bridge.add_argument("--mu", type=int, default=None, help="message observation budget")
    bridge.add_argument("--seed", type=int, default=_default_seed())
    bridge.add_argument("--params", nargs="*", default=[])
    bridge.add_argument("--out")
    bridge.add_argument("--format", choices=["csv", "json"], default="csv")
    bridge.set_defaults(func=cmd_experiment_bridge)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
