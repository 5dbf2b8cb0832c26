"""Command-line surface: synthetic generation, discovery, simulation, evaluation.

Every subcommand is deterministic under a fixed seed: artifacts are written
with repr-exact floats (17 significant digits in CSV), reports carry no
wall-clock or host metadata, and worker threads only change scheduling,
never results.  Exit codes: 0 success, 1 usage error, 2 data error,
3 numeric or convergence error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .datasets import Dataset, load_csv, save_csv
from .discovery import ALGORITHMS, CDConfig, discover
from .errors import (
    CausimError,
    ConvergenceError,
    CsvParseError,
    DataSizeError,
    DegenerateInputError,
    NumericInstabilityError,
    PhaseError,
)
from .evaluation import (
    adf_test,
    build_c2st_dataset,
    default_detector_space,
    mmd_gaussian,
    train_and_score_detector,
)
from .graphs import LaggedGraph
from .pipeline import SearchConfig, default_search_config, run_search
from .scm import GRAPH_MODELS, GeneratorConfig, ancestral_sample, build_random_scm

ENV_SEED = "CAUSIM_SEED"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _resolve_seed(flag_value, config_value=None) -> int:
    if flag_value is not None:
        return int(flag_value)
    if config_value is not None:
        return int(config_value)
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise _UsageError(f"{ENV_SEED} must be an integer, got {env!r}") from None
    return 0


def _default_threads() -> int:
    return os.cpu_count() or 1


def _write_json(path, obj) -> None:
    with open(str(path), "w") as handle:
        json.dump(obj, handle, indent=2)
        handle.write("\n")


def _read_json(path) -> dict:
    with open(str(path)) as handle:
        return json.load(handle)


def _load_graph(path) -> LaggedGraph:
    return LaggedGraph.from_dict(_read_json(path))


def _comma_ints(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise _UsageError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise _UsageError("empty list")
    return values


def _cmd_generate(args) -> int:
    seed = _resolve_seed(args.seed)
    try:
        cfg = GeneratorConfig(
            n_vars=args.n_vars,
            n_steps=args.n_steps,
            warmup=args.warmup,
            min_lag=args.min_lag,
            max_lag=args.max_lag,
            edge_probability=args.edge_probability,
            graph_model=args.graph_model,
            function_family=tuple(args.functions.split(",")),
            noise_family=tuple(args.noises.split(",")),
            multiplicative_noise=args.multiplicative,
            seed=seed,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc

    rng = np.random.default_rng(cfg.seed)
    scm = build_random_scm(cfg, rng)
    data = ancestral_sample(scm, cfg.n_steps, cfg.warmup, rng)

    os.makedirs(args.out_dir, exist_ok=True)
    columns = [f"V{i}" for i in range(cfg.n_vars)]
    save_csv(os.path.join(args.out_dir, "data.csv"), columns, data)
    _write_json(os.path.join(args.out_dir, "graph.json"), scm.graph.to_dict())
    _write_json(os.path.join(args.out_dir, "config.json"), cfg.to_dict())
    print(f"wrote {data.shape[0]} rows x {data.shape[1]} vars to {args.out_dir}")
    return 0


def _cmd_discover(args) -> int:
    oracle_graph = _load_graph(args.oracle_graph) if args.oracle_graph else None
    try:
        cfg = CDConfig(
            algorithm=args.algorithm,
            max_lag=oracle_graph.max_lag if oracle_graph else args.max_lag,
            alpha=args.alpha,
            lambda_w=args.lambda_w,
            lambda_a=args.lambda_a,
            tau_w=args.tau,
            tau_a=args.tau,
            max_iterations=args.max_iterations,
            max_cond_size=args.max_cond_size,
            oracle_graph=oracle_graph,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc

    dataset = load_csv(args.input)
    result = discover(dataset.values, cfg)

    os.makedirs(args.out_dir, exist_ok=True)
    _write_json(os.path.join(args.out_dir, "graph.json"), result.graph.to_dict())
    scores_path = os.path.join(args.out_dir, "scores.csv")
    with open(scores_path, "w") as handle:
        handle.write("lag,cause,effect,score\n")
        for tau in range(1, result.graph.max_lag + 1):
            for i in range(result.graph.n_vars):
                for j in range(result.graph.n_vars):
                    score = result.scores[tau - 1, i, j]
                    handle.write(f"{tau},{i},{j},{score:.17g}\n")
    if not result.converged:
        print("warning: discovery did not converge; emitted the best iterate", file=sys.stderr)
    print(f"found {result.graph.n_edges()} edges; wrote {args.out_dir}")
    return 0


def _search_config(args) -> SearchConfig:
    if args.config:
        obj = _read_json(args.config)
        try:
            cfg = SearchConfig.from_dict(obj)
        except (ValueError, TypeError, KeyError) as exc:
            raise _UsageError(f"bad config file {args.config}: {exc}") from exc
        cfg = replace(cfg, seed=_resolve_seed(args.seed, cfg.seed))
    else:
        cfg = default_search_config(seed=_resolve_seed(args.seed))
    if args.oracle_graph:
        graph = _load_graph(args.oracle_graph)
        oracle = CDConfig(
            algorithm="oracle", max_lag=graph.max_lag, oracle_graph=graph
        )
        cfg = replace(cfg, cd_space=(oracle,))
    return cfg


def _write_simulation(out_dir, dataset: Dataset, report) -> None:
    os.makedirs(out_dir, exist_ok=True)
    selected = report.selected()
    save_csv(os.path.join(out_dir, "simulated.csv"), dataset.columns, selected.simulated)
    _write_json(os.path.join(out_dir, "graph.json"), selected.scm.graph.to_dict())
    _write_json(os.path.join(out_dir, "report.json"), report.to_dict())


def _cmd_simulate(args) -> int:
    dataset = load_csv(args.input)
    cfg = _search_config(args)
    threads = args.threads or _default_threads()

    if args.repeats < 1:
        raise _UsageError(f"--repeats must be >= 1, got {args.repeats}")
    if args.repeats == 1:
        report = run_search(dataset.values, cfg, threads=threads)
        _write_simulation(args.out_dir, dataset, report)
        for line in report.warnings:
            print(f"warning: {line}", file=sys.stderr)
        print(
            f"selected candidate {report.selected_index} "
            f"(worst AUC {report.candidates[report.selected_index].worst_auc:.4f}); "
            f"wrote {args.out_dir}"
        )
        return 0

    # full re-runs with consecutive seeds; each repetition is self-contained
    worst_aucs = []
    os.makedirs(args.out_dir, exist_ok=True)
    for rep in range(args.repeats):
        rep_cfg = replace(cfg, seed=cfg.seed + rep)
        report = run_search(dataset.values, rep_cfg, threads=threads)
        _write_simulation(os.path.join(args.out_dir, f"repeat_{rep:02d}"), dataset, report)
        worst_aucs.append(report.candidates[report.selected_index].worst_auc)
    mean = float(np.mean(worst_aucs))
    stderr = float(np.std(worst_aucs, ddof=1) / np.sqrt(len(worst_aucs)))
    _write_json(
        os.path.join(args.out_dir, "summary.json"),
        {
            "kind": "repeat-summary",
            "repeats": args.repeats,
            "base_seed": cfg.seed,
            "worst_aucs": worst_aucs,
            "mean": mean,
            "stderr": stderr,
        },
    )
    print(f"{args.repeats} repetitions: worst AUC {mean:.4f} +/- {stderr:.4f}")
    return 0


def _cmd_evaluate(args) -> int:
    real = load_csv(args.real)
    sim = load_csv(args.sim)
    seed = _resolve_seed(args.seed)
    threads = args.threads or _default_threads()
    space = default_detector_space(_comma_ints(args.window_lengths))

    warnings = []

    def job(d):
        det_cfg = space[d]
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, d)))
        split = build_c2st_dataset(real.values, sim.values, det_cfg, rng)
        try:
            return train_and_score_detector(split, det_cfg), None
        except ConvergenceError as exc:
            return exc.result, str(exc)

    if threads == 1:
        outcomes = [job(d) for d in range(len(space))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(job, range(len(space))))
    results = []
    for result, warning in outcomes:
        results.append(result)
        if warning:
            warnings.append(warning)

    mmd = mmd_gaussian(real.values, sim.values)

    def adf_rows(dataset):
        rows = []
        for j, name in enumerate(dataset.columns):
            try:
                t_stat, stationary = adf_test(dataset.values[:, j])
            except CausimError as exc:
                rows.append({"column": name, "error": str(exc)})
                continue
            rows.append({"column": name, "t": t_stat, "stationary": stationary})
        return rows

    report = {
        "kind": "evaluation-report",
        "detectors": [
            {"config": space[d].to_dict(), "label": space[d].label(), "auc": r.auc}
            for d, r in enumerate(results)
        ],
        "minmax_auc": max(r.auc for r in results),
        "mmd": {"value": mmd.value, "raw": mmd.raw, "bandwidth": mmd.bandwidth},
        "adf": {"real": adf_rows(real), "sim": adf_rows(sim)},
        "warnings": warnings,
        "metadata": {
            "seed": seed,
            "real_rows": real.n_rows,
            "sim_rows": sim.n_rows,
            "columns": list(real.columns),
        },
    }
    _write_json(args.out, report)
    print(f"min-max AUC {report['minmax_auc']:.4f}, MMD {mmd.value:.6f}; wrote {args.out}")
    return 0


def _validate_evaluation_report(obj: dict) -> str:
    for key in ("detectors", "minmax_auc", "mmd", "adf", "metadata"):
        if key not in obj:
            raise ValueError(f"missing key {key!r}")
    aucs = [d["auc"] for d in obj["detectors"]]
    if not aucs or any(not 0 <= a <= 1 for a in aucs):
        raise ValueError("detector AUCs must lie in [0, 1]")
    if obj["minmax_auc"] != max(aucs):
        raise ValueError("minmax_auc must equal the max detector AUC")
    if obj["mmd"]["value"] < 0:
        raise ValueError("clamped MMD cannot be negative")
    return f"evaluation report: {len(aucs)} detectors, min-max AUC {obj['minmax_auc']:.4f}"


def _cmd_report(args) -> int:
    try:
        obj = _read_json(args.path)
    except json.JSONDecodeError as exc:
        print(f"error: {args.path}: invalid JSON: {exc}", file=sys.stderr)
        return 2
    if not isinstance(obj, dict):
        print(f"error: {args.path}: expected a JSON object", file=sys.stderr)
        return 2

    from .pipeline import SearchReport

    try:
        if {"n_vars", "max_lag", "edges"} <= obj.keys():
            graph = LaggedGraph.from_dict(obj)
            summary = (
                f"graph: {graph.n_vars} vars, max lag {graph.max_lag}, "
                f"{graph.n_edges()} edges"
            )
        elif obj.get("kind") == "search-report" or "score_table" in obj:
            report = SearchReport.from_dict(obj)
            summary = (
                f"search report: {len(report.candidates)} candidates, "
                f"selected {report.selected_index}, min-max AUC {report.minmax_auc:.4f}"
            )
        elif obj.get("kind") == "evaluation-report":
            summary = _validate_evaluation_report(obj)
        elif obj.get("kind") == "repeat-summary":
            if obj.get("worst_aucs") and "mean" in obj:
                summary = f"repeat summary: {obj['repeats']} runs, mean {obj['mean']:.4f}"
            else:
                raise ValueError("missing worst_aucs or mean")
        elif "cd_space" in obj:
            cfg = SearchConfig.from_dict(obj)
            summary = f"search config: grid of {cfg.grid_size()} candidates"
        elif "function_family" in obj:
            cfg = GeneratorConfig.from_dict(obj)
            summary = f"generator config: {cfg.n_vars} vars, {cfg.n_steps} steps"
        else:
            print(f"error: {args.path}: unrecognized artifact", file=sys.stderr)
            return 2
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {args.path}: invalid artifact: {exc}", file=sys.stderr)
        return 2
    print(f"ok: {summary}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="causim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate-synthetic", help="sample a random SCM and emit data")
    gen.add_argument("--n-vars", type=int, default=5)
    gen.add_argument("--n-steps", type=int, default=1100)
    gen.add_argument("--warmup", type=int, default=50)
    gen.add_argument("--min-lag", type=int, default=1)
    gen.add_argument("--max-lag", type=int, default=1)
    gen.add_argument("--edge-probability", type=float, default=0.3)
    gen.add_argument("--graph-model", choices=GRAPH_MODELS, default="erdos-renyi")
    gen.add_argument("--functions", default="linear,sigmoid",
                     help="comma-separated function family")
    gen.add_argument("--noises", default="normal", help="comma-separated noise family")
    gen.add_argument("--multiplicative", action="store_true")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out-dir", required=True)
    gen.set_defaults(func=_cmd_generate)

    dis = sub.add_parser("discover", help="estimate the lagged causal graph")
    dis.add_argument("--input", required=True)
    dis.add_argument("--algorithm", choices=ALGORITHMS, default="lagged-pc")
    dis.add_argument("--max-lag", type=int, default=1)
    dis.add_argument("--alpha", type=float, default=0.05)
    dis.add_argument("--lambda-w", type=float, default=0.1)
    dis.add_argument("--lambda-a", type=float, default=0.1)
    dis.add_argument("--tau", type=float, default=0.05,
                     help="weight threshold applied to both W and A")
    dis.add_argument("--max-iterations", type=int, default=100)
    dis.add_argument("--max-cond-size", type=int, default=2)
    dis.add_argument("--oracle-graph", default=None, help="graph JSON for --algorithm oracle")
    dis.add_argument("--out-dir", required=True)
    dis.set_defaults(func=_cmd_discover)

    sim = sub.add_parser("simulate", help="fit candidate models and simulate the best")
    sim.add_argument("--input", required=True)
    sim.add_argument("--config", default=None, help="search config JSON")
    sim.add_argument("--oracle-graph", default=None,
                     help="bypass discovery with this graph JSON")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--threads", type=int, default=None)
    sim.add_argument("--repeats", type=int, default=1)
    sim.add_argument("--out-dir", required=True)
    sim.set_defaults(func=_cmd_simulate)

    ev = sub.add_parser("evaluate", help="score simulated data against real data")
    ev.add_argument("--real", required=True)
    ev.add_argument("--sim", required=True)
    ev.add_argument("--window-lengths", default="1,10")
    ev.add_argument("--seed", type=int, default=None)
    ev.add_argument("--threads", type=int, default=None)
    ev.add_argument("--out", required=True)
    ev.set_defaults(func=_cmd_evaluate)

    rep = sub.add_parser("report", help="validate and summarize an emitted artifact")
    rep.add_argument("path")
    rep.set_defaults(func=_cmd_report)
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, PhaseError):
        return _exit_code(exc.original)
    if isinstance(exc, (NumericInstabilityError, ConvergenceError)):
        return 3
    if isinstance(exc, (CsvParseError, DataSizeError, DegenerateInputError)):
        return 2
    return 2


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (CausimError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
