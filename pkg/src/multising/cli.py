"""Command-line interface.

    multising simulate --scenario A --p 10 --q 4 --n 100 --seed 1 --out DIR
    multising fit --data data.csv --out DIR --engine fb --iterations 10000
    multising select --ppi DIR/ppi.csv --cutoff 0.5 [--out DIR2]
    multising evaluate --selected sel.csv --truth truth.csv --meta meta.json
    multising converge --data data.csv --engine ab --seeds 1 2
    multising ingest --csv raw.csv --config recode.json --out data.csv
    multising export --ppi DIR/ppi.csv --format dot --out DIR2

Every subcommand prints a JSON document on stdout. Exit codes: 0 success,
2 configuration error (also argparse failures), 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, NumericalError
from .exports import FORMATS, export_graphs, read_edge_list, write_edge_list
from .ingest import IngestSpec, ingest, read_grouped_csv, write_grouped_csv
from .runners import ENGINES, RunConfig, read_ppi_csv, run
from .summaries import (
    SelectedGraphs,
    expected_fdr,
    f1,
    mcc,
    per_group_scores,
    sec_matrix,
    select_graphs,
)


def _emit(doc: dict) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _add_fit_options(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--engine", choices=ENGINES, default="fb")
    sp.add_argument("--iterations", type=int, default=10000)
    sp.add_argument(
        "--burn-in", type=int, default=None, help="default: iterations // 2"
    )
    sp.add_argument("--thin", type=int, default=1)
    sp.add_argument("--cutoff", type=float, default=0.5)
    sp.add_argument("--g", type=float, default=0.02, help="fictive sample size")
    sp.add_argument("--rho", type=float, default=None, help="slab variance")
    sp.add_argument("--gamma", type=float, default=None, help="spike variance")
    sp.add_argument("--sigma", type=float, default=0.1, help="proposal scale")
    sp.add_argument("--tune-sigma", action="store_true")
    sp.add_argument("--omega", type=float, default=0.6)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=2.0)
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=3.0)
    sp.add_argument(
        "--bern",
        type=float,
        default=None,
        help="edge prior of the uncoupled engines (default 0.2, or 0.1 for p > 10)",
    )
    sp.add_argument("--random-scan", action="store_true")
    sp.add_argument("--record-lambda", action="store_true")
    sp.add_argument("--max-laplace-failure-rate", type=float, default=0.05)


def _config_from_args(args, seed: int, chains: int = 1) -> RunConfig:
    return RunConfig(
        engine=args.engine,
        iterations=args.iterations,
        burn_in=args.burn_in,
        thin=args.thin,
        seed=seed,
        chains=chains,
        cutoff=args.cutoff,
        g=args.g,
        rho=args.rho,
        gamma=args.gamma,
        sigma=args.sigma,
        tune_sigma=args.tune_sigma,
        omega=args.omega,
        alpha=args.alpha,
        beta=args.beta,
        a=args.a,
        b=args.b,
        bern=args.bern,
        random_scan=args.random_scan,
        record_lambda=args.record_lambda,
        max_laplace_failure_rate=args.max_laplace_failure_rate,
    )


def _cmd_simulate(args) -> int:
    from .simulate import build_scenario, simulate_dataset

    graph_seed, data_seed = np.random.SeedSequence(args.seed).spawn(2)
    scenario = build_scenario(
        args.scenario,
        p=args.p,
        q=args.q,
        rng=np.random.default_rng(graph_seed),
        n_per_group=args.n,
        m=args.m,
        main_effect=args.main_effect,
        interaction=args.interaction,
    )
    data = simulate_dataset(
        scenario,
        burn_in=args.gibbs_burn_in,
        thin=args.gibbs_thin,
        rng=np.random.default_rng(data_seed),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data_path = write_grouped_csv(data, out / "data.csv")
    truth = SelectedGraphs(
        bits=scenario.graphs,
        cutoff=float("nan"),
        group_labels=list(data.group_labels),
        variables=list(data.variables),
    )
    truth_path = write_edge_list(truth, out / "truth_edges.csv")
    meta = {
        "kind": scenario.kind,
        "p": scenario.p,
        "q": scenario.q,
        "n_per_group": data.groups[0].n,
        "seed": args.seed,
        "m": args.m,
        "main_effect": args.main_effect,
        "interaction": args.interaction,
        "gibbs_burn_in": args.gibbs_burn_in,
        "gibbs_thin": args.gibbs_thin,
        "group_labels": list(data.group_labels),
        "variables": list(data.variables),
        "edges_per_group": [int(g.sum()) for g in scenario.graphs],
        "data": str(data_path),
        "truth_edges": str(truth_path),
    }
    with open(out / "scenario.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit(meta)
    return 0


def _cmd_fit(args) -> int:
    data = read_grouped_csv(args.data)
    cfg = _config_from_args(args, seed=args.seed, chains=args.chains)
    result = run(cfg, data, out_dir=args.out, parallel=not args.no_parallel)
    _emit(
        {
            "out": str(args.out),
            "engine": cfg.engine,
            "chains": cfg.chains,
            "wall_seconds": result.summary["wall_seconds"],
            "expected_fdr": result.summary["expected_fdr"],
            "sec": result.summary["sec"],
            "convergence": result.summary["convergence"],
            "paths": result.paths,
        }
    )
    return 0


def _resolve_ppi_path(args) -> Path:
    if args.ppi is not None:
        return Path(args.ppi)
    return Path(args.run) / "ppi.csv"


def _cmd_select(args) -> int:
    table = read_ppi_csv(_resolve_ppi_path(args))
    selected = select_graphs(table, args.cutoff)
    sec = sec_matrix(selected)
    doc = {
        "cutoff": args.cutoff,
        "expected_fdr": expected_fdr(table, args.cutoff),
        "edges": {
            label: [
                {"var_r": selected.variables[r], "var_j": selected.variables[j]}
                for r, j in edges
            ]
            for label, edges in zip(selected.group_labels, selected.edge_lists())
        },
        "sec": sec.tolist(),
        "group_labels": selected.group_labels,
    }
    if args.out is not None:
        from .runners import _write_sec_csv, _write_selected_csv

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_selected_csv(out / "selected_edges.csv", selected, table)
        _write_sec_csv(out / "sec.csv", sec, selected.group_labels)
        doc["paths"] = {
            "selected_edges": str(out / "selected_edges.csv"),
            "sec": str(out / "sec.csv"),
        }
    _emit(doc)
    return 0


def _cmd_evaluate(args) -> int:
    with open(args.meta) as fh:
        meta = json.load(fh)
    try:
        labels = list(meta["group_labels"])
        variables = list(meta["variables"])
    except KeyError as exc:
        raise DataError(
            f"{args.meta}: missing key {exc} (need group_labels and variables)"
        ) from None
    truth = read_edge_list(args.truth, labels, variables)
    estimate = read_edge_list(args.selected, labels, variables)
    doc = {
        "pooled": {
            "mcc": mcc(truth.bits, estimate.bits),
            "f1": f1(truth.bits, estimate.bits),
        },
        "per_group": {
            label: scores
            for label, scores in zip(
                labels, per_group_scores(truth.bits, estimate.bits)
            )
        },
    }
    _emit(doc)
    return 0


def _cmd_converge(args) -> int:
    from .runners import engine_chain
    from .summaries import chain_correlation

    if args.ppi is not None:
        corr = chain_correlation(
            read_ppi_csv(args.ppi[0]), read_ppi_csv(args.ppi[1])
        )
        _emit({"source": [str(p) for p in args.ppi], "pearson": corr})
        return 0
    data = read_grouped_csv(args.data)
    seeds = args.seeds if args.seeds else [args.seed, args.seed + 1]
    cfg = _config_from_args(args, seed=seeds[0])
    cfg.validate(data.p)
    overrides = {
        k: v
        for k, v in vars(cfg).items()
        if k not in ("engine", "iterations", "burn_in", "thin", "seed", "chains")
    }
    chains = [
        engine_chain(
            cfg.engine,
            data,
            iterations=cfg.iterations,
            burn_in=cfg.resolved_burn_in(),
            thin=cfg.thin,
            seed=s,
            overrides=overrides,
        )
        for s in seeds
    ]
    corr = chain_correlation(chains[0], chains[1])
    _emit(
        {
            "engine": cfg.engine,
            "iterations": cfg.iterations,
            "seeds": seeds,
            "pearson": corr,
        }
    )
    return 0


def _cmd_ingest(args) -> int:
    spec = IngestSpec.from_json(args.config)
    data, report = ingest(args.csv, spec)
    out = Path(args.out)
    if out.parent != Path("."):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_grouped_csv(data, out)
    doc = report.to_dict()
    doc["out"] = str(out)
    if args.report is not None:
        with open(args.report, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _emit(doc)
    return 0


def _cmd_export(args) -> int:
    table = read_ppi_csv(_resolve_ppi_path(args))
    selected = select_graphs(table, args.cutoff)
    paths = export_graphs(
        selected, args.out, formats=tuple(args.format), prefix=args.prefix
    )
    _emit({"cutoff": args.cutoff, "paths": [str(p) for p in paths]})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multising",
        description="Joint Bayesian structure learning for grouped binary data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="generate benchmark data")
    sp.add_argument("--scenario", choices=("A", "B", "C", "D"), default="A")
    sp.add_argument("--p", type=int, default=10)
    sp.add_argument("--q", type=int, default=4)
    sp.add_argument("--n", type=int, default=100, help="rows per group")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--m", type=int, default=1, help="attachment count")
    sp.add_argument("--main-effect", type=float, default=-1.0)
    sp.add_argument("--interaction", type=float, default=1.5)
    sp.add_argument("--gibbs-burn-in", type=int, default=1000)
    sp.add_argument("--gibbs-thin", type=int, default=10)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("fit", help="run an MCMC engine and write artifacts")
    sp.add_argument("--data", required=True, help="grouped binary CSV")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--chains", type=int, default=1)
    sp.add_argument("--no-parallel", action="store_true")
    _add_fit_options(sp)
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("select", help="threshold a PPI table")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--ppi", help="ppi.csv from a fit")
    src.add_argument("--run", help="fit output directory")
    sp.add_argument("--cutoff", type=float, default=0.5)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_select)

    sp = sub.add_parser("evaluate", help="score selected edges against truth")
    sp.add_argument("--selected", required=True, help="edge-list CSV")
    sp.add_argument("--truth", required=True, help="edge-list CSV")
    sp.add_argument(
        "--meta",
        required=True,
        help="JSON with group_labels and variables (scenario.json or summary.json)",
    )
    sp.set_defaults(func=_cmd_evaluate)

    sp = sub.add_parser("converge", help="two-seed reproducibility check")
    sp.add_argument(
        "--ppi",
        nargs=2,
        default=None,
        metavar=("A", "B"),
        help="correlate two existing ppi.csv files instead of running",
    )
    sp.add_argument("--data", help="grouped binary CSV (when running chains)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument(
        "--seeds", type=int, nargs=2, default=None, metavar=("S1", "S2")
    )
    _add_fit_options(sp)
    sp.set_defaults(func=_cmd_converge)

    sp = sub.add_parser("ingest", help="recode a raw CSV into grouped binary data")
    sp.add_argument("--csv", required=True)
    sp.add_argument("--config", required=True, help="recode config JSON")
    sp.add_argument("--out", required=True, help="output data CSV")
    sp.add_argument("--report", default=None, help="also write the report JSON here")
    sp.set_defaults(func=_cmd_ingest)

    sp = sub.add_parser("export", help="write selected graphs for viewers")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--ppi", help="ppi.csv from a fit")
    src.add_argument("--run", help="fit output directory")
    sp.add_argument("--cutoff", type=float, default=0.5)
    sp.add_argument(
        "--format",
        action="append",
        choices=FORMATS,
        default=None,
        help="repeatable; default: all formats",
    )
    sp.add_argument("--out", required=True)
    sp.add_argument("--prefix", default="graph")
    sp.set_defaults(func=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "converge" and args.ppi is None and args.data is None:
        parser.error("converge needs --data (or two --ppi files)")
    if args.command == "export" and args.format is None:
        args.format = list(FORMATS)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
