"""Run orchestration: engine dispatch, multi-chain fits, artifact files.

A fit writes into one output directory:

    summary.json        config echo, versions, acceptance rates, PPI and
                        similarity tables, selected edges, shared-edge
                        counts, expected FDR, convergence diagnostics
    chain_<i>.csv       thinned samples of chain i (1-based), one row per
                        recorded iteration
    ppi.csv             per-group per-pair inclusion probabilities
    theta_ppi.csv       similarity-indicator frequencies per group pair
    sec.csv             shared-edge count matrix
    selected_edges.csv  thresholded edges with their PPI

Chain CSV columns use 1-based variable indices: delta.<group>.<r>.<j>,
theta.<x>.<h>, epsilon.<x>.<h>, nu.<r>.<j>, and (optionally)
lambda.<group>.<r>.<j> with main effects written as r == j.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ab import AbConfig, run_ab_chain
from .chain import ChainOutput, group_pair_list
from .coupling import CouplingConfig, NuProposal, ThetaProposal
from .errors import ConfigError, NumericalError
from .fb import FbConfig, run_fb_chain
from .ising import ENUM_MAX_P, GroupedData
from .pairs import pair_count, pair_list
from .priors import MrfHyper
from .summaries import (
    chain_correlation,
    expected_fdr,
    ppi,
    sec_matrix,
    select_graphs,
    theta_ppi,
)

ENGINES = ("fb", "ab", "fbs", "abs")


@dataclass
class RunConfig:
    """Everything needed to reproduce a fit."""

    engine: str = "fb"
    iterations: int = 10000
    burn_in: int | None = None  # None -> iterations // 2
    thin: int = 1
    seed: int = 0
    chains: int = 1
    cutoff: float = 0.5
    g: float = 0.02
    rho: float | None = None
    gamma: float | None = None
    sigma: float = 0.1
    tune_sigma: bool = False
    omega: float = 0.6
    alpha: float = 1.0
    beta: float = 2.0
    a: float = 1.0
    b: float = 3.0
    theta_prop_alpha: float = 2.0
    theta_prop_beta: float = 2.0
    nu_prop_a: float = 1.0
    nu_prop_b: float = 2.0
    random_scan: bool = False
    bern: float | None = None  # edge prior of the uncoupled variants
    record_lambda: bool = False
    max_laplace_failure_rate: float = 0.05

    def validate(self, p: int | None = None) -> None:
        if self.engine not in ENGINES:
            raise ConfigError(
                f"engine must be one of {ENGINES}, got {self.engine!r}"
            )
        if self.iterations < 1:
            raise ConfigError(f"iterations must be positive, got {self.iterations}")
        bi = self.resolved_burn_in()
        if not 0 <= bi < self.iterations:
            raise ConfigError(
                f"burn_in must lie in [0, iterations), got {bi} of {self.iterations}"
            )
        if self.thin < 1:
            raise ConfigError(f"thin must be at least 1, got {self.thin}")
        if self.chains < 1:
            raise ConfigError(f"chains must be at least 1, got {self.chains}")
        if not 0 <= self.cutoff < 1:
            raise ConfigError(f"cutoff must lie in [0, 1), got {self.cutoff}")
        if self.g <= 0:
            raise ConfigError(f"g must be positive, got {self.g}")
        for name in ("rho", "gamma"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not 0 < self.omega < 1:
            raise ConfigError(f"omega must lie in (0, 1), got {self.omega}")
        for name in (
            "alpha",
            "beta",
            "a",
            "b",
            "theta_prop_alpha",
            "theta_prop_beta",
            "nu_prop_a",
            "nu_prop_b",
        ):
            v = getattr(self, name)
            if v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.bern is not None and not 0 < self.bern < 1:
            raise ConfigError(f"bern must lie in (0, 1), got {self.bern}")
        if not 0 <= self.max_laplace_failure_rate <= 1:
            raise ConfigError(
                "max_laplace_failure_rate must lie in [0, 1], got "
                f"{self.max_laplace_failure_rate}"
            )
        if p is not None and self.engine in ("fb", "fbs") and p > ENUM_MAX_P:
            raise ConfigError(
                f"engine {self.engine!r} enumerates 2^p cells and requires "
                f"p <= {ENUM_MAX_P}, got p = {p}"
            )

    def resolved_burn_in(self) -> int:
        return self.iterations // 2 if self.burn_in is None else self.burn_in

    def coupling_config(self, p: int) -> CouplingConfig:
        frozen = self.engine in ("fbs", "abs")
        nu_fixed = None
        if frozen:
            bern = self.bern if self.bern is not None else (
                0.2 if p <= 10 else 0.1
            )
            nu_fixed = float(np.log(bern) - np.log1p(-bern))
        return CouplingConfig(
            hyper=MrfHyper(self.a, self.b),
            omega=self.omega,
            alpha=self.alpha,
            beta=self.beta,
            theta_prop=ThetaProposal(self.theta_prop_alpha, self.theta_prop_beta),
            nu_prop=NuProposal(self.nu_prop_a, self.nu_prop_b),
            random_scan=self.random_scan,
            frozen=frozen,
            nu_fixed=nu_fixed,
        )

    def engine_config(self, p: int, seed: int):
        coupling = self.coupling_config(p)
        if self.engine in ("fb", "fbs"):
            return FbConfig(
                iterations=self.iterations,
                burn_in=self.resolved_burn_in(),
                thin=self.thin,
                g=self.g,
                seed=seed,
                coupling=coupling,
            )
        return AbConfig(
            iterations=self.iterations,
            burn_in=self.resolved_burn_in(),
            thin=self.thin,
            rho=self.rho,
            gamma=self.gamma,
            sigma=self.sigma,
            tune_sigma=self.tune_sigma,
            seed=seed,
            coupling=coupling,
            record_lambda=self.record_lambda,
        )


def engine_chain(
    engine: str,
    data: GroupedData,
    iterations: int,
    burn_in: int,
    thin: int = 1,
    seed: int = 0,
    overrides: dict | None = None,
) -> ChainOutput:
    """Run one chain of the named engine with RunConfig defaults."""
    cfg = RunConfig(
        engine=engine,
        iterations=iterations,
        burn_in=burn_in,
        thin=thin,
        seed=seed,
        **(overrides or {}),
    )
    cfg.validate(data.p)
    return _run_single(cfg, data, seed)


def _run_single(cfg: RunConfig, data: GroupedData, seed: int) -> ChainOutput:
    ecfg = cfg.engine_config(data.p, seed)
    if cfg.engine in ("fb", "fbs"):
        out = run_fb_chain(data, ecfg)
        attempts = out.meta.get("laplace_attempts", 0)
        failures = out.meta.get("laplace_failures", 0)
        if attempts and failures / attempts > cfg.max_laplace_failure_rate:
            raise NumericalError(
                f"Laplace search failed for {failures} of {attempts} graph "
                f"evaluations (limit {cfg.max_laplace_failure_rate:.0%})"
            )
        return out
    return run_ab_chain(data, ecfg)


def _chain_seeds(seed: int, chains: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(s.generate_state(1)[0]) for s in ss.spawn(chains)]


def _spawn_chain(args) -> ChainOutput:
    cfg, data, seed = args
    return _run_single(cfg, data, seed)


@dataclass
class RunResult:
    """Fit outputs: one ChainOutput per chain plus derived summaries."""

    chains: list[ChainOutput]
    ppi_table: "np.ndarray"
    summary: dict
    paths: dict = field(default_factory=dict)


def run(
    config: RunConfig,
    data: GroupedData,
    out_dir: str | Path | None = None,
    parallel: bool = True,
) -> RunResult:
    """Fit the model and (optionally) write the artifact files.

    With chains > 1 the chains get seeds derived from config.seed and run
    in separate processes; outputs are merged by averaging the per-chain
    PPI tables and reporting pairwise chain correlations.
    """
    config.validate(data.p)
    seeds = _chain_seeds(config.seed, config.chains)
    t0 = time.perf_counter()
    if config.chains > 1 and parallel:
        with ProcessPoolExecutor(max_workers=min(config.chains, 8)) as pool:
            chains = list(
                pool.map(_spawn_chain, [(config, data, s) for s in seeds])
            )
    else:
        chains = [_run_single(config, data, s) for s in seeds]
    wall = time.perf_counter() - t0

    tables = [ppi(c) for c in chains]
    pooled = tables[0]
    if len(tables) > 1:
        pooled_values = np.mean([t.values for t in tables], axis=0)
        pooled = type(tables[0])(
            values=pooled_values,
            group_labels=tables[0].group_labels,
            variables=tables[0].variables,
            burn_in=tables[0].burn_in,
            iterations=tables[0].iterations,
        )
    selected = select_graphs(pooled, config.cutoff)
    sec = sec_matrix(selected)
    fdr = expected_fdr(pooled, config.cutoff)
    tppi = np.mean([theta_ppi(c) for c in chains], axis=0)

    convergence = {}
    for i in range(len(chains)):
        for j in range(i + 1, len(chains)):
            corr = chain_correlation(chains[i], chains[j])
            convergence[f"chain{i + 1}-chain{j + 1}"] = corr

    labels = list(data.group_labels)
    variables = list(data.variables)
    pl = pair_list(data.p)
    summary = {
        "config": asdict(config),
        "engine": config.engine,
        "versions": {
            "multising": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "seeds": seeds,
        "wall_seconds": wall,
        "group_labels": labels,
        "variables": variables,
        "acceptance": {
            f"chain{i + 1}": c.acceptance_rates() for i, c in enumerate(chains)
        },
        "chain_meta": {
            f"chain{i + 1}": _jsonable(c.meta) for i, c in enumerate(chains)
        },
        "ppi": _table_dict(pooled.values, labels, variables),
        "theta_ppi": {
            f"{labels[x]}|{labels[h]}": float(tppi[x, h])
            for x, h in group_pair_list(data.q)
        },
        "selected_edges": {
            labels[x]: [
                {
                    "r": r + 1,
                    "j": j + 1,
                    "var_r": variables[r],
                    "var_j": variables[j],
                    "ppi": float(pooled.values[x, r * (r - 1) // 2 + j]),
                }
                for (r, j) in edges
            ]
            for x, edges in enumerate(selected.edge_lists())
        },
        "sec": sec.tolist(),
        "expected_fdr": fdr,
        "cutoff": config.cutoff,
        "convergence": convergence,
    }
    assert len(pl) == pair_count(data.p)

    result = RunResult(chains=chains, ppi_table=pooled, summary=summary)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, c in enumerate(chains):
            path = out / f"chain_{i + 1}.csv"
            write_chain_csv(c, path)
            result.paths[f"chain_{i + 1}"] = str(path)
        _write_ppi_csv(out / "ppi.csv", pooled)
        _write_theta_ppi_csv(out / "theta_ppi.csv", tppi, labels)
        _write_sec_csv(out / "sec.csv", sec, labels)
        _write_selected_csv(out / "selected_edges.csv", selected, pooled)
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        result.paths.update(
            ppi=str(out / "ppi.csv"),
            theta_ppi=str(out / "theta_ppi.csv"),
            sec=str(out / "sec.csv"),
            selected_edges=str(out / "selected_edges.csv"),
            summary=str(out / "summary.json"),
        )
    return result


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _table_dict(values, labels, variables) -> dict:
    pl = pair_list(len(variables))
    return {
        labels[x]: {
            f"{variables[r]}|{variables[j]}": float(values[x, k])
            for k, (r, j) in enumerate(pl)
        }
        for x in range(values.shape[0])
    }


def write_chain_csv(chain: ChainOutput, path: str | Path) -> None:
    """One row per recorded iteration; see the module docstring for columns."""
    q, p = chain.q, chain.p
    pl = pair_list(p)
    gl = chain.group_labels
    gpairs = group_pair_list(q)
    header = ["iteration"]
    header += [
        f"delta.{gl[x]}.{r + 1}.{j + 1}" for x in range(q) for r, j in pl
    ]
    header += [f"theta.{x + 1}.{h + 1}" for x, h in gpairs]
    header += [f"epsilon.{x + 1}.{h + 1}" for x, h in gpairs]
    header += [f"nu.{r + 1}.{j + 1}" for r, j in pl]
    lam = chain.lambda_samples
    if lam is not None:
        header += [f"lambda.{gl[x]}.{r + 1}.{r + 1}" for x in range(q) for r in range(p)]
        header += [
            f"lambda.{gl[x]}.{r + 1}.{j + 1}" for x in range(q) for r, j in pl
        ]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(chain.n_kept):
            row = [int(chain.sample_iters[i])]
            row += [int(v) for v in chain.delta_samples[i].ravel()]
            row += [repr(float(v)) for v in chain.theta_samples[i]]
            row += [int(v) for v in chain.epsilon_samples[i]]
            row += [repr(float(v)) for v in chain.nu_samples[i]]
            if lam is not None:
                mains = lam[i][:, :p].ravel(order="C")
                inters = lam[i][:, p:].ravel(order="C")
                row += [repr(float(v)) for v in mains]
                row += [repr(float(v)) for v in inters]
            w.writerow(row)


def _write_ppi_csv(path, table) -> None:
    pl = pair_list(len(table.variables))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "r", "j", "var_r", "var_j", "ppi"])
        for x, label in enumerate(table.group_labels):
            for k, (r, j) in enumerate(pl):
                w.writerow(
                    [
                        label,
                        r + 1,
                        j + 1,
                        table.variables[r],
                        table.variables[j],
                        repr(float(table.values[x, k])),
                    ]
                )


def _write_theta_ppi_csv(path, tppi, labels) -> None:
    q = len(labels)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group_x", "group_h", "frequency"])
        for x, h in group_pair_list(q):
            w.writerow([labels[x], labels[h], repr(float(tppi[x, h]))])


def _write_sec_csv(path, sec, labels) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group"] + labels)
        for x, label in enumerate(labels):
            w.writerow([label] + [int(v) for v in sec[x]])


def _write_selected_csv(path, selected, table) -> None:
    pl = pair_list(len(selected.variables))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "r", "j", "var_r", "var_j", "ppi"])
        for x, label in enumerate(selected.group_labels):
            for k in np.flatnonzero(selected.bits[x]):
                r, j = pl[k]
                w.writerow(
                    [
                        label,
                        r + 1,
                        j + 1,
                        selected.variables[r],
                        selected.variables[j],
                        repr(float(table.values[x, k])),
                    ]
                )


def read_ppi_csv(path: str | Path):
    """Rebuild a PpiTable from ppi.csv (groups and pairs in file order)."""
    from .summaries import PpiTable

    groups: list[str] = []
    variables: dict[str, None] = {}
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(rec)
            if rec["group"] not in groups:
                groups.append(rec["group"])
            variables.setdefault(rec["var_j"])
            variables.setdefault(rec["var_r"])
    names = list(variables)
    p = len(names)
    values = np.zeros((len(groups), pair_count(p)))
    for rec in rows:
        x = groups.index(rec["group"])
        r, j = int(rec["r"]) - 1, int(rec["j"]) - 1
        values[x, r * (r - 1) // 2 + j] = float(rec["ppi"])
    return PpiTable(
        values=values,
        group_labels=groups,
        variables=names,
        burn_in=0,
        iterations=0,
    )


__all__ = [
    "ENGINES",
    "RunConfig",
    "RunResult",
    "engine_chain",
    "run",
    "write_chain_csv",
    "read_ppi_csv",
]
