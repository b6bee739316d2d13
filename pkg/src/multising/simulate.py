"""Scenario construction and synthetic-data generation.

Scenarios couple q groups through their true graphs:

    A: one scale-free graph shared by every group;
    B: q distinct scale-free graphs (resampled until pairwise distinct);
    C: two distinct graphs split 2 + 2 (requires q = 4);
    D: one graph for three groups plus one distinct graph (requires q = 4).

True graphs come from a preferential-attachment generator (m edges per new
node, degree+1 smoothing, so m=1 yields a spanning tree).  Graphs map to
Ising parameters with main effects -1 and interaction 1.5 on present edges,
and each group's rows are drawn by Gibbs sampling.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .ising import BinaryDataset, CanonicalParams, GroupedData, gibbs_sample
from .pairs import pair_count, pair_index

SCENARIO_KINDS = ("A", "B", "C", "D")


@dataclass
class Scenario:
    """True graphs and parameters for one simulated study cell."""

    kind: str
    p: int
    q: int
    graphs: np.ndarray  # (q, n_pairs) uint8
    params: list[CanonicalParams]
    n_per_group: int = 100
    seed: int | None = None


@dataclass
class StudyRow:
    """Aggregated scores of one (scenario, engine) cell."""

    scenario: str
    engine: str
    replicates: int
    mean_mcc: float
    se_mcc: float
    mean_f1: float
    se_f1: float
    seconds_per_replicate: float


@dataclass
class StudyReport:
    """Replicated-study results plus the configuration that produced them."""

    rows: list[StudyRow]
    config: dict = field(default_factory=dict)


def barabasi_albert(
    p: int, m: int = 1, rng: np.random.Generator | int | None = None
) -> np.ndarray:
    """Scale-free random graph as a canonical edge-indicator vector.

    Nodes arrive one at a time; node v attaches min(m, v) edges to distinct
    existing nodes drawn with probability proportional to degree + 1 (the
    smoothing gives isolated seed nodes a chance).  m = 1 yields a tree
    with p - 1 edges.
    """
    if p < 2:
        raise ValueError("need at least two nodes")
    if m < 1:
        raise ValueError("m must be at least 1")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    degree = np.zeros(p, dtype=np.int64)
    bits = np.zeros(pair_count(p), dtype=np.uint8)
    for v in range(1, p):
        weights = (degree[:v] + 1).astype(float)
        for _ in range(min(m, v)):
            probs = weights / weights.sum()
            target = int(rng.choice(v, p=probs))
            weights[target] = 0.0  # distinct targets within one arrival
            bits[pair_index(v, target)] = 1
            degree[target] += 1
            degree[v] += 1
    return bits


def graphs_to_params(
    graphs: np.ndarray,
    main_effect: float = -1.0,
    interaction: float = 1.5,
) -> list[CanonicalParams]:
    """Constant-strength Ising parameters for each graph."""
    graphs = np.atleast_2d(np.asarray(graphs, dtype=np.uint8))
    n_pairs = graphs.shape[1]
    p = int(round((1 + np.sqrt(1 + 8 * n_pairs)) / 2))
    if pair_count(p) != n_pairs:
        raise ValueError(f"bit vector length {n_pairs} fits no p")
    return [
        CanonicalParams(
            np.full(p, main_effect), interaction * row.astype(float)
        )
        for row in graphs
    ]


def _distinct(rows: np.ndarray) -> bool:
    seen = {row.tobytes() for row in rows}
    return len(seen) == len(rows)


def build_scenario(
    kind: str,
    p: int,
    q: int,
    rng: np.random.Generator | int | None = None,
    n_per_group: int = 100,
    m: int = 1,
    main_effect: float = -1.0,
    interaction: float = 1.5,
    seed: int | None = None,
) -> Scenario:
    """Draw the true graphs of one scenario and attach parameters."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    kind = kind.upper()
    if kind not in SCENARIO_KINDS:
        raise ConfigError(f"unknown scenario kind {kind!r}")
    if kind in ("C", "D") and q != 4:
        raise ConfigError(f"scenario {kind} requires q = 4, got q = {q}")
    if q < 2:
        raise ConfigError("scenarios need at least two groups")

    if kind == "A":
        g = barabasi_albert(p, m, rng)
        graphs = np.tile(g, (q, 1))
    elif kind == "B":
        for _ in range(200):
            graphs = np.stack([barabasi_albert(p, m, rng) for _ in range(q)])
            if _distinct(graphs):
                break
        else:
            raise ConfigError(
                f"could not draw {q} distinct graphs on p = {p} nodes"
            )
    else:
        for _ in range(200):
            g1, g2 = barabasi_albert(p, m, rng), barabasi_albert(p, m, rng)
            if g1.tobytes() != g2.tobytes():
                break
        else:
            raise ConfigError(f"could not draw two distinct graphs on p = {p}")
        split = (g1, g1, g2, g2) if kind == "C" else (g1, g1, g1, g2)
        graphs = np.stack(split)

    return Scenario(
        kind=kind,
        p=p,
        q=q,
        graphs=graphs.astype(np.uint8),
        params=graphs_to_params(graphs, main_effect, interaction),
        n_per_group=n_per_group,
        seed=seed,
    )


def simulate_dataset(
    scenario: Scenario,
    n_x: int | None = None,
    burn_in: int = 1000,
    thin: int = 10,
    rng: np.random.Generator | int | None = None,
    group_seeds: list[int] | None = None,
) -> GroupedData:
    """Gibbs-sample every group of a scenario.

    Groups are simulated independently, each from its own child seed, so
    permuting the group order (with the matching seed permutation) permutes
    the outputs without changing any group's rows.  Explicit group_seeds
    override the seeds spawned from rng.
    """
    n_x = scenario.n_per_group if n_x is None else n_x
    if group_seeds is not None:
        if len(group_seeds) != scenario.q:
            raise ValueError("need one seed per group")
        rngs = [np.random.default_rng(s) for s in group_seeds]
    else:
        rng = (
            rng
            if isinstance(rng, np.random.Generator)
            else np.random.default_rng(rng)
        )
        rngs = rng.spawn(scenario.q)
    groups = [
        gibbs_sample(
            scenario.params[x],
            n_x,
            burn_in=burn_in,
            thin=thin,
            rng=rngs[x],
            group_label=f"g{x + 1}",
        )
        for x in range(scenario.q)
    ]
    return GroupedData(groups)


def replicate_study(config: dict) -> StudyReport:
    """Replicated simulation study over scenario kinds and engines.

    config keys (all optional unless noted):
        scenarios: list of kinds, default ["A"]
        engines: list from {"fb", "ab", "fbs", "abs"}, default ["fb"]
        replicates: int, default 3
        p, q, n_x: dimensions, defaults 10, 4, 100
        iterations, burn_in, thin: chain settings
        seed (required): master seed
        cutoff: selection cutoff, default 0.5
        sim_burn_in, sim_thin: Gibbs settings for the data
    """
    from .runners import engine_chain  # local import to avoid a cycle

    cfg = dict(config)
    seed = cfg.get("seed")
    if seed is None:
        raise ConfigError("replicate_study requires a seed")
    scenarios = [str(k).upper() for k in cfg.get("scenarios", ["A"])]
    engines = [str(e).lower() for e in cfg.get("engines", ["fb"])]
    reps = int(cfg.get("replicates", 3))
    p = int(cfg.get("p", 10))
    q = int(cfg.get("q", 4))
    n_x = int(cfg.get("n_x", 100))
    cutoff = float(cfg.get("cutoff", 0.5))

    from .summaries import f1 as f1_score
    from .summaries import mcc as mcc_score
    from .summaries import ppi, select_graphs

    rows = []
    for kind in scenarios:
        kind_id = SCENARIO_KINDS.index(kind)
        kind_scores: dict[str, list[tuple[float, float, float]]] = {
            e: [] for e in engines
        }
        for rep in range(reps):
            scen_rng = np.random.default_rng(
                np.random.SeedSequence((seed, kind_id, rep, 0))
            )
            data_rng = np.random.default_rng(
                np.random.SeedSequence((seed, kind_id, rep, 1))
            )
            scen = build_scenario(kind, p, q, scen_rng, n_per_group=n_x)
            data = simulate_dataset(
                scen,
                n_x,
                burn_in=int(cfg.get("sim_burn_in", 1000)),
                thin=int(cfg.get("sim_thin", 10)),
                rng=data_rng,
            )
            for engine in engines:
                t0 = time.perf_counter()
                chain = engine_chain(
                    engine,
                    data,
                    iterations=int(cfg.get("iterations", 10000)),
                    burn_in=int(cfg.get("burn_in", 5000)),
                    thin=int(cfg.get("thin", 1)),
                    seed=int(
                        np.random.SeedSequence(
                            (seed, kind_id, rep, 2)
                        ).generate_state(1)[0]
                    ),
                    overrides=cfg.get("engine_overrides", {}),
                )
                sel = select_graphs(ppi(chain), cutoff)
                kind_scores[engine].append(
                    (
                        mcc_score(scen.graphs, sel.bits),
                        f1_score(scen.graphs, sel.bits),
                        time.perf_counter() - t0,
                    )
                )
        for engine in engines:
            arr = np.array(kind_scores[engine])
            n = arr.shape[0]
            se = arr.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(3)
            rows.append(
                StudyRow(
                    scenario=kind,
                    engine=engine,
                    replicates=n,
                    mean_mcc=float(arr[:, 0].mean()),
                    se_mcc=float(se[0]),
                    mean_f1=float(arr[:, 1].mean()),
                    se_f1=float(se[1]),
                    seconds_per_replicate=float(arr[:, 2].mean()),
                )
            )
    return StudyReport(rows=rows, config=cfg)


__all__ = [
    "SCENARIO_KINDS",
    "Scenario",
    "StudyRow",
    "StudyReport",
    "barabasi_albert",
    "graphs_to_params",
    "build_scenario",
    "simulate_dataset",
    "replicate_study",
]
