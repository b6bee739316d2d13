"""Quasi-likelihood sampling engine: per-coordinate MALA plus edge flips.

The target for node r of group x is the node-conditional quasi-posterior

    h(lam_row, delta_row) = sum_i [ z_r eta_i - log(1 + exp(eta_i)) ]
                            + log N(lam_rr; 0, rho)
                            + sum_{j<r} log N(lam_rj; 0, rho or gamma)

with the masked linear predictor eta_i = lam_rr + sum_{j<r: delta_rj=1}
lam_rj z_j.  Inactive coordinates do not enter eta; their N(0, gamma) spike
acts as a pseudo-prior, so refreshing them from the spike is an exact Gibbs
update, and the edge-flip ratio carries the likelihood change of toggling
lam_rj in and out of eta together with the spike/slab density switch and
the conditional MRF prior ratio.

Per iteration, for each group and each node r (ascending): one MALA pass
over the active coordinates (main effect first, then active lam_rj by
ascending j), a spike refresh of the inactive coordinates, and one flip
proposal per pair (r, j), j ascending.  Then one coupling sweep.

MALA proposes per coordinate lam~ ~ N(lam + (sigma^2/2) G, sigma^2) where G
is the gradient of h in that coordinate, with the usual asymmetric
correction.  sigma is constant by default; an optional Robbins-Monro tuner
adapts it toward 0.5 acceptance during burn-in only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainOutput, ChainRecorder
from .coupling import CouplingConfig, coupling_sweep
from .ising import BinaryDataset, GroupedData, node_conditional_loglik
from .pairs import pair_count, row_slice
from .priors import CouplingState, SpikeSlabHyper, spike_slab_logpdf


@dataclass
class AbState:
    """Per-group parameters and edge indicators for the quasi engine.

    rows[x][r] is the mutable node vector (lam_rr, lam_r0, ..., lam_r,r-1)
    of group x; delta has shape (q, n_pairs) in canonical pair order.
    """

    rows: list[list[np.ndarray]]
    delta: np.ndarray
    coupling: CouplingState
    sigma: float

    @property
    def q(self) -> int:
        return len(self.rows)

    @property
    def p(self) -> int:
        return len(self.rows[0])

    def lam_matrix(self) -> np.ndarray:
        """(q, p + n_pairs) snapshot: mains first, then canonical pairs."""
        p = self.p
        out = np.empty((self.q, p + pair_count(p)))
        for x, rows in enumerate(self.rows):
            for r, row in enumerate(rows):
                out[x, r] = row[0]
                out[x, p + r * (r - 1) // 2 : p + r * (r + 1) // 2] = row[1:]
        return out

    @classmethod
    def initial(cls, q: int, p: int, coupling: CouplingState, sigma: float):
        rows = [[np.zeros(r + 1) for r in range(p)] for _ in range(q)]
        delta = np.zeros((q, pair_count(p)), dtype=np.uint8)
        return cls(rows, delta, coupling, sigma)

    def delta_row(self, x: int, r: int) -> np.ndarray:
        """Mutable view of delta bits (r, j) for j < r."""
        return self.delta[x, row_slice(r)]


@dataclass
class AbConfig:
    """Run settings for the quasi-likelihood engine.

    rho/gamma default to the dimension-dependent table: (2, 0.5) for
    p <= 10 and (10, 0.1) for larger p.
    """

    iterations: int = 10000
    burn_in: int = 5000
    thin: int = 1
    rho: float | None = None
    gamma: float | None = None
    sigma: float = 0.1
    tune_sigma: bool = False
    seed: int | None = None
    coupling: CouplingConfig = field(default_factory=CouplingConfig)
    record_lambda: bool = False

    def slab_spike(self, p: int) -> SpikeSlabHyper:
        rho = self.rho if self.rho is not None else (2.0 if p <= 10 else 10.0)
        gamma = (
            self.gamma if self.gamma is not None else (0.5 if p <= 10 else 0.1)
        )
        return SpikeSlabHyper(rho, gamma)


def quasi_objective(
    lam_row: np.ndarray,
    delta_row: np.ndarray,
    data: BinaryDataset,
    r: int,
    hyper: SpikeSlabHyper,
) -> float:
    """Masked node-conditional log-likelihood plus spike-and-slab log-prior."""
    lam_row = np.asarray(lam_row, dtype=float)
    delta_row = np.asarray(delta_row)
    masked = lam_row.copy()
    masked[1:] *= delta_row != 0
    full_bits = np.concatenate(([1], delta_row))
    return node_conditional_loglik(data, masked, r) + spike_slab_logpdf(
        lam_row, full_bits, hyper
    )


def quasi_grad(
    lam_row: np.ndarray,
    delta_row: np.ndarray,
    data: BinaryDataset,
    r: int,
    hyper: SpikeSlabHyper,
) -> np.ndarray:
    """Gradient of quasi_objective in every coordinate of lam_row.

    Active coordinates get the data term sum_i (z_r - logistic(eta_i)) *
    d(eta_i)/d(lam_j) minus lam_j / rho; inactive coordinates reduce to the
    spike gradient -lam_j / gamma.
    """
    lam_row = np.asarray(lam_row, dtype=float)
    delta_row = np.asarray(delta_row)
    active = delta_row != 0
    z_r = data.rows[:, r].astype(float)
    covs = data.rows[:, :r].astype(float)
    eta = lam_row[0] + covs @ (lam_row[1:] * active)
    resid = z_r - 1.0 / (1.0 + np.exp(-eta))
    grad = np.empty_like(lam_row)
    grad[0] = resid.sum() - lam_row[0] / hyper.rho
    grad[1:] = np.where(
        active,
        resid @ covs - lam_row[1:] / hyper.rho,
        -lam_row[1:] / hyper.gamma,
    )
    return grad


class _NodeBlock:
    """Cached design columns of one node with incremental eta arithmetic."""

    def __init__(self, data: BinaryDataset, r: int):
        self.r = r
        self.z = data.rows[:, r].astype(float)
        self.covs = data.rows[:, :r].astype(float)

    def eta(self, lam_row: np.ndarray, delta_row: np.ndarray) -> np.ndarray:
        if self.r == 0:
            return np.full(self.z.shape[0], lam_row[0])
        return lam_row[0] + self.covs @ (lam_row[1:] * (delta_row != 0))

    def loglik_delta(self, eta_new, eta_old) -> float:
        """Change in node-conditional log-likelihood between two etas."""
        return float(
            self.z @ (eta_new - eta_old)
            - np.sum(np.logaddexp(0.0, eta_new) - np.logaddexp(0.0, eta_old))
        )


def _blocks_for(data: GroupedData) -> list[list[_NodeBlock]]:
    return [
        [_NodeBlock(ds, r) for r in range(data.p)] for ds in data.groups
    ]


def _coord_grad(block: _NodeBlock, eta, lam_val, col, rho) -> float:
    resid = block.z - 1.0 / (1.0 + np.exp(-eta))
    data_term = resid.sum() if col is None else float(resid @ col)
    return float(data_term - lam_val / rho)


def mala_step(
    state: AbState,
    x: int,
    r: int,
    data: BinaryDataset,
    hyper: SpikeSlabHyper,
    rng: np.random.Generator,
    counters: dict[str, np.ndarray],
    block: _NodeBlock | None = None,
) -> None:
    """Per-coordinate MALA over the active coordinates of node r, group x."""
    if block is None:
        block = _NodeBlock(data, r)
    lam_row = state.rows[x][r]
    delta_row = state.delta_row(x, r)
    eta = block.eta(lam_row, delta_row)
    sigma = state.sigma
    half = 0.5 * sigma * sigma
    coords = [0] + [1 + j for j in range(r) if delta_row[j]]
    for c in coords:
        col = None if c == 0 else block.covs[:, c - 1]
        cur = float(lam_row[c])
        g_cur = _coord_grad(block, eta, cur, col, hyper.rho)
        cand = cur + half * g_cur + sigma * rng.standard_normal()
        step = cand - cur
        eta_cand = eta + step if col is None else eta + step * col
        g_cand = _coord_grad(block, eta_cand, cand, col, hyper.rho)
        log_post = block.loglik_delta(eta_cand, eta) - (
            cand**2 - cur**2
        ) / (2.0 * hyper.rho)
        fwd = cand - cur - half * g_cur
        rev = cur - cand - half * g_cand
        log_q = (fwd**2 - rev**2) / (2.0 * sigma * sigma)
        counters["mala"][1] += 1
        if np.log(rng.random()) < log_post + log_q:
            lam_row[c] = cand
            eta = eta_cand
            counters["mala"][0] += 1


def spike_refresh(
    state: AbState,
    x: int,
    r: int,
    hyper: SpikeSlabHyper,
    rng: np.random.Generator,
) -> None:
    """Draw every inactive lam_rj of node r fresh from the N(0, gamma) spike."""
    lam_row = state.rows[x][r]
    delta_row = state.delta_row(x, r)
    inactive = np.flatnonzero(delta_row == 0)
    if len(inactive):
        lam_row[1 + inactive] = rng.standard_normal(len(inactive)) * np.sqrt(
            hyper.gamma
        )


def flip_log_ratio(
    state: AbState,
    x: int,
    r: int,
    j: int,
    data: BinaryDataset,
    hyper: SpikeSlabHyper,
    block: _NodeBlock | None = None,
) -> float:
    """Log acceptance ratio of toggling edge (r, j) of group x (j < r).

    Sum of the likelihood change from adding/removing lam_rj z_j in eta,
    the spike/slab density switch for lam_rj (at lam_rj = 0 this reduces
    to +-(1/2) log(gamma/rho)), and the conditional MRF prior change.
    """
    if block is None:
        block = _NodeBlock(data, r)
    lam_row = state.rows[x][r]
    delta_row = state.delta_row(x, r)
    k = r * (r - 1) // 2 + j
    cur = int(delta_row[j])
    lam_val = float(lam_row[1 + j])
    eta = block.eta(lam_row, delta_row)
    shift = block.covs[:, j] * lam_val
    eta_new = eta + shift if cur == 0 else eta - shift
    log_lik = block.loglik_delta(eta_new, eta)
    var_new, var_old = (
        (hyper.rho, hyper.gamma) if cur == 0 else (hyper.gamma, hyper.rho)
    )
    log_ss = -0.5 * (
        np.log(var_new / var_old)
        + lam_val**2 * (1.0 / var_new - 1.0 / var_old)
    )
    c = float(
        state.coupling.nu[k]
        + state.coupling.theta[x] @ state.delta[:, k].astype(float)
    )
    return log_lik + log_ss + (1 - 2 * cur) * c


def delta_flip_step(
    state: AbState,
    x: int,
    r: int,
    j: int,
    data: BinaryDataset,
    hyper: SpikeSlabHyper,
    rng: np.random.Generator,
    counters: dict[str, np.ndarray],
    block: _NodeBlock | None = None,
) -> bool:
    """Propose toggling edge (r, j) of group x (j < r)."""
    log_r = flip_log_ratio(state, x, r, j, data, hyper, block)
    k = r * (r - 1) // 2 + j
    counters["delta_flip"][1] += 1
    if np.log(rng.random()) < log_r:
        state.delta[x, k] = 1 - int(state.delta[x, k])
        counters["delta_flip"][0] += 1
        return True
    return False


def run_ab_chain(
    data: GroupedData, config: AbConfig, rng: np.random.Generator | None = None
) -> ChainOutput:
    """Run the quasi-likelihood engine and return the recorded chain."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    p, q = data.p, data.q
    n_pairs = pair_count(p)
    hyper = config.slab_spike(p)
    coupling = config.coupling.initial_state(q, n_pairs)
    init_theta = float(coupling.theta[0, 1]) if q > 1 else 0.0
    init_nu = float(coupling.nu[0]) if n_pairs else 0.0
    state = AbState.initial(q, p, coupling, config.sigma)
    blocks = _blocks_for(data)
    rec = ChainRecorder(
        "ab",
        data.group_labels,
        list(data.variables),
        config.iterations,
        config.burn_in,
        config.thin,
        n_pairs,
        record_lambda=config.record_lambda,
        lambda_dim=p + n_pairs,
    )
    for name in ("mala", "delta_flip", "theta_between", "theta_within", "nu"):
        rec.counter(name)

    start = time.perf_counter()
    tune_window = np.zeros(2, dtype=np.int64)
    for t in range(config.iterations):
        before = rec.acceptance["mala"].copy()
        for x in range(q):
            ds = data.groups[x]
            for r in range(p):
                blk = blocks[x][r]
                mala_step(state, x, r, ds, hyper, rng, rec.acceptance, blk)
                spike_refresh(state, x, r, hyper, rng)
                for j in range(r):
                    delta_flip_step(
                        state, x, r, j, ds, hyper, rng, rec.acceptance, blk
                    )
        coupling_sweep(coupling, state.delta, rng, config.coupling, rec.acceptance)
        if config.tune_sigma and t < config.burn_in:
            tune_window += rec.acceptance["mala"] - before
            if tune_window[1] >= 200:
                rate = tune_window[0] / tune_window[1]
                state.sigma *= float(np.exp(0.5 * (rate - 0.5)))
                tune_window[:] = 0
        rec.record(
            t,
            state.delta,
            coupling,
            state.lam_matrix() if config.record_lambda else None,
        )
    rec.meta.update(
        wall_seconds=time.perf_counter() - start,
        rho=hyper.rho,
        gamma=hyper.gamma,
        sigma_final=state.sigma,
        init={
            "delta": "all-zero",
            "lambda": "all-zero",
            "theta": init_theta,
            "nu": init_nu,
        },
    )
    return rec.finish()


__all__ = [
    "AbState",
    "AbConfig",
    "quasi_objective",
    "quasi_grad",
    "mala_step",
    "spike_refresh",
    "flip_log_ratio",
    "delta_flip_step",
    "run_ab_chain",
]
