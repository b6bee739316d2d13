"""Metropolis-Hastings updates for the graph-coupling parameters.

Both sampling engines share these moves.  Conditional on the current edge
indicators delta (one bit vector per group) the coupling parameters are
updated against the pseudo-joint target

    theta/eps pair (x, h):  spike-slab prior * Bernoulli(omega) prior
                            * exp(mrf_pseudo_loglik(delta, nu, theta))
    nu for pair (r, j):     logit-Beta(a, b) prior
                            * exp(sum_x conditional edge log-probability)

Moves per sweep:
  * between-model: if eps_xh = 1 propose (0, 0); else draw theta~ from the
    Gamma(alpha_t, beta_t) proposal and propose (theta~, 1).  The proposal
    density enters the ratio on the side that draws.
  * within-model: only when eps_xh = 1, an independence proposal theta~ from
    the same Gamma, ratio f(theta)/f(theta~) times the target ratio.
  * nu: independence proposal nu~ = logit(q~), q~ ~ Beta(a_t, b_t); the
    proposal log-density in nu-space is the logit-Beta form again.

Group pairs are visited in lexicographic order (x < h), then all variable
pairs in canonical order; random_scan=True shuffles both visit orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .priors import (
    CouplingState,
    MrfHyper,
    mrf_pseudo_loglik,
    nu_logpdf,
    theta_prior_logpdf,
)


@dataclass
class ThetaProposal:
    """Gamma proposal (shape, rate) for similarity weights."""

    alpha_t: float = 2.0
    beta_t: float = 2.0

    def __post_init__(self):
        if self.alpha_t <= 0 or self.beta_t <= 0:
            raise ValueError("proposal parameters must be positive")

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.gamma(self.alpha_t, 1.0 / self.beta_t))

    def logpdf(self, x: float) -> float:
        return theta_prior_logpdf(x, 1, self.alpha_t, self.beta_t)


@dataclass
class NuProposal:
    """Beta proposal on the probability scale for sparsity offsets."""

    a_t: float = 1.0
    b_t: float = 2.0

    def __post_init__(self):
        if self.a_t <= 0 or self.b_t <= 0:
            raise ValueError("proposal parameters must be positive")

    def draw(self, rng: np.random.Generator) -> float:
        # Guard the measure-zero float edge cases; logit would be infinite.
        while True:
            qt = rng.beta(self.a_t, self.b_t)
            if 0.0 < qt < 1.0:
                return float(np.log(qt) - np.log1p(-qt))

    def logpdf(self, nu: float) -> float:
        return float(nu_logpdf(nu, self.a_t, self.b_t))


@dataclass
class CouplingConfig:
    """Hyperparameters, proposals, and scan options for the coupling moves.

    frozen=True disables every move and fixes nu (the uncoupled engine
    variants); nu_fixed then gives the constant offset, i.e. the logit of
    the independent-Bernoulli edge prior.
    """

    hyper: MrfHyper = field(default_factory=MrfHyper)
    omega: float = 0.6
    alpha: float = 1.0
    beta: float = 2.0
    theta_prop: ThetaProposal = field(default_factory=ThetaProposal)
    nu_prop: NuProposal = field(default_factory=NuProposal)
    random_scan: bool = False
    frozen: bool = False
    nu_fixed: float | None = None
    theta_init: float = 0.5

    def initial_state(self, q: int, n_pairs: int) -> CouplingState:
        if self.frozen:
            if self.nu_fixed is None:
                raise ValueError("frozen coupling requires nu_fixed")
            return CouplingState(
                np.zeros((q, q)),
                np.zeros((q, q), dtype=np.uint8),
                np.full(n_pairs, self.nu_fixed),
                self.omega,
                self.alpha,
                self.beta,
            )
        return CouplingState.initial(
            q,
            n_pairs,
            self.hyper,
            omega=self.omega,
            alpha=self.alpha,
            beta=self.beta,
            theta_init=self.theta_init,
            nu_init=self.nu_fixed,
        )


def _pair_logtarget(
    state: CouplingState,
    x: int,
    h: int,
    theta_val: float,
    eps_val: int,
    delta: np.ndarray,
) -> float:
    """Log posterior factor for (theta_xh, eps_xh) set to the given values."""
    prior = theta_prior_logpdf(theta_val, eps_val, state.alpha, state.beta)
    if not np.isfinite(prior):
        return prior
    prior += (
        np.log(state.omega) if eps_val == 1 else np.log1p(-state.omega)
    )
    old = state.theta[x, h]
    state.theta[x, h] = state.theta[h, x] = theta_val
    try:
        lik = mrf_pseudo_loglik(delta, state.nu, state.theta)
    finally:
        state.theta[x, h] = state.theta[h, x] = old
    return prior + lik


def theta_between_move(
    state: CouplingState,
    x: int,
    h: int,
    delta: np.ndarray,
    rng: np.random.Generator,
    prop: ThetaProposal,
) -> bool:
    """Propose switching eps_xh; mutates state on acceptance."""
    cur_theta = float(state.theta[x, h])
    cur_eps = int(state.epsilon[x, h])
    if cur_eps == 1:
        new_theta, new_eps = 0.0, 0
        log_r = (
            _pair_logtarget(state, x, h, 0.0, 0, delta)
            + prop.logpdf(cur_theta)
            - _pair_logtarget(state, x, h, cur_theta, 1, delta)
        )
    else:
        new_theta, new_eps = prop.draw(rng), 1
        log_r = (
            _pair_logtarget(state, x, h, new_theta, 1, delta)
            - prop.logpdf(new_theta)
            - _pair_logtarget(state, x, h, 0.0, 0, delta)
        )
    if np.log(rng.random()) < log_r:
        state.theta[x, h] = state.theta[h, x] = new_theta
        state.epsilon[x, h] = state.epsilon[h, x] = new_eps
        return True
    return False


def theta_within_move(
    state: CouplingState,
    x: int,
    h: int,
    delta: np.ndarray,
    rng: np.random.Generator,
    prop: ThetaProposal,
) -> bool:
    """Independence refresh of theta_xh inside the slab (eps_xh = 1 only)."""
    if state.epsilon[x, h] != 1:
        return False
    cur = float(state.theta[x, h])
    cand = prop.draw(rng)
    log_r = (
        _pair_logtarget(state, x, h, cand, 1, delta)
        + prop.logpdf(cur)
        - _pair_logtarget(state, x, h, cur, 1, delta)
        - prop.logpdf(cand)
    )
    if np.log(rng.random()) < log_r:
        state.theta[x, h] = state.theta[h, x] = cand
        return True
    return False


def _nu_logtarget(
    state: CouplingState,
    k: int,
    nu_val: float,
    delta: np.ndarray,
    hyper: MrfHyper,
) -> float:
    """Log posterior factor of nu for pair k: prior + all group conditionals."""
    c = nu_val + state.theta @ delta[:, k].astype(float)
    lik = float(np.sum(delta[:, k] * c - np.logaddexp(0.0, c)))
    return float(nu_logpdf(nu_val, hyper.a, hyper.b)) + lik


def nu_step(
    state: CouplingState,
    k: int,
    delta: np.ndarray,
    rng: np.random.Generator,
    prop: NuProposal,
    hyper: MrfHyper,
) -> bool:
    """Independence MH update of the sparsity offset for pair k."""
    cur = float(state.nu[k])
    cand = prop.draw(rng)
    log_r = (
        _nu_logtarget(state, k, cand, delta, hyper)
        + prop.logpdf(cur)
        - _nu_logtarget(state, k, cur, delta, hyper)
        - prop.logpdf(cand)
    )
    if np.log(rng.random()) < log_r:
        state.nu[k] = cand
        return True
    return False


def coupling_sweep(
    state: CouplingState,
    delta: np.ndarray,
    rng: np.random.Generator,
    cfg: CouplingConfig,
    counters: dict[str, np.ndarray],
) -> None:
    """One full pass of similarity moves (Step II) then sparsity moves (III).

    counters accumulates (accepted, attempted) under keys 'theta_between',
    'theta_within', 'nu'.
    """
    if cfg.frozen:
        return
    q = state.q
    gpairs = [(x, h) for x in range(q) for h in range(x + 1, q)]
    pairs_k = list(range(state.nu.shape[0]))
    if cfg.random_scan:
        rng.shuffle(gpairs)
        rng.shuffle(pairs_k)
    for x, h in gpairs:
        acc = theta_between_move(state, x, h, delta, rng, cfg.theta_prop)
        counters["theta_between"] += (acc, 1)
        if state.epsilon[x, h] == 1:
            acc = theta_within_move(state, x, h, delta, rng, cfg.theta_prop)
            counters["theta_within"] += (acc, 1)
    for k in pairs_k:
        acc = nu_step(state, k, delta, rng, cfg.nu_prop, cfg.hyper)
        counters["nu"] += (acc, 1)


__all__ = [
    "ThetaProposal",
    "NuProposal",
    "CouplingConfig",
    "theta_between_move",
    "theta_within_move",
    "nu_step",
    "coupling_sweep",
]
