"""Prior densities: MRF edge coupling, conjugate Ising kernel, spike-and-slab.

Edge coupling.  Each pair (r, j) carries one binary indicator per group.
Given the indicators of the other groups, group x's indicator follows

    log p(delta | ...) = delta * c - log(1 + exp(c)),
    c = nu_rj + theta_x . delta_rj,-x

where nu_rj is a pair-specific sparsity offset and theta_x holds the
nonnegative similarity weights between group x and each other group.  These
are the full conditionals of a per-pair Ising model across groups, so a
proper joint exists whenever theta is symmetric.

Conjugate kernel.  The prior for the group-level Ising parameters is

    p(lam | s, g) prop. exp( sum_r lam_rr s_rr
                             + sum_{r>j} delta_rj lam_rj s_rj
                             - g * log Psi(lam restricted to delta) )

with fictive marginal counts s (entries in (0, g)) and weight g > 0.  The
default s places fictive weight g uniformly over the 2^p cells, giving
s_rr = g/2 and s_rj = g/4.

Similarity weights theta_xh are spike-and-slab: a point mass at zero when
the similarity indicator eps_xh = 0 and a Gamma(alpha, beta) slab (shape,
rate) when eps_xh = 1.  Sparsity offsets nu_rj have a logit-Beta(a, b)
prior.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln, gammaln

from .ising import CanonicalParams, log_psi
from .pairs import pair_count


@dataclass
class MrfHyper:
    """Hyperparameters of the logit-Beta sparsity prior."""

    a: float = 1.0
    b: float = 3.0

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("Beta hyperparameters must be positive")

    def nu_mean_init(self) -> float:
        """logit of the prior mean inclusion probability a / (a + b)."""
        m = self.a / (self.a + self.b)
        return float(np.log(m) - np.log1p(-m))


@dataclass
class SpikeSlabHyper:
    """Variances of the slab (rho) and spike (gamma) normal components."""

    rho: float = 2.0
    gamma: float = 0.5

    def __post_init__(self):
        if self.rho <= 0 or self.gamma <= 0:
            raise ValueError("variances must be positive")


@dataclass
class DyHyper:
    """Fictive counts s (mains then pairs, canonical order) and weight g."""

    s: np.ndarray
    g: float

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        if self.g <= 0:
            raise ValueError("g must be positive")
        if not ((self.s > 0) & (self.s < self.g)).all():
            raise ValueError("fictive counts must lie strictly inside (0, g)")

    def p_from_len(self) -> int:
        # len(s) = p + p(p-1)/2 = p(p+1)/2  =>  p = (sqrt(8 len + 1) - 1) / 2
        d = self.s.shape[0]
        p = int(round((np.sqrt(8 * d + 1) - 1) / 2))
        if p + pair_count(p) != d:
            raise ValueError(f"fictive count vector length {d} fits no p")
        return p

    @property
    def s_main(self) -> np.ndarray:
        return self.s[: self.p_from_len()]

    @property
    def s_pairs(self) -> np.ndarray:
        return self.s[self.p_from_len() :]


def default_dy_hyper(p: int, g: float = 0.02) -> DyHyper:
    """Fictive counts of weight g spread uniformly over the 2^p cells."""
    if p < 1:
        raise ValueError("p must be at least 1")
    s = np.concatenate((np.full(p, g / 2.0), np.full(pair_count(p), g / 4.0)))
    return DyHyper(s, g)


@dataclass
class CouplingState:
    """Similarity weights, similarity indicators, and sparsity offsets.

    theta: (q, q) symmetric nonnegative, zero diagonal.
    epsilon: (q, q) symmetric 0/1, zero diagonal; theta_xh > 0 iff eps_xh = 1.
    nu: (n_pairs,) sparsity offset per variable pair.
    omega: prior inclusion probability of eps_xh.
    alpha, beta: shape and rate of the Gamma slab for theta.
    """

    theta: np.ndarray
    epsilon: np.ndarray
    nu: np.ndarray
    omega: float = 0.6
    alpha: float = 1.0
    beta: float = 2.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.epsilon = np.asarray(self.epsilon, dtype=np.uint8)
        self.nu = np.asarray(self.nu, dtype=float)
        self.validate()

    def validate(self) -> None:
        q = self.theta.shape[0]
        if self.theta.shape != (q, q) or self.epsilon.shape != (q, q):
            raise ValueError("theta and epsilon must be square q x q")
        if not np.allclose(self.theta, self.theta.T):
            raise ValueError("theta must be symmetric")
        if (np.diag(self.theta) != 0).any() or (np.diag(self.epsilon) != 0).any():
            raise ValueError("theta and epsilon diagonals must be zero")
        if (self.theta < 0).any():
            raise ValueError("theta must be nonnegative")
        if not np.array_equal(self.epsilon, self.epsilon.T):
            raise ValueError("epsilon must be symmetric")
        off = ~np.eye(q, dtype=bool)
        if not ((self.theta[off] > 0) == (self.epsilon[off] == 1)).all():
            raise ValueError("theta_xh > 0 must hold exactly when eps_xh = 1")
        if not 0 < self.omega < 1:
            raise ValueError("omega must lie in (0, 1)")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("Gamma slab parameters must be positive")

    @property
    def q(self) -> int:
        return self.theta.shape[0]

    @classmethod
    def initial(
        cls,
        q: int,
        n_pairs: int,
        hyper: MrfHyper,
        omega: float = 0.6,
        alpha: float = 1.0,
        beta: float = 2.0,
        theta_init: float = 0.5,
        nu_init: float | None = None,
    ) -> "CouplingState":
        """Chain starting point: all pairs coupled at theta_init, nu at the
        logit of the prior mean inclusion probability."""
        theta = np.full((q, q), theta_init, dtype=float)
        np.fill_diagonal(theta, 0.0)
        eps = np.ones((q, q), dtype=np.uint8) if theta_init > 0 else np.zeros(
            (q, q), dtype=np.uint8
        )
        np.fill_diagonal(eps, 0)
        nu0 = hyper.nu_mean_init() if nu_init is None else nu_init
        return cls(theta, eps, np.full(n_pairs, nu0), omega, alpha, beta)


def mrf_edge_logprob(
    delta: int,
    delta_other_groups: np.ndarray,
    nu_rj: float,
    theta_x: np.ndarray,
) -> float:
    """Conditional log-probability of one group's indicator for one pair."""
    if delta not in (0, 1):
        raise ValueError("delta must be 0 or 1")
    c = float(nu_rj + np.dot(theta_x, delta_other_groups))
    return delta * c - float(np.logaddexp(0.0, c))


def mrf_graph_logprob(
    delta_x: np.ndarray,
    delta_others: np.ndarray,
    nu: np.ndarray,
    theta_x: np.ndarray,
) -> float:
    """Sum of mrf_edge_logprob over all pairs for one group.

    delta_others has shape (q-1, n_pairs), rows aligned with theta_x.
    """
    delta_x = np.asarray(delta_x, dtype=float)
    delta_others = np.atleast_2d(np.asarray(delta_others, dtype=float))
    c = nu + theta_x @ delta_others
    return float(np.sum(delta_x * c - np.logaddexp(0.0, c)))


def mrf_pseudo_loglik(
    delta: np.ndarray, nu: np.ndarray, theta: np.ndarray
) -> float:
    """Sum over groups of the conditional MRF log-probability of their graphs.

    delta has shape (q, n_pairs); theta is the (q, q) similarity matrix with
    zero diagonal, so theta @ delta already excludes each group's own bits.
    """
    d = np.asarray(delta, dtype=float)
    c = theta @ d + nu
    return float(np.sum(d * c - np.logaddexp(0.0, c)))


def dy_log_kernel(
    params: CanonicalParams, hyper: DyHyper, delta: np.ndarray
) -> float:
    """Log of the conjugate prior kernel at lam, for the graph delta.

    Interactions with delta_rj = 0 are excluded from both the linear term
    and the normalizer, so the value does not depend on inactive entries.
    """
    delta = np.asarray(delta)
    if delta.shape != params.inter.shape:
        raise ValueError("delta must have one bit per variable pair")
    p = params.p
    if hyper.s.shape[0] != p + pair_count(p):
        raise ValueError("fictive counts do not match parameter dimension")
    restricted = params.masked(delta)
    lin = float(
        params.main @ hyper.s_main
        + (restricted.inter @ hyper.s_pairs)
    )
    return lin - hyper.g * log_psi(restricted)


def spike_slab_logpdf(
    lam_row: np.ndarray, delta_row: np.ndarray, hyper: SpikeSlabHyper
) -> float:
    """Normal mixture log-density: variance rho where delta=1, gamma where 0.

    Callers put a 1 in delta_row for the main-effect entry, which is always
    slab (never subject to selection).
    """
    lam_row = np.asarray(lam_row, dtype=float)
    delta_row = np.asarray(delta_row, dtype=float)
    if lam_row.shape != delta_row.shape:
        raise ValueError("lam_row and delta_row must have equal length")
    var = np.where(delta_row != 0, hyper.rho, hyper.gamma)
    return float(-0.5 * np.sum(np.log(2.0 * np.pi * var) + lam_row**2 / var))


def theta_prior_logpdf(
    theta_xh: float, epsilon_xh: int, alpha: float, beta: float
) -> float:
    """Spike-and-slab log-density of one similarity weight.

    eps = 0: point mass at zero (log-density 0 at theta = 0, -inf elsewhere).
    eps = 1: Gamma(alpha, beta) in shape-rate form; for alpha > 1 the slab
    density vanishes at zero, separating the two components.
    """
    if epsilon_xh not in (0, 1):
        raise ValueError("epsilon must be 0 or 1")
    if theta_xh < 0:
        return -np.inf
    if epsilon_xh == 0:
        return 0.0 if theta_xh == 0 else -np.inf
    if theta_xh == 0:
        if alpha > 1:
            return -np.inf
        if alpha == 1:
            return float(np.log(beta))
        return np.inf
    return float(
        alpha * np.log(beta)
        - gammaln(alpha)
        + (alpha - 1.0) * np.log(theta_xh)
        - beta * theta_xh
    )


def nu_logpdf(nu_rj, a: float, b: float):
    """logit-Beta(a, b) log-density: -log B(a,b) + a*nu - (a+b)*log(1+e^nu)."""
    if a <= 0 or b <= 0:
        raise ValueError("Beta parameters must be positive")
    nu_rj = np.asarray(nu_rj, dtype=float)
    val = -betaln(a, b) + a * nu_rj - (a + b) * np.logaddexp(0.0, nu_rj)
    return float(val) if val.ndim == 0 else val


__all__ = [
    "MrfHyper",
    "SpikeSlabHyper",
    "DyHyper",
    "CouplingState",
    "default_dy_hyper",
    "mrf_edge_logprob",
    "mrf_graph_logprob",
    "mrf_pseudo_loglik",
    "dy_log_kernel",
    "spike_slab_logpdf",
    "theta_prior_logpdf",
    "nu_logpdf",
]
