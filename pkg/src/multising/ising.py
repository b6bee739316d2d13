"""Ising model core: data containers, exact and node-conditional likelihoods.

Model: binary vector z in {0,1}^p with

    p(z | lam) = exp( sum_r lam_rr z_r + sum_{r>j} lam_rj z_r z_j ) / Psi(lam)

where Psi sums the numerator over all 2^p configurations.  Main effects
lam_rr and interactions lam_rj (canonical pair order, see pairs.py) are kept
as separate flat vectors in CanonicalParams.

Exact quantities (log_psi, exact_cell_probs, moments) enumerate the 2^p
configurations and are limited to p <= ENUM_MAX_P.  Cell c of an enumerated
vector encodes the configuration with z_r = (c >> r) & 1, i.e. variable 0 is
the least significant bit and cell 0 is the all-zero configuration.

The node-conditional likelihood of node r uses only the lower-triangular
coefficients lam_rj with j < r:

    p_r(z_r | z_{<r}) = exp(z_r * eta) / (1 + exp(eta)),
    eta = lam_rr + sum_{j<r} lam_rj z_j

and the quasi log likelihood is the sum of the node conditionals over r.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .pairs import pair_array, pair_count, pair_index, pair_list, row_slice

ENUM_MAX_P = 20
_CHUNK = 1 << 16


def _as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass
class BinaryDataset:
    """n x p matrix of 0/1 observations for one group."""

    rows: np.ndarray
    group_label: str = "g1"

    def __post_init__(self):
        self.rows = np.asarray(self.rows)
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-D array")
        if self.rows.size and not np.isin(self.rows, (0, 1)).all():
            raise ValueError("rows must contain only 0/1 values")
        self.rows = self.rows.astype(np.uint8)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]


@dataclass
class GroupedData:
    """Datasets for q groups over one shared variable set."""

    groups: list[BinaryDataset]
    variables: list[str] | None = None

    def __post_init__(self):
        if not self.groups:
            raise ValueError("at least one group is required")
        p = self.groups[0].p
        if any(g.p != p for g in self.groups):
            raise ValueError("all groups must share the same variables")
        labels = [g.group_label for g in self.groups]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate group labels: {labels}")
        if self.variables is None:
            self.variables = [f"v{i + 1}" for i in range(p)]
        if len(self.variables) != p:
            raise ValueError("variable name count does not match data width")

    @property
    def q(self) -> int:
        return len(self.groups)

    @property
    def p(self) -> int:
        return self.groups[0].p

    @property
    def group_labels(self) -> list[str]:
        return [g.group_label for g in self.groups]


@dataclass
class CanonicalParams:
    """Ising parameters: main effects (p,) and interactions (p(p-1)/2,)."""

    main: np.ndarray
    inter: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.main = np.asarray(self.main, dtype=float)
        if self.inter is None:
            self.inter = np.zeros(pair_count(self.p))
        self.inter = np.asarray(self.inter, dtype=float)
        if self.inter.shape != (pair_count(self.p),):
            raise ValueError(
                f"expected {pair_count(self.p)} interactions, got {self.inter.shape}"
            )
        if not (np.isfinite(self.main).all() and np.isfinite(self.inter).all()):
            raise ValueError("parameters must be finite")

    @property
    def p(self) -> int:
        return self.main.shape[0]

    def row(self, r: int) -> np.ndarray:
        """Node r's vector (lam_rr, lam_r0, ..., lam_r,r-1)."""
        return np.concatenate(([self.main[r]], self.inter[row_slice(r)]))

    def interaction_matrix(self) -> np.ndarray:
        """Symmetric p x p interaction matrix with zero diagonal."""
        a = np.zeros((self.p, self.p))
        rj = pair_array(self.p)
        if len(rj):
            a[rj[:, 0], rj[:, 1]] = self.inter
            a[rj[:, 1], rj[:, 0]] = self.inter
        return a

    def masked(self, delta: np.ndarray) -> "CanonicalParams":
        """Copy with interactions zeroed where delta is 0."""
        delta = np.asarray(delta)
        return CanonicalParams(self.main.copy(), self.inter * (delta != 0))

    def flat(self) -> np.ndarray:
        """Concatenated (main, inter) vector of length p + p(p-1)/2."""
        return np.concatenate((self.main, self.inter))

    @classmethod
    def from_flat(cls, vec: np.ndarray, p: int) -> "CanonicalParams":
        vec = np.asarray(vec, dtype=float)
        return cls(vec[:p], vec[p:])


@dataclass
class MarginalCounts:
    """Sufficient statistics: counts y_rr = #(z_r = 1), y_rj = #(z_r = z_j = 1)."""

    main: np.ndarray
    pairs: np.ndarray
    n: int

    @classmethod
    def from_dataset(cls, data: BinaryDataset) -> "MarginalCounts":
        return cls(*_marginal_arrays(data.rows), data.n)

    def flat(self) -> np.ndarray:
        return np.concatenate((self.main, self.pairs)).astype(float)


def _marginal_arrays(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = rows.astype(np.int64)
    cross = x.T @ x
    p = rows.shape[1]
    rj = pair_array(p)
    pairs = cross[rj[:, 0], rj[:, 1]] if len(rj) else np.zeros(0, dtype=np.int64)
    return np.diag(cross).copy(), pairs


def marginal_counts(data: BinaryDataset) -> MarginalCounts:
    """Sufficient statistics of a dataset under the pairwise Ising model."""
    return MarginalCounts.from_dataset(data)


@lru_cache(maxsize=8)
def _state_bits(p: int) -> np.ndarray:
    """(2^p, p) uint8 table of all configurations; row c has z_r = (c >> r) & 1."""
    codes = np.arange(1 << p, dtype=np.uint32)
    return ((codes[:, None] >> np.arange(p, dtype=np.uint32)) & 1).astype(np.uint8)


def _check_enum_p(p: int) -> None:
    if p > ENUM_MAX_P:
        raise ValueError(
            f"exact enumeration requires p <= {ENUM_MAX_P}, got p = {p}"
        )


def config_logweights(params: CanonicalParams) -> np.ndarray:
    """Unnormalized log-probability of each of the 2^p configurations."""
    _check_enum_p(params.p)
    bits = _state_bits(params.p)
    a = params.interaction_matrix()
    out = np.empty(bits.shape[0])
    for lo in range(0, bits.shape[0], _CHUNK):
        s = bits[lo : lo + _CHUNK].astype(float)
        out[lo : lo + _CHUNK] = s @ params.main + 0.5 * np.einsum(
            "ij,ij->i", s @ a, s
        )
    return out


def log_psi(params: CanonicalParams) -> float:
    """Log normalizing constant of the Ising model, by enumeration (p <= 20)."""
    return float(logsumexp(config_logweights(params)))


def exact_cell_probs(params: CanonicalParams) -> np.ndarray:
    """Exact probability of every configuration, in enumeration cell order."""
    logw = config_logweights(params)
    logw -= logsumexp(logw)
    return np.exp(logw)


def cell_index(rows: np.ndarray) -> np.ndarray:
    """Enumeration cell index of each row of a 0/1 matrix."""
    p = rows.shape[1]
    return rows.astype(np.int64) @ (1 << np.arange(p, dtype=np.int64))


def ising_loglik(data: BinaryDataset, params: CanonicalParams) -> float:
    """Exact log likelihood of the dataset (p <= 20)."""
    if params.p != data.p:
        raise ValueError("parameter dimension does not match data")
    y = marginal_counts(data)
    lin = float(params.main @ y.main + params.inter @ y.pairs)
    return lin - data.n * log_psi(params)


def node_conditional_loglik(
    data: BinaryDataset, lam_row: np.ndarray, r: int
) -> float:
    """Log likelihood of node r's conditional given nodes j < r.

    lam_row holds (lam_rr, lam_r0, ..., lam_r,r-1), length r + 1.
    """
    lam_row = np.asarray(lam_row, dtype=float)
    if lam_row.shape != (r + 1,):
        raise ValueError(f"lam_row must have length {r + 1} for node {r}")
    if not np.isfinite(lam_row).all():
        raise ValueError("lam_row must be finite")
    z_r = data.rows[:, r].astype(float)
    eta = lam_row[0] + data.rows[:, :r].astype(float) @ lam_row[1:]
    return float(np.sum(z_r * eta - np.logaddexp(0.0, eta)))


def quasi_loglik(data: BinaryDataset, params: CanonicalParams) -> float:
    """Sum of the p node-conditional log likelihoods (no 2^p enumeration)."""
    if params.p != data.p:
        raise ValueError("parameter dimension does not match data")
    return sum(
        node_conditional_loglik(data, params.row(r), r) for r in range(data.p)
    )


def gibbs_sample(
    params: CanonicalParams,
    n: int,
    burn_in: int = 1000,
    thin: int = 10,
    rng: np.random.Generator | int | None = None,
    group_label: str = "g1",
) -> BinaryDataset:
    """Draw n rows from the Ising model by single-site Gibbs sampling.

    One sweep updates every site in index order using the symmetric reading
    of the interactions: P(z_r = 1 | z_-r) = logistic(lam_rr + sum_{j != r}
    lam_rj z_j).  The first burn_in sweeps are discarded, then one row is
    retained every `thin` sweeps.  Deterministic for a fixed seed.
    """
    if n < 0 or burn_in < 0 or thin < 1:
        raise ValueError("need n >= 0, burn_in >= 0, thin >= 1")
    rng = _as_rng(rng)
    p = params.p
    a = params.interaction_matrix()
    a_cols = [a[:, r].copy() for r in range(p)]
    z = rng.integers(0, 2, size=p).astype(np.float64)
    field_ = params.main + a @ z

    out = np.empty((n, p), dtype=np.uint8)
    kept = 0
    sweeps = burn_in + n * thin
    for t in range(sweeps):
        u = rng.random(p)
        for r in range(p):
            pr = 1.0 / (1.0 + np.exp(-field_[r]))
            new = 1.0 if u[r] < pr else 0.0
            if new != z[r]:
                field_ += a_cols[r] * (new - z[r])
                z[r] = new
        if t >= burn_in and (t - burn_in) % thin == thin - 1:
            out[kept] = z
            kept += 1
    assert kept == n
    return BinaryDataset(out, group_label=group_label)


def ising_moments(
    params: CanonicalParams, active_pairs: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Exact (log_psi, mean, covariance) of the active sufficient statistics.

    The statistic vector concatenates all p main-effect indicators z_r with
    z_r * z_j for the pairs listed in active_pairs (flat canonical indices).
    Interactions of params outside active_pairs must be zero; this is the
    building block for the conjugate-kernel Newton search.
    """
    p = params.p
    _check_enum_p(p)
    pairs = pair_array(p)[np.asarray(active_pairs, dtype=np.intp)]
    d = p + len(pairs)
    logw = config_logweights(params)
    lz = float(logsumexp(logw))
    w = np.exp(logw - lz)

    bits = _state_bits(p)
    mean = np.zeros(d)
    second = np.zeros((d, d))
    for lo in range(0, bits.shape[0], _CHUNK):
        s = bits[lo : lo + _CHUNK].astype(float)
        t = np.empty((s.shape[0], d))
        t[:, :p] = s
        if len(pairs):
            t[:, p:] = s[:, pairs[:, 0]] * s[:, pairs[:, 1]]
        wc = w[lo : lo + _CHUNK]
        mean += t.T @ wc
        second += (t * wc[:, None]).T @ t
    cov = second - np.outer(mean, mean)
    return lz, mean, cov


__all__ = [
    "ENUM_MAX_P",
    "BinaryDataset",
    "GroupedData",
    "CanonicalParams",
    "MarginalCounts",
    "marginal_counts",
    "config_logweights",
    "log_psi",
    "exact_cell_probs",
    "cell_index",
    "ising_loglik",
    "node_conditional_loglik",
    "quasi_loglik",
    "gibbs_sample",
    "ising_moments",
    "pair_count",
    "pair_index",
    "pair_list",
]
