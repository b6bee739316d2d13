"""Chain output container shared by both sampling engines.

A ChainOutput holds thinned samples of every block of the chain plus exact
running inclusion counts accumulated over all post-burn-in iterations (not
just the thinned ones).  Iteration t (0-based) is retained for the
accumulators when t >= burn_in, and recorded as a sample when
(t + 1) % thin == 0.

Similarity pairs (x, h), x < h, are stored condensed in lexicographic
order; group_pair_index maps (x, h) to that flat position.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def group_pair_count(q: int) -> int:
    return q * (q - 1) // 2


def group_pair_index(x: int, h: int, q: int) -> int:
    if x == h or not (0 <= x < q and 0 <= h < q):
        raise ValueError(f"bad group pair ({x}, {h}) for q={q}")
    if x > h:
        x, h = h, x
    return x * q - x * (x + 1) // 2 + (h - x - 1)


def group_pair_list(q: int) -> list[tuple[int, int]]:
    return [(x, h) for x in range(q) for h in range(x + 1, q)]


def condense_sym(mat: np.ndarray) -> np.ndarray:
    """Upper off-diagonal entries of a symmetric matrix, lexicographic."""
    q = mat.shape[0]
    return np.array([mat[x, h] for x, h in group_pair_list(q)])


def expand_sym(vec: np.ndarray, q: int, diag: float = 0.0) -> np.ndarray:
    """Inverse of condense_sym with a constant diagonal."""
    out = np.full((q, q), diag, dtype=float)
    for k, (x, h) in enumerate(group_pair_list(q)):
        out[x, h] = out[h, x] = vec[k]
    return out


@dataclass
class ChainOutput:
    """Recorded samples, inclusion accumulators, and run metadata."""

    engine: str
    group_labels: list[str]
    variables: list[str]
    iterations: int
    burn_in: int
    thin: int
    sample_iters: np.ndarray
    delta_samples: np.ndarray  # (n_kept, q, n_pairs) uint8
    theta_samples: np.ndarray  # (n_kept, q(q-1)/2)
    epsilon_samples: np.ndarray  # (n_kept, q(q-1)/2) uint8
    nu_samples: np.ndarray  # (n_kept, n_pairs)
    delta_accum: np.ndarray  # (q, n_pairs) post-burn-in inclusion counts
    epsilon_accum: np.ndarray  # (q(q-1)/2,) post-burn-in inclusion counts
    retained: int
    lambda_samples: Optional[np.ndarray] = None  # (n_kept, q, p + n_pairs)
    acceptance: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def q(self) -> int:
        return len(self.group_labels)

    @property
    def p(self) -> int:
        return len(self.variables)

    @property
    def n_kept(self) -> int:
        return self.sample_iters.shape[0]

    def acceptance_rates(self) -> dict[str, float]:
        """Accepted / attempted per move family (attempted 0 -> 0.0)."""
        out = {}
        for key, (acc, att) in self.acceptance.items():
            out[key] = float(acc) / float(att) if att else 0.0
        return out


class ChainRecorder:
    """Incrementally builds a ChainOutput during a run."""

    def __init__(
        self,
        engine: str,
        group_labels: list[str],
        variables: list[str],
        iterations: int,
        burn_in: int,
        thin: int,
        n_pairs: int,
        record_lambda: bool = False,
        lambda_dim: int = 0,
    ):
        if iterations < 0 or burn_in < 0:
            raise ValueError("iterations and burn_in must be nonnegative")
        if iterations > 0 and burn_in >= iterations:
            raise ValueError("burn_in must be smaller than iterations")
        if thin < 1:
            raise ValueError("thin must be at least 1")
        q = len(group_labels)
        self.engine = engine
        self.group_labels = group_labels
        self.variables = variables
        self.iterations = iterations
        self.burn_in = burn_in
        self.thin = thin
        n_kept = iterations // thin
        self.sample_iters = np.empty(n_kept, dtype=np.int64)
        self.delta_samples = np.empty((n_kept, q, n_pairs), dtype=np.uint8)
        ng = group_pair_count(q)
        self.theta_samples = np.empty((n_kept, ng))
        self.epsilon_samples = np.empty((n_kept, ng), dtype=np.uint8)
        self.nu_samples = np.empty((n_kept, n_pairs))
        self.lambda_samples = (
            np.empty((n_kept, q, lambda_dim)) if record_lambda else None
        )
        self.delta_accum = np.zeros((q, n_pairs))
        self.epsilon_accum = np.zeros(ng)
        self._kept = 0
        self.acceptance: dict[str, np.ndarray] = {}
        self.meta: dict = {}

    def counter(self, name: str) -> np.ndarray:
        """(accepted, attempted) accumulator array for a move family."""
        if name not in self.acceptance:
            self.acceptance[name] = np.zeros(2, dtype=np.int64)
        return self.acceptance[name]

    def record(self, t, delta, coupling, lam=None) -> None:
        """Call once per iteration t with the end-of-iteration state."""
        if t >= self.burn_in:
            self.delta_accum += delta
            self.epsilon_accum += condense_sym(coupling.epsilon)
        if (t + 1) % self.thin == 0:
            k = self._kept
            self.sample_iters[k] = t
            self.delta_samples[k] = delta
            self.theta_samples[k] = condense_sym(coupling.theta)
            self.epsilon_samples[k] = condense_sym(coupling.epsilon)
            self.nu_samples[k] = coupling.nu
            if self.lambda_samples is not None and lam is not None:
                self.lambda_samples[k] = lam
            self._kept += 1

    def finish(self) -> ChainOutput:
        k = self._kept
        return ChainOutput(
            engine=self.engine,
            group_labels=self.group_labels,
            variables=self.variables,
            iterations=self.iterations,
            burn_in=self.burn_in,
            thin=self.thin,
            sample_iters=self.sample_iters[:k],
            delta_samples=self.delta_samples[:k],
            theta_samples=self.theta_samples[:k],
            epsilon_samples=self.epsilon_samples[:k],
            nu_samples=self.nu_samples[:k],
            delta_accum=self.delta_accum,
            epsilon_accum=self.epsilon_accum,
            retained=self.iterations - self.burn_in,
            lambda_samples=(
                self.lambda_samples[:k] if self.lambda_samples is not None else None
            ),
            acceptance={
                key: (int(v[0]), int(v[1])) for key, v in self.acceptance.items()
            },
            meta=self.meta,
        )


__all__ = [
    "ChainOutput",
    "ChainRecorder",
    "group_pair_count",
    "group_pair_index",
    "group_pair_list",
    "condense_sym",
    "expand_sym",
]
