"""Posterior summaries: inclusion probabilities, selection, and scores.

All selection is per-group, per-pair on posterior inclusion probabilities
(PPI): an edge enters a selected graph when its PPI strictly exceeds the
cutoff (default 0.5).  Degenerate denominators are handled explicitly:
MCC and F1 return 0.0, the expected false discovery rate returns None when
nothing is selected, and the between-chain correlation returns None when
either PPI vector is constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainOutput, expand_sym
from .pairs import pair_list


@dataclass
class PpiTable:
    """Posterior inclusion probability per group and pair."""

    values: np.ndarray  # (q, n_pairs) in [0, 1]
    group_labels: list[str]
    variables: list[str]
    burn_in: int
    iterations: int

    @property
    def q(self) -> int:
        return self.values.shape[0]


@dataclass
class SelectedGraphs:
    """Thresholded graphs, one bit vector per group."""

    bits: np.ndarray  # (q, n_pairs) uint8
    cutoff: float
    group_labels: list[str]
    variables: list[str]

    def edge_lists(self) -> list[list[tuple[int, int]]]:
        """Per group, the selected (r, j) pairs in canonical order."""
        pl = pair_list(len(self.variables))
        return [
            [pl[k] for k in np.flatnonzero(row)] for row in self.bits
        ]


def ppi(chain: ChainOutput, burn_in: int | None = None) -> PpiTable:
    """Per-edge per-group mean of the indicators over retained iterations.

    With burn_in=None the exact post-burn-in accumulators of the run are
    used; an explicit burn_in recomputes the mean from the recorded
    (thinned) samples with iteration index >= burn_in.
    """
    if burn_in is None:
        if chain.retained == 0:
            raise ValueError("chain retained no iterations")
        values = chain.delta_accum / chain.retained
        burn_in = chain.burn_in
    else:
        if not 0 <= burn_in < chain.iterations:
            raise ValueError("burn_in must lie in [0, iterations)")
        keep = chain.sample_iters >= burn_in
        if not keep.any():
            raise ValueError("no recorded samples after the requested burn_in")
        values = chain.delta_samples[keep].mean(axis=0)
    return PpiTable(
        values=np.asarray(values, dtype=float),
        group_labels=list(chain.group_labels),
        variables=list(chain.variables),
        burn_in=burn_in,
        iterations=chain.iterations,
    )


def select_graphs(table: PpiTable, cutoff: float = 0.5) -> SelectedGraphs:
    """Threshold the PPI table at a strict cutoff."""
    if not 0 <= cutoff < 1:
        raise ValueError("cutoff must lie in [0, 1)")
    return SelectedGraphs(
        bits=(table.values > cutoff).astype(np.uint8),
        cutoff=cutoff,
        group_labels=list(table.group_labels),
        variables=list(table.variables),
    )


def expected_fdr(table: PpiTable, cutoff: float = 0.5) -> float | None:
    """sum(ppi * [ppi <= cutoff]) / sum([ppi <= cutoff]) over all entries.

    Returns None when no entry falls at or below the cutoff (the
    no-discoveries case).  The value always lies in [0, cutoff].
    """
    if not 0 <= cutoff < 1:
        raise ValueError("cutoff must lie in [0, 1)")
    vals = table.values.ravel()
    mask = vals <= cutoff
    if not mask.any():
        return None
    return float(vals[mask].sum() / mask.sum())


def sec_matrix(selected: SelectedGraphs) -> np.ndarray:
    """Shared-edge counts: diagonal = per-group edge counts, off-diagonal =
    number of edges selected in both groups of the pair."""
    bits = selected.bits.astype(np.int64)
    return bits @ bits.T


def theta_ppi(chain: ChainOutput, burn_in: int | None = None) -> np.ndarray:
    """q x q matrix of posterior similarity-indicator frequencies.

    Self-similarity on the diagonal is reported as 1.0 by convention.
    """
    if burn_in is None:
        if chain.retained == 0:
            raise ValueError("chain retained no iterations")
        vec = chain.epsilon_accum / chain.retained
    else:
        if not 0 <= burn_in < chain.iterations:
            raise ValueError("burn_in must lie in [0, iterations)")
        keep = chain.sample_iters >= burn_in
        if not keep.any():
            raise ValueError("no recorded samples after the requested burn_in")
        vec = chain.epsilon_samples[keep].mean(axis=0)
    return expand_sym(vec, chain.q, diag=1.0)


def quantile_graphs(
    chain: ChainOutput,
    burn_in: int | None = None,
    levels: tuple = (0.25, "mean", 0.75),
    cutoff: float = 0.5,
    blocks: int = 20,
) -> dict:
    """Graphs selected from block-wise inclusion frequencies.

    The post-burn-in recorded samples are split into `blocks` contiguous
    blocks; each edge gets a per-block inclusion frequency, and for every
    requested level (a quantile in [0, 1], or the string "mean") the
    frequencies are reduced and thresholded at the cutoff.  Quantiles use
    the type-7 (linear interpolation) definition.
    """
    if blocks < 1:
        raise ValueError("need at least one block")
    if burn_in is None:
        burn_in = chain.burn_in
    keep = chain.sample_iters >= burn_in
    if keep.sum() < blocks:
        raise ValueError(
            f"{int(keep.sum())} retained samples cannot fill {blocks} blocks"
        )
    kept = chain.delta_samples[keep].astype(float)
    freqs = np.stack(
        [chunk.mean(axis=0) for chunk in np.array_split(kept, blocks)]
    )
    out = {}
    for level in levels:
        if level == "mean":
            reduced = freqs.mean(axis=0)
        else:
            lv = float(level)
            if not 0 <= lv <= 1:
                raise ValueError(f"quantile level {level} outside [0, 1]")
            reduced = np.quantile(freqs, lv, axis=0, method="linear")
        out[level] = SelectedGraphs(
            bits=(reduced > cutoff).astype(np.uint8),
            cutoff=cutoff,
            group_labels=list(chain.group_labels),
            variables=list(chain.variables),
        )
    return out


def _confusion(truth: np.ndarray, estimate: np.ndarray):
    truth = np.asarray(truth).ravel().astype(bool)
    estimate = np.asarray(estimate).ravel().astype(bool)
    if truth.shape != estimate.shape:
        raise ValueError("truth and estimate must have equal size")
    tp = int(np.sum(truth & estimate))
    tn = int(np.sum(~truth & ~estimate))
    fp = int(np.sum(~truth & estimate))
    fn = int(np.sum(truth & ~estimate))
    return tp, tn, fp, fn


def mcc(truth: np.ndarray, estimate: np.ndarray) -> float:
    """Matthews correlation of edge decisions pooled over all groups.

    Returns 0.0 when any margin of the confusion table is empty.
    """
    tp, tn, fp, fn = _confusion(truth, estimate)
    denom = (
        float(tp + fp) * float(tp + fn) * float(tn + fp) * float(tn + fn)
    )
    if denom == 0:
        return 0.0
    return float((tp * tn - fp * fn) / np.sqrt(denom))


def f1(truth: np.ndarray, estimate: np.ndarray) -> float:
    """F1 score of pooled edge decisions; 0.0 when 2TP + FP + FN = 0."""
    tp, _, fp, fn = _confusion(truth, estimate)
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return float(2 * tp / denom)


def per_group_scores(
    truth: np.ndarray, estimate: np.ndarray
) -> list[dict[str, float]]:
    """MCC and F1 per group (rows of the (q, n_pairs) bit matrices)."""
    truth = np.atleast_2d(truth)
    estimate = np.atleast_2d(estimate)
    return [
        {"mcc": mcc(t, e), "f1": f1(t, e)} for t, e in zip(truth, estimate)
    ]


def chain_correlation(
    chain_a: ChainOutput | PpiTable,
    chain_b: ChainOutput | PpiTable,
    burn_in: int | None = None,
) -> float | None:
    """Pearson correlation of the two chains' flattened PPI tables.

    Accepts raw chains (summarized first) or precomputed tables.  Returns
    None (degenerate) when either vector is constant.
    """
    ta = chain_a if isinstance(chain_a, PpiTable) else ppi(chain_a, burn_in)
    tb = chain_b if isinstance(chain_b, PpiTable) else ppi(chain_b, burn_in)
    a = ta.values.ravel()
    b = tb.values.ravel()
    if a.shape != b.shape:
        raise ValueError("chains summarize different models")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return None
    return float(np.corrcoef(a, b)[0, 1])


__all__ = [
    "PpiTable",
    "SelectedGraphs",
    "ppi",
    "select_graphs",
    "expected_fdr",
    "sec_matrix",
    "theta_ppi",
    "quantile_graphs",
    "mcc",
    "f1",
    "per_group_scores",
    "chain_correlation",
]
