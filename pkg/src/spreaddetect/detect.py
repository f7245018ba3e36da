"""Lag-aligned aggregation statistics and the joint (source, time) estimator.

Candidate pairs are scored by aggregating CUSUM values across all nodes at
the times the change would reach them if the candidate were the truth.
The quadratic form sums mean-centered squared CUSUMs (sign-agnostic); the
linear form sums raw CUSUMs and takes the absolute value (for changes that
share a sign). Both exclude nodes whose hypothesized arrival time falls
outside the observation window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cusum import cusum_transform
from .graph import NetworkGraph, all_pairs_distances

__all__ = [
    "DEFAULT_RATE_GRID",
    "DetectionResult",
    "lag_set_size",
    "quadratic_stat_matrix",
    "linear_stat_matrix",
    "estimate",
    "test_threshold",
    "run_test",
    "scaled_distance",
    "estimate_with_rate_search",
    "signal_threshold",
    "write_stat_matrix",
]

# Default grid for transmission-rate search.
DEFAULT_RATE_GRID: tuple[float, ...] = tuple(round(0.1 * k, 1) for k in range(1, 10))


@dataclass(frozen=True)
class DetectionResult:
    """Estimated source node, change time, attained statistic, optional rate.

    j_hat is in 1..p, z_hat in 1..n-1. q_hat is populated only by the
    rate-search estimator.
    """

    j_hat: int
    z_hat: int
    stat_value: float
    q_hat: float | None = None


def _lag_aligned_sums(rows: np.ndarray, lags_by_source: np.ndarray) -> np.ndarray:
    """out[j-1, t-1] = sum over k of rows[k-1, t-1 + lag(j, k)].

    Terms whose shifted column falls outside rows' width are dropped, which
    implements the strict t + lag < n membership rule (rows has n-1 columns).
    Implemented as one padded gather per candidate source.
    """
    p, width = rows.shape
    padded = np.concatenate([rows, np.zeros((p, 1))], axis=1)
    row_idx = np.arange(p)[:, None]
    base_cols = np.arange(width)[None, :]
    out = np.empty((lags_by_source.shape[0], width))
    for j0 in range(lags_by_source.shape[0]):
        cols = np.minimum(base_cols + lags_by_source[j0][:, None], width)
        out[j0] = padded[row_idx, cols].sum(axis=0)
    return out


def lag_set_size(dmat: np.ndarray, j: int, t: int, n: int) -> int:
    """Number of nodes k with t + d(j, k) < n, i.e. whose hypothesized
    arrival time under candidate (j, t) lands inside the CUSUM index range."""
    dmat = np.asarray(dmat)
    if not 1 <= t <= n - 1:
        raise ValueError(f"t must be in 1..{n - 1}, got {t}")
    return int((t + dmat[j - 1] < n).sum())


def quadratic_stat_matrix(t_mat: np.ndarray, dmat: np.ndarray) -> np.ndarray:
    """Quadratic aggregation of a p-by-(n-1) CUSUM matrix.

    Entry (j, t) sums (T[k, t + d(j, k)]**2 - 1) over nodes k with
    t + d(j, k) < n. Subtracting 1 centers each chi-squared term so
    candidates near the right boundary, which aggregate fewer nodes, are
    not favored just for having smaller sums.
    """
    t_mat = np.asarray(t_mat, dtype=float)
    dmat = np.asarray(dmat)
    if dmat.shape != (t_mat.shape[0], t_mat.shape[0]):
        raise ValueError(
            f"distance matrix shape {dmat.shape} does not match p={t_mat.shape[0]}"
        )
    return _lag_aligned_sums(t_mat * t_mat - 1.0, dmat)


def linear_stat_matrix(t_mat: np.ndarray, dmat: np.ndarray) -> np.ndarray:
    """Linear aggregation: |sum of T[k, t + d(j, k)] over the same node set|."""
    t_mat = np.asarray(t_mat, dtype=float)
    dmat = np.asarray(dmat)
    if dmat.shape != (t_mat.shape[0], t_mat.shape[0]):
        raise ValueError(
            f"distance matrix shape {dmat.shape} does not match p={t_mat.shape[0]}"
        )
    return np.abs(_lag_aligned_sums(t_mat, dmat))


def _argmax_time_major(stat: np.ndarray) -> tuple[int, int]:
    """(j_hat, z_hat) of the first maximum scanning t, then j (1-based)."""
    idx = int(np.argmax(stat.T))
    t0, j0 = divmod(idx, stat.shape[0])
    return j0 + 1, t0 + 1


def estimate(x: np.ndarray, g: NetworkGraph, kind: str = "quadratic") -> DetectionResult:
    """Joint argmax estimator of the source node and initial change time.

    Ties are broken by the smallest time, then the smallest node label.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != g.p:
        raise ValueError(f"data shape {x.shape} does not match graph with p={g.p}")
    t_mat = cusum_transform(x)
    dmat = all_pairs_distances(g)
    if kind == "quadratic":
        stat = quadratic_stat_matrix(t_mat, dmat)
    elif kind == "linear":
        stat = linear_stat_matrix(t_mat, dmat)
    else:
        raise ValueError(f"kind must be 'quadratic' or 'linear', got {kind!r}")
    j_hat, z_hat = _argmax_time_major(stat)
    return DetectionResult(j_hat=j_hat, z_hat=z_hat, stat_value=float(stat[j_hat - 1, z_hat - 1]))


def test_threshold(p: int, n: int, delta: float) -> float:
    """Rejection threshold with false-alarm probability at most delta:

        2 * sqrt(p * log(p n / delta)) + 2 * log(p n / delta)

    using the natural logarithm.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if p < 1 or n < 2:
        raise ValueError(f"need p >= 1 and n >= 2, got p={p}, n={n}")
    log_term = math.log(p * n / delta)
    return 2.0 * math.sqrt(p * log_term) + 2.0 * log_term


def run_test(x: np.ndarray, g: NetworkGraph, lam: float) -> int:
    """Existence test: 1 iff the maximum quadratic statistic reaches lam."""
    if not math.isfinite(lam):
        raise ValueError(f"lambda must be finite, got {lam}")
    t_mat = cusum_transform(np.asarray(x, dtype=float))
    stat = quadratic_stat_matrix(t_mat, all_pairs_distances(g))
    return int(stat.max() >= lam)


def scaled_distance(dmat: np.ndarray, q: float) -> np.ndarray:
    """Expected-arrival lags under per-step transmission probability q.

    Each hop takes 1/q steps on average, so entries become round(d / q),
    rounding halves up. q = 1 returns the input unchanged.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must be in (0, 1], got {q}")
    if q == 1.0:
        return dmat
    return np.floor(np.asarray(dmat) / q + 0.5).astype(np.int64)


def estimate_with_rate_search(
    x: np.ndarray,
    g: NetworkGraph,
    q_grid=DEFAULT_RATE_GRID,
) -> DetectionResult:
    """Quadratic estimator with a grid search over the transmission rate q.

    For each q the lag of node k under candidate source j becomes
    round(d(j, k) / q); the selected q maximizes the maximum statistic
    (ties go to the smallest q) and the returned (j_hat, z_hat) is the
    argmax of that q's statistic matrix.
    """
    qs = sorted(float(q) for q in q_grid)
    if not qs:
        raise ValueError("q_grid must be nonempty")
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != g.p:
        raise ValueError(f"data shape {x.shape} does not match graph with p={g.p}")
    t_mat = cusum_transform(x)
    dmat = all_pairs_distances(g)
    centered = t_mat * t_mat - 1.0

    best_q = None
    best_stat = None
    best_max = -math.inf
    for q in qs:
        stat = _lag_aligned_sums(centered, scaled_distance(dmat, q))
        stat_max = stat.max()
        if best_q is None or stat_max > best_max:
            best_q, best_stat, best_max = q, stat, stat_max
    j_hat, z_hat = _argmax_time_major(best_stat)
    return DetectionResult(
        j_hat=j_hat,
        z_hat=z_hat,
        stat_value=float(best_stat[j_hat - 1, z_hat - 1]),
        q_hat=best_q,
    )


def signal_threshold(p: int, n: int, tau: float, m: int, c: float) -> float:
    """Diagnostic signal-size level

        c * ((sqrt(p) + log(2 p n)) / (n tau m) + p log(2 p n) / (n tau^2 m^2)).

    Squared per-node changes above this level make the estimator accurate;
    the constant c is theory-unspecified and must be supplied by the caller.
    """
    if p < 1 or n < 2:
        raise ValueError(f"need p >= 1 and n >= 2, got p={p}, n={n}")
    if tau <= 0 or m <= 0:
        raise ValueError(f"tau and m must be positive, got tau={tau}, m={m}")
    if c < 0:
        raise ValueError(f"c must be nonnegative, got {c}")
    log_term = math.log(2 * p * n)
    return c * (
        (math.sqrt(p) + log_term) / (n * tau * m)
        + p * log_term / (n * tau * tau * m * m)
    )


def write_stat_matrix(path, stat: np.ndarray) -> None:
    """Write a statistic matrix as CSV: p rows, n-1 columns, no header."""
    np.savetxt(path, np.asarray(stat), delimiter=",", fmt="%.12g")
