"""Matrix CUSUM transformation."""

from __future__ import annotations

import numpy as np


def cusum_transform(x: np.ndarray) -> np.ndarray:
    """Row-wise CUSUM transform of a p-by-n data matrix.

    Entry (j, t) for split points t = 1..n-1 is

        sqrt(t * (n - t) / n) * (mean of row j over t+1..n - mean over 1..t)

    returned as a p-by-(n-1) matrix whose column t-1 holds split point t.
    Each entry costs O(1) via per-row prefix sums, O(p n) total.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"data matrix must be 2-D, got shape {x.shape}")
    p, n = x.shape
    if n < 2:
        raise ValueError(f"need at least 2 time points, got n={n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data matrix contains non-finite entries")
    sums = np.cumsum(x, axis=1)
    t = np.arange(1, n, dtype=float)
    pre_mean = sums[:, :-1] / t
    post_mean = (sums[:, -1:] - sums[:, :-1]) / (n - t)
    return np.sqrt(t * (n - t) / n) * (post_mean - pre_mean)
