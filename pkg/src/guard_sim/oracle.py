"""Follow-the-perturbed-leader action oracle over k-subsets."""
from __future__ import annotations

import numpy as np


def sample_perturbation(n: int, eta: float, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. exponential perturbations with rate ``eta`` (mean ``1/eta``)."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return rng.exponential(1.0 / eta, size=n)


def top_k(scores, k: int) -> np.ndarray:
    """Indices of the ``k`` largest scores, ties resolved toward the lowest index.

    Returned in increasing index order.
    """
    s = np.asarray(scores, dtype=float)
    n = s.shape[0]
    if not 0 <= k <= n:
        raise ValueError(f"budget k={k} outside [0, {n}]")
    if np.isnan(s).any():
        raise ValueError("scores contain NaN")
    if k == 0:
        return np.empty(0, dtype=np.intp)
    if k == n:
        return np.arange(n)
    kth = np.partition(s, n - k)[n - k]
    above = np.flatnonzero(s > kth)
    at = np.flatnonzero(s == kth)[: k - above.shape[0]]
    return np.sort(np.concatenate([above, at]))


def best_response(scores, k: int) -> np.ndarray:
    """Coverage maximising ``v . scores`` over all ``v`` with exactly ``k`` ones."""
    s = np.asarray(scores, dtype=float)
    v = np.zeros(s.shape[0], dtype=bool)
    v[top_k(s, k)] = True
    return v
