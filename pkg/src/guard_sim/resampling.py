"""Geometric resampling: Monte Carlo estimates of inverse coverage probabilities.

The selection probability of a target under a perturbed-leader policy has no
cheap closed form. Instead the caller's one-round action draw is replayed
until each target shows up, and the index of its first appearance
(truncated at ``M``) serves as the estimate of ``1/p``. Its expectation is
``(1 - (1 - p)**M) / p``, so the importance-weighted reward is biased low by
the factor ``1 - (1 - p)**M``.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

ActionSampler = Callable[[], np.ndarray]


def geometric_resample(simulator: ActionSampler, m_trunc: int, n: int | None = None) -> np.ndarray:
    """Estimate ``1/p_i`` for every target by replaying ``simulator``.

    Parameters
    ----------
    simulator
        Zero-argument callable returning one fresh coverage vector drawn from
        the current round's action distribution. It owns its random stream.
    m_trunc
        Truncation ``M``. Targets not covered in the first ``M - 1`` draws get
        the value ``M``.
    n
        Expected action length. Inferred from the first draw when omitted.

    Returns
    -------
    Integer vector with entries in ``[1, M]``.
    """
    if m_trunc < 1:
        raise ValueError(f"truncation M must be >= 1, got {m_trunc}")
    p_inv = None
    for p in range(1, m_trunc + 1):
        v = _draw(simulator, n)
        if p_inv is None:
            n = v.shape[0]
            p_inv = np.zeros(n, dtype=np.int64)
        if p < m_trunc:
            p_inv[v & (p_inv == 0)] = p
        else:
            p_inv[p_inv == 0] = m_trunc
        if np.all(p_inv > 0):
            break
    return p_inv


def _draw(simulator: ActionSampler, n: int | None) -> np.ndarray:
    v = np.asarray(simulator())
    if v.ndim != 1 or (n is not None and v.shape[0] != n):
        raise ValueError(f"simulator returned an action of shape {v.shape}, expected ({n},)")
    return v.astype(bool, copy=False)


def apply_reward_update(r_hat, p_inv, observed_rewards, coverage) -> np.ndarray:
    """Return ``r_hat + p_inv * reward`` on covered targets, unchanged elsewhere."""
    r_hat = np.asarray(r_hat, dtype=float)
    cov = np.asarray(coverage, dtype=bool)
    rewards = np.asarray(observed_rewards, dtype=float)
    if not (r_hat.shape == cov.shape == rewards.shape == np.shape(p_inv)):
        raise ValueError("r_hat, p_inv, rewards and coverage must share one shape")
    if np.any(rewards[cov] < 0):
        raise ValueError("observed rewards must be nonnegative")
    out = r_hat.copy()
    out[cov] += np.asarray(p_inv, dtype=float)[cov] * rewards[cov]
    return out
