"""Ground-truth evaluation of a finished run.

Everything here consumes :class:`~guard_sim.game.RoundRecord` sequences, i.e.
information the defender never had during play.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .oracle import best_response

CONVERGENCE_WINDOW = 10
CONVERGENCE_LEVEL = 0.9


def _reward_matrix(records) -> np.ndarray:
    if len(records) == 0:
        raise ValueError("need at least one round")
    return np.vstack([r.true_rewards for r in records])


def _played_matrix(records, played=None) -> np.ndarray:
    if played is None:
        return np.vstack([r.defender for r in records]).astype(float)
    if len(played) != len(records):
        raise ValueError(f"{len(played)} actions for {len(records)} rounds")
    return np.vstack([np.asarray(v, dtype=float) for v in played])


def hindsight_best(records, k: int) -> np.ndarray:
    """Best fixed coverage of size ``k`` against the realised reward vectors."""
    return best_response(_reward_matrix(records).sum(axis=0), k)


def _top_k_sums(cum: np.ndarray, k: int) -> np.ndarray:
    n = cum.shape[1]
    if k == 0:
        return np.zeros(cum.shape[0])
    if k >= n:
        return cum.sum(axis=1)
    return np.partition(cum, n - k, axis=1)[:, n - k:].sum(axis=1)


def cumulative_regret(records, played=None, k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Regret against the best fixed ``k``-coverage after every prefix of the run.

    Returns ``(raw, normalized)`` where ``normalized[t] = raw[t] / ((t + 1) * k)``.
    ``played`` defaults to the defender actions stored in ``records``.
    """
    r = _reward_matrix(records)
    v = _played_matrix(records, played)
    if k is None:
        k = int(v.sum(axis=1).max())
    best = _top_k_sums(np.cumsum(r, axis=0), k)
    got = np.cumsum(np.einsum("ti,ti->t", r, v))
    raw = best - got
    rounds = np.arange(1, len(records) + 1)
    norm = raw / (rounds * k) if k > 0 else np.zeros_like(raw)
    return raw, norm


def regret_bound(T: int, N: int, K: int, M: int, eta: float, m: int, gamma_hat: float) -> float:
    """Upper bound on HERDS cumulative regret with every ``gamma_t`` replaced by ``gamma_hat``.

    Natural logarithm; the exploration sum is bounded by ``T * gamma_hat * K``.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta!r}")
    if not 0 <= gamma_hat <= 1:
        raise ValueError(f"gamma_hat must be in [0, 1], got {gamma_hat!r}")
    keep = (1 - gamma_hat) * K
    resample = 2 * T * keep * (1 - gamma_hat / N) ** M
    perturb = keep * (math.log(N) + 1) / eta
    stability = eta * m * T * min(m, keep)
    explore = T * gamma_hat * K
    return resample + perturb + stability + explore


def interception_rate(records) -> float | None:
    """Intercepted raids over all raids; ``None`` if nothing was attacked."""
    attacks = sum(int(r.attacker.sum()) for r in records)
    if attacks == 0:
        return None
    caught = sum(int(r.interceptions_per_target.sum()) for r in records)
    return caught / attacks


def convergence_round(records, played=None, k: int | None = None,
                      window: int = CONVERGENCE_WINDOW, level: float = CONVERGENCE_LEVEL) -> int:
    """First round at which play earns ``level`` of the hindsight coverage's reward.

    Both sides are summed over the same trailing ``window`` rounds, so raid
    volume cancels. Rounds are 1-based; returns ``T`` if the level is never
    reached.
    """
    r = _reward_matrix(records)
    v = _played_matrix(records, played)
    if k is None:
        k = int(v.sum(axis=1).max())
    star = hindsight_best(records, k).astype(float)
    got = np.convolve(np.einsum("ti,ti->t", r, v), np.ones(window), mode="full")[: len(records)]
    ref = np.convolve(r @ star, np.ones(window), mode="full")[: len(records)]
    for t in range(window - 1, len(records)):
        if ref[t] > 0 and got[t] >= level * ref[t]:
            return t + 1
    return len(records)


@dataclass
class RunSummary:
    final_regret: float
    final_regret_norm: float
    mean_crop_loss_kg: float
    interception_rate: float | None
    convergence_round: int
    gamma_hat: float
    regret_bound: float
    hindsight_coverage: np.ndarray = field(repr=False)
    per_round: list = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {
            "final_regret": self.final_regret,
            "final_regret_norm": self.final_regret_norm,
            "mean_crop_loss_kg": self.mean_crop_loss_kg,
            "interception_rate": self.interception_rate,
            "convergence_round": self.convergence_round,
            "gamma_hat": self.gamma_hat,
            "regret_bound": self.regret_bound,
            "hindsight_coverage": [int(i) for i in np.flatnonzero(self.hindsight_coverage)],
        }


def summarize_run(records, gammas, cfg) -> RunSummary:
    """Fold a run's records and per-round exploration rates into a :class:`RunSummary`.

    ``gammas`` may contain NaN for policies without an exploration rate; the
    bound is then evaluated at ``gamma_hat = 0``.
    """
    k = cfg.defender_budget
    raw, norm = cumulative_regret(records, None, k)
    g = np.asarray(gammas, dtype=float)
    g_hat = float(np.nanmax(g)) if np.any(np.isfinite(g)) else 0.0
    losses = np.array([r.crop_loss for r in records])
    per_round = [
        (t + 1, rec.played_reward, float(raw[t]), float(norm[t]), rec.crop_loss,
         int(rec.interceptions_per_target.sum()), float(g[t]))
        for t, rec in enumerate(records)
    ]
    bound = regret_bound(len(records), cfg.n_targets, k, cfg.gr_truncation, cfg.eta,
                         cfg.attacker_budget, g_hat)
    return RunSummary(
        final_regret=float(raw[-1]),
        final_regret_norm=float(norm[-1]),
        mean_crop_loss_kg=float(losses.mean()),
        interception_rate=interception_rate(records),
        convergence_round=convergence_round(records, None, k),
        gamma_hat=g_hat,
        regret_bound=bound,
        hindsight_coverage=hindsight_best(records, k),
        per_round=per_round,
    )
