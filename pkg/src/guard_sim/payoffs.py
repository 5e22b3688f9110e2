"""Online payoff estimates from interceptions and aggregate crop loss.

Covered payoffs come from per-target interception counts scaled by the
largest count seen at any target. Uncovered payoffs come from the round's
total crop loss scaled by the largest round loss seen so far. The loss cannot
be attributed to an entry point, so every target left uncovered that round
receives the same penalty.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import PAYOFF_BOUND, RoundObservation

PENALTY_MODES = ("uniform-full", "per-share")


@dataclass
class PayoffEstimate:
    """Mutable per-run estimates of covered/uncovered payoffs.

    ``penalty_distribution="uniform-full"`` charges each uncovered target the
    full normalised loss. ``"per-share"`` divides it by the number of
    uncovered targets. ``smoothing`` (in (0, 1]) blends the new uncovered
    penalty into the old one instead of overwriting it.
    """

    n_targets: int
    penalty_distribution: str = "uniform-full"
    smoothing: float | None = None
    covered_est: np.ndarray = field(init=False)
    uncovered_est: np.ndarray = field(init=False)
    cum_interceptions: np.ndarray = field(init=False)
    max_interceptions: int = field(init=False, default=0)
    max_crop_loss: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.penalty_distribution not in PENALTY_MODES:
            raise ValueError(f"penalty_distribution must be one of {PENALTY_MODES}")
        if self.smoothing is not None and not 0 < self.smoothing <= 1:
            raise ValueError("smoothing must be in (0, 1]")
        self.covered_est = np.zeros(self.n_targets)
        self.uncovered_est = np.zeros(self.n_targets)
        self.cum_interceptions = np.zeros(self.n_targets, dtype=np.int64)

    def update(self, obs: RoundObservation) -> "PayoffEstimate":
        if obs.coverage.shape[0] != self.n_targets:
            raise ValueError("observation does not match the number of targets")
        if obs.crop_loss < 0:
            raise ValueError("crop loss must be nonnegative")
        self.cum_interceptions += obs.interceptions
        self.max_interceptions = int(self.cum_interceptions.max())
        if self.max_interceptions > 0:
            self.covered_est = PAYOFF_BOUND * self.cum_interceptions / self.max_interceptions
        self.max_crop_loss = max(self.max_crop_loss, obs.crop_loss)

        uncovered = ~obs.coverage
        penalty = 0.0
        if self.max_crop_loss > 0:
            penalty = -PAYOFF_BOUND * obs.crop_loss / self.max_crop_loss
            if self.penalty_distribution == "per-share" and uncovered.any():
                penalty /= int(uncovered.sum())
        if self.smoothing is None:
            self.uncovered_est[uncovered] = penalty
        else:
            a = self.smoothing
            self.uncovered_est[uncovered] = (1 - a) * self.uncovered_est[uncovered] + a * penalty
        return self

    def observed_rewards(self, obs: RoundObservation) -> np.ndarray:
        """Estimated ``U^c - U^u`` at intercepted targets, zero everywhere else.

        Call after :meth:`update` with the same observation.
        """
        hit = obs.coverage & (obs.interceptions > 0)
        r = np.zeros(self.n_targets)
        r[hit] = self.covered_est[hit] - self.uncovered_est[hit]
        return r


def update_payoffs(state: PayoffEstimate, obs: RoundObservation) -> PayoffEstimate:
    return state.update(obs)


def observed_round_rewards(state: PayoffEstimate, obs: RoundObservation) -> np.ndarray:
    return state.observed_rewards(obs)
