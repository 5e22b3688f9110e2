"""Core game types and the utility/reward algebra.

Targets are boundary segments indexed ``0..N-1``. Defender and attacker pure
strategies are dense boolean vectors of length ``N``; the helpers here
validate them against their cardinality budgets.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PAYOFF_BOUND = 0.5


def _frozen(x, dtype) -> np.ndarray:
    arr = np.array(x, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def as_action(x, budget: int | None = None, n: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a read-only boolean action vector.

    Raises ``ValueError`` if the vector is not binary, has the wrong length
    or covers more than ``budget`` targets.
    """
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"action must be 1-d, got shape {arr.shape}")
    if arr.dtype != bool:
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("action entries must be 0 or 1")
        arr = arr.astype(bool)
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"action has length {arr.shape[0]}, expected {n}")
    if budget is not None and int(arr.sum()) > budget:
        raise ValueError(f"action covers {int(arr.sum())} targets, budget is {budget}")
    return _frozen(arr, bool)


def indices_to_action(indices, n: int) -> np.ndarray:
    v = np.zeros(n, dtype=bool)
    v[np.asarray(indices, dtype=int)] = True
    return v


def bitstring(action) -> str:
    return "".join("1" if b else "0" for b in np.asarray(action, dtype=bool))


@dataclass(frozen=True)
class GameConfig:
    """Sizes and learning-rate parameters of one repeated game.

    ``attacker_budget`` is both the per-round attack limit of the game
    definition and the ``m`` of the regret bound.
    """

    n_targets: int = 57
    defender_budget: int = 5
    attacker_budget: int = 3
    horizon: int = 100
    eta: float = 0.5
    gr_truncation: int = 8
    rng_seed: int = 0

    def __post_init__(self):
        problems = self.validate()
        if problems:
            raise ValueError("; ".join(problems))

    def validate(self, prefix: str = "") -> list[str]:
        p = prefix
        errs = []
        for name in ("n_targets", "defender_budget", "attacker_budget", "horizon", "gr_truncation"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or isinstance(val, bool) or val < 1:
                errs.append(f"{p}{name}: must be a positive integer, got {val!r}")
        if errs:
            return errs
        if self.defender_budget > self.n_targets:
            errs.append(f"{p}defender_budget: {self.defender_budget} exceeds n_targets={self.n_targets}")
        if self.attacker_budget > self.n_targets:
            errs.append(f"{p}attacker_budget: {self.attacker_budget} exceeds n_targets={self.n_targets}")
        if not np.isfinite(self.eta) or self.eta <= 0:
            errs.append(f"{p}eta: must be > 0, got {self.eta!r}")
        if not (0 <= int(self.rng_seed) < 2**64):
            errs.append(f"{p}rng_seed: must fit in an unsigned 64-bit integer")
        return errs


@dataclass(frozen=True)
class PayoffTable:
    """Per-target defender payoffs when an attacked target is covered / uncovered."""

    covered: np.ndarray
    uncovered: np.ndarray

    def __post_init__(self):
        c = _frozen(self.covered, float)
        u = _frozen(self.uncovered, float)
        if c.ndim != 1 or c.shape != u.shape:
            raise ValueError(f"payoff vectors must be 1-d and equal length, got {c.shape} and {u.shape}")
        if np.any(np.abs(c) > PAYOFF_BOUND) or np.any(np.abs(u) > PAYOFF_BOUND):
            raise ValueError("payoffs must lie in [-0.5, 0.5]")
        if np.any(u > c):
            raise ValueError("uncovered payoff must not exceed covered payoff")
        object.__setattr__(self, "covered", c)
        object.__setattr__(self, "uncovered", u)

    @property
    def n_targets(self) -> int:
        return self.covered.shape[0]


def _check_dims(attacker, payoffs: PayoffTable, defender=None):
    a = np.asarray(attacker)
    if a.shape != payoffs.covered.shape:
        raise ValueError(f"attacker has shape {a.shape}, payoffs have {payoffs.covered.shape}")
    if defender is not None and np.shape(defender) != a.shape:
        raise ValueError(f"defender has shape {np.shape(defender)}, attacker has {a.shape}")
    return a


def reward_vector(attacker, payoffs: PayoffTable) -> np.ndarray:
    """Per-target gain of covering: ``a_i * (U^c_i - U^u_i)``, each in [0, 1]."""
    a = _check_dims(attacker, payoffs).astype(float)
    return a * (payoffs.covered - payoffs.uncovered)


def constant_term(attacker, payoffs: PayoffTable) -> float:
    """Utility the defender gets with no coverage at all: ``sum_i a_i U^u_i``."""
    a = _check_dims(attacker, payoffs).astype(float)
    return float(a @ payoffs.uncovered)


def utility(defender, attacker, payoffs: PayoffTable) -> float:
    a = _check_dims(attacker, payoffs, defender).astype(float)
    v = np.asarray(defender).astype(float)
    return float(np.sum(v * a * payoffs.covered) + np.sum((1.0 - v) * a * payoffs.uncovered))


@dataclass(frozen=True)
class RoundObservation:
    """What the defender sees after a round.

    Attack indicators exist only implicitly, as interceptions at covered
    targets. Entry points at uncovered targets are folded into ``crop_loss``.
    """

    coverage: np.ndarray
    interceptions: np.ndarray
    crop_loss: float

    def __post_init__(self):
        cov = as_action(self.coverage)
        icp = _frozen(self.interceptions, np.int64)
        if icp.shape != cov.shape:
            raise ValueError("interceptions and coverage must have the same shape")
        if np.any(icp < 0):
            raise ValueError("interception counts must be nonnegative")
        if np.any(icp[~cov] != 0):
            raise ValueError("interceptions reported at an uncovered target")
        if not self.crop_loss >= 0:
            raise ValueError(f"crop_loss must be nonnegative, got {self.crop_loss!r}")
        object.__setattr__(self, "coverage", cov)
        object.__setattr__(self, "interceptions", icp)
        object.__setattr__(self, "crop_loss", float(self.crop_loss))


@dataclass(frozen=True)
class RoundRecord:
    """Full ground truth of one round. Used by metrics only, never by policies."""

    round: int
    defender: np.ndarray
    attacker: np.ndarray
    true_rewards: np.ndarray
    crop_loss: float
    interceptions_per_target: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "defender", as_action(self.defender))
        object.__setattr__(self, "attacker", as_action(self.attacker))
        object.__setattr__(self, "true_rewards", _frozen(self.true_rewards, float))
        object.__setattr__(self, "interceptions_per_target", _frozen(self.interceptions_per_target, np.int64))
        object.__setattr__(self, "crop_loss", float(self.crop_loss))

    @property
    def played_reward(self) -> float:
        return float(self.true_rewards @ self.defender)
