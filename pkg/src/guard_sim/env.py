"""Abstract boundary-defence environment with two attacker models.

This stands in for a spatial agent-based simulator. A world is a row of ``N``
boundary segments, each giving access to crops of some value (kg of dry
matter). Each round the attacker raids ``Q`` segments. Raids through covered
segments are intercepted; raids through uncovered ones destroy the segment's
value up to multiplicative noise.

Two attackers are provided:

* :class:`MyopicAttacker` picks ``Q`` segments uniformly, blind to the defender.
* :class:`BoundedRationalAttacker` prefers valuable segments and remembers
  where it met guards, avoiding those segments until the memory fades.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import PAYOFF_BOUND, PayoffTable, RoundObservation, RoundRecord, as_action, reward_vector

# Defaults below are modelling choices for the stand-in world, not measured values.
DEFAULT_VALUE_SCALE_KG = 300.0
DEFAULT_RAID_NOISE = 0.2
DEFAULT_VALUE_FLOOR = 0.25
DEFAULT_MEMORY_GAIN = 1.0
DEFAULT_MEMORY_DECAY = 0.02


@dataclass(frozen=True)
class BoundaryWorld:
    target_value: np.ndarray
    raid_noise: float = DEFAULT_RAID_NOISE
    seed: int | None = None
    ground_truth_payoffs: PayoffTable = field(init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.target_value, dtype=float)
        if v.ndim != 1 or v.size == 0 or np.any(v <= 0):
            raise ValueError("target values must be a nonempty vector of positive numbers")
        if self.raid_noise < 0 or self.raid_noise > 1:
            raise ValueError("raid_noise must be in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "target_value", v)
        scaled = PAYOFF_BOUND * v / v.max()
        object.__setattr__(self, "ground_truth_payoffs", PayoffTable(covered=scaled, uncovered=-scaled))

    @property
    def n_targets(self) -> int:
        return self.target_value.shape[0]


def clustered_values(n: int, rng: np.random.Generator, n_clusters: int = 4,
                     width: float | None = None, jitter: float = 0.25, floor: float = 0.25) -> np.ndarray:
    """Spatially clustered values in [floor, 1] along a boundary of ``n`` segments.

    A few Gaussian hot spots along the boundary, times log-normal jitter,
    min-max scaled.
    """
    idx = np.arange(n)
    width = width if width is not None else max(1.0, n / 15)
    centers = rng.uniform(0, n, size=n_clusters)
    heights = rng.uniform(0.5, 1.0, size=n_clusters)
    field_ = 0.15 + sum(h * np.exp(-0.5 * ((idx - c) / width) ** 2) for c, h in zip(centers, heights))
    field_ = field_ * rng.lognormal(0.0, jitter, size=n)
    lo, hi = field_.min(), field_.max()
    if hi - lo < 1e-12:
        return np.ones(n)
    return floor + (1.0 - floor) * (field_ - lo) / (hi - lo)


def make_world(n_targets: int = 57, seed: int = 0, value_scale_kg: float = DEFAULT_VALUE_SCALE_KG,
               raid_noise: float = DEFAULT_RAID_NOISE, n_clusters: int = 4,
               target_value=None, value_floor: float = DEFAULT_VALUE_FLOOR) -> BoundaryWorld:
    """Build a world deterministically from ``seed`` (or from explicit values)."""
    if target_value is None:
        rng = np.random.default_rng(seed)
        target_value = value_scale_kg * clustered_values(n_targets, rng, n_clusters, floor=value_floor)
    return BoundaryWorld(np.asarray(target_value, dtype=float), raid_noise, seed)


def _check_budget(q, n):
    if not 1 <= q <= n:
        raise ValueError(f"attack budget {q} outside [1, {n}]")


def weighted_subset(weights, q: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``q`` distinct indices, successively, with probability proportional to ``weights``.

    Zero-weight indices are used only once the positive ones are exhausted,
    and then uniformly.
    """
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    pos = np.flatnonzero(w > 0)
    if pos.size >= q:
        return rng.choice(n, size=q, replace=False, p=w / w.sum())
    zero = np.flatnonzero(w <= 0)
    fill = rng.choice(zero, size=q - pos.size, replace=False)
    return np.concatenate([pos, fill])


class MyopicAttacker:
    """Raids ``Q`` segments uniformly at random, ignoring the defender."""

    kind = "MAM"

    def __init__(self, attack_budget: int):
        self.attack_budget = attack_budget

    def attack(self, world: BoundaryWorld, rng: np.random.Generator) -> np.ndarray:
        _check_budget(self.attack_budget, world.n_targets)
        a = np.zeros(world.n_targets, dtype=bool)
        a[rng.choice(world.n_targets, size=self.attack_budget, replace=False)] = True
        return a

    def learn(self, defender, attacker) -> None:
        pass


class BoundedRationalAttacker:
    """Value-seeking raider with a decaying memory of guard encounters.

    ``memory[i]`` is the belief that segment ``i`` is guarded. An encounter at
    ``i`` moves it a fraction ``memory_gain`` of the way to 1; every round all
    beliefs shrink by the factor ``1 - memory_decay``.
    """

    kind = "BRSAM"

    def __init__(self, attack_budget: int, n_targets: int,
                 memory_gain: float = DEFAULT_MEMORY_GAIN, memory_decay: float = DEFAULT_MEMORY_DECAY):
        if not 0 < memory_gain <= 1:
            raise ValueError("memory_gain must be in (0, 1]")
        if not 0 <= memory_decay < 1:
            raise ValueError("memory_decay must be in [0, 1)")
        self.attack_budget = attack_budget
        self.memory_gain = memory_gain
        self.memory_decay = memory_decay
        self.memory = np.zeros(n_targets)

    def weights(self, world: BoundaryWorld) -> np.ndarray:
        return world.target_value * (1.0 - self.memory)

    def attack(self, world: BoundaryWorld, rng: np.random.Generator) -> np.ndarray:
        _check_budget(self.attack_budget, world.n_targets)
        a = np.zeros(world.n_targets, dtype=bool)
        a[weighted_subset(self.weights(world), self.attack_budget, rng)] = True
        return a

    def learn(self, defender, attacker) -> None:
        met = np.asarray(defender, dtype=bool) & np.asarray(attacker, dtype=bool)
        self.memory[met] += self.memory_gain * (1.0 - self.memory[met])
        self.memory *= 1.0 - self.memory_decay


def make_attacker(kind: str, attack_budget: int, n_targets: int, **params):
    if kind == "MAM":
        return MyopicAttacker(attack_budget)
    if kind == "BRSAM":
        return BoundedRationalAttacker(attack_budget, n_targets, **params)
    raise ValueError(f"unknown attacker kind {kind!r}; expected 'MAM' or 'BRSAM'")


def resolve_round(world: BoundaryWorld, defender, attacker, rng: np.random.Generator,
                  t: int = 0) -> tuple[RoundRecord, RoundObservation]:
    """Play one round. Returns the ground-truth record and the defender's view of it."""
    n = world.n_targets
    v = as_action(defender, n=n)
    a = as_action(attacker, n=n)
    caught = v & a
    raided = a & ~v
    noise = rng.uniform(-world.raid_noise, world.raid_noise, size=n) if world.raid_noise > 0 else np.zeros(n)
    loss = float(np.sum(world.target_value[raided] * (1.0 + noise[raided])))
    icp = caught.astype(np.int64)
    record = RoundRecord(
        round=t,
        defender=v,
        attacker=a,
        true_rewards=reward_vector(a, world.ground_truth_payoffs),
        crop_loss=loss,
        interceptions_per_target=icp,
    )
    obs = RoundObservation(coverage=v, interceptions=icp, crop_loss=loss)
    return record, obs
