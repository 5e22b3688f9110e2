"""Defender policies behind one ``decide`` / ``observe`` interface.

Every policy sees the world only through :class:`~guard_sim.game.RoundObservation`.
The learning policies (HERDS, FPL-UE, FPL-UE-A) share the same reward
pipeline: payoff estimation from the observation, geometric resampling of the
round's own action distribution, and an importance-weighted update of the
cumulative reward estimate. They differ in how a round's coverage is drawn.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .game import RoundObservation, as_action
from .oracle import best_response, sample_perturbation, top_k
from .payoffs import PayoffEstimate
from .resampling import apply_reward_update, geometric_resample

KINDS = ("HERDS", "FPL-UE", "FPL-UE-A", "Static", "UniformRandom")

# Not given in the source experiments; exposed through PolicySpec.fixed_gamma.
DEFAULT_FPLUE_GAMMA = 0.1


def exploration_split(gamma: float, k: int) -> tuple[int, int]:
    """``(K_expl, K_expt)`` with ``K_expl = floor(gamma * K)``."""
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must be in [0, 1], got {gamma!r}")
    k_expl = math.floor(gamma * k)
    return k_expl, k - k_expl


def next_gamma(crop_loss: float, max_crop_loss: float) -> float:
    """Loss-driven exploration rate for the next round.

    ``max_crop_loss`` must already include ``crop_loss``. With no loss ever
    seen the rate is 0.
    """
    if max_crop_loss <= 0:
        return 0.0
    return min(1.0, crop_loss / max_crop_loss)


def herds_decide(r_hat, gamma: float, k: int, eta: float, rng: np.random.Generator) -> np.ndarray:
    """Split the budget: perturbed-leader targets plus uniform picks from the rest."""
    r_hat = np.asarray(r_hat, dtype=float)
    n = r_hat.shape[0]
    k_expl, k_expt = exploration_split(gamma, k)
    cover = np.zeros(n, dtype=bool)
    if k_expt > 0:
        z = sample_perturbation(n, eta, rng)
        cover[top_k(r_hat + z, k_expt)] = True
    if k_expl > 0:
        pool = np.flatnonzero(~cover)
        cover[rng.choice(pool, size=k_expl, replace=False)] = True
    return cover


def fplue_decide(r_hat, gamma: float, k: int, eta: float, rng: np.random.Generator) -> np.ndarray:
    """Whole-round switch: one uniform single-target strategy w.p. ``gamma``, else FPL."""
    return _fplue_draw(r_hat, gamma, k, eta, rng)[0]


def _fplue_draw(r_hat, gamma, k, eta, rng):
    if not 0 <= gamma <= 1:
        raise ValueError(f"gamma must be in [0, 1], got {gamma!r}")
    r_hat = np.asarray(r_hat, dtype=float)
    n = r_hat.shape[0]
    if gamma > 0 and rng.random() < gamma:
        cover = np.zeros(n, dtype=bool)
        cover[rng.integers(n)] = True
        return cover, True
    return best_response(r_hat + sample_perturbation(n, eta, rng), k), False


def r_hat_digest(r_hat) -> str:
    return hashlib.sha1(np.ascontiguousarray(r_hat, dtype=np.float64).tobytes()).hexdigest()[:12]


class Policy:
    """Base class. Subclasses implement :meth:`decide`; learners override :meth:`observe`."""

    name = "policy"

    def __init__(self, n_targets: int, budget: int):
        self.n_targets = n_targets
        self.budget = budget

    @property
    def gamma(self) -> float:
        return float("nan")

    @property
    def k_expl(self) -> int:
        return 0

    def decide(self) -> np.ndarray:
        raise NotImplementedError

    def observe(self, obs: RoundObservation) -> None:
        pass

    def telemetry(self) -> dict:
        return {"gamma": self.gamma, "k_expl": self.k_expl, "r_hat_hash": ""}


class StaticPolicy(Policy):
    name = "Static"

    def __init__(self, coverage, budget: int):
        cov = as_action(coverage, budget)
        super().__init__(cov.shape[0], budget)
        self.coverage = cov

    def decide(self) -> np.ndarray:
        return self.coverage.copy()


class UniformRandomPolicy(Policy):
    name = "UniformRandom"

    def __init__(self, n_targets: int, budget: int, rng: np.random.Generator):
        super().__init__(n_targets, budget)
        self.rng = rng

    def decide(self) -> np.ndarray:
        cover = np.zeros(self.n_targets, dtype=bool)
        cover[self.rng.choice(self.n_targets, size=self.budget, replace=False)] = True
        return cover


class _PerturbedLeader(Policy):
    """Shared estimate-and-resample machinery of the FPL family."""

    def __init__(self, n_targets, budget, eta, gr_truncation, rng, gr_rng,
                 penalty_distribution="uniform-full", smoothing=None):
        super().__init__(n_targets, budget)
        self.eta = eta
        self.gr_truncation = gr_truncation
        self.rng = rng
        self.gr_rng = gr_rng
        self.r_hat = np.zeros(n_targets)
        self.payoffs = PayoffEstimate(n_targets, penalty_distribution, smoothing)
        self._gamma = 1.0
        self.gamma_hat = 0.0
        self._last = None
        # Rewards ever credited to uncovered targets; stays 0 by construction.
        self.uncovered_reward_count = 0

    @property
    def gamma(self) -> float:
        return self._gamma

    def _draw(self, rng) -> np.ndarray:
        raise NotImplementedError

    def decide(self) -> np.ndarray:
        self.gamma_hat = max(self.gamma_hat, self._gamma)
        self._last = self._draw(self.rng)
        return self._last.copy()

    def observe(self, obs: RoundObservation) -> None:
        if self._last is not None and not np.array_equal(obs.coverage, self._last):
            raise ValueError("observation coverage differs from the action this policy played")
        self.payoffs.update(obs)
        p_inv = geometric_resample(lambda: self._draw(self.gr_rng), self.gr_truncation, self.n_targets)
        rewards = self.payoffs.observed_rewards(obs)
        self.uncovered_reward_count += int(np.count_nonzero(rewards[~obs.coverage]))
        self.r_hat = apply_reward_update(self.r_hat, p_inv, rewards, obs.coverage)
        self._after_observe(obs)

    def _after_observe(self, obs: RoundObservation) -> None:
        pass

    def telemetry(self) -> dict:
        return {"gamma": self.gamma, "k_expl": self.k_expl, "r_hat_hash": r_hat_digest(self.r_hat)}


class Herds(_PerturbedLeader):
    """Budget-splitting learner whose exploration share tracks last round's relative loss."""

    name = "HERDS"

    @property
    def k_expl(self) -> int:
        return exploration_split(self._gamma, self.budget)[0]

    def _draw(self, rng):
        return herds_decide(self.r_hat, self._gamma, self.budget, self.eta, rng)

    def _after_observe(self, obs):
        self._gamma = next_gamma(obs.crop_loss, self.payoffs.max_crop_loss)


class FplUE(_PerturbedLeader):
    """FPL with uniform single-target exploration at a fixed rate."""

    name = "FPL-UE"

    def __init__(self, *args, fixed_gamma: float = DEFAULT_FPLUE_GAMMA, **kwargs):
        super().__init__(*args, **kwargs)
        if not 0 <= fixed_gamma <= 1:
            raise ValueError(f"fixed_gamma must be in [0, 1], got {fixed_gamma!r}")
        self._gamma = float(fixed_gamma)
        self._explored = False

    @property
    def k_expl(self) -> int:
        # Strategy-level switching: 1 if the played round was an exploration round.
        return int(self._explored)

    def decide(self) -> np.ndarray:
        self.gamma_hat = max(self.gamma_hat, self._gamma)
        self._last, self._explored = _fplue_draw(self.r_hat, self._gamma, self.budget, self.eta, self.rng)
        return self._last.copy()

    def _draw(self, rng):
        return fplue_decide(self.r_hat, self._gamma, self.budget, self.eta, rng)


class FplUEAdaptive(FplUE):
    """FPL-UE whose switching probability follows the loss-driven rate of HERDS."""

    name = "FPL-UE-A"

    def __init__(self, *args, **kwargs):
        kwargs.pop("fixed_gamma", None)
        super().__init__(*args, fixed_gamma=1.0, **kwargs)

    def _after_observe(self, obs):
        self._gamma = next_gamma(obs.crop_loss, self.payoffs.max_crop_loss)


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    fixed_gamma: float | None = None
    static_coverage: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {KINDS}")
        if self.fixed_gamma is not None:
            if self.kind != "FPL-UE":
                raise ValueError("fixed_gamma only applies to FPL-UE")
            if not 0 <= self.fixed_gamma <= 1:
                raise ValueError("fixed_gamma must be in [0, 1]")
        if self.static_coverage is not None and self.kind != "Static":
            raise ValueError("static_coverage only applies to Static")

    @property
    def label(self) -> str:
        return self.kind


def build_static_coverage(world, attacker, warmup_rounds: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Top-``k`` most attacked targets over an unguarded warm-up.

    ``attacker`` is consumed; pass a fresh instance.
    """
    if warmup_rounds < 1:
        raise ValueError("warmup_rounds must be >= 1")
    counts = np.zeros(world.n_targets, dtype=np.int64)
    empty = np.zeros(world.n_targets, dtype=bool)
    for _ in range(warmup_rounds):
        a = attacker.attack(world, rng)
        counts += a
        attacker.learn(empty, a)
    return best_response(counts, k)


def make_policy(spec: PolicySpec, cfg, rng, gr_rng, static_coverage=None,
                penalty_distribution="uniform-full", smoothing=None) -> Policy:
    n, k = cfg.n_targets, cfg.defender_budget
    common = (n, k, cfg.eta, cfg.gr_truncation, rng, gr_rng)
    opts = {"penalty_distribution": penalty_distribution, "smoothing": smoothing}
    if spec.kind == "HERDS":
        return Herds(*common, **opts)
    if spec.kind == "FPL-UE":
        g = DEFAULT_FPLUE_GAMMA if spec.fixed_gamma is None else spec.fixed_gamma
        return FplUE(*common, fixed_gamma=g, **opts)
    if spec.kind == "FPL-UE-A":
        return FplUEAdaptive(*common, **opts)
    if spec.kind == "UniformRandom":
        return UniformRandomPolicy(n, k, rng)
    cov = spec.static_coverage if spec.static_coverage is not None else static_coverage
    if cov is None:
        raise ValueError("Static policy needs a coverage vector")
    return StaticPolicy(np.asarray(cov, dtype=bool), k)
