"""Self-checks behind the ``bench-gr`` and ``oracle-check`` commands.

``bench_gr`` estimates the per-round reward increment of geometric resampling
by Monte Carlo and compares it with ``(1 - (1 - p)**M) * r``. Rounds are
batched: each of ``rounds`` independent targets is covered with probability
``p`` by the synthetic simulator, so one call to :func:`geometric_resample`
replays all of them at once.

``oracle_check`` compares :func:`best_response` and :func:`hindsight_best`
with exhaustive enumeration of all size-``k`` subsets.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .game import RoundRecord
from .metrics import hindsight_best
from .oracle import best_response
from .resampling import apply_reward_update, geometric_resample


@dataclass(frozen=True)
class GRBenchRow:
    p: float
    m_trunc: int
    reward: float
    rounds: int
    mean_increment: float
    se_increment: float
    expected_increment: float
    mean_p_inv: float
    se_p_inv: float
    expected_p_inv: float

    @property
    def z_increment(self) -> float:
        return (self.mean_increment - self.expected_increment) / self.se_increment

    @property
    def z_p_inv(self) -> float:
        return (self.mean_p_inv - self.expected_p_inv) / self.se_p_inv

    @property
    def ok(self) -> bool:
        return abs(self.z_increment) <= 3 and abs(self.z_p_inv) <= 3


def expected_truncated_geometric(p: float, m_trunc: int) -> float:
    """``E[min(G, M)]`` for ``G ~ Geometric(p)`` on ``{1, 2, ...}``: ``(1 - (1 - p)**M) / p``."""
    return (1.0 - (1.0 - p) ** m_trunc) / p


def gr_increment_sample(p: float, m_trunc: int, reward: float, rounds: int,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Per-round increments and ``p_inv`` values for ``rounds`` independent targets.

    Each target is covered (and pays ``reward``) with probability ``p``; the
    simulator replays the same Bernoulli coverage.
    """
    played = rng.random(rounds) < p
    sim_rng = np.random.default_rng(rng.integers(2**63))
    p_inv = geometric_resample(lambda: sim_rng.random(rounds) < p, m_trunc, rounds)
    inc = apply_reward_update(np.zeros(rounds), p_inv, np.full(rounds, reward), played)
    return inc, p_inv


def bench_gr(ps=(0.1, 0.5, 0.9), ms=(3, 8, 15), rewards=(0.25, 1.0), rounds: int = 100_000,
             seed: int = 0) -> list[GRBenchRow]:
    rng = np.random.default_rng(seed)
    rows = []
    for p, m, r in itertools.product(ps, ms, rewards):
        inc, p_inv = gr_increment_sample(p, m, r, rounds, rng)
        rows.append(GRBenchRow(
            p=p, m_trunc=m, reward=r, rounds=rounds,
            mean_increment=float(inc.mean()), se_increment=float(inc.std(ddof=1) / np.sqrt(rounds)),
            expected_increment=(1.0 - (1.0 - p) ** m) * r,
            mean_p_inv=float(p_inv.mean()), se_p_inv=float(p_inv.std(ddof=1) / np.sqrt(rounds)),
            expected_p_inv=expected_truncated_geometric(p, m),
        ))
    return rows


def brute_force_best(scores, k: int) -> tuple[int, ...]:
    """Lexicographically first size-``k`` subset maximising the score sum."""
    s = np.asarray(scores, dtype=float)
    best, best_val = (), -np.inf
    for combo in itertools.combinations(range(s.shape[0]), k):
        val = s[list(combo)].sum()
        if val > best_val:
            best, best_val = combo, val
    return best


@dataclass
class OracleReport:
    instances: int = 0
    mismatches: int = 0
    examples: list = None

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


def oracle_check(instances: int = 1000, max_n: int = 8, seed: int = 0) -> OracleReport:
    """Random instances with integer-valued scores so ties are frequent and sums exact."""
    rng = np.random.default_rng(seed)
    report = OracleReport(examples=[])
    for _ in range(instances):
        n = int(rng.integers(1, max_n + 1))
        k = int(rng.integers(0, n + 1))
        scores = rng.integers(-3, 4, size=n).astype(float)
        got = tuple(np.flatnonzero(best_response(scores, k)))
        want = brute_force_best(scores, k)

        rounds = int(rng.integers(1, 6))
        rewards = rng.integers(0, 3, size=(rounds, n)) / 2.0
        records = [RoundRecord(t + 1, np.zeros(n, bool), r > 0, r, 0.0, np.zeros(n, np.int64))
                   for t, r in enumerate(rewards)]
        got_h = tuple(np.flatnonzero(hindsight_best(records, k)))
        want_h = brute_force_best(rewards.sum(axis=0), k)

        report.instances += 1
        if got != want or got_h != want_h:
            report.mismatches += 1
            if len(report.examples) < 5:
                report.examples.append({"scores": scores.tolist(), "k": k, "got": got, "want": want,
                                        "hindsight_got": got_h, "hindsight_want": want_h})
    return report
