import numpy as np
import pytest
from hypothesis import given, strategies as st

from guard_sim.game import RoundObservation
from guard_sim.payoffs import PayoffEstimate


def obs(cov, icp, loss):
    return RoundObservation(np.array(cov, bool), np.array(icp), loss)


def test_cold_start_stays_zero():
    est = PayoffEstimate(3).update(obs([1, 0, 0], [0, 0, 0], 0.0))
    assert not est.covered_est.any() and not est.uncovered_est.any()
    assert not est.observed_rewards(obs([1, 0, 0], [0, 0, 0], 0.0)).any()


def test_covered_pinned_at_max():
    est = PayoffEstimate(3)
    est.update(obs([1, 1, 0], [2, 1, 0], 10.0))
    assert est.covered_est.tolist() == [0.5, 0.25, 0.0]


def test_record_loss_gives_full_penalty_to_every_uncovered():
    est = PayoffEstimate(4)
    est.update(obs([1, 0, 0, 1], [0, 0, 0, 0], 50.0))
    assert est.uncovered_est.tolist() == [0.0, -0.5, -0.5, 0.0]
    est.update(obs([0, 1, 0, 0], [0, 0, 0, 0], 25.0))
    assert est.uncovered_est.tolist() == [-0.25, -0.5, -0.25, -0.25]


def test_per_share_divides_by_uncovered_count():
    est = PayoffEstimate(4, penalty_distribution="per-share")
    est.update(obs([1, 0, 0, 1], [0, 0, 0, 0], 50.0))
    assert est.uncovered_est.tolist() == [0.0, -0.25, -0.25, 0.0]


def test_smoothing_blends():
    est = PayoffEstimate(2, smoothing=0.5)
    est.update(obs([1, 0], [0, 0], 10.0))
    est.update(obs([1, 0], [0, 0], 10.0))
    assert est.uncovered_est[1] == pytest.approx(-0.375)


def test_observed_reward_examples():
    est = PayoffEstimate(2)
    est.covered_est[:] = [0.5, 0.3]
    est.uncovered_est[:] = [-0.5, -0.2]
    r = est.observed_rewards(obs([1, 1], [1, 2], 0.0))
    assert r.tolist() == pytest.approx([1.0, 0.5])


def test_rejects_bad_options():
    with pytest.raises(ValueError):
        PayoffEstimate(3, penalty_distribution="proportional")
    with pytest.raises(ValueError):
        PayoffEstimate(3, smoothing=0.0)


@st.composite
def sequences(draw):
    n = draw(st.integers(2, 8))
    rounds = []
    for _ in range(draw(st.integers(1, 12))):
        cov = np.array(draw(st.lists(st.booleans(), min_size=n, max_size=n)))
        icp = np.array([draw(st.integers(0, 3)) if c else 0 for c in cov])
        rounds.append(RoundObservation(cov, icp, draw(st.floats(0, 1000))))
    mode = draw(st.sampled_from(["uniform-full", "per-share"]))
    smoothing = draw(st.one_of(st.none(), st.floats(0.05, 1.0)))
    return n, rounds, mode, smoothing


@given(sequences())
def test_ranges_pinning_and_confounding(seq):
    n, rounds, mode, smoothing = seq
    est = PayoffEstimate(n, mode, smoothing)
    for o in rounds:
        est.update(o)
        assert np.all((est.covered_est >= 0) & (est.covered_est <= 0.5))
        assert np.all((est.uncovered_est >= -0.5) & (est.uncovered_est <= 0))
        assert est.covered_est.max() in (0.0, 0.5)
        r = est.observed_rewards(o)
        assert np.all((r >= 0) & (r <= 1))
        assert not r[~o.coverage].any()
