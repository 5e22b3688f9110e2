import numpy as np
import pytest
from hypothesis import given, strategies as st

from guard_sim.checks import expected_truncated_geometric, gr_increment_sample
from guard_sim.resampling import apply_reward_update, geometric_resample


class Counting:
    def __init__(self, fn):
        self.fn, self.calls = fn, 0

    def __call__(self):
        self.calls += 1
        return self.fn()


def test_truncation_one_gives_all_ones():
    sim = Counting(lambda: np.zeros(4, bool))
    assert geometric_resample(sim, 1).tolist() == [1, 1, 1, 1]
    assert sim.calls == 1


def test_always_covered_target_gets_one():
    rng = np.random.default_rng(0)
    sim = lambda: np.array([True, rng.random() < 0.3, False])  # noqa: E731
    for m in (2, 5, 15):
        assert geometric_resample(sim, m)[0] == 1


def test_full_coverage_exits_after_one_call():
    for m in (1, 3, 15):
        sim = Counting(lambda: np.ones(5, bool))
        assert geometric_resample(sim, m).tolist() == [1] * 5
        assert sim.calls == 1


def test_never_covered_consumes_m_calls():
    sim = Counting(lambda: np.zeros(3, bool))
    assert geometric_resample(sim, 8).tolist() == [8, 8, 8]
    assert sim.calls == 8


def test_first_reoccurrence_index():
    seq = iter([[0, 1, 0], [0, 0, 0], [1, 1, 0], [0, 0, 0]])
    p_inv = geometric_resample(lambda: np.array(next(seq), bool), 4)
    assert p_inv.tolist() == [3, 1, 4]


def test_shape_checked():
    with pytest.raises(ValueError):
        geometric_resample(lambda: np.zeros(3, bool), 3, n=4)
    with pytest.raises(ValueError):
        geometric_resample(lambda: np.zeros(3, bool), 0)


def test_half_probability_mean_is_1_75():
    # 1*0.5 + 2*0.25 + 3*0.25
    assert expected_truncated_geometric(0.5, 3) == pytest.approx(1.75)
    _, p_inv = gr_increment_sample(0.5, 3, 1.0, 100_000, np.random.default_rng(5))
    se = p_inv.std(ddof=1) / np.sqrt(p_inv.size)
    assert abs(p_inv.mean() - 1.75) <= 3 * se


@given(st.floats(0.01, 1.0), st.integers(1, 20), st.integers(0, 2**32))
def test_entries_within_bounds(p, m, seed):
    rng = np.random.default_rng(seed)
    p_inv = geometric_resample(lambda: rng.random(30) < p, m)
    assert p_inv.min() >= 1 and p_inv.max() <= m


def test_update_examples():
    out = apply_reward_update([0.0, 0.0], [2, 3], [0.5, 0.4], [True, False])
    assert out.tolist() == [1.0, 0.0]
    r = np.array([0.2, 0.3])
    assert np.array_equal(apply_reward_update(r, [2, 3], [0.5, 0.4], [False, False]), r)


def test_updates_commute():
    r0 = np.zeros(4)
    u1 = ([2, 1, 3, 1], [0.5, 0.0, 0.2, 1.0], [True, False, True, True])
    u2 = ([1, 4, 1, 2], [0.1, 0.3, 0.0, 0.7], [True, True, False, True])
    a = apply_reward_update(apply_reward_update(r0, *u1), *u2)
    b = apply_reward_update(apply_reward_update(r0, *u2), *u1)
    assert np.allclose(a, b)


def test_update_rejects_negative_or_misshaped():
    with pytest.raises(ValueError):
        apply_reward_update([0.0], [1], [-0.1], [True])
    with pytest.raises(ValueError):
        apply_reward_update([0.0, 0.0], [1], [0.1, 0.1], [True, True])
