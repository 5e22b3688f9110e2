import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from guard_sim.game import (GameConfig, PayoffTable, RoundObservation, as_action, bitstring, constant_term,
                            reward_vector, utility)


def table(c, u):
    return PayoffTable(np.array(c, float), np.array(u, float))


def test_reward_vector_examples():
    assert np.array_equal(reward_vector([0, 0, 0], table([0.1, 0.2, 0.3], [0, -0.1, -0.5])), [0, 0, 0])
    assert np.allclose(reward_vector([1, 0], table([0.5, 0.5], [-0.5, 0.0])), [1.0, 0.0])
    r = reward_vector([1, 1, 0], table([0.3, 0.1, 0.4], [-0.2, -0.1, 0.0]))
    assert np.allclose(r, [0.5, 0.2, 0.0])


def test_utility_examples():
    P = table([0.4, 0.2], [-0.1, -0.3])
    assert utility([1, 0], [1, 1], P) == pytest.approx(0.1)
    assert utility([1, 1], [1, 1], P) == pytest.approx(0.6)
    assert utility([0, 0], [1, 1], table([0.5, 0.5], [-0.5, -0.5])) == pytest.approx(-1.0)


def test_constant_term_examples():
    assert constant_term([0, 0, 0], table([0.1] * 3, [-0.2, -0.5, -0.1])) == 0
    assert constant_term([1, 0, 1], table([0.1] * 3, [-0.2, -0.5, -0.1])) == pytest.approx(-0.3)
    assert constant_term([1] * 4, table([0.5] * 4, [-0.5] * 4)) == pytest.approx(-2.0)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        reward_vector([1, 0, 1], table([0.1, 0.1], [0, 0]))
    with pytest.raises(ValueError):
        utility([1], [1, 0], table([0.1, 0.1], [0, 0]))


@pytest.mark.parametrize("c,u", [([0.6], [0.0]), ([0.1], [-0.7]), ([0.0], [0.1]), ([0.1, 0.2], [0.0])])
def test_payoff_table_rejects(c, u):
    with pytest.raises(ValueError):
        table(c, u)


def test_as_action_checks():
    assert as_action([0, 1, 1], budget=2).dtype == bool
    with pytest.raises(ValueError):
        as_action([1, 1, 1], budget=2)
    with pytest.raises(ValueError):
        as_action([0, 2])
    with pytest.raises(ValueError):
        as_action([1, 0], n=3)
    assert bitstring([1, 0, 1]) == "101"


def test_game_config_errors_name_fields():
    with pytest.raises(ValueError, match="defender_budget"):
        GameConfig(n_targets=4, defender_budget=5)
    with pytest.raises(ValueError, match="eta"):
        GameConfig(eta=0)
    with pytest.raises(ValueError, match="gr_truncation"):
        GameConfig(gr_truncation=0)
    assert GameConfig().validate() == []


def test_observation_rejects_uncovered_interceptions():
    with pytest.raises(ValueError):
        RoundObservation(np.array([1, 0], bool), np.array([0, 1]), 0.0)
    with pytest.raises(ValueError):
        RoundObservation(np.array([1, 0], bool), np.array([1, 0]), -1.0)


@st.composite
def triples(draw):
    n = draw(st.integers(1, 12))
    unit = st.floats(0, 0.5, allow_nan=False)
    hi = draw(arrays(float, n, elements=unit))
    lo = draw(arrays(float, n, elements=unit))
    covered = np.maximum(hi - lo, -0.5)
    uncovered = -lo
    v = draw(arrays(bool, n))
    a = draw(arrays(bool, n))
    return v, a, PayoffTable(covered, np.minimum(uncovered, covered))


@given(triples())
def test_utility_identity(t):
    v, a, P = t
    assert utility(v, a, P) == pytest.approx(v.astype(float) @ reward_vector(a, P) + constant_term(a, P), abs=1e-12)


@given(triples())
def test_reward_range(t):
    _, a, P = t
    r = reward_vector(a, P)
    assert np.all((r >= 0) & (r <= 1))


@given(triples(), st.integers(0, 11))
def test_adding_coverage_never_hurts(t, i):
    v, a, P = t
    i %= v.shape[0]
    more = v.copy()
    more[i] = True
    assert utility(more, a, P) >= utility(v, a, P) - 1e-12
