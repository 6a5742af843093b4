import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from msgtailor.selection import CandidateDistribution, SelectionError, roulette_select


def draw(weights, n, seed=0, options=None):
    dist = CandidateDistribution.of(options or list(range(len(weights))), weights)
    rng = random.Random(seed)
    return [roulette_select(dist, rng) for _ in range(n)]


def test_single_option_always_chosen():
    assert set(draw([0.3], 500)) == {0}


def test_empty_options_rejected():
    with pytest.raises(SelectionError):
        roulette_select(CandidateDistribution((), ()), random.Random(0))


def test_invalid_distributions_rejected():
    with pytest.raises(SelectionError):
        CandidateDistribution.of([1, 2], [1.0])
    with pytest.raises(SelectionError):
        CandidateDistribution.of([1, 2], [1.0, -0.1])
    with pytest.raises(SelectionError):
        CandidateDistribution.of([1], [float("nan")])


@pytest.mark.parametrize("weights, expected", [((0.5, 0.5), (0.5, 0.5)), ((3, 1), (0.75, 0.25)), ((1, 2, 0, 5), (1 / 8, 2 / 8, 0, 5 / 8))])
def test_frequencies_are_proportional(weights, expected):
    n = 100_000
    counts = Counter(draw(weights, n, seed=11))
    observed = [counts[k] for k in range(len(weights)) if expected[k] > 0]
    exp = [n * p for p in expected if p > 0]
    assert chisquare(observed, exp).pvalue > 0.01
    assert all(counts[k] == 0 for k in range(len(weights)) if expected[k] == 0)


def test_all_zero_weights_fall_back_to_uniform():
    counts = Counter(draw([0, 0, 0], 30_000, seed=5))
    assert chisquare([counts[k] for k in range(3)]).pvalue > 0.01


@given(
    st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=8).filter(lambda w: sum(w) > 0),
    st.integers(0, 2**32),
)
def test_zero_weight_never_selected(weights, seed):
    chosen = draw(weights, 50, seed=seed)
    assert all(weights[k] > 0 for k in chosen)


@given(st.lists(st.integers(0, 50), min_size=1, max_size=6).filter(lambda w: sum(w) > 0), st.integers(0, 2**32))
def test_scale_invariance_with_shared_seed(weights, seed):
    assert draw(weights, 200, seed) == draw([w * 4 for w in weights], 200, seed)


def test_determinism():
    assert draw([0.1, 0.7, 0.2], 1000, seed=9) == draw([0.1, 0.7, 0.2], 1000, seed=9)


def test_options_are_returned_not_indices():
    assert set(draw([1, 1], 200, options=["x", "y"])) == {"x", "y"}


def test_probabilities():
    assert CandidateDistribution.of("ab", [3, 1]).probabilities() == (0.75, 0.25)
    assert CandidateDistribution.of("ab", [0, 0]).probabilities() == (0.5, 0.5)
