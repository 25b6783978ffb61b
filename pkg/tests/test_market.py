import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collectivesim import ParameterError
from collectivesim.market import (
    EXAMPLE_KNOWLEDGE,
    DistanceVariant,
    KnowledgeMatrix,
    best_dimensions,
    environment,
    generate_knowledge,
    incentive_free_market,
    incentive_market,
    market_decision,
    market_distance_error,
    run_incentive_free_market,
    run_incentive_market,
    worked_example,
)
from collectivesim.seeding import make_rng

MSQ, ROOT = DistanceVariant.MEAN_SQUARED, DistanceVariant.ROOT_NORMALIZED


def test_degenerate_knowledge():
    assert np.all(generate_knowledge(20, 4, 0.0, 1).c == 0.0)
    assert np.all(generate_knowledge(20, 4, 1.0, 1).c == 1.0)


def test_knowledge_mean_at_half():
    assert abs(generate_knowledge(10_000, 50, 0.5, 3).c.mean() - 0.5) < 0.01


def test_knowledge_spread_matches_parameter():
    # at p=0.2 the sd is 0.16 and clamping at 0 removes ~11% of the mass
    c = generate_knowledge(20_000, 10, 0.2, 3).c
    assert np.all((c >= 0) & (c <= 1))
    assert 0.12 < c.std() < 0.16


def test_knowledge_deterministic_and_validated():
    assert np.array_equal(generate_knowledge(5, 3, 0.4, 9).c, generate_knowledge(5, 3, 0.4, 9).c)
    with pytest.raises(ParameterError):
        generate_knowledge(5, 3, 1.5, 9)
    with pytest.raises(ParameterError):
        generate_knowledge(0, 3, 0.5, 9)


def test_worked_example_markets():
    free = incentive_free_market(EXAMPLE_KNOWLEDGE, [0, 1, 2], [2, 0, 1])
    paid = incentive_market(EXAMPLE_KNOWLEDGE, [0, 1, 2], np.zeros(3))
    assert free.m.tolist() == [0.5, 0.5, 0.4]
    assert paid.m.tolist() == [0.7, 0.6, 0.7]
    assert free.log == [(0, 2, 0.4, True), (1, 0, 0.5, True), (2, 1, 0.5, True)]
    assert [entry[1] for entry in paid.log] == [0, 1, 2]


def test_worked_example_errors():
    ex = worked_example()
    assert ex["incentive-free"]["mean_squared"] == pytest.approx(0.287, abs=5e-4)
    assert ex["incentive"]["mean_squared"] == pytest.approx(0.113, abs=5e-4)
    # root of 0.86/3 and 0.34/3
    assert ex["incentive-free"]["root_normalized"] == pytest.approx(0.535, abs=5e-4)
    assert ex["incentive"]["root_normalized"] == pytest.approx(0.3367, abs=5e-4)
    assert not ex["incentive-free"]["correct"] and ex["incentive"]["correct"]


def test_first_citizen_has_seventy_percent_participation():
    order, rows = [0], EXAMPLE_KNOWLEDGE
    assert incentive_market(rows, order, [0.69]).participated[0]
    assert not incentive_market(rows, order, [0.70]).participated[0]


def test_single_citizen_free_market():
    know = KnowledgeMatrix(np.full((1, 4), 0.3), 0.3)
    m = run_incentive_free_market(know, 5).m
    assert np.count_nonzero(m) == 1 and m.max() == 0.3


def test_one_dimension_free_market_keeps_last_writer():
    know = generate_knowledge(30, 1, 0.5, 2)
    state = run_incentive_free_market(know, 8)
    assert state.m[0] == know.c[state.citizens[-1], 0]


def test_ignorant_citizen_never_participates():
    know = KnowledgeMatrix(np.zeros((1, 3)), 0.0)
    for seed in range(20):
        state = run_incentive_market(know, seed, seed + 1)
        assert not state.participated.any() and np.all(state.m == 0)


def test_certain_citizen_always_writes_one():
    know = KnowledgeMatrix(np.array([[0.2, 1.0, 0.4]]), 0.5)
    for seed in range(20):
        state = run_incentive_market(know, seed, seed + 1)
        assert state.participated.all() and state.m.tolist() == [0.0, 1.0, 0.0]


def test_argmax_ties():
    rows = np.array([[1.0, 0.3, 1.0, 1.0]])
    assert best_dimensions(rows).tolist() == [0]
    picks = {int(best_dimensions(rows, make_rng(s))[0]) for s in range(60)}
    assert picks == {0, 2, 3}


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 40), d=st.integers(1, 8), p=st.floats(0, 1), seed=st.integers(0, 2**63))
def test_market_values_come_from_citizens(n, d, p, seed):
    know = generate_knowledge(n, d, p, seed)
    for state in (run_incentive_free_market(know, seed ^ 1), run_incentive_market(know, seed ^ 2, seed ^ 3)):
        assert np.all((state.m >= 0) & (state.m <= 1))
        assert len(state.log) <= n
        for j in np.flatnonzero(state.written):
            assert state.m[j] in know.c[:, j]
        assert np.all(state.m[~state.written] == 0.0)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 30), d=st.integers(1, 6), seed=st.integers(0, 2**63))
def test_last_write_wins(n, d, seed):
    rng = np.random.default_rng(seed)
    c = rng.random((n, d))
    order, dims = rng.permutation(n), rng.integers(0, d, n)
    expected = np.zeros(d)
    for i, j in zip(order, dims):
        expected[j] = c[i, j]
    assert np.array_equal(incentive_free_market(c, order, dims).m, expected)


def test_distance_error_examples():
    e = environment(3)
    assert market_distance_error(e, e, MSQ) == 0.0 and market_distance_error(e, e, ROOT) == 0.0
    assert market_distance_error([0.5, 0.5, 0.4], e, MSQ) == pytest.approx(0.86 / 3)
    assert market_distance_error([0.5, 0.5, 0.4], e, ROOT) == pytest.approx(np.sqrt(0.86 / 3))
    assert market_distance_error([0.0, 0.0], None, ROOT) == 1.0
    with pytest.raises(ParameterError):
        market_distance_error([0.1, 0.2], e)


@pytest.mark.parametrize("m,decision,correct", [
    ([0.51, 0.99], [1, 1], True),
    ([0.49, 0.99], [0, 1], False),
    ([0.5], [1], True),
])
def test_market_decision(m, decision, correct):
    got, ok = market_decision(m)
    assert got.tolist() == decision and ok is correct
