import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import one_state_game, random_instance, single_pair
from polyiter.errors import CombinatorialOverflow, InstanceFormatError, InvalidInstance
from polyiter.fileformat import dumps_instance, instance_from_dict, instance_to_dict, loads_instance
from polyiter.game import (
    GameInstance,
    PayoffMode,
    check_valid,
    count_m,
    count_m1,
    enumerate_max_policies,
    enumerate_min_policies,
    validate,
)


def _sized(a_counts, b_counts, n=None):
    n = len(a_counts) if n is None else n
    rewards = [np.zeros((a, b)) for a, b in zip(a_counts, b_counts)]
    kernels = [np.full((a, b, n), 0.1 / n) for a, b in zip(a_counts, b_counts)]
    return GameInstance.from_arrays(rewards, kernels)


def test_validate_accepts_one_state_game():
    g = GameInstance.from_arrays([[[3.0]]], [[[[0.5]]]])
    report = validate(g)
    assert report.ok
    assert str(report) == "OK"


def test_validate_flags_mean_row_sum():
    g = single_pair([[0.9]], [1.0], PayoffMode.MEAN)
    report = validate(g)
    assert not report.ok
    assert "row sum" in str(report)
    assert "(1, 1, 1)" in str(report)


def test_validate_flags_negative_entry():
    g = single_pair([[0.5, -0.1], [0.2, 0.2]], [1.0, 1.0])
    report = validate(g)
    assert not report.ok
    assert "negative kernel entry" in str(report)
    with pytest.raises(InvalidInstance):
        check_valid(g)


def test_validate_flags_ragged_max_actions():
    g = GameInstance(
        1,
        PayoffMode.DISCOUNTED,
        (("a1", "a2"),),
        ((("b1",), ("b1", "b2")),),
        ((np.array([0.0]), np.array([0.0, 1.0])),),
        ((np.array([[0.5]]), np.array([[0.5], [0.5]])),),
    )
    assert not validate(g).ok


def test_validate_flags_non_finite():
    g = single_pair([[np.nan]], [1.0])
    assert not validate(g).ok


@pytest.mark.parametrize(
    "a_counts, expected",
    [((2, 2), 4), ((1,), 1), ((1, 2, 3), 6)],
)
def test_count_m1(a_counts, expected):
    assert count_m1(_sized(a_counts, [1] * len(a_counts))) == expected


@pytest.mark.parametrize(
    "a_counts, b_counts, expected",
    [((2,), (3,), 6), ((1, 1), (1, 1), 2), ((2, 1), (2, 2), 6)],
)
def test_count_m(a_counts, b_counts, expected):
    assert count_m(_sized(a_counts, b_counts)) == expected


def test_enumerate_min_policies_lexicographic():
    pols = enumerate_min_policies(_sized((2, 2), (1, 1)))
    assert pols == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert sorted(pols) == pols


def test_enumerate_max_policies_count():
    assert len(enumerate_max_policies(_sized((1,), (2,)))) == 2
    pols = enumerate_max_policies(_sized((2, 1), (2, 3)))
    assert len(pols) == 2**2 * 3
    assert sorted(pols) == pols


def test_enumeration_overflow():
    g = _sized([10] * 10, [1] * 10)
    with pytest.raises(CombinatorialOverflow):
        enumerate_min_policies(g)


def test_enumeration_cap_from_environment(monkeypatch):
    monkeypatch.setenv("POLYITER_ENUM_CAP", "3")
    with pytest.raises(CombinatorialOverflow):
        enumerate_min_policies(_sized((2, 2), (1, 1)))


def test_round_trip_is_value_identical():
    rng = np.random.default_rng(4)
    g = random_instance(rng, 3)
    back = loads_instance(dumps_instance(g))
    assert back.min_actions == g.min_actions and back.max_actions == g.max_actions
    for i in range(g.n):
        for a in range(g.num_min_actions(i)):
            assert np.array_equal(back.rewards[i][a], g.rewards[i][a])
            assert np.array_equal(back.kernels[i][a], g.kernels[i][a])
    assert dumps_instance(back) == dumps_instance(g)


def test_load_renormalizes_near_stochastic_rows():
    data = instance_to_dict(one_state_game())
    data["payoff"] = "mean"
    data["states"][0]["min_actions"][0]["max_actions"][0]["row"] = [1.0 + 5e-10]
    data["states"][0]["min_actions"][1]["max_actions"][0]["row"] = [0.9]
    g = instance_from_dict(data)
    assert g.kernels[0][0][0, 0] == 1.0
    assert g.kernels[0][1][0, 0] == 0.9
    assert not validate(g).ok


@pytest.mark.parametrize(
    "text",
    ["{", "[]", '{"n": 1}', '{"n": 1, "payoff": "x", "states": []}', '{"n": 2, "payoff": "mean", "states": []}'],
)
def test_malformed_files(text):
    with pytest.raises(InstanceFormatError):
        loads_instance(text)


def test_counts_dominate():
    rng = np.random.default_rng(0)
    for n in range(1, 6):
        g = random_instance(rng, n)
        assert count_m1(g) >= n
        assert count_m(g) >= count_m1(g)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    kind=st.sampled_from(["negative", "nan", "mean-row"]),
)
def test_single_violation_is_rejected(seed, kind):
    rng = np.random.default_rng(seed)
    payoff = "mean" if kind == "mean-row" else "discounted"
    g = random_instance(rng, int(rng.integers(1, 4)), payoff=payoff)
    assert validate(g).ok
    i = int(rng.integers(g.n))
    kernels = [[k.copy() for k in row] for row in g.kernels]
    k = kernels[i][0]
    if kind == "negative":
        k[0, 0] = -0.1
    elif kind == "nan":
        k[0, 0] = np.nan
    else:
        k[0] *= 0.9
    bad = g.replace_data(g.rewards, kernels)
    report = validate(bad)
    assert not report.ok
    assert f"({i + 1}, 1, 1" in str(report)
