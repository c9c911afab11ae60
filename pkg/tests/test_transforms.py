import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_instance, return_time_game, single_pair
from polyiter.errors import NonPositivePhi, PhiCertificateViolated
from polyiter.game import PayoffMode
from polyiter.linalg import spectral_radius
from polyiter.perron import family_from_instance, mean_return_times
from polyiter.shapley import eval_operator, state_values
from polyiter.transforms import (
    TransformKind,
    TransformRecord,
    lift_solution,
    mean_to_discounted,
    scale_instance,
    verify_contraction,
)

seeds = st.integers(0, 2**32 - 1)


def _pair_arrays(instance):
    M = np.array([instance.kernels[i][0][0] for i in range(instance.n)])
    r = np.array([instance.rewards[i][0][0] for i in range(instance.n)])
    return M, r


def test_scale_identity():
    g = random_instance(np.random.default_rng(2), 3)
    same = scale_instance(g, np.ones(3))
    for i in range(3):
        for a in range(g.num_min_actions(i)):
            assert np.array_equal(same.kernels[i][a], g.kernels[i][a])
            assert np.array_equal(same.rewards[i][a], g.rewards[i][a])


def test_scale_example():
    g = single_pair([[0, 0.5], [0.5, 0]], [1.0, 1.0])
    M, r = _pair_arrays(scale_instance(g, [2.0, 1.0]))
    assert np.array_equal(M, [[0.0, 0.25], [1.0, 0.0]])
    assert np.array_equal(r, [0.5, 1.0])
    assert spectral_radius(M) == pytest.approx(0.5, abs=1e-9)


def test_scale_rejects_non_positive_phi():
    g = single_pair([[0.5]], [1.0])
    with pytest.raises(NonPositivePhi):
        scale_instance(g, [0.0])
    with pytest.raises(ValueError):
        scale_instance(g, [1.0, 2.0])


def test_mean_reduction_example():
    g = return_time_game()
    phi = np.array([1.5, 1.0])
    out = mean_to_discounted(g, 0, phi)
    M, r = _pair_arrays(out)
    assert np.allclose(M, [[0.0, 1 / 3], [0.0, 0.0]], atol=1e-15)
    assert np.allclose(r, [2 / 3, 0.0], atol=1e-15)
    assert out.payoff == PayoffMode.DISCOUNTED
    assert verify_contraction(out, 1 / 3).passed
    # the replaced matrix maps phi to phi - 1
    stopped = M * phi[:, None] / phi[None, :]
    assert np.allclose(stopped @ phi, phi - 1, atol=1e-15)


def test_mean_reduction_jump_to_renewal():
    g = single_pair([[1.0, 0.0], [1.0, 0.0]], [1.0, 2.0], PayoffMode.MEAN)
    M, _ = _pair_arrays(mean_to_discounted(g, 0, np.ones(2)))
    assert np.array_equal(M, np.zeros((2, 2)))


def test_mean_reduction_rejects_bad_phi():
    with pytest.raises(PhiCertificateViolated):
        mean_to_discounted(return_time_game(), 0, np.array([1.0, 1.0]))


def test_verify_contraction_examples():
    markov = return_time_game()
    res = verify_contraction(markov, 0.9)
    assert not res.passed and res.worst_sum == pytest.approx(1.0)
    zero = single_pair(np.zeros((2, 2)), [1.0, 1.0])
    assert verify_contraction(zero, 0.0).passed


def test_lift_examples():
    scaling = TransformRecord(TransformKind.SCALING, np.array([2.0, 1.0]), 0.5)
    assert np.array_equal(lift_solution(scaling, [3.0, 4.0]), [6.0, 4.0])
    mean = TransformRecord(TransformKind.MEAN, np.array([1.5, 1.0]), 1 / 3, 0)
    pair = lift_solution(mean, [2.0, 3.0])
    assert pair.eta == 2.0 and np.array_equal(pair.bias, [0.0, 1.0])
    const = lift_solution(mean, [4.5, 4.5])
    assert const.eta == 4.5 and np.array_equal(const.bias, [0.0, 0.0])


def test_record_round_trip():
    rec = TransformRecord(TransformKind.MEAN, np.array([1.5, 1.0]), 1 / 3, 0)
    data = rec.to_dict()
    assert data["c"] == 1
    back = TransformRecord.from_dict(data)
    assert back.c == 0 and back.kind == rec.kind and np.array_equal(back.phi, rec.phi)


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_scaling_conjugates_operator(seed):
    rng = np.random.default_rng(seed)
    g = random_instance(rng, int(rng.integers(1, 5)))
    phi = 10.0 ** rng.uniform(-1, 1, g.n)
    w = rng.normal(size=g.n) * 5
    scaled = scale_instance(g, phi)
    assert np.allclose(eval_operator(scaled, w), eval_operator(g, phi * w) / phi, rtol=1e-12, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_scaling_keeps_optimal_sets(seed):
    rng = np.random.default_rng(seed)
    g = random_instance(rng, int(rng.integers(1, 4)))
    # integer data so that ties are exact in both coordinates
    g = g.replace_data(
        [[np.round(r) for r in row] for row in g.rewards],
        [[np.round(k * 4) / 8 for k in row] for row in g.kernels],
    )
    phi = 2.0 ** rng.integers(-3, 4, g.n).astype(float)
    v = rng.integers(-3, 4, g.n).astype(float)
    scaled = scale_instance(g, phi)
    for i in range(g.n):
        orig = state_values(g, v, i)
        new = state_values(scaled, v / phi, i)
        assert np.array_equal(orig.argmax(axis=1), new.argmax(axis=1))
        o, s = orig.max(axis=1), new.max(axis=1)
        assert np.array_equal(np.flatnonzero(o == o.min()), np.flatnonzero(s == s.min()))


@settings(max_examples=50, deadline=None)
@given(seed=seeds, eta=st.floats(-10, 10))
def test_mean_reduction_identity(seed, eta):
    rng = np.random.default_rng(seed)
    g = random_instance(rng, int(rng.integers(1, 5)), payoff="mean")
    c = int(rng.integers(g.n))
    times = mean_return_times(family_from_instance(g), c)
    reduced = mean_to_discounted(g, c, times.phi)
    assert verify_contraction(reduced, times.lam).passed
    v = rng.normal(size=g.n) * 3
    v[c] = 0.0
    lhs = eval_operator(reduced, eta + v / times.phi)
    rhs = eta + (eval_operator(g, v) - eta) / times.phi
    assert np.allclose(lhs, rhs, atol=1e-10)
