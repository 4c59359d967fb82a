import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gossip_rmf.kernels import GossipParams, build_model
from gossip_rmf.model import (
    CountVector,
    DimensionMismatch,
    Measure,
    NegativeEntry,
    SumNotOne,
    constant_model,
    identity_model,
    iterate,
    step,
    validate_occupancy,
)

from conftest import simplex_points


@pytest.mark.parametrize("v", [[0.5, 0.5], [1.0, 0.0, 0.0]])
def test_valid_occupancies(v):
    np.testing.assert_array_equal(validate_occupancy(v), v)


def test_sum_not_one_reports_deviation():
    with pytest.raises(SumNotOne) as err:
        validate_occupancy([0.6, 0.5])
    assert err.value.deviation == pytest.approx(0.1)


def test_negative_entry():
    with pytest.raises(NegativeEntry) as err:
        validate_occupancy([1.2, -0.2])
    assert err.value.index == 1


def test_dimension_checked():
    with pytest.raises(DimensionMismatch):
        validate_occupancy([0.5, 0.5], n_states=3)


def test_count_vector():
    cv = CountVector((1, 3))
    assert cv.population == 4
    np.testing.assert_array_equal(cv.occupancy(), [0.25, 0.75])
    with pytest.raises(ValueError):
        CountVector((1, -1, 2))


def test_step_identity_and_absorbing():
    np.testing.assert_array_equal(step(identity_model(2), [0.3, 0.7]), [0.3, 0.7])
    absorb = constant_model([[0, 1], [0, 1]])
    np.testing.assert_array_equal(step(absorb, [0.3, 0.7]), [0.0, 1.0])


def test_three_state_step_by_hand():
    # difference equations of the aggregated model evaluated independently
    n, c, s, g = 500, 100, 50, 3
    swap = (s / c) * (n - c) / (n - s)
    dup = (s / c) * (c - s) / (n - s)
    lose = (s / c) * ((c - s) / c) * (n - c) / (n - s)
    noc = np.exp(-2 / (g + 1))
    mO, mD, mI = 0.0, 0.01, 0.99
    ogs = mD * (swap + dup) * noc / (g + 1)
    ogr = g * mD * (swap + dup) * noc / (g + 1)
    dls = ((mO + mI) * swap + mD * lose) * noc / (g + 1)
    dlr = g * ((mO + mI) * swap + mD * lose) * noc / (g + 1)
    get = (g * ogs + ogr) / (g + 1)
    loose = (g * dls + dlr) / (g + 1)
    expected = [mO - mO * get + mD * loose, mD + mO * get - mD * loose + mI * get, mI - mI * get]
    got = step(build_model("three-state", GossipParams(gmax=3)), [mO, mD, mI])
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-15)


def test_iterate_zero_and_identity(models):
    for model in models.values():
        m0 = np.full(model.n_states, 1 / model.n_states)
        np.testing.assert_array_equal(iterate(model, m0, 0), m0)
    np.testing.assert_array_equal(iterate(identity_model(3), [0.2, 0.3, 0.5], 40), [0.2, 0.3, 0.5])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 60), st.integers(0, 60), st.integers(0, 4))
def test_iterate_semigroup(a, b, k):
    model = build_model(["two-state", "three-state", "six-state", "full-replication", "full-coverage"][k], GossipParams())
    m0 = np.random.default_rng(a * 61 + b).dirichlet(np.ones(model.n_states))
    lhs = iterate(model, m0, a + b)
    rhs = iterate(model, iterate(model, m0, a), b)
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_catalogue_rows_stochastic(models, rng):
    for model in models.values():
        for m in simplex_points(rng, model.n_states, 1000):
            K = model.kernel(m)
            assert np.max(np.abs(K.sum(axis=1) - 1)) <= 1e-12
            assert K.min() >= 0 and K.max() <= 1


def test_kernel_deterministic(models, rng):
    for model in models.values():
        m = simplex_points(rng, model.n_states, 1)[0]
        assert np.array_equal(model.kernel(m), model.kernel(m.copy()))


def test_step_preserves_simplex(models, rng):
    for model in models.values():
        for m in simplex_points(rng, model.n_states, 100):
            assert abs(step(model, m).sum() - 1) <= 1e-12


def test_linear_measure_derivatives():
    h = Measure("h", weights=[1.0, 0.0, 2.0])
    m = np.array([0.2, 0.3, 0.5])
    assert h(m) == pytest.approx(1.2)
    np.testing.assert_array_equal(h.gradient(m), [1, 0, 2])
    np.testing.assert_array_equal(h.hessian(m), np.zeros((3, 3)))
    np.testing.assert_allclose(h(np.array([m, m])), [1.2, 1.2])


def test_nonlinear_measure_autodiff():
    h = Measure("sq", func=lambda m: m[1] * m[1])
    m = np.array([0.5, 0.5])
    assert h(m) == 0.25
    np.testing.assert_allclose(h.gradient(m), [0, 1])
    np.testing.assert_allclose(h.hessian(m), [[0, 0], [0, 2]])


def test_measure_needs_one_definition():
    with pytest.raises(ValueError):
        Measure("bad")
