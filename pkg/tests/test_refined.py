import warnings

import numpy as np
import pytest

from gossip_rmf.kernels import GossipParams, ModelKind, build_model, replication_measure
from gossip_rmf.model import Measure, constant_model, identity_model
from gossip_rmf.refined import (
    RefinedOutOfRange,
    RefinedState,
    contract,
    gamma,
    refined_measure,
    refined_occupancy,
    refined_trajectory,
    structure_errors,
)

FIG7_MU0 = [0, 0, 0.99, 0, 0.01, 0]


def test_gamma_deterministic_kernel_is_zero():
    model = constant_model([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    np.testing.assert_array_equal(gamma(model, [0.2, 0.3, 0.5]), np.zeros((3, 3)))


def test_gamma_two_state_by_hand():
    model = constant_model([[0.5, 0.5], [0.5, 0.5]])
    np.testing.assert_allclose(gamma(model, [0.5, 0.5]), [[0.25, -0.25], [-0.25, 0.25]], rtol=0, atol=1e-16)


def test_gamma_six_state_fig7_t10():
    model = build_model("six-state", GossipParams())
    rt = refined_trajectory(model, FIG7_MU0, 10, 100)
    G = gamma(model, rt.mu[10])
    assert np.max(np.abs(G.sum(axis=1))) <= 1e-14
    assert np.array_equal(G, G.T)
    # regression values from the first computation
    np.testing.assert_allclose(
        G.diagonal(),
        [6.2891325525778153e-04, 1.4215146199161215e-04, 1.2575784075047336e-03, 1.7414691092283987e-03, 0.0, 4.9769371786852705e-06],
        rtol=1e-12,
        atol=0,
    )


def test_identity_kernel_no_correction():
    rt = refined_trajectory(identity_model(3), [0.2, 0.3, 0.5], 20)
    assert np.all(rt.V == 0) and np.all(rt.W == 0)


def test_constant_kernel_only_w_evolves():
    K = np.array([[0.6, 0.4, 0.0], [0.2, 0.5, 0.3], [0.1, 0.1, 0.8]])
    model = constant_model(K)
    rt = refined_trajectory(model, [0.2, 0.3, 0.5], 15)
    assert np.all(rt.V == 0)
    W = np.zeros((3, 3))
    for t in range(15):
        W = gamma(model, rt.mu[t]) + K.T @ W @ K
        np.testing.assert_allclose(rt.W[t + 1], W, rtol=0, atol=1e-15)


def test_contract_order():
    rng = np.random.default_rng(0)
    B, W = rng.random((4, 4, 4)), rng.random((4, 4))
    np.testing.assert_allclose(contract(B, W), np.einsum("ijk,jk->i", B, W), rtol=1e-14)


@pytest.mark.parametrize("kind", list(ModelKind))
def test_structure_on_every_model(kind):
    model = build_model(kind, GossipParams())
    n = model.n_states
    mu0 = np.random.default_rng(n).dirichlet(np.ones(n))
    err = structure_errors(refined_trajectory(model, mu0, 2000 if n <= 8 else 500))
    assert err["sum_V"] <= 1e-9 and err["asym_W"] <= 1e-9 and err["rowsum_W"] <= 1e-9
    assert err["min_eig_W"] >= -1e-9


def test_refined_occupancy_arithmetic():
    st = RefinedState(np.array([0.5, 0.5]), np.array([0.1, -0.1]), np.zeros((2, 2)))
    np.testing.assert_allclose(refined_occupancy(st, 10), [0.51, 0.49], rtol=1e-15)
    zero = RefinedState(np.array([0.5, 0.5]), np.zeros(2), np.zeros((2, 2)))
    np.testing.assert_array_equal(refined_occupancy(zero, 7), [0.5, 0.5])


def test_refined_occupancy_flags_but_keeps_out_of_range():
    st = RefinedState(np.array([0.0, 1.0]), np.array([-1.0, 1.0]), np.zeros((2, 2)))
    with pytest.warns(RefinedOutOfRange):
        out = refined_occupancy(st, 2)
    np.testing.assert_array_equal(out, [-0.5, 1.5])


def test_refined_measure_linear_matches_occupancy():
    model = build_model("six-state", GossipParams())
    rt = refined_trajectory(model, FIG7_MU0, 60, 100)
    h = replication_measure("six-state")
    for t in (0, 10, 60):
        st = rt.state(t)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RefinedOutOfRange)
            occ = refined_occupancy(st, 100)
        assert abs(refined_measure(st, h, 100) - h(occ)) <= 1e-14
    zero = RefinedState(rt.mu[5], np.zeros(6), rt.W[5])
    assert refined_measure(zero, h, 100) == h(rt.mu[5])


def test_refined_measure_quadratic():
    W = np.zeros((2, 2))
    W[1, 1] = 0.04
    st = RefinedState(np.array([0.5, 0.5]), np.zeros(2), W)
    h = Measure("mD2", func=lambda m: m[1] * m[1])
    assert refined_measure(st, h, 100) == pytest.approx(0.2504, abs=1e-15)


def test_population_size_used_by_trajectory():
    model = build_model("three-state", GossipParams())
    rt = refined_trajectory(model, [0, 0.1, 0.9], 10, 40)
    np.testing.assert_array_equal(rt.occupancy(), rt.mu + rt.V / 40)
    with pytest.raises(ValueError):
        refined_trajectory(model, [0, 0.1, 0.9], 10, 0)
