import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omsqueeze.analysis import optimal_angle, variance_xy
from omsqueeze.covariance import is_physical, symplectic_eigenvalues, vacuum
from omsqueeze.drive import DriveSchedule
from omsqueeze.markov import (
    MarkovModel,
    Stability,
    analytic_variance,
    diffusion_matrix,
    drift_matrix,
    full_model,
    full_propagate,
    lyapunov_residual,
    propagate_cm,
    stability,
)
from omsqueeze.model import SystemParams
from omsqueeze.spectra import LorentzianBath
from omsqueeze.stepper import uniform_grid
from oracles import analytic_dx, lyapunov_expm

KA, KC = math.pi * 1e-3, math.pi * 1.5e-3
G_CORNER = 0.010608


def test_drift_and_diffusion_layout():
    A = drift_matrix(0.01, 0.1, 0.2)
    assert A[0, 3] == A[1, 2] == A[2, 1] == A[3, 0] == -0.01
    np.testing.assert_array_equal(np.diag(A), [-0.1, -0.1, -0.2, -0.2])
    np.testing.assert_allclose(np.diag(diffusion_matrix(0.1, 0.2, 1.0, 2.0)), [0.3, 0.3, 1.0, 1.0], rtol=1e-15)


def test_model_validation_and_from_baths():
    with pytest.raises(ValueError):
        MarkovModel(0.01, -1.0, 0.1)
    with pytest.raises(ValueError):
        MarkovModel(0.01, 0.1, 0.1, N_a=-1)
    m = MarkovModel.from_baths(0.01, LorentzianBath(1e-3, 0.01, 2.0), LorentzianBath(1.5e-3, 0.015, label="c"))
    assert (m.kappa_a, m.kappa_c, m.N_a) == pytest.approx((KA, KC, 2.0))


@pytest.mark.parametrize(
    "g, ka, kc, expected",
    [
        (0.0, 0.1, 0.2, Stability.STEADY),
        (G_CORNER, KA, KC, Stability.UNSTEADY),
        (0.1, 0.1, 0.2, Stability.STEADY),
        (0.2, 0.1, 0.2, Stability.UNSTEADY),
    ],
)
def test_stability(g, ka, kc, expected):
    assert stability(g, ka, kc) is expected


def test_stability_boundary_is_unsteady():
    g, ka, kc = 0.5, 0.5, 0.5
    assert g * g == ka * kc
    assert stability(g, ka, kc) is Stability.UNSTEADY
    assert MarkovModel(g, ka, kc).stability is Stability.UNSTEADY


def test_vacuum_fixed_point():
    traj = propagate_cm(MarkovModel(0.0, 0.3, 0.1), uniform_grid(50, 0.05))
    np.testing.assert_allclose(traj.V, np.broadcast_to(vacuum(4), traj.V.shape), atol=1e-14)


def test_lossless_squeezing():
    g = 0.02
    t = uniform_grid(100, 0.01)
    traj = propagate_cm(MarkovModel(g, 0.0, 0.0), t)
    ref = 0.5 * (np.cosh(g * t) ** 2 + np.sinh(g * t) ** 2)
    np.testing.assert_allclose(traj.V[:, 0, 0], ref, rtol=1e-10)


@pytest.mark.parametrize("r, g", [(0.2, 0.2), (0.0, 0.1), (0.1, 0.15)])
def test_lyapunov_matches_analytic(r, g):
    from omsqueeze.model import effective_coupling

    g_eff = effective_coupling(SystemParams(g=g, G=g, r=r, delta_c=3.5))
    t = uniform_grid(300, 0.01)
    traj = propagate_cm(MarkovModel(g_eff, KA, KC), t)
    dx, _ = variance_xy(traj.V, optimal_angle(g_eff, KA, KC))
    assert np.max(np.abs(dx - analytic_variance(g_eff, KA, KC, 0, 0, t))) <= 1e-3
    # independent route: matrix exponential of the Lyapunov flow
    ref = lyapunov_expm(drift_matrix(g_eff, KA, KC), diffusion_matrix(KA, KC), vacuum(4), [100.0, 300.0])
    np.testing.assert_allclose(traj.V[[10000, 30000]], ref, atol=1e-10)


def test_analytic_variance_examples():
    assert analytic_variance(G_CORNER, KA, KC, 0, 0, 0.0) == pytest.approx(0.5)
    assert analytic_variance(G_CORNER, KA, KC, 0, 0, 300.0) == pytest.approx(0.13688, abs=5e-5)
    np.testing.assert_allclose(analytic_variance(0.0, KA, KC, 0, 0, np.linspace(0, 500, 11)), 0.5)
    assert analytic_variance(0.0, 0.0, 0.0, 0, 0, 10.0) == 0.5


@settings(max_examples=25, deadline=None)
@given(
    st.floats(0.0, 0.012), st.floats(5e-4, 6e-3), st.floats(5e-4, 6e-3),
    st.floats(0.0, 2.0), st.floats(0.0, 2.0),
)
def test_oracle_equivalence(g, ka, kc, Na, Nc):
    t = uniform_grid(500, 0.01)
    traj = propagate_cm(MarkovModel(g, ka, kc, Na, Nc), t)
    if 4 * g * g + (ka - kc) ** 2 == 0:
        return  # mixing angle undefined
    dx, _ = variance_xy(traj.V, optimal_angle(g, ka, kc))
    assert np.max(np.abs(dx - analytic_dx(g, ka, kc, Na, Nc, t))) <= 1e-3
    # CM invariants along the trajectory
    V = traj.V
    assert np.max(np.abs(V - np.swapaxes(V, 1, 2))) <= 1e-9
    assert symplectic_eigenvalues(V[::500]).min() >= 0.5 - 1e-6
    assert np.max(np.abs(V[:, 1, 1] - V[:, 0, 0])) <= 1e-9 * max(1, V.max())
    assert np.max(np.abs(V[:, 2, 2] - V[:, 3, 3])) <= 1e-9 * max(1, V.max())
    assert np.max(np.abs(V[:, 1, 2] - V[:, 0, 3])) <= 1e-9 * max(1, V.max())


def test_optimal_branch_squeezes_vacuum():
    t = uniform_grid(300, 0.1)
    for ka, kc in ((KA, KC), (KC, KA), (KA, KA)):
        traj = propagate_cm(MarkovModel(0.008, ka, kc), t)
        dx, _ = variance_xy(traj.V, optimal_angle(0.008, ka, kc))
        assert np.all(dx <= 0.5 + 1e-12)


def test_steady_state_residual():
    ka, kc, g = 0.05, 0.08, 0.01
    assert stability(g, ka, kc) is Stability.STEADY
    m = MarkovModel(g, ka, kc, 0.5, 0.0)
    T = 10 / min(ka, kc)
    traj = propagate_cm(m, uniform_grid(T, 0.01))
    assert lyapunov_residual(m.drift, traj.V[-1], m.diffusion) <= 1e-8


def test_propagate_with_switch_off_freezes_coupling():
    g = 0.01
    sched = DriveSchedule(g, 100.0)
    t = uniform_grid(200, 0.01)
    a = propagate_cm(MarkovModel(g, 0.0, 0.0), t, schedule=sched)
    np.testing.assert_allclose(a.V[10000:], np.broadcast_to(a.V[10000], a.V[10000:].shape), atol=1e-12)
    assert a.V[10000, 0, 0] == pytest.approx(0.5 * np.cosh(2 * g * 100), rel=1e-10)


def test_full_model_mechanical_rates():
    for r, factor in ((0.0, 1.0), (0.2, 1.4918)):
        p = SystemParams(g=0.15, G=0.15, r=r, delta_c=3.5)
        A, D = full_model(p, None, 2e-3, 1e-5, 1e-3, N_b=10)
        assert -A[2, 2] == pytest.approx(factor * 1e-5, rel=1e-4)
        assert -A[3, 3] == pytest.approx(factor * 1e-5, rel=1e-4)
        assert D[2, 2] == pytest.approx(factor * 1e-5 * 21, rel=1e-4)
    with pytest.raises(ValueError):
        full_model(p, None, -1.0, 0.0, 0.0)


def test_full_model_decoupled_relaxes_to_thermal():
    p = SystemParams(g=0.0, G=0.0, r=0.0, delta_c=3.5)
    A, D = full_model(p, -3.5, 0.2, 0.2, 0.2, N_b=10)
    traj = full_propagate(A, D, uniform_grid(100, 0.01))
    assert traj.V[-1, 2, 2] == pytest.approx(10.5, rel=1e-6)
    assert traj.V[-1, 0, 0] == pytest.approx(0.5, rel=1e-9)
    np.testing.assert_array_equal(traj.V[0], vacuum(6))


def test_full_model_physical_and_symmetric(fig2_params):
    A, D = full_model(fig2_params, None, 2e-3, 1e-5, 1e-3, N_b=10)
    traj = full_propagate(A, D, uniform_grid(50, 0.01))
    assert np.max(np.abs(traj.V - np.swapaxes(traj.V, 1, 2))) <= 1e-9
    assert all(is_physical(V) for V in traj.V[::100])
