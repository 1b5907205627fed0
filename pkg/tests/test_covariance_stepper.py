import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from omsqueeze.covariance import (
    CovarianceTrajectory,
    is_physical,
    symplectic_eigenvalues,
    vacuum,
)
from omsqueeze.drive import DriveSchedule
from omsqueeze.stepper import SolverError, propagate_affine, rk4_step_matrices, uniform_grid


def test_rk4_matrices_match_stagewise_step():
    rng = np.random.default_rng(1)
    L = rng.normal(size=(5, 5))
    b = rng.normal(size=5)
    y = rng.normal(size=5)
    h = 0.05
    f = lambda v: L @ v + b  # noqa: E731
    k1 = f(y)
    k2 = f(y + h / 2 * k1)
    k3 = f(y + h / 2 * k2)
    k4 = f(y + h * k3)
    ref = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    R, S = rk4_step_matrices(L, h)
    np.testing.assert_allclose(R @ y + S @ b, ref, rtol=1e-13)


def test_uniform_grid():
    t = uniform_grid(1.0, 0.25)
    np.testing.assert_allclose(t, [0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        uniform_grid(1.0, 0.0)
    with pytest.raises(ValueError):
        uniform_grid(1.0, 0.3)


def test_propagate_breakpoint_switch():
    # y' = a y with a switching from 1 to 0 at t = 0.5
    gen = lambda t: (np.array([[1.0 if t < 0.5 else 0.0]]), None)  # noqa: E731
    out = propagate_affine(gen, np.array([1.0]), uniform_grid(1.0, 0.001), breakpoints=(0.5,))
    assert out[-1, 0] == pytest.approx(np.exp(0.5), rel=1e-10)


def test_propagate_overflow_guard():
    gen = lambda t: (np.array([[50.0]]), None)  # noqa: E731
    with pytest.raises(SolverError, match="smaller step"):
        propagate_affine(gen, np.array([1.0]), uniform_grid(20.0, 0.01))


def test_symplectic_eigenvalues_thermal():
    V = np.diag([1.5, 1.5, 0.5, 0.5])
    np.testing.assert_allclose(symplectic_eigenvalues(V), [0.5, 1.5])
    assert is_physical(V)
    assert not is_physical(np.diag([0.2, 0.2, 0.5, 0.5]))
    assert not is_physical(np.array([[0.5, 0.1], [0.0, 0.5]]))


@given(st.floats(0, 2), st.floats(0, 3))
def test_two_mode_squeezed_vacuum_is_pure(r, n):
    c, s = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    V = np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])
    np.testing.assert_allclose(symplectic_eigenvalues(V), [0.5, 0.5], atol=1e-9 * np.cosh(2 * r))
    thermal = (2 * n + 1) * V
    assert is_physical(thermal)


def test_trajectory_access():
    t = np.array([0.0, 0.5, 1.0])
    V = np.stack([vacuum(6)] * 3)
    traj = CovarianceTrajectory(t, V)
    assert traj.effective().dim == 4
    np.testing.assert_array_equal(traj.at(0.5), vacuum(6))
    with pytest.raises(ValueError):
        traj.index(0.3)
    with pytest.raises(ValueError):
        CovarianceTrajectory(t, np.zeros((3, 3, 3)))


def test_drive_schedule():
    s = DriveSchedule(0.01, 300.0)
    assert s.coupling(299.99) == 0.01 and s.coupling(300.0) == 0.0
    assert s.breakpoints == (300.0,)
    s.validate(uniform_grid(1000, 1.0))
    with pytest.raises(ValueError):
        s.validate(uniform_grid(200, 1.0))
    with pytest.raises(ValueError):
        DriveSchedule(0.01, -1.0)
    assert DriveSchedule(0.01).coupling(1e9) == 0.01
