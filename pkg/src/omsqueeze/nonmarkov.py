"""Non-Markovian Heisenberg-Langevin dynamics with Lorentzian memory kernels.

The operator vector ``O = (a, c^dag)`` obeys

    dO/dt = T(t) O - int_0^t F(t - s) O(s) ds + eps_in(t),

with ``T = i g_eff [[0, -e^{i theta}], [e^{-i theta}, 0]]`` and
``F = diag(f_a, f_c^*)``.  Writing ``O(t) = U(t) O(0) + V(t)`` the propagator
``U`` solves the homogeneous equation and the noise response is
``V(t) = int_0^t U(t - s) eps_in(s) ds``.

Because each Lorentzian kernel is ``pi gamma lam exp(-lam t)``, every memory
integral can be carried by an auxiliary variable ``W' = -lam W + u``.  This
gives a closed local linear system for ``U`` and an O(N) recursion for the
noise correlators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.signal import lfilter

from .analysis import optimal_angle
from .covariance import CovarianceTrajectory, vacuum
from .drive import DriveSchedule
from .model import SystemParams, effective_coupling
from .spectra import LorentzianBath, markovian_rate, memory_kernel, spectral_density
from .stepper import SolverError, check_uniform, propagate_affine
from .markov import _lyapunov_run

__all__ = [
    "GreensFunction",
    "NoiseCovariance",
    "DriveSchedule",
    "GridTooCoarseError",
    "drive_matrix",
    "solve_greens",
    "volterra_greens",
    "noise_covariance",
    "spectral_noise_covariance",
    "assemble_cm",
    "nmhl_run",
    "embedding_run",
]


class GridTooCoarseError(SolverError):
    """Halving the step changed the solution by more than the tolerance."""


def drive_matrix(g_eff: float, theta: float = 0.0) -> np.ndarray:
    e = np.exp(1j * theta)
    return 1j * g_eff * np.array([[0.0, -e], [1.0 / e, 0.0]])


@dataclass(frozen=True)
class GreensFunction:
    """Propagator ``U(t)`` on a uniform grid; ``u`` has shape ``(len(t), 2, 2)``."""

    t: np.ndarray
    u: np.ndarray
    theta: float = 0.0

    @property
    def u11(self) -> np.ndarray:
        return self.u[:, 0, 0]

    @property
    def u12(self) -> np.ndarray:
        return self.u[:, 0, 1]

    @property
    def u21(self) -> np.ndarray:
        return self.u[:, 1, 0]

    @property
    def u22(self) -> np.ndarray:
        return self.u[:, 1, 1]

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    def index(self, t: float) -> int:
        i = int(round(t / self.dt)) if self.dt else 0
        if i < 0 or i >= self.t.size or abs(self.t[i] - t) > 1e-9 * max(1.0, self.dt):
            raise ValueError(f"t={t} is not on the Green's-function grid")
        return i


def _auxiliary_generator(g_eff, theta, bath_a, bath_c) -> np.ndarray:
    # state: u11 u12 u21 u22 | wa1 wa2 | wc1 wc2   (w: kernel-weighted history of a row)
    T = drive_matrix(g_eff, theta)
    Ka, Kc = bath_a.kernel_amplitude, bath_c.kernel_amplitude
    L = np.zeros((8, 8), complex)
    for col in range(2):
        r1, r2 = col, 2 + col
        L[r1, r1] += T[0, 0]
        L[r1, r2] += T[0, 1]
        L[r2, r1] += T[1, 0]
        L[r2, r2] += T[1, 1]
        L[r1, 4 + col] = -Ka
        L[r2, 6 + col] = -Kc
        L[4 + col, 4 + col] = -bath_a.lam
        L[4 + col, r1] = 1.0
        L[6 + col, 6 + col] = -bath_c.lam
        L[6 + col, r2] = 1.0
    return L


def _auxiliary_greens(schedule, bath_a, bath_c, t, theta) -> np.ndarray:
    y0 = np.zeros(8, complex)
    y0[0] = y0[3] = 1.0
    out = propagate_affine(
        lambda tt: (_auxiliary_generator(schedule.coupling(tt), theta, bath_a, bath_c), None),
        y0,
        t,
        schedule.breakpoints,
    )
    return out[:, :4].reshape(-1, 2, 2)


def volterra_greens(
    schedule: DriveSchedule,
    kernel_a: Callable[[np.ndarray], np.ndarray],
    kernel_c: Callable[[np.ndarray], np.ndarray],
    t_grid: Sequence[float],
    theta: float = 0.0,
) -> GreensFunction:
    """Trapezoidal product-integration solve of the Dyson equation for arbitrary kernels.

    ``kernel_a`` and ``kernel_c`` map a time array to ``f_a(t)`` and ``f_c(t)``.
    Cost is O(N^2) in the number of grid points.
    """
    t, h = check_uniform(t_grid)
    n = t.size
    fa = np.asarray(kernel_a(t), complex)
    fc = np.conj(np.asarray(kernel_c(t), complex))
    U = np.zeros((n, 2, 2), complex)
    U[0] = np.eye(2)
    Z = np.zeros((2, 2), complex)
    F0 = np.diag([fa[0], fc[0]])
    eye = np.eye(2)
    for k in range(n - 1):
        T = drive_matrix(schedule.coupling(t[k]), theta)
        # history part of the memory integral at t[k+1], trapezoid weights
        zp = np.empty((2, 2), complex)
        zp[0] = 0.5 * fa[k + 1] * U[0, 0] + fa[k:0:-1] @ U[1 : k + 1, 0]
        zp[1] = 0.5 * fc[k + 1] * U[0, 1] + fc[k:0:-1] @ U[1 : k + 1, 1]
        zp *= h
        lhs = eye - 0.5 * h * T + 0.25 * h * h * F0
        rhs = U[k] + 0.5 * h * (T @ U[k] - Z) - 0.5 * h * zp
        U[k + 1] = np.linalg.solve(lhs, rhs)
        Z = zp + 0.5 * h * F0 @ U[k + 1]
    if not np.all(np.isfinite(U)):
        raise SolverError(f"Volterra solve diverged at dt={h:g}; retry with dt={h / 2:g}")
    return GreensFunction(t, U, theta)


def solve_greens(
    schedule: DriveSchedule,
    bath_a: LorentzianBath,
    bath_c: LorentzianBath,
    t_grid: Sequence[float],
    theta: float = 0.0,
    method: str = "auxiliary",
    refine_tol: float | None = 1e-6,
) -> GreensFunction:
    """Propagator of the non-Markovian Heisenberg-Langevin equation with ``U(0) = I``.

    ``method="auxiliary"`` integrates the exact local embedding of the exponential
    kernels with RK4; ``method="volterra"`` uses trapezoidal product integration of
    the memory term.  With ``refine_tol`` set, the solve is repeated at half the
    step and ``GridTooCoarseError`` is raised if the two disagree by more than
    ``refine_tol`` relative to ``max |U|``.
    """
    t, h = check_uniform(t_grid)
    schedule.validate(t)

    def run(grid):
        if method == "auxiliary":
            return _auxiliary_greens(schedule, bath_a, bath_c, grid, theta)
        if method == "volterra":
            return volterra_greens(
                schedule,
                lambda s: memory_kernel(bath_a, s),
                lambda s: memory_kernel(bath_c, s),
                grid,
                theta,
            ).u
        raise ValueError(f"unknown method {method!r}")

    U = run(t)
    if refine_tol is not None and t.size > 1:
        fine = run(np.arange(2 * (t.size - 1) + 1) * (h / 2))
        err = np.max(np.abs(fine[::2] - U)) / max(1.0, float(np.max(np.abs(U))))
        if err > refine_tol:
            raise GridTooCoarseError(
                f"dt={h:g} vs dt/2 differ by {err:.2e} > {refine_tol:.1e}; refine the grid"
            )
    return GreensFunction(t, U, theta)


@dataclass(frozen=True)
class NoiseCovariance:
    """Second moments of the noise response ``V = (V_1, V_2)`` at grid times ``t``.

    ``v1v1d`` is ``<V_1 V_1^dag>``, ``v2dv1`` is ``<V_2^dag V_1>`` and so on; the
    remaining orderings are complex conjugates of the stored cross terms.
    """

    t: np.ndarray
    v1v1d: np.ndarray
    v1dv1: np.ndarray
    v2v2d: np.ndarray
    v2dv2: np.ndarray
    v1v2d: np.ndarray
    v2dv1: np.ndarray

    @property
    def v1dv2(self) -> np.ndarray:
        return np.conj(self.v2dv1)

    @property
    def v2v1d(self) -> np.ndarray:
        return np.conj(self.v1v2d)

    def take(self, idx) -> "NoiseCovariance":
        return NoiseCovariance(*(np.atleast_1d(getattr(self, f)[idx]) for f in self.__dataclass_fields__))


def _history(u: np.ndarray, lam: float, h: float) -> np.ndarray:
    # trapezoid of int_0^t exp(-lam (t - x)) u(x) dx, carried as a running sum
    a = math.exp(-lam * h)
    x = np.empty_like(u)
    x[0] = 0.0
    x[1:] = 0.5 * h * (a * u[:-1] + u[1:])
    return lfilter([1.0], [1.0, -a], x)


def _double_convolution(p, Kp, q, Kq, t) -> np.ndarray:
    # I(t) = int int_[0,t]^2 p(x) k(x - y) q*(y);  dI/dt = p (k*q)^* + q^* (k*p)
    rate = p * np.conj(Kq) + np.conj(q) * Kp
    return cumulative_trapezoid(rate, t, initial=0.0)


def noise_covariance(
    U: GreensFunction,
    bath_a: LorentzianBath,
    bath_c: LorentzianBath,
    t: float | None = None,
) -> NoiseCovariance:
    """Noise correlators as double time convolutions with the exponential kernels.

    The a-bath drives the first column of ``U`` and the c-bath the second, so
    e.g. ``<V_1 V_1^dag> = (n_a + 1) I_a[u11, u11] + n_c I_c[u12, u12]`` with
    ``I_o[p, q] = int int p(x) k_o(x - y) q^*(y)`` over ``[0, t]^2``.  The inner
    integral is a running exponential sum, so the whole grid costs O(N).
    """
    if t is not None:
        idx = U.index(t)
    tg = U.t
    if tg.size == 1:
        zero = np.zeros(1)
        return NoiseCovariance(tg, zero, zero, zero, zero, zero.astype(complex), zero.astype(complex))
    h = U.dt
    Ka, Kc = bath_a.kernel_amplitude, bath_c.kernel_amplitude
    u11, u12, u21, u22 = U.u11, U.u12, U.u21, U.u22
    P11 = Ka * _history(u11, bath_a.lam, h)
    P21 = Ka * _history(u21, bath_a.lam, h)
    P12 = Kc * _history(u12, bath_c.lam, h)
    P22 = Kc * _history(u22, bath_c.lam, h)

    Ia_11 = _double_convolution(u11, P11, u11, P11, tg).real
    Ia_21 = _double_convolution(u21, P21, u21, P21, tg).real
    Ia_x = _double_convolution(u11, P11, u21, P21, tg)
    Ic_12 = _double_convolution(u12, P12, u12, P12, tg).real
    Ic_22 = _double_convolution(u22, P22, u22, P22, tg).real
    Ic_x = _double_convolution(u12, P12, u22, P22, tg)

    na, nc = bath_a.n_bar, bath_c.n_bar
    out = NoiseCovariance(
        tg,
        v1v1d=(na + 1) * Ia_11 + nc * Ic_12,
        v1dv1=na * Ia_11 + (nc + 1) * Ic_12,
        v2v2d=(na + 1) * Ia_21 + nc * Ic_22,
        v2dv2=na * Ia_21 + (nc + 1) * Ic_22,
        v1v2d=(na + 1) * Ia_x + nc * Ic_x,
        v2dv1=na * Ia_x + (nc + 1) * Ic_x,
    )
    return out if t is None else out.take(idx)


def spectral_noise_covariance(
    U: GreensFunction,
    bath_a: LorentzianBath,
    bath_c: LorentzianBath,
    t: float,
    omega: np.ndarray,
) -> NoiseCovariance:
    """Frequency-domain evaluation of the noise correlators at a single time.

    Uses ``U~_kj(w) = int_0^t U_kj(t - s) exp(i (-1)^j w s) ds`` weighted by the
    spectral densities on the supplied detuning grid.  Intended as a cross-check
    on coarse grids; cost is O(len(omega) * N).
    """
    n = U.index(t)
    s = U.t[: n + 1]
    w = np.asarray(omega, float)
    # U(t - s) on the grid is U[n - j]
    rev = U.u[n::-1] if n > 0 else U.u[:1]
    ph_minus = np.exp(-1j * np.outer(w, s))
    ph_plus = np.conj(ph_minus)

    def tilde(k, j, ph):
        return trapezoid(rev[:, k, j][None, :] * ph, s, axis=1) if n > 0 else np.zeros(w.size, complex)

    U11, U21 = tilde(0, 0, ph_minus), tilde(1, 0, ph_minus)
    U12, U22 = tilde(0, 1, ph_plus), tilde(1, 1, ph_plus)
    Ja, Jc = spectral_density(bath_a, w), spectral_density(bath_c, w)
    na, nc = bath_a.n_bar, bath_c.n_bar

    def integ(f):
        return trapezoid(f, w)

    a11, c12 = integ(Ja * np.abs(U11) ** 2), integ(Jc * np.abs(U12) ** 2)
    a21, c22 = integ(Ja * np.abs(U21) ** 2), integ(Jc * np.abs(U22) ** 2)
    ax, cx = integ(Ja * U11 * np.conj(U21)), integ(Jc * U12 * np.conj(U22))
    one = lambda x: np.atleast_1d(x)  # noqa: E731
    return NoiseCovariance(
        np.atleast_1d(U.t[n]),
        one((na + 1) * a11 + nc * c12),
        one(na * a11 + (nc + 1) * c12),
        one((na + 1) * a21 + nc * c22),
        one(na * a21 + (nc + 1) * c22),
        one((na + 1) * ax + nc * cx),
        one(na * ax + (nc + 1) * cx),
    )


def assemble_cm(U: GreensFunction, N: NoiseCovariance, theta: float | None = None) -> CovarianceTrajectory:
    """4x4 covariance matrices in ``(X_a, Y_a, X_c, Y_c)`` from a vacuum initial state."""
    theta = U.theta if theta is None else theta
    idx = np.array([U.index(tt) for tt in N.t])
    u11, u12, u21, u22 = U.u11[idx], U.u12[idx], U.u21[idx], U.u22[idx]

    v11 = 0.5 * (np.abs(u11) ** 2 + np.abs(u12) ** 2 + N.v1v1d + N.v1dv1)
    v44 = 0.5 * (np.abs(u21) ** 2 + np.abs(u22) ** 2 + N.v2v2d + N.v2dv2)
    z = u11 * np.conj(u21) + np.conj(u22) * u12 + N.v1v2d + N.v2dv1
    # (e^{-i theta} z - c.c.) / 4i
    v14 = 0.5 * (np.exp(-1j * theta) * z).imag

    V = np.zeros((idx.size, 4, 4))
    V[:, 0, 0] = V[:, 1, 1] = v11
    V[:, 2, 2] = V[:, 3, 3] = v44
    V[:, 0, 3] = V[:, 3, 0] = v14
    V[:, 1, 2] = V[:, 2, 1] = v14
    return CovarianceTrajectory(np.asarray(N.t, float), V, theta)


def _embedding_drift(g_eff, bath_a, bath_c) -> np.ndarray:
    # (X_a, Y_a, X_c, Y_c, X_ma, Y_ma, X_mc, Y_mc): one damped auxiliary mode per bath
    A = np.zeros((8, 8))
    A[:4, :4] = -np.array(
        [[0, 0, 0, g_eff], [0, 0, g_eff, 0], [0, g_eff, 0, 0], [g_eff, 0, 0, 0]], float
    )
    for sys_x, aux_x, bath in ((0, 4, bath_a), (2, 6, bath_c)):
        w = math.sqrt(bath.kernel_amplitude)
        A[sys_x, aux_x + 1] = w
        A[sys_x + 1, aux_x] = -w
        A[aux_x, sys_x + 1] = w
        A[aux_x + 1, sys_x] = -w
        A[aux_x, aux_x] = A[aux_x + 1, aux_x + 1] = -bath.lam
    return A


def embedding_run(
    schedule: DriveSchedule,
    bath_a: LorentzianBath,
    bath_c: LorentzianBath,
    t_grid: Sequence[float],
    theta: float = 0.0,
) -> CovarianceTrajectory:
    """Exact two-time dynamics via one auxiliary damped mode per Lorentzian bath.

    A mode coupled with strength ``sqrt(pi gamma lam)`` to an auxiliary oscillator
    that is itself damped at rate ``lam`` by white thermal noise reproduces the
    kernel ``pi gamma lam exp(-lam |t - s|)`` and the ``(n, n + 1)`` noise weights
    exactly.  The resulting 8x8 Lyapunov problem stays valid for time-dependent
    drives, where the one-time convolution ``U(t - s)`` does not.
    """
    t = np.asarray(t_grid, float)
    schedule.validate(t)
    D = np.zeros((8, 8))
    V0 = vacuum(8)
    for aux_x, bath in ((4, bath_a), (6, bath_c)):
        D[aux_x, aux_x] = D[aux_x + 1, aux_x + 1] = bath.lam * (2 * bath.n_bar + 1)
        V0[aux_x, aux_x] = V0[aux_x + 1, aux_x + 1] = bath.n_bar + 0.5
    V = _lyapunov_run(
        lambda tt: _embedding_drift(schedule.coupling(tt), bath_a, bath_c), D, V0, t, schedule.breakpoints
    )
    return CovarianceTrajectory(t, V[:, :4, :4], theta, info={"solver": "embedding", "full": V})


def nmhl_run(
    params: SystemParams,
    bath_a: LorentzianBath,
    bath_c: LorentzianBath,
    t_grid: Sequence[float],
    schedule: DriveSchedule | None = None,
    method: str = "greens",
    greens_method: str = "auxiliary",
    refine_tol: float | None = None,
) -> CovarianceTrajectory:
    """Covariance trajectory of the effective model in structured reservoirs.

    ``method="greens"`` runs propagator -> noise correlators -> covariance matrix.
    The noise response uses the one-time propagator ``U(t - s)`` over the whole
    history, including across a drive switch-off.  ``method="embedding"``
    propagates the exact two-time dynamics (see :func:`embedding_run`).  The two
    agree whenever the drive is constant.

    The trajectory carries the squeezing-operator angle built from the
    broad-band rates ``kappa = pi gamma``.
    """
    g_eff = effective_coupling(params)
    schedule = DriveSchedule(g_eff) if schedule is None else schedule
    t = np.asarray(t_grid, float)
    if method == "greens":
        U = solve_greens(schedule, bath_a, bath_c, t, params.theta, greens_method, refine_tol)
        traj = assemble_cm(U, noise_covariance(U, bath_a, bath_c), params.theta)
    elif method == "embedding":
        traj = embedding_run(schedule, bath_a, bath_c, t, params.theta)
    else:
        raise ValueError(f"unknown method {method!r}")
    angle = optimal_angle(schedule.g_eff, markovian_rate(bath_a), markovian_rate(bath_c))
    info = dict(traj.info, solver=method, g_eff=schedule.g_eff, tau_off=schedule.tau_off)
    return CovarianceTrajectory(traj.t, traj.V, params.theta, angle, info)
