"""Markovian covariance dynamics of the effective two-mode and full three-mode models.

The effective model uses the quadrature ordering ``(X_a, Y_a, X_c, Y_c)``; the
full model uses ``(X_a, Y_a, X_b, Y_b, X_c, Y_c)``.  Both obey the Lyapunov
equation ``dV/dt = A V + V A^T + D`` and are integrated with fixed-step RK4.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .covariance import CovarianceTrajectory, vacuum
from .drive import DriveSchedule
from .model import SystemParams, transition_matrix
from .spectra import LorentzianBath, markovian_rate
from .stepper import propagate_affine

__all__ = [
    "Stability",
    "MarkovModel",
    "drift_matrix",
    "diffusion_matrix",
    "stability",
    "propagate_cm",
    "analytic_variance",
    "full_model",
    "full_propagate",
    "lyapunov_residual",
    "DEFAULT_DT",
]

DEFAULT_DT = 0.01


class Stability(str, enum.Enum):
    STEADY = "steady"
    UNSTEADY = "unsteady"


def drift_matrix(g_eff: float, kappa_a: float, kappa_c: float) -> np.ndarray:
    return -np.array(
        [
            [kappa_a, 0.0, 0.0, g_eff],
            [0.0, kappa_a, g_eff, 0.0],
            [0.0, g_eff, kappa_c, 0.0],
            [g_eff, 0.0, 0.0, kappa_c],
        ]
    )


def diffusion_matrix(kappa_a: float, kappa_c: float, N_a: float = 0.0, N_c: float = 0.0) -> np.ndarray:
    da = kappa_a * (2 * N_a + 1)
    dc = kappa_c * (2 * N_c + 1)
    return np.diag([da, da, dc, dc])


@dataclass(frozen=True)
class MarkovModel:
    g_eff: float
    kappa_a: float
    kappa_c: float
    N_a: float = 0.0
    N_c: float = 0.0

    def __post_init__(self):
        if self.kappa_a < 0 or self.kappa_c < 0:
            raise ValueError("decay rates must be non-negative")
        if self.N_a < 0 or self.N_c < 0:
            raise ValueError("thermal occupations must be non-negative")

    @classmethod
    def from_baths(cls, g_eff: float, bath_a: LorentzianBath, bath_c: LorentzianBath) -> "MarkovModel":
        """Broad-band limit of two Lorentzian reservoirs (``kappa = pi * gamma``)."""
        return cls(g_eff, markovian_rate(bath_a), markovian_rate(bath_c), bath_a.n_bar, bath_c.n_bar)

    @property
    def drift(self) -> np.ndarray:
        return drift_matrix(self.g_eff, self.kappa_a, self.kappa_c)

    @property
    def diffusion(self) -> np.ndarray:
        return diffusion_matrix(self.kappa_a, self.kappa_c, self.N_a, self.N_c)

    @property
    def stability(self) -> Stability:
        return stability(self.g_eff, self.kappa_a, self.kappa_c)


def stability(g_eff: float, kappa_a: float, kappa_c: float) -> Stability:
    """Steady iff ``g_eff^2 < kappa_a kappa_c``; the boundary counts as unsteady."""
    return Stability.STEADY if g_eff**2 < kappa_a * kappa_c else Stability.UNSTEADY


def _lyapunov_generator(A: np.ndarray) -> np.ndarray:
    # row-major vec: vec(A V) = (A kron I) vec V, vec(V A^T) = (I kron A) vec V
    d = A.shape[0]
    eye = np.eye(d)
    return np.kron(A, eye) + np.kron(eye, A)


def _lyapunov_run(drift_at, D: np.ndarray, V0: np.ndarray, t_grid, breakpoints=()) -> np.ndarray:
    d = D.shape[0]
    b = D.reshape(-1)
    out = propagate_affine(
        lambda t: (_lyapunov_generator(drift_at(t)), b),
        np.asarray(V0, float).reshape(-1),
        t_grid,
        breakpoints,
    )
    V = out.reshape(-1, d, d)
    return 0.5 * (V + np.swapaxes(V, 1, 2))


def propagate_cm(
    model: MarkovModel,
    t_grid: Sequence[float],
    V0: np.ndarray | None = None,
    schedule: DriveSchedule | None = None,
) -> CovarianceTrajectory:
    """Integrate the effective 4x4 Lyapunov equation from ``V0`` (vacuum by default).

    With a ``schedule`` the squeezing coupling follows ``schedule.coupling(t)``
    instead of ``model.g_eff``.
    """
    t = np.asarray(t_grid, float)
    V0 = vacuum(4) if V0 is None else np.asarray(V0, float)
    if schedule is not None:
        schedule.validate(t)

        def drift_at(tt):
            return drift_matrix(schedule.coupling(tt), model.kappa_a, model.kappa_c)

        bps = schedule.breakpoints
    else:
        A = model.drift

        def drift_at(tt):
            return A

        bps = ()
    V = _lyapunov_run(drift_at, model.diffusion, V0, t, bps)
    return CovarianceTrajectory(t, V, info={"solver": "rk4-lyapunov", "dim": 4})


def analytic_variance(g_eff, kappa_a, kappa_c, N_a, N_c, t):
    """Closed-form variance of the decaying joint quadrature, from vacuum at ``t = 0``.

    ``Delta X(t) = 1/2 + 2C exp(-(Omega + kappa_a + kappa_c) t) - 2C`` with
    ``Omega = sqrt(4 g_eff^2 + (kappa_a - kappa_c)^2)`` and the mixing angle on the
    ``cos 2phi = (kappa_a - kappa_c)/Omega`` branch.
    """
    Om = math.sqrt(4 * g_eff**2 + (kappa_a - kappa_c) ** 2)
    k_plus = kappa_a * (2 * N_a + 1) + kappa_c * (2 * N_c + 1)
    k_minus = kappa_a * (2 * N_a + 1) - kappa_c * (2 * N_c + 1)
    rate = Om + kappa_a + kappa_c
    if rate == 0:
        return np.full_like(np.asarray(t, float), 0.5) if np.ndim(t) else 0.5
    cos2phi = (kappa_a - kappa_c) / Om if Om > 0 else 1.0
    C = 0.25 - (k_plus + cos2phi * k_minus) / (4 * rate)
    out = 0.5 + 2 * C * np.exp(-rate * np.asarray(t, float)) - 2 * C
    return out if np.ndim(out) else float(out)


def full_model(
    params: SystemParams,
    Delta_a: float | None,
    kappa_a: float,
    kappa_b: float,
    kappa_c: float,
    N_a: float = 0.0,
    N_b: float = 0.0,
    N_c: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Drift and diffusion of the three-mode model.

    The mechanical damping and its noise are enlarged by ``exp(2r)`` by the
    parametric amplifier.
    """
    if min(kappa_a, kappa_b, kappa_c) < 0:
        raise ValueError("decay rates must be non-negative")
    amp = math.exp(2 * params.r)
    kb = amp * kappa_b
    M = transition_matrix(params, Delta_a)
    K = np.diag([kappa_a, kappa_a, kb, kb, kappa_c, kappa_c])
    D = np.diag(
        [
            kappa_a * (2 * N_a + 1),
            kappa_a * (2 * N_a + 1),
            kb * (2 * N_b + 1),
            kb * (2 * N_b + 1),
            kappa_c * (2 * N_c + 1),
            kappa_c * (2 * N_c + 1),
        ]
    )
    return M - K, D


def full_propagate(
    drift: np.ndarray,
    diffusion: np.ndarray,
    t_grid: Sequence[float],
    V0: np.ndarray | None = None,
) -> CovarianceTrajectory:
    t = np.asarray(t_grid, float)
    V0 = vacuum(6) if V0 is None else np.asarray(V0, float)
    V = _lyapunov_run(lambda tt: drift, diffusion, V0, t)
    return CovarianceTrajectory(t, V, info={"solver": "rk4-lyapunov", "dim": 6})


def lyapunov_residual(A: np.ndarray, V: np.ndarray, D: np.ndarray) -> float:
    return float(np.max(np.abs(A @ V + V @ A.T + D)))
