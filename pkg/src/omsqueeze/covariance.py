"""Quadrature covariance matrices and their time series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CovarianceTrajectory",
    "symplectic_form",
    "symplectic_eigenvalues",
    "is_physical",
    "vacuum",
    "EFFECTIVE_INDICES",
]

# (X_a, Y_a, X_c, Y_c) inside the three-mode ordering (X_a, Y_a, X_b, Y_b, X_c, Y_c)
EFFECTIVE_INDICES = (0, 1, 4, 5)


def vacuum(dim: int) -> np.ndarray:
    return np.eye(dim) / 2


def symplectic_form(n_modes: int) -> np.ndarray:
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n_modes), J)


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix in ``(X_1, Y_1, X_2, Y_2, ...)`` ordering.

    Works on a single matrix or a stack ``(..., 2n, 2n)``; returns the n values
    per matrix in ascending order.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[-1] // 2
    Om = symplectic_form(n)
    ev = np.linalg.eigvals(1j * Om @ V)
    nu = np.sort(np.abs(ev.real), axis=-1)
    # eigenvalues come in +-nu pairs
    return nu[..., ::2]


def is_physical(V: np.ndarray, tol: float = 1e-6) -> bool:
    """Symmetric and every symplectic eigenvalue at least 1/2 (within ``tol``)."""
    V = np.asarray(V, dtype=float)
    if np.max(np.abs(V - np.swapaxes(V, -1, -2))) > 1e-10 * max(1.0, np.max(np.abs(V))):
        return False
    return bool(np.all(symplectic_eigenvalues(V) >= 0.5 - tol))


@dataclass(frozen=True)
class CovarianceTrajectory:
    """Covariance matrices ``V[n]`` at grid times ``t[n]``.

    ``theta`` is the total drive phase ``alpha + phi``; ``mix_angle`` is the
    squeezing-operator angle, when one has been fixed for this run.
    """

    t: np.ndarray
    V: np.ndarray
    theta: float = 0.0
    mix_angle: float | None = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.V.ndim != 3 or self.V.shape[0] != self.t.shape[0]:
            raise ValueError("V must have shape (len(t), d, d)")
        if self.V.shape[1] not in (4, 6, 8):
            raise ValueError("covariance dimension must be 4, 6 or 8")

    @property
    def dim(self) -> int:
        return self.V.shape[1]

    def __len__(self) -> int:
        return self.t.shape[0]

    def index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.t - t)))
        h = self.t[1] - self.t[0] if len(self.t) > 1 else 1.0
        if abs(self.t[i] - t) > 1e-9 * max(1.0, h):
            raise ValueError(f"t={t} is not on the time grid")
        return i

    def at(self, t: float) -> np.ndarray:
        return self.V[self.index(t)]

    def effective(self) -> "CovarianceTrajectory":
        """Restrict to the optical/microwave block ``(X_a, Y_a, X_c, Y_c)``."""
        if self.dim == 4:
            return self
        idx = np.array(EFFECTIVE_INDICES if self.dim == 6 else (0, 1, 2, 3))
        return CovarianceTrajectory(
            self.t, self.V[:, idx][:, :, idx], self.theta, self.mix_angle, dict(self.info)
        )

    def min_symplectic(self) -> np.ndarray:
        return symplectic_eigenvalues(self.V)[:, 0]
