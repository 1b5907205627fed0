"""Effective optical-microwave squeezing model of the electro-optomechanical system.

All quantities are in units of the effective mechanical frequency
``tilde_omega_b = 1``; times are in units of ``1 / tilde_omega_b``.

The quadrature ordering of the three-mode system is
``(X_a, Y_a, X_b, Y_b, X_c, Y_c)`` with the optical and microwave quadratures
referenced to the drive phases ``alpha`` and ``phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "SystemParams",
    "EffectiveModel",
    "Criterion",
    "ValidityReport",
    "SplittingResult",
    "InvalidDetuningError",
    "UnstableDriveError",
    "GridResolutionError",
    "effective_coupling",
    "energy_shift",
    "effective_model",
    "mpa_frame",
    "validity_check",
    "transition_matrix",
    "eigen_splitting",
    "default_scan",
]

_DEGENERATE_TOL = 1e-12


class InvalidDetuningError(ValueError):
    """Microwave detuning makes the second-order denominators vanish."""


class UnstableDriveError(ValueError):
    """Parametric drive outside the domain where the squeezed frame exists."""


class GridResolutionError(ValueError):
    """Detuning scan too coarse (or too narrow) to resolve the anticrossing."""


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs in units of the effective mechanical frequency.

    ``delta_a`` defaults to the near-opposite condition ``-delta_c + delta``
    where ``delta`` is the second-order energy shift.
    """

    g: float
    G: float
    r: float
    delta_c: float
    delta_a: float | None = None
    alpha: float = 0.0
    phi: float = 0.0
    tilde_omega_b: float = 1.0

    def __post_init__(self):
        if self.g < 0 or self.G < 0:
            raise ValueError("couplings g and G must be non-negative")
        if self.r < 0:
            raise ValueError("MPA parameter r must be non-negative")
        if self.tilde_omega_b != 1.0:
            raise ValueError("tilde_omega_b is the unit of frequency and must equal 1")
        if not self.delta_c > self.tilde_omega_b:
            raise InvalidDetuningError(
                f"delta_c={self.delta_c} must exceed tilde_omega_b={self.tilde_omega_b}"
            )

    @property
    def theta(self) -> float:
        """Total drive phase ``alpha + phi``."""
        return self.alpha + self.phi

    @property
    def resolved_delta_a(self) -> float:
        if self.delta_a is not None:
            return float(self.delta_a)
        return -self.delta_c + energy_shift(self)


def _denominator(params: SystemParams) -> float:
    den = params.delta_c**2 - params.tilde_omega_b**2
    if abs(den) < _DEGENERATE_TOL * max(1.0, params.delta_c**2):
        raise InvalidDetuningError(
            f"|delta_c^2 - tilde_omega_b^2| = {abs(den):.3e} is degenerate"
        )
    return den


def effective_coupling(params: SystemParams) -> float:
    """Mechanically mediated two-mode-squeezing rate ``g_eff``."""
    w = params.tilde_omega_b
    return 2.0 * w * params.g * params.G * math.exp(2 * params.r) / _denominator(params)


def energy_shift(params: SystemParams) -> float:
    """Second-order shift ``delta = Delta_a + Delta_c`` required for resonance.

    Negative whenever ``delta_c > tilde_omega_b``.
    """
    w = params.tilde_omega_b
    return -2.0 * (params.G**2 + params.g**2) * math.exp(2 * params.r) * w / _denominator(params)


def mpa_frame(Delta_b: float, Omega_b: float) -> tuple[float, float]:
    """Squeezed-frame parameters ``(r, tilde_omega_b)`` of the parametrically driven mechanics.

    ``tanh(2r) = 2 Omega_b / Delta_b`` and ``tilde_omega_b = Delta_b / cosh(2r)``.
    """
    if Delta_b <= 0:
        raise ValueError("mechanical detuning Delta_b must be positive")
    x = 2.0 * Omega_b / Delta_b
    if abs(x) >= 1.0:
        raise UnstableDriveError(
            f"|2 Omega_b / Delta_b| = {abs(x):.4g} >= 1: parametric drive is unstable"
        )
    r = 0.5 * math.atanh(x)
    return r, Delta_b / math.cosh(2 * r)


@dataclass(frozen=True)
class Criterion:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class ValidityReport:
    criteria: tuple[Criterion, ...]

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.criteria)

    def __getitem__(self, name: str) -> Criterion:
        for c in self.criteria:
            if c.name == name:
                return c
        raise KeyError(name)


def validity_check(
    params: SystemParams,
    ratio_threshold: float = 10.0,
    coupling_range: tuple[float, float] = (0.1, 0.3),
    r_max: float = 0.2,
) -> ValidityReport:
    """Check the parameter regime where the effective Hamiltonian is trustworthy.

    Criteria:
      ``coupling_range``  both g and G inside ``coupling_range`` (margin: distance to the
                          nearest bound, negative when outside);
      ``r_max``           r below ``r_max``;
      ``large_detuning``  ``min(|w_b - Delta_a|, |w_b - Delta_c|) / max(g e^r, G e^r)``
                          at least ``ratio_threshold`` (margin: ratio minus threshold).
    """
    eps = 1e-12
    lo, hi = coupling_range
    m_coup = min(params.g - lo, hi - params.g, params.G - lo, hi - params.G)
    m_r = r_max - params.r

    w = params.tilde_omega_b
    try:
        da = params.resolved_delta_a
    except InvalidDetuningError:
        da = -params.delta_c
    gap = min(abs(w - da), abs(w - params.delta_c))
    strength = max(params.g, params.G) * math.exp(params.r)
    ratio = math.inf if strength == 0 else gap / strength

    return ValidityReport(
        (
            Criterion("coupling_range", m_coup >= -eps, m_coup, f"g={params.g}, G={params.G}"),
            Criterion("r_max", m_r >= -eps, m_r, f"r={params.r}"),
            Criterion(
                "large_detuning",
                ratio >= ratio_threshold,
                ratio - ratio_threshold,
                f"ratio={ratio:.6g}",
            ),
        )
    )


@dataclass(frozen=True)
class EffectiveModel:
    g_eff: float
    delta: float
    theta: float
    validity: ValidityReport

    @property
    def valid(self) -> bool:
        return self.validity.valid


def effective_model(params: SystemParams, ratio_threshold: float = 10.0) -> EffectiveModel:
    return EffectiveModel(
        g_eff=effective_coupling(params),
        delta=energy_shift(params),
        theta=params.theta,
        validity=validity_check(params, ratio_threshold=ratio_threshold),
    )


def transition_matrix(params: SystemParams, Delta_a: float | None = None) -> np.ndarray:
    """Real 6x6 generator ``M`` with ``d/dt u = M u`` for ``u = (X_a, Y_a, X_b, Y_b, X_c, Y_c)``."""
    da = params.resolved_delta_a if Delta_a is None else Delta_a
    w = params.tilde_omega_b
    dc = params.delta_c
    ga = 2.0 * params.G * math.exp(params.r)
    gc = 2.0 * params.g * math.exp(params.r)
    return np.array(
        [
            [0.0, da, 0.0, 0.0, 0.0, 0.0],
            [-da, 0.0, -ga, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, w, 0.0, 0.0],
            [-ga, 0.0, -w, 0.0, -gc, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, dc],
            [0.0, 0.0, -gc, 0.0, -dc, 0.0],
        ]
    )


def default_scan(params: SystemParams, half_width: float = 0.1, points: int = 400) -> np.ndarray:
    return np.linspace(-params.delta_c - half_width, -params.delta_c + half_width, points)


@dataclass(frozen=True)
class SplittingResult:
    """Eigen-splitting scan of the three-mode transition matrix.

    ``branches[:, k]`` is the imaginary component of the k-th tracked normalized
    eigenvalue of ``L = -i M``; ``frequencies[:, k]`` is the matching real
    component.  ``g_eff_num`` is half the maximal branch separation.
    """

    delta_a: np.ndarray
    branches: np.ndarray
    frequencies: np.ndarray
    g_eff_num: float
    delta_num: float
    splitting: np.ndarray = field(repr=False)


def _relevant_pair(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lam, vec = np.linalg.eig(M)
    upper = np.flatnonzero(lam.imag > 0)
    if upper.size < 3:
        # Degenerate zero-frequency modes; fall back to the non-negative half-plane.
        upper = np.argsort(-lam.imag)[:3]
    mech = np.abs(vec[2, upper]) ** 2 + np.abs(vec[3, upper]) ** 2
    keep = upper[np.argsort(mech)[:2]]
    return lam[keep], vec[:, keep]


def eigen_splitting(
    params: SystemParams, Delta_a_grid: Sequence[float] | None = None
) -> SplittingResult:
    """Numerical ``(|g_eff|, delta)`` from the anticrossing of the transition-matrix spectrum.

    The two optical/microwave eigenvalue branches are followed across the scan by
    maximal eigenvector overlap.  Inside the squeezing window the branches acquire
    opposite imaginary components ``+-sqrt(g_eff^2 - s^2/4)``, ``s`` being the
    residual detuning, so the squared separation is a downward parabola in
    ``Delta_a``.  Its apex gives ``g_eff`` and its location relative to
    ``-delta_c`` gives ``delta``.
    """
    grid = default_scan(params) if Delta_a_grid is None else np.asarray(Delta_a_grid, float)
    if grid.ndim != 1 or grid.size < 5 or np.any(np.diff(grid) <= 0):
        raise GridResolutionError("Delta_a grid must be increasing with at least 5 points")

    w = params.tilde_omega_b
    lam = np.empty((grid.size, 2), complex)
    prev = None
    for n, da in enumerate(grid):
        vals, vecs = _relevant_pair(transition_matrix(params, da))
        if prev is not None:
            ov = np.abs(prev.conj().T @ vecs)
            if ov[0, 1] + ov[1, 0] > ov[0, 0] + ov[1, 1]:
                vals, vecs = vals[::-1], vecs[:, ::-1]
        lam[n] = vals
        prev = vecs

    ell = -1j * lam / w
    branches = ell.imag
    freqs = ell.real
    sep = np.abs(branches[:, 0] - branches[:, 1])

    tol = 1e-9 * max(1.0, float(np.max(np.abs(freqs))))
    inside = sep > tol
    if not inside.any():
        if params.g > 0 and params.G > 0:
            raise GridResolutionError(
                "no scan point resolves the splitting of a coupled system; refine the grid"
            )
        diff = freqs[:, 0] - freqs[:, 1]
        sign = np.flatnonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) <= 0)
        if sign.size == 0:
            raise GridResolutionError("branches do not cross inside the scan; widen the grid")
        i = sign[0]
        if diff[i] == diff[i + 1]:
            crossing = grid[i]
        else:
            crossing = grid[i] - diff[i] * (grid[i + 1] - grid[i]) / (diff[i + 1] - diff[i])
        return SplittingResult(grid, branches, freqs, 0.0, float(crossing + params.delta_c), sep)

    if inside[0] or inside[-1]:
        raise GridResolutionError("splitting window touches the scan edge; widen the grid")
    s2 = sep**2
    core = s2 >= 0.25 * s2.max()
    if core.sum() < 3:
        raise GridResolutionError(
            f"only {int(inside.sum())} scan points resolve the splitting; refine the grid"
        )
    c2, c1, c0 = np.polyfit(grid[core], s2[core], 2)
    if c2 >= 0:
        raise GridResolutionError("splitting profile is not peaked; refine the grid")
    apex = -c1 / (2 * c2)
    peak = c0 - c1**2 / (4 * c2)
    return SplittingResult(
        grid, branches, freqs, float(0.5 * math.sqrt(peak)), float(apex + params.delta_c), sep
    )
