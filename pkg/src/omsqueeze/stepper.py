"""Fixed-step classical RK4 for linear affine systems ``y' = L y + b``.

For a constant generator the four RK4 stages collapse to a single matrix
update, so one step is ``y <- R y + S b`` with ``R`` the fourth-order Taylor
polynomial of ``exp(hL)``.  This is algebraically identical to running the
stages one by one, only cheaper.  Piecewise-constant generators (drive
switch-off) are handled by swapping the step matrices between segments.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

OVERFLOW_GUARD = 1e150


class SolverError(RuntimeError):
    """Numerical failure inside a propagator."""


def rk4_step_matrices(L: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(R, S)`` such that one RK4 step of ``y' = L y + b`` is ``R y + S b``."""
    n = L.shape[0]
    eye = np.eye(n, dtype=L.dtype)
    hL = h * L
    hL2 = hL @ hL
    hL3 = hL2 @ hL
    R = eye + hL + hL2 / 2 + hL3 / 6 + hL3 @ hL / 24
    S = h * (eye + hL / 2 + hL2 / 6 + hL3 / 24)
    return R, S


def uniform_grid(t_max: float, dt: float) -> np.ndarray:
    """Uniform grid ``0, dt, ..., t_max``; ``t_max`` must be a multiple of ``dt``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    n = int(round(t_max / dt))
    if abs(n * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError(f"t_max={t_max} is not a multiple of dt={dt}")
    return np.arange(n + 1) * dt


def check_uniform(t_grid: Sequence[float]) -> tuple[np.ndarray, float]:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("time grid must be a non-empty 1-d array")
    if t[0] != 0.0:
        raise ValueError("time grid must start at t=0")
    if t.size == 1:
        return t, 0.0
    steps = np.diff(t)
    h = float(steps.mean())
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-9 * max(h, 1.0):
        raise ValueError("time grid must be uniform and increasing")
    return t, h


def propagate_affine(
    generator: Callable[[float], tuple[np.ndarray, np.ndarray | None]],
    y0: np.ndarray,
    t_grid: Sequence[float],
    breakpoints: Sequence[float] = (),
) -> np.ndarray:
    """Integrate ``y' = L(t) y + b(t)`` with piecewise-constant ``L``, ``b``.

    ``generator(t)`` returns ``(L, b)`` valid on the segment containing ``t``
    (``b`` may be ``None``).  A step ``[t_n, t_n+1]`` uses the generator at its
    left end, so a breakpoint takes effect from the first grid point at or
    after it.  Returns an array of shape ``(len(t_grid),) + y0.shape``.
    """
    t, h = check_uniform(t_grid)
    L0, _ = generator(0.0)
    dtype = np.result_type(np.asarray(y0), np.asarray(L0), float)
    y = np.array(y0, dtype=dtype)
    out = np.empty((t.size,) + y.shape, dtype=dtype)
    out[0] = y
    if t.size == 1:
        return out

    bps = sorted(float(b) for b in breakpoints)
    cache: dict[int, tuple[np.ndarray, np.ndarray | None]] = {}

    def step_for(tn: float):
        seg = sum(1 for b in bps if tn >= b - 1e-9 * h)
        if seg not in cache:
            L, b = generator(tn)
            R, S = rk4_step_matrices(np.asarray(L), h)
            cache[seg] = (R, None if b is None else S @ np.asarray(b))
        return cache[seg]

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(t.size - 1):
            R, c = step_for(t[n])
            y = R @ y if c is None else R @ y + c
            out[n + 1] = y

    if not np.all(np.isfinite(out)) or np.max(np.abs(out)) > OVERFLOW_GUARD:
        raise SolverError(
            f"propagation diverged at dt={h:g}; retry with a smaller step, e.g. dt={h / 2:g}"
        )
    return out
