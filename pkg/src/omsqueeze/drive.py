from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DriveSchedule"]


@dataclass(frozen=True)
class DriveSchedule:
    """Piecewise-constant effective coupling: ``g_eff`` before ``tau_off``, zero after.

    On a time grid the switch-off takes effect from the first grid point at or
    after ``tau_off``.
    """

    g_eff: float
    tau_off: float | None = None

    def __post_init__(self):
        if self.tau_off is not None and self.tau_off < 0:
            raise ValueError("tau_off must be non-negative")

    def coupling(self, t: float) -> float:
        if self.tau_off is not None and t >= self.tau_off - 1e-12:
            return 0.0
        return self.g_eff

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return () if self.tau_off is None else (float(self.tau_off),)

    def validate(self, t_grid) -> None:
        if self.tau_off is None:
            return
        t = np.asarray(t_grid, dtype=float)
        if not (t[0] <= self.tau_off <= t[-1]):
            raise ValueError(
                f"tau_off={self.tau_off} lies outside the simulation window [{t[0]}, {t[-1]}]"
            )
