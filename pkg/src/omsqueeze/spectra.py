"""Lorentzian reservoirs centred on the optical or microwave mode frequency."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LorentzianBath",
    "spectral_density",
    "memory_kernel",
    "markovian_rate",
    "thermal_occupation",
]


@dataclass(frozen=True)
class LorentzianBath:
    """Spectral description of one reservoir.

    Attributes:
        gamma: global dissipation rate (peak of the spectral density).
        lam: spectral width; ``1 / lam`` is the memory time.
        n_bar: thermal occupation, taken flat over the narrow support.
        label: attached system mode, ``"a"`` (optical) or ``"c"`` (microwave).
    """

    gamma: float
    lam: float
    n_bar: float = 0.0
    label: str = "a"

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.lam <= 0:
            raise ValueError("spectral width lam must be positive")
        if self.n_bar < 0:
            raise ValueError("n_bar must be non-negative")
        if self.label not in ("a", "c"):
            raise ValueError("label must be 'a' or 'c'")

    @property
    def kernel_amplitude(self) -> float:
        """``f(0) = pi * gamma * lam``."""
        return math.pi * self.gamma * self.lam

    @property
    def kappa(self) -> float:
        return markovian_rate(self)


def spectral_density(bath: LorentzianBath, detuning):
    """``J = gamma lam^2 / ((omega - omega_o)^2 + lam^2)`` at ``detuning = omega - omega_o``."""
    d = np.asarray(detuning, dtype=float)
    out = bath.gamma * bath.lam**2 / (d**2 + bath.lam**2)
    return out if out.ndim else float(out)


def memory_kernel(bath: LorentzianBath, t):
    """Rotating-frame memory kernel ``f(t) = pi gamma lam exp(-lam t)`` for ``t >= 0``.

    Closed form of ``int dw J(w) exp(-i (w - w_o) t)`` over the whole real line;
    it is real because the Lorentzian is centred on the mode.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("memory kernel is defined for t >= 0")
    out = bath.kernel_amplitude * np.exp(-bath.lam * t)
    return out if out.ndim else float(out)


def markovian_rate(bath: LorentzianBath) -> float:
    """Amplitude decay rate in the broad-band limit, ``kappa = pi * gamma``."""
    return math.pi * bath.gamma


def thermal_occupation(freq_over_temp):
    """Bose factor ``1 / (exp(hbar w / k_B T) - 1)``; ``inf`` maps to zero occupation."""
    x = np.asarray(freq_over_temp, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("hbar*omega/(k_B*T) must be positive")
    with np.errstate(over="ignore"):
        out = 1.0 / np.expm1(x)
    return out if out.ndim else float(out)
