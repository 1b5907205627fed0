"""Squeezing variances, optimal squeezing and parameter sweeps."""

from __future__ import annotations

import dataclasses
import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from .covariance import CovarianceTrajectory

if TYPE_CHECKING:
    from .model import SystemParams
    from .spectra import LorentzianBath

__all__ = [
    "QuadratureFrame",
    "SqueezingTable",
    "Scenario",
    "optimal_angle",
    "variance_xy",
    "optimal_variances",
    "squeezing_level",
    "squeezing_table",
    "sweep_generation",
    "sweep_persistence",
    "DEFAULT_GRIDS",
    "DEFAULT_TAU_OFFS",
]

DEFAULT_GRIDS = {
    "g": np.linspace(0.1, 0.2, 21),
    "r": np.linspace(0.0, 0.2, 21),
    "gamma_a": np.linspace(0.5e-3, 2e-3, 16),
    "lambda_a": np.linspace(0.005, 0.1, 20),
}
DEFAULT_TAU_OFFS = np.arange(50.0, 901.0, 50.0)


def optimal_angle(g_eff: float, kappa_a: float, kappa_c: float) -> float:
    """Angle of the decaying joint quadrature, ``tan 2phi = 2 g_eff / (kappa_a - kappa_c)``.

    Returned in ``(-pi/2, pi/2]``.
    """
    if g_eff == 0 and kappa_a == kappa_c:
        raise ValueError("mixing angle undefined for g_eff = 0 and kappa_a = kappa_c")
    return 0.5 * math.atan2(2 * g_eff, kappa_a - kappa_c)


@dataclass(frozen=True)
class QuadratureFrame:
    alpha: float
    phi: float
    mix_angle: float

    def __post_init__(self):
        if not (-math.pi / 2 < self.mix_angle <= math.pi / 2):
            raise ValueError("mix_angle must lie in (-pi/2, pi/2]")

    @classmethod
    def from_rates(cls, g_eff, kappa_a, kappa_c, alpha=0.0, phi=0.0) -> "QuadratureFrame":
        return cls(alpha, phi, optimal_angle(g_eff, kappa_a, kappa_c))


def variance_xy(V: np.ndarray, mix_angle: float) -> tuple:
    """Variances of ``X = cos(phi) X_a + sin(phi) Y_c`` and its orthogonal partner.

    ``V`` is a 4x4 matrix in ``(X_a, Y_a, X_c, Y_c)`` or a stack of them.
    """
    V = np.asarray(V, float)
    c2, s2 = math.cos(mix_angle) ** 2, math.sin(mix_angle) ** 2
    s = math.sin(2 * mix_angle)
    v11, v44, v14 = V[..., 0, 0], V[..., 3, 3], V[..., 0, 3]
    return c2 * v11 + s2 * v44 + s * v14, s2 * v11 + c2 * v44 - s * v14


def _check_structure(V: np.ndarray, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(V))))
    gaps = (
        np.abs(V[..., 1, 1] - V[..., 0, 0]),
        np.abs(V[..., 2, 2] - V[..., 3, 3]),
        np.abs(V[..., 1, 2] - V[..., 0, 3]),
    )
    worst = max(float(np.max(g)) for g in gaps)
    if worst > tol * scale:
        raise ValueError(
            f"covariance matrix lacks the two-mode squeezing structure (mismatch {worst:.2e})"
        )


def optimal_variances(V: np.ndarray, strict: bool = True, tol: float = 1e-8) -> tuple:
    """Eigen-variances of the ``(V11, V14; V14, V44)`` block and the minimising angle.

    With ``strict`` the matrix must satisfy ``V22 = V11``, ``V33 = V44`` and
    ``V23 = V14``; otherwise the joint-quadrature ansatz does not apply.
    """
    V = np.asarray(V, float)
    if strict:
        _check_structure(V, tol)
    v11, v44, v14 = V[..., 0, 0], V[..., 3, 3], V[..., 0, 3]
    mean = 0.5 * (v11 + v44)
    rad = 0.5 * np.hypot(v11 - v44, 2 * v14)
    phi = 0.5 * np.arctan2(-2 * v14, v44 - v11)
    return mean - rad, mean + rad, phi


def squeezing_level(dX):
    """Squeezing level in dB relative to the vacuum variance 1/2."""
    x = np.asarray(dX, float)
    if np.any(~(x > 0)):
        raise ValueError("variance must be positive")
    out = -10.0 * np.log10(x / 0.5)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SqueezingTable:
    t: np.ndarray
    dX: np.ndarray
    dY: np.ndarray
    dX_opt: np.ndarray
    dY_opt: np.ndarray
    S: np.ndarray
    S_opt: np.ndarray
    phi_opt: np.ndarray

    def row(self, i: int) -> dict:
        return {f.name: float(getattr(self, f.name)[i]) for f in dataclasses.fields(self)}


def squeezing_table(
    traj: CovarianceTrajectory, mix_angle: float | None = None, strict: bool = True
) -> SqueezingTable:
    eff = traj.effective()
    angle = eff.mix_angle if mix_angle is None else mix_angle
    if angle is None:
        raise ValueError("no squeezing-operator angle given")
    dX, dY = variance_xy(eff.V, angle)
    dXo, dYo, phi = optimal_variances(eff.V, strict=strict)
    return SqueezingTable(
        eff.t, dX, dY, dXo, dYo, squeezing_level(dX), squeezing_level(dXo), phi
    )


@dataclass(frozen=True)
class Scenario:
    """Everything a single pipeline run needs apart from the time grid.

    Sweep axes are applied with :meth:`with_values`.  By default ``g`` also sets
    ``G``, and sweeping ``gamma_a`` or ``lambda_a`` keeps the c-bath ratios fixed.
    """

    params: "SystemParams"
    bath_a: "LorentzianBath"
    bath_c: "LorentzianBath"
    tie_G: bool = True
    keep_ratios: bool = True

    AXES = ("g", "G", "r", "delta_c", "gamma_a", "gamma_c", "lambda_a", "lambda_c")

    def with_values(self, values: Mapping[str, float]) -> "Scenario":
        unknown = set(values) - set(self.AXES)
        if unknown:
            raise ValueError(f"unknown sweep axis {sorted(unknown)[0]!r}")
        p = {k: values[k] for k in ("g", "G", "r", "delta_c") if k in values}
        if self.tie_G and "g" in values and "G" not in values:
            p["G"] = values["g"]
        ba, bc = self.bath_a, self.bath_c
        na = {}
        nc = {}
        for name, field in (("gamma", "gamma"), ("lambda", "lam")):
            if f"{name}_a" in values:
                na[field] = values[f"{name}_a"]
                if self.keep_ratios and f"{name}_c" not in values:
                    base = getattr(ba, field)
                    ratio = getattr(bc, field) / base if base else 1.0
                    nc[field] = ratio * values[f"{name}_a"]
            if f"{name}_c" in values:
                nc[field] = values[f"{name}_c"]
        return dataclasses.replace(
            self,
            params=dataclasses.replace(self.params, **p),
            bath_a=dataclasses.replace(ba, **na),
            bath_c=dataclasses.replace(bc, **nc),
        )

    def describe(self) -> dict:
        p, a, c = self.params, self.bath_a, self.bath_c
        return {
            "g": p.g, "G": p.G, "r": p.r, "delta_c": p.delta_c,
            "gamma_a": a.gamma, "gamma_c": c.gamma, "lambda_a": a.lam, "lambda_c": c.lam,
        }


def _grid_points(axes: Mapping[str, Sequence[float]]) -> list[dict]:
    names = list(axes)
    return [dict(zip(names, map(float, combo))) for combo in itertools.product(*(axes[n] for n in names))]


def _run_point(scn: Scenario, env: str, schedule, t_grid, method: str):
    from .markov import MarkovModel, propagate_cm
    from .model import effective_coupling
    from .nonmarkov import nmhl_run
    from .spectra import markovian_rate

    if env == "markov":
        g_eff = effective_coupling(scn.params)
        model = MarkovModel.from_baths(g_eff, scn.bath_a, scn.bath_c)
        traj = propagate_cm(model, t_grid, schedule=schedule)
        angle = optimal_angle(g_eff, markovian_rate(scn.bath_a), markovian_rate(scn.bath_c))
        return squeezing_table(traj, angle)
    if env == "structured":
        return squeezing_table(nmhl_run(scn.params, scn.bath_a, scn.bath_c, t_grid, schedule, method))
    raise ValueError(f"unknown environment kind {env!r}")


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _guarded(fn):
    def wrapped(job):
        try:
            return fn(job), None
        except Exception as exc:  # recorded per point, the sweep carries on
            return None, f"{type(exc).__name__}: {exc}"

    return wrapped


def sweep_generation(
    base: Scenario,
    axes: Mapping[str, Sequence[float]],
    envs: Iterable[str] = ("markov", "structured"),
    tau: float = 300.0,
    dt: float = 0.01,
    threads: int = 1,
    method: str = "greens",
) -> list[dict]:
    """Squeezing level at ``tau`` over the Cartesian product of ``axes``.

    Rows come back in grid order (environment outermost), each with the swept
    values, ``S_dB``, ``S_opt_dB`` and an ``error`` entry that is ``None`` on
    success.
    """
    from .drive import DriveSchedule
    from .model import effective_coupling, validity_check
    from .stepper import uniform_grid

    t_grid = uniform_grid(tau, dt)
    jobs = [(env, values) for env in envs for values in _grid_points(axes)]

    def valid(values):
        try:
            return validity_check(base.with_values(values).params).valid
        except ValueError:
            return True  # reported as a per-point failure instead

    outside = sum(not valid(v) for v in _grid_points(axes))
    if outside:
        warnings.warn(f"{outside} sweep points lie outside the validity region", stacklevel=2)

    def one(job):
        env, values = job
        scn = base.with_values(values)
        schedule = DriveSchedule(effective_coupling(scn.params))
        table = _run_point(scn, env, schedule, t_grid, method)
        return float(table.S[-1]), float(table.S_opt[-1])

    rows = []
    for (env, values), (res, err) in zip(jobs, _map(_guarded(one), jobs, threads)):
        row = {"env": env, **values, "tau": tau}
        row["S_dB"], row["S_opt_dB"] = res if res else (math.nan, math.nan)
        row["error"] = err
        rows.append(row)
    return rows


def sweep_persistence(
    configs: Mapping[str, tuple[Scenario, str]],
    tau_offs: Sequence[float] = DEFAULT_TAU_OFFS,
    T: float = 1000.0,
    dt: float = 0.01,
    threads: int = 1,
    method: str = "greens",
) -> list[dict]:
    """Squeezing level at ``T`` after switching the drive off at each ``tau_off``.

    ``configs`` maps a label to ``(scenario, env)`` with env ``"markov"`` or
    ``"structured"``.  Rows are ordered by config, then ``tau_off``.
    """
    from .drive import DriveSchedule
    from .model import effective_coupling
    from .stepper import uniform_grid

    if any(tau >= T for tau in tau_offs):
        raise ValueError("every tau_off must be earlier than T")
    t_grid = uniform_grid(T, dt)
    jobs = [(label, scn, env, float(tau)) for label, (scn, env) in configs.items() for tau in tau_offs]

    def one(job):
        _, scn, env, tau = job
        schedule = DriveSchedule(effective_coupling(scn.params), tau)
        table = _run_point(scn, env, schedule, t_grid, method)
        return float(table.S[-1]), float(table.S_opt[-1]), float(table.dX[-1]), float(table.dY[-1])

    rows = []
    for (label, scn, env, tau), (res, err) in zip(jobs, _map(_guarded(one), jobs, threads)):
        S, So, dX, dY = res if res else (math.nan,) * 4
        rows.append(
            {"config": label, "env": env, "tau_off": tau, "T": T,
             "S_dB": S, "S_opt_dB": So, "dX": dX, "dY": dY, "error": err}
        )
    return rows
