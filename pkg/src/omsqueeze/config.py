"""YAML experiment configuration.

Every top-level key is named after the symbol it sets.  An empty file gives the
baseline parameter set used throughout (``g = G = 0.15``, ``r = 0.2``,
``delta_c = 3.5``, ``gamma_a = 1e-3``, ``gamma_c = 1.5e-3``, ``lambda_a = 1e-2``,
``lambda_c = 1.5e-2``, zero thermal occupation, ``dt = 0.01``, ``t_max = 300``).

Optional ``sweep`` block::

    sweep:
      axes: {g: [0.1, 0.15, 0.2], r: {start: 0, stop: 0.2, num: 21}}
      envs: [markov, structured]
      tau: 300
      tau_offs: {start: 50, stop: 900, num: 18}
      T: 1000
      configs:
        matched: {env: structured, gamma_c: 1.0e-3, lambda_c: 1.0e-2}
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .analysis import DEFAULT_GRIDS, DEFAULT_TAU_OFFS, Scenario
from .model import SystemParams
from .spectra import LorentzianBath

__all__ = ["ConfigError", "ExperimentConfig", "SweepConfig", "load_config", "build_config", "KINDS"]

KINDS = ("effective", "validate", "markov", "nmhl", "persist", "sweep-gen", "sweep-persist")
MAX_STEPS = 5e6

DEFAULTS: dict[str, Any] = {
    "g": 0.15,
    "G": 0.15,
    "r": 0.2,
    "delta_c": 3.5,
    "delta_a": None,
    "alpha": 0.0,
    "phi": 0.0,
    "gamma_a": 1e-3,
    "gamma_c": 1.5e-3,
    "lambda_a": 1e-2,
    "lambda_c": 1.5e-2,
    "nbar_a": 0.0,
    "nbar_c": 0.0,
    "kappa_a": None,
    "kappa_c": None,
    "kappa_b": 1e-5,
    "nbar_b": 10.0,
    "tau_off": None,
    "t_max": 300.0,
    "dt": 0.01,
    "sample_dt": 1.0,
    "env": "structured",
    "full_model": False,
    "nmhl_method": "greens",
    "greens_method": "auxiliary",
    "refine_tol": None,
    "scan_half_width": 0.1,
    "scan_points": 400,
    "sweep": None,
}
_OPTIONAL_FLOATS = {"delta_a", "kappa_a", "kappa_c", "tau_off", "refine_tol"}
_CHOICES = {
    "env": ("markov", "structured"),
    "nmhl_method": ("greens", "embedding"),
    "greens_method": ("auxiliary", "volterra"),
}
_SWEEP_KEYS = {"axes", "envs", "tau", "tau_offs", "T", "configs"}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


@dataclass(frozen=True)
class SweepConfig:
    axes: dict
    envs: tuple
    tau: float
    tau_offs: tuple
    T: float
    configs: dict


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    values: dict
    params: SystemParams
    bath_a: LorentzianBath
    bath_c: LorentzianBath
    sweep: SweepConfig
    threads: int = 1
    source: str | None = field(default=None, compare=False)

    def __getattr__(self, name):
        values = self.__dict__.get("values", {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    @property
    def kappa_a(self) -> float:
        v = self.values["kappa_a"]
        return math.pi * self.bath_a.gamma if v is None else v

    @property
    def kappa_c(self) -> float:
        v = self.values["kappa_c"]
        return math.pi * self.bath_c.gamma if v is None else v

    @property
    def scenario(self) -> Scenario:
        return Scenario(self.params, self.bath_a, self.bath_c)

    def manifest(self) -> dict:
        """Every resolved value the solvers consume."""
        out = {"kind": self.kind, "threads": self.threads}
        for k, v in self.values.items():
            if k != "sweep":
                out[k] = v
        out["delta_a"] = self.params.resolved_delta_a
        out["kappa_a"], out["kappa_c"] = self.kappa_a, self.kappa_c
        out["theta"] = self.params.theta
        if self.kind in ("sweep-gen", "sweep-persist"):
            s = self.sweep
            out["sweep"] = {
                "axes": {k: list(v) for k, v in s.axes.items()},
                "envs": list(s.envs),
                "tau": s.tau,
                "tau_offs": list(s.tau_offs),
                "T": s.T,
                "configs": s.configs,
            }
        return out


def _number(key: str, value: Any, optional: bool = False) -> float | None:
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key)
    if not math.isfinite(value):
        raise ConfigError("must be finite", key)
    return float(value)


def _series(key: str, value: Any) -> tuple:
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "num"}
        if extra or len(value) != 3:
            raise ConfigError("range needs exactly start, stop and num", key)
        num = value["num"]
        if isinstance(num, bool) or not isinstance(num, int) or num < 1:
            raise ConfigError("num must be a positive integer", key)
        start, stop = _number(key, value["start"]), _number(key, value["stop"])
        return tuple(float(x) for x in np.linspace(start, stop, num))
    if isinstance(value, (list, tuple)) and value:
        return tuple(_number(key, v) for v in value)
    raise ConfigError("expected a non-empty list or a {start, stop, num} range", key)


def _sweep(raw: Any) -> SweepConfig:
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("must be a mapping", "sweep")
    unknown = set(raw) - _SWEEP_KEYS
    if unknown:
        raise ConfigError("unknown key", f"sweep.{sorted(unknown)[0]}")
    if "axes" in raw:
        if not isinstance(raw["axes"], dict) or not raw["axes"]:
            raise ConfigError("must be a non-empty mapping", "sweep.axes")
        axes = {}
        for name, vals in raw["axes"].items():
            if name not in Scenario.AXES:
                raise ConfigError("unknown sweep axis", f"sweep.axes.{name}")
            axes[name] = _series(f"sweep.axes.{name}", vals)
    else:
        axes = {"g": tuple(DEFAULT_GRIDS["g"]), "r": tuple(DEFAULT_GRIDS["r"])}
    envs = tuple(raw.get("envs", ("markov", "structured")))
    for e in envs:
        if e not in _CHOICES["env"]:
            raise ConfigError(f"unknown environment {e!r}", "sweep.envs")
    tau = _number("sweep.tau", raw.get("tau", 300.0))
    T = _number("sweep.T", raw.get("T", 1000.0))
    tau_offs = _series("sweep.tau_offs", raw["tau_offs"]) if "tau_offs" in raw else tuple(DEFAULT_TAU_OFFS)
    if tau <= 0:
        raise ConfigError("must be positive", "sweep.tau")
    if any(x <= 0 or x >= T for x in tau_offs):
        raise ConfigError("every tau_off must lie in (0, T)", "sweep.tau_offs")
    configs_raw = raw.get(
        "configs",
        {
            "markov": {"env": "markov"},
            "mismatched": {"env": "structured"},
            "matched": {"env": "structured", "gamma_c": DEFAULTS["gamma_a"], "lambda_c": DEFAULTS["lambda_a"]},
        },
    )
    if not isinstance(configs_raw, dict) or not configs_raw:
        raise ConfigError("must be a non-empty mapping", "sweep.configs")
    configs = {}
    for label, spec in configs_raw.items():
        key = f"sweep.configs.{label}"
        if not isinstance(spec, dict):
            raise ConfigError("must be a mapping", key)
        spec = dict(spec)
        env = spec.pop("env", "structured")
        if env not in _CHOICES["env"]:
            raise ConfigError(f"unknown environment {env!r}", key)
        for k, v in spec.items():
            if k not in Scenario.AXES:
                raise ConfigError("unknown key", f"{key}.{k}")
            _number(f"{key}.{k}", v)
        configs[str(label)] = {"env": env, **{k: float(v) for k, v in spec.items()}}
    return SweepConfig(axes, envs, tau, tau_offs, T, configs)


def build_config(raw: dict | None, kind: str = "markov", overrides: dict | None = None, threads: int = 1) -> ExperimentConfig:
    """Validate a parsed mapping; ``overrides`` (from command-line flags) win."""
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}", "kind")
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        key = sorted(map(str, unknown))[0]
        raise ConfigError("unknown key", key)
    given = dict(raw)
    given.update({k: v for k, v in (overrides or {}).items() if v is not None})

    v = dict(DEFAULTS)
    if kind == "persist":
        v["t_max"] = 1000.0
        v["tau_off"] = 300.0
    v.update(given)

    for key in DEFAULTS:
        if key in _CHOICES:
            if v[key] not in _CHOICES[key]:
                raise ConfigError(f"must be one of {', '.join(_CHOICES[key])}", key)
        elif key == "full_model":
            if not isinstance(v[key], bool):
                raise ConfigError("must be true or false", key)
        elif key == "scan_points":
            if isinstance(v[key], bool) or not isinstance(v[key], int) or v[key] < 5:
                raise ConfigError("must be an integer >= 5", key)
        elif key != "sweep":
            v[key] = _number(key, v[key], optional=key in _OPTIONAL_FLOATS)

    if v["dt"] <= 0:
        raise ConfigError("must be positive", "dt")
    if v["t_max"] <= 0:
        raise ConfigError("must be positive", "t_max")
    if v["t_max"] / v["dt"] > MAX_STEPS:
        raise ConfigError(f"t_max/dt exceeds {MAX_STEPS:.0e} steps", "t_max")
    steps = v["t_max"] / v["dt"]
    if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
        raise ConfigError("t_max must be a whole number of dt steps", "t_max")
    ratio = v["sample_dt"] / v["dt"]
    if v["sample_dt"] <= 0 or abs(ratio - round(ratio)) > 1e-6 * max(1.0, ratio):
        raise ConfigError("must be a positive multiple of dt", "sample_dt")
    if v["tau_off"] is not None and not (0 <= v["tau_off"] <= v["t_max"]):
        raise ConfigError("must lie inside [0, t_max]", "tau_off")
    if kind == "persist" and v["tau_off"] is None:
        raise ConfigError("persist runs need a switch-off time", "tau_off")
    for key in ("kappa_a", "kappa_c", "kappa_b", "nbar_b"):
        if v[key] is not None and v[key] < 0:
            raise ConfigError("must be non-negative", key)

    try:
        params = SystemParams(
            g=v["g"], G=v["G"], r=v["r"], delta_c=v["delta_c"], delta_a=v["delta_a"],
            alpha=v["alpha"], phi=v["phi"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "params") from exc
    try:
        bath_a = LorentzianBath(v["gamma_a"], v["lambda_a"], v["nbar_a"], "a")
        bath_c = LorentzianBath(v["gamma_c"], v["lambda_c"], v["nbar_c"], "c")
    except ValueError as exc:
        raise ConfigError(str(exc), "bath") from exc
    sweep = _sweep(v["sweep"])
    if threads < 1:
        raise ConfigError("must be at least 1", "threads")
    return ExperimentConfig(kind, v, params, bath_a, bath_c, sweep, threads)


def load_config(path: str | Path | None, kind: str = "markov", overrides: dict | None = None, threads: int = 1) -> ExperimentConfig:
    """Read and validate a YAML file (``None`` means all defaults)."""
    raw = None
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"parse error: {exc}") from exc
    cfg = build_config(raw, kind, overrides, threads)
    return dataclasses.replace(cfg, source=None if path is None else str(path))
