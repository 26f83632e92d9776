"""Run configuration: JSON schema, loading, and resolved-run bookkeeping."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import jsonschema
import numpy as np

from .decay import DecayRateSpec
from .errors import ConfigError
from .evolve import DrivingData, ForcingComponent
from .params import FluidParams, derive_constants
from .transform import DataPreset, FrequencyGrid

_PRESET_SCHEMA = {
    "type": "object",
    "properties": {
        "preset": {"enum": ["gaussian", "bump", "zero", "hf_ring"]},
        "amplitude": {"type": "number"},
        "center": {"type": "number"},
        "width": {"type": "number", "exclusiveMinimum": 0},
        "support": {"type": "number", "exclusiveMinimum": 0},
        "floor": {"type": "number", "minimum": 0},
    },
    "required": ["preset"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "fluids": {
            "type": "object",
            "properties": {
                "rho_plus": {"type": "number", "exclusiveMinimum": 0},
                "rho_minus": {"type": "number", "exclusiveMinimum": 0},
                "mu_plus": {"type": "number", "exclusiveMinimum": 0},
                "mu_minus": {"type": "number", "exclusiveMinimum": 0},
                "sigma": {"type": "number", "exclusiveMinimum": 0},
                "gravity": {"type": "number", "exclusiveMinimum": 0},
                "lambda1": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["rho_plus", "rho_minus", "mu_plus", "mu_minus", "sigma", "gravity"],
            "additionalProperties": False,
        },
        "numerics": {
            "type": "object",
            "properties": {
                "n_modes": {"type": "integer", "minimum": 8},
                "xi_max": {"type": "number", "exclusiveMinimum": 0},
                "x_N": {"type": "array", "items": {"type": "number"}},
                "fast": {"type": "boolean"},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "verify_scale": {"type": "number", "exclusiveMinimum": 0},
                "dimension": {"enum": [2, 3]},
                "roots_n_A": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "data": {
            "type": "object",
            "properties": {
                "d": _PRESET_SCHEMA,
                "f": {"type": ["array", "null"],
                      "items": {
                          "type": "object",
                          "properties": {
                              "component": {"enum": ["normal", "tangential", 0, 1, 2]},
                              "side": {"enum": ["+", "-"]},
                              "axial": _PRESET_SCHEMA,
                              "transverse": _PRESET_SCHEMA,
                          },
                          "required": ["side", "axial"],
                          "additionalProperties": False,
                      }},
            },
            "additionalProperties": False,
        },
        "times": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "specs": {"type": "array", "items": {
            "type": "object",
            "properties": {
                "N": {"type": "integer", "minimum": 2},
                "p": {"type": "number", "minimum": 1},
                "q": {"type": ["number", "string"]},
                "component": {"enum": ["H", "U"]},
                "part": {"enum": ["res", "tilde", "parabolic", "high", "combined"]},
                "gamma1": {"type": "number"},
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["N", "p", "q", "component", "part"],
            "additionalProperties": False,
        }},
        "output_dir": {"type": "string"},
        "figures": {"type": "boolean"},
    },
    "required": ["fluids"],
    "additionalProperties": False,
}

DEFAULT_NUMERICS = {
    "n_modes": 1024,
    "xi_max": 32.0,
    "fast": False,
    "tol": 1e-8,
    "seed": 1234,
    "verify_scale": 1.0,
    "dimension": 2,
    "roots_n_A": 24,
}


@dataclass
class RunConfig:
    """Validated, resolved configuration for one CLI invocation."""

    fluids: FluidParams
    lambda1: Optional[float]
    numerics: dict
    d_preset: DataPreset
    forcing: tuple
    times: np.ndarray
    specs: list
    spec_tolerances: list
    output_dir: str
    figures: bool = True
    raw: dict = field(default_factory=dict)

    @property
    def consts(self):
        return derive_constants(self.fluids, self.lambda1)

    def frequency_grid(self) -> FrequencyGrid:
        return FrequencyGrid.uniform(self.numerics["n_modes"], self.numerics["xi_max"],
                                     dimension=self.numerics["dimension"])

    def x_N_grid(self) -> np.ndarray:
        if "x_N" in self.numerics:
            return np.asarray(self.numerics["x_N"], dtype=float)
        return np.concatenate([-np.geomspace(8.0, 0.05, 12), [0.0], np.geomspace(0.05, 8.0, 12)])

    def driving_data(self) -> DrivingData:
        return DrivingData(d_preset=self.d_preset, forcing=self.forcing)


def _parse_q(q):
    if isinstance(q, str):
        if q.lower() in ("inf", "infinity", "oo"):
            return math.inf
        raise ConfigError(f"unrecognized q value {q!r}")
    return float(q)


def load_config(path: str, out_override: Optional[str] = None) -> RunConfig:
    """Load, schema-validate and resolve a JSON run configuration."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    return parse_config(raw, out_override=out_override)


def parse_config(raw: dict, out_override: Optional[str] = None) -> RunConfig:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"config failed schema validation: {e.message}") from e

    fl = dict(raw["fluids"])
    lambda1 = fl.pop("lambda1", None)
    fluids = FluidParams.from_dict(fl)

    numerics = dict(DEFAULT_NUMERICS)
    numerics.update(raw.get("numerics", {}))

    data = raw.get("data", {})
    d_preset = DataPreset.from_config(data.get("d"))
    forcing = tuple(
        ForcingComponent.from_config(fc, numerics["dimension"])
        for fc in (data.get("f") or [])
    )

    times = np.asarray(raw.get("times", [1.0, 10.0]), dtype=float)
    if times.size and np.any(np.diff(times) <= 0):
        raise ConfigError("times must be strictly ascending")

    specs, tols = [], []
    for s in raw.get("specs", []):
        s = dict(s)
        tols.append(float(s.pop("tolerance", 0.08)))
        s["q"] = _parse_q(s["q"])
        specs.append(DecayRateSpec(**s))

    out = out_override or os.environ.get("TWOPHASE_OUT") or raw.get("output_dir", "out")
    return RunConfig(fluids=fluids, lambda1=lambda1, numerics=numerics,
                     d_preset=d_preset, forcing=forcing, times=times,
                     specs=specs, spec_tolerances=tols, output_dir=out,
                     figures=bool(raw.get("figures", True)), raw=raw)


def thread_cap(cli_value: Optional[int] = None) -> int:
    """Worker-pool size: CLI flag, else the TWOPHASE_THREADS env var, else 1."""
    if cli_value is not None:
        return max(1, int(cli_value))
    env = os.environ.get("TWOPHASE_THREADS")
    return max(1, int(env)) if env else 1
