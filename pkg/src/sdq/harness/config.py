"""Experiment configuration: JSON round-trip, figure defaults, unit conversion.

Physical inputs may be given either dimensionless (lengths in 1/alpha, times
in 1/omega_x) or in SI with an `_m` / `_s` suffix; SI values are converted
once through the unit system and the two forms give identical runs.
"""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional

from ..traps import GAUSSIAN, PIECEWISE_HARMONIC, TrajectorySpec, TrapShape
from ..units import BOHR_RADIUS_M, RB87_MASS_KG, UnitSystem

EXPERIMENTS = (
    "fig1_sweep",
    "fig2_fidelity_map",
    "fig3_entangler",
    "fig4_optimize",
    "custom",
)


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


_FIG_DEFAULTS: dict[str, dict[str, Any]] = {
    "fig1_sweep": {
        "units": {"omega_x": 2.0e5, "omega_y": 2.0e5, "omega_z": 1.1e6},
        "shape": {"kind": PIECEWISE_HARMONIC},
        "trajectory": {"a_max": 5.0, "a_min": 1.8},
        "sweep": {
            "t_r": {"start": 2.0, "stop": 80.0, "count": 16},
            "t_i": {"start": 0.0, "stop": 150.0, "count": 16},
        },
    },
    "fig2_fidelity_map": {
        "units": {"omega_x": 2.0e5, "omega_y": 2.0e5, "omega_z": 1.1e6},
        "shape": {"kind": PIECEWISE_HARMONIC},
        "scattering_length_m": 106 * BOHR_RADIUS_M,
        "trajectory": {"a_max": 5.0, "a_min": 1.8},
        "sweep": {
            "t_r": {"start": 60.0, "stop": 70.0, "count": 2},
            "t_i": {"start": 56.0, "stop": 64.0, "count": 3},
        },
    },
    "fig3_entangler": {
        "units": {"omega_x": 2.0e5, "omega_y": 2.0e5, "omega_z": 1.1e6},
        "shape": {"kind": PIECEWISE_HARMONIC},
        "scattering_length_m": 106 * BOHR_RADIUS_M,
        "trajectory": {"a_max": 5.0, "a_min": 1.9, "t_r": 80.0, "t_i": 58.0},
    },
    "fig4_optimize": {
        "units": {"omega_x": 6.0e5, "omega_y": 6.0e5, "omega_z": 6.0e5},
        "shape": {"kind": GAUSSIAN, "v0": 200.0},
        "trajectory": {"a_max": 70.0, "a_min": 14.35, "t_r": 1100.0},
        "optimization": {"knots": 8, "budget": 150, "objective_states": 2},
        "rabi_t_i": {"start": 0.0, "stop": 360.0, "count": 25},
    },
    "custom": {
        "units": {"omega_x": 2.0e5, "omega_y": 2.0e5, "omega_z": 1.1e6},
        "shape": {"kind": PIECEWISE_HARMONIC},
        "trajectory": {"a_max": 5.0, "a_min": 1.8, "t_r": 60.0, "t_i": 40.0},
    },
}

_BASE_DEFAULTS: dict[str, Any] = {
    "numerics": {"n_1d": 512, "dt_1d": 2e-3, "n_2d": 256, "dt_2d": 5e-3},
    "seed": 1,
    "threads": 0,
    "output": "out",
}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


@dataclass
class ExperimentConfig:
    experiment: str
    raw: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}")
        merged = _merge(_BASE_DEFAULTS, _FIG_DEFAULTS[self.experiment])
        merged = _merge(merged, self.raw)
        merged["experiment"] = self.experiment
        self.raw = merged
        self._validate()

    # -- construction -------------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        exp = data.pop("experiment", None)
        if exp is None:
            raise ConfigError("experiment", "missing")
        return cls(experiment=exp, raw=data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def with_overrides(self, overrides: dict[str, Any]) -> "ExperimentConfig":
        data = copy.deepcopy(self.raw)
        for dotted, value in overrides.items():
            node = data
            parts = dotted.split(".")
            for p in parts[:-1]:
                node = node.setdefault(p, {})
            node[parts[-1]] = value
        data.pop("experiment")
        return ExperimentConfig(experiment=self.experiment, raw=data)

    # -- validation and typed accessors -------------------------------------
    def _validate(self):
        units = self.raw.get("units", {})
        for key in ("omega_x", "omega_y", "omega_z"):
            if not (isinstance(units.get(key), (int, float)) and units[key] > 0):
                raise ConfigError(f"units.{key}", "must be a positive frequency")
        numerics = self.raw.get("numerics", {})
        for key in ("dt_1d", "dt_2d"):
            if numerics.get(key, 1) <= 0:
                raise ConfigError(f"numerics.{key}", "must be positive")
        for key in ("n_1d", "n_2d"):
            n = numerics.get(key, 64)
            if n < 64 or (n & (n - 1)) != 0:
                raise ConfigError(f"numerics.{key}", "must be a power of two >= 64")
        if "sweep" in self.raw:
            for axis, spec in self.raw["sweep"].items():
                if spec.get("count", 0) < 1:
                    raise ConfigError(f"sweep.{axis}.count", "must be >= 1")
        shape = self.raw.get("shape", {})
        if shape.get("kind") == GAUSSIAN and not shape.get("v0"):
            raise ConfigError("shape.v0", "gaussian shape requires v0 > 0")
        traj = self.raw.get("trajectory", {})
        a_max = self._length(traj, "a_max")
        a_min = self._length(traj, "a_min")
        if a_max is not None and a_min is not None and not (0 < a_min <= a_max):
            raise ConfigError("trajectory.a_min", "require 0 < a_min <= a_max")

    def units(self) -> UnitSystem:
        u = self.raw["units"]
        return UnitSystem(
            omega_x=u["omega_x"], omega_y=u["omega_y"], omega_z=u["omega_z"],
            mass=u.get("mass_kg", RB87_MASS_KG),
        )

    def shape(self) -> TrapShape:
        s = self.raw["shape"]
        return TrapShape(
            kind=s["kind"], omega=s.get("omega", 1.0), v0=s.get("v0")
        )

    def _length(self, node: dict, key: str) -> Optional[float]:
        """Dimensionless length from `key` or SI meters from `key_m`."""
        if key in node:
            return float(node[key])
        if key + "_m" in node:
            return float(node[key + "_m"]) / self.units().alpha_inv
        return None

    def _time(self, node: dict, key: str) -> Optional[float]:
        if key in node:
            return float(node[key])
        if key + "_s" in node:
            return float(node[key + "_s"]) * self.units().omega_x
        return None

    def trajectory(self) -> TrajectorySpec:
        t = self.raw["trajectory"]
        a_max = self._length(t, "a_max")
        a_min = self._length(t, "a_min")
        t_r = self._time(t, "t_r")
        t_i = self._time(t, "t_i")
        if a_max is None or a_min is None or t_r is None:
            raise ConfigError("trajectory", "needs a_max, a_min and t_r")
        return TrajectorySpec(
            a_max=a_max, a_min=a_min, t_r=t_r, t_i=t_i if t_i is not None else 0.0
        )

    def sweep_axis(self, axis: str) -> list[float]:
        spec = self.raw["sweep"][axis]
        start, stop, count = spec["start"], spec["stop"], int(spec["count"])
        if count == 1:
            return [float(start)]
        step = (stop - start) / (count - 1)
        return [start + i * step for i in range(count)]

    def scattering_length(self) -> float:
        return float(self.raw.get("scattering_length_m", 0.0))

    def numerics(self) -> dict[str, Any]:
        return dict(self.raw["numerics"])
