"""Figure-reproduction pipelines: deterministic CSV output plus a JSON manifest."""
from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .. import __version__
from ..entangler import bell_fidelity, evolve_two_boson, hubbard_from_traps, populations
from ..single_qubit import run_single_qubit, sweep_rabi_map
from ..trajopt import (
    OptimizationConfig,
    optimize_trajectory,
    rabi_after_optimized_ramp,
)
from ..traps import TrajectorySpec, separation_at
from ..two_qubit import effective_1d_coupling, fidelity_map
from .config import ConfigError, ExperimentConfig

CSV_SCHEMAS = {
    "fig1": ("t_r", "t_i", "rho0", "rho1", "leakage"),
    "fig2": ("t_r", "t_i", "rho", "phi_c", "fidelity"),
    "fig3": ("t", "rho00", "rho01", "rho10", "rho11", "rho_dq", "rho_dt",
             "bell_fidelity"),
    "fig4_trajectory": ("t", "a"),
    "fig4_rabi": ("t_i", "rho1"),
    "custom": ("t_r", "t_i", "rho0", "rho1", "leakage"),
}


class PipelineError(RuntimeError):
    pass


@dataclass
class RunManifest:
    config_hash: str
    code_version: str
    wall_time_s: float
    diagnostics: dict[str, Any] = field(default_factory=dict)
    outputs: list[dict[str, Any]] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config_hash": self.config_hash,
            "code_version": self.code_version,
            "wall_time_s": self.wall_time_s,
            "diagnostics": self.diagnostics,
            "outputs": self.outputs,
            "errors": self.errors,
        }


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_csv(path: str, schema: tuple[str, ...], rows, config: ExperimentConfig):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# sdq {config.experiment}\n")
        fh.write(f"# config: {config.to_json()}\n")
        fh.write(",".join(schema) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def run_experiment(config: ExperimentConfig, output_dir: Optional[str] = None) -> RunManifest:
    """Execute the configured pipeline; returns the manifest (also written)."""
    t_start = time.time()
    out_dir = output_dir or config.raw.get("output", "out")
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest(
        config_hash=config.config_hash(),
        code_version=__version__,
        wall_time_s=0.0,
    )
    pipeline = {
        "fig1_sweep": _run_fig1,
        "fig2_fidelity_map": _run_fig2,
        "fig3_entangler": _run_fig3,
        "fig4_optimize": _run_fig4,
        "custom": _run_custom,
    }[config.experiment]
    files = pipeline(config, out_dir, manifest)
    for path in files:
        entry = {"path": os.path.basename(path), "sha256": _sha256(path)}
        manifest.outputs.append(entry)
    manifest.wall_time_s = time.time() - t_start
    mpath = os.path.join(out_dir, f"{config.experiment}_manifest.json")
    with open(mpath, "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
    return manifest


def _workers(config: ExperimentConfig) -> int:
    threads = int(config.raw.get("threads", 0))
    if threads == 0:
        return os.cpu_count() or 1
    return threads


def _run_fig1(config, out_dir, manifest):
    numerics = config.numerics()
    traj = config.raw["trajectory"]
    cells = sweep_rabi_map(
        config.shape(),
        a_max=config._length(traj, "a_max"),
        a_min=config._length(traj, "a_min"),
        t_r_grid=config.sweep_axis("t_r"),
        t_i_grid=config.sweep_axis("t_i"),
        n=numerics["n_1d"],
        dt=numerics["dt_1d"],
        workers=_workers(config),
    )
    rows = []
    n_err = 0
    for row in cells:
        for cell in row:
            if cell.result is None:
                manifest.errors.append(f"cell({cell.t_r},{cell.t_i}): {cell.error}")
                n_err += 1
                continue
            r = cell.result
            rows.append((cell.t_r, cell.t_i, r.rho0, r.rho1, r.leakage))
    manifest.diagnostics["cells"] = len(rows)
    manifest.diagnostics["cell_errors"] = n_err
    path = os.path.join(out_dir, "fig1.csv")
    _write_csv(path, CSV_SCHEMAS["fig1"], rows, config)
    return [path]


def _run_fig2(config, out_dir, manifest):
    numerics = config.numerics()
    traj = config.raw["trajectory"]
    g1d = effective_1d_coupling(config.units(), config.scattering_length())
    cells = fidelity_map(
        config.shape(),
        a_max=config._length(traj, "a_max"),
        a_min=config._length(traj, "a_min"),
        t_r_grid=config.sweep_axis("t_r"),
        t_i_grid=config.sweep_axis("t_i"),
        g1d=g1d,
        n=numerics["n_2d"],
        dt=numerics["dt_2d"],
        workers=_workers(config),
    )
    rows = []
    for row in cells:
        for cell in row:
            if cell.result is None:
                manifest.errors.append(f"cell({cell.t_r},{cell.t_i}): {cell.error}")
                continue
            r = cell.result
            rows.append((cell.t_r, cell.t_i, r.rho, r.phi_c, r.fidelity))
    manifest.diagnostics["g1d"] = g1d
    path = os.path.join(out_dir, "fig2.csv")
    _write_csv(path, CSV_SCHEMAS["fig2"], rows, config)
    return [path]


def _run_fig3(config, out_dir, manifest):
    traj = config.trajectory()
    params = hubbard_from_traps(
        config.shape(), traj, config.units(), config.scattering_length()
    )
    states = evolve_two_boson(params, dt=0.01, n_samples=400)
    rows = []
    for s in states:
        p = populations(s)
        rows.append((s.t, p[0], p[1], p[2], p[3], p[4], p[5], bell_fidelity(s)))
    manifest.diagnostics["U"] = params.U
    manifest.diagnostics["J_hold"] = params.J_of_t(traj.t_r)
    manifest.diagnostics["final_bell_fidelity"] = rows[-1][-1]
    path = os.path.join(out_dir, "fig3.csv")
    _write_csv(path, CSV_SCHEMAS["fig3"], rows, config)
    return [path]


def _run_fig4(config, out_dir, manifest):
    traj_node = config.raw["trajectory"]
    opt_node = config.raw.get("optimization", {})
    opt_config = OptimizationConfig(
        shape=config.shape(),
        a_max=config._length(traj_node, "a_max"),
        a_min_hard=config._length(traj_node, "a_min"),
        t_r=config._time(traj_node, "t_r"),
        knots=int(opt_node.get("knots", 8)),
        objective_states=int(opt_node.get("objective_states", 2)),
        budget=int(opt_node.get("budget", 150)),
        seed=int(config.raw.get("seed", 1)),
        n=config.numerics()["n_1d"],
    )
    result = optimize_trajectory(opt_config)
    manifest.diagnostics["infidelity"] = result.infidelity
    manifest.diagnostics["baseline_infidelity"] = result.baseline_infidelity
    manifest.diagnostics["converged"] = result.converged
    manifest.diagnostics["evaluations"] = result.evaluations

    ts = np.linspace(0.0, result.trajectory.t_r, 400)
    traj_rows = [(float(t), float(separation_at(result.trajectory, t))) for t in ts]
    tpath = os.path.join(out_dir, "fig4_trajectory.csv")
    _write_csv(tpath, CSV_SCHEMAS["fig4_trajectory"], traj_rows, config)

    rabi_node = config.raw.get("rabi_t_i", {"start": 0.0, "stop": 360.0, "count": 25})
    t_i_grid = np.linspace(
        rabi_node["start"], rabi_node["stop"], int(rabi_node["count"])
    )
    rabi = rabi_after_optimized_ramp(
        result.trajectory, config.shape(), t_i_grid, dt=config.numerics()["dt_1d"]
    )
    rpath = os.path.join(out_dir, "fig4_rabi.csv")
    _write_csv(rpath, CSV_SCHEMAS["fig4_rabi"], [(t, r1) for t, _, r1 in rabi], config)
    return [tpath, rpath]


def _run_custom(config, out_dir, manifest):
    traj = config.trajectory()
    numerics = config.numerics()
    from ..traps import default_grid

    res = run_single_qubit(
        config.shape(), traj,
        grid=default_grid(traj.a_max, numerics["n_1d"]), dt=numerics["dt_1d"],
    )
    rows = [(traj.t_r, traj.t_i, res.rho0, res.rho1, res.leakage)]
    manifest.diagnostics["rho0"] = res.rho0
    manifest.diagnostics["rho1"] = res.rho1
    path = os.path.join(out_dir, "custom.csv")
    _write_csv(path, CSV_SCHEMAS["custom"], rows, config)
    return [path]
