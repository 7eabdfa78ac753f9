"""Single-qubit gates by adiabatic trap approach.

Populations are measured against the ground states of the isolated left and
right traps at full separation (the trap-resolved fluorescence measurement
model), so rho0 + rho1 < 1 signals vibrational leakage.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .eigen import DoubleWellTables, stationary_states
from .grids import Grid1D, Wavefunction1D, overlap
from .propagate import propagate_1d
from .traps import (
    TrajectorySpec,
    TrapShape,
    default_grid,
    hold_separation,
    potential_double_well,
    potential_sampler,
    potential_single_well,
)

DEFAULT_DT_1D = 2e-3
ADIABATIC_LEAKAGE = 1e-2


class CalibrationFailedError(RuntimeError):
    def __init__(self, message: str, trace: list[tuple[float, float]]):
        super().__init__(message + f" (trace: {trace})")
        self.trace = trace


@dataclass
class QubitBasis:
    """Isolated-trap ground states at full separation: left = |0>, right = |1>."""

    left: Wavefunction1D
    right: Wavefunction1D

    @classmethod
    def for_shape(cls, shape: TrapShape, a_max: float, grid: Grid1D) -> "QubitBasis":
        gl = stationary_states(
            grid, potential_single_well(shape, -a_max, grid.x), 1
        )[0].state
        gr = stationary_states(
            grid, potential_single_well(shape, +a_max, grid.x), 1
        )[0].state
        return cls(left=gl, right=gr)


@dataclass
class GateRunResult:
    rho0: float
    rho1: float
    leakage: float
    phase0: float
    phase1: float
    final_state: Wavefunction1D


def _initial_state(
    basis: QubitBasis, initial: Union[str, tuple[complex, complex]]
) -> Wavefunction1D:
    if initial == "zero":
        c0, c1 = 1.0, 0.0
    elif initial == "one":
        c0, c1 = 0.0, 1.0
    else:
        c0, c1 = initial
        nrm = abs(c0) ** 2 + abs(c1) ** 2
        if abs(nrm - 1.0) > 1e-9:
            raise ValueError("superposition amplitudes must be normalized")
    psi = c0 * basis.left.psi + c1 * basis.right.psi
    out = Wavefunction1D(basis.left.grid, psi)
    return out.normalize()


def run_single_qubit(
    shape: TrapShape,
    traj: TrajectorySpec,
    initial: Union[str, tuple[complex, complex]] = "zero",
    grid: Optional[Grid1D] = None,
    dt: float = DEFAULT_DT_1D,
    basis: Optional[QubitBasis] = None,
) -> GateRunResult:
    """Propagate through the full approach/hold/release cycle."""
    if grid is None:
        grid = default_grid(traj.a_max)
    if basis is None:
        basis = QubitBasis.for_shape(shape, traj.a_max, grid)
    psi0 = _initial_state(basis, initial)
    v_of_t = potential_sampler(shape, traj, grid)
    psi = propagate_1d(psi0, v_of_t, 0.0, traj.duration, dt)
    amp0 = overlap(basis.left, psi)
    amp1 = overlap(basis.right, psi)
    rho0 = abs(amp0) ** 2
    rho1 = abs(amp1) ** 2
    return GateRunResult(
        rho0=rho0,
        rho1=rho1,
        leakage=1.0 - rho0 - rho1,
        phase0=float(np.angle(amp0)),
        phase1=float(np.angle(amp1)),
        final_state=psi,
    )


@dataclass
class SweepCell:
    t_r: float
    t_i: float
    result: Optional[GateRunResult] = None
    error: Optional[str] = None


def _sweep_cell(args) -> SweepCell:
    shape, a_max, a_min, t_r, t_i, n, dt, initial = args
    try:
        traj = TrajectorySpec(a_max=a_max, a_min=a_min, t_r=t_r, t_i=t_i)
        res = run_single_qubit(
            shape, traj, initial=initial, grid=default_grid(a_max, n), dt=dt
        )
        res.final_state = None  # keep sweep results small
        return SweepCell(t_r=t_r, t_i=t_i, result=res)
    except Exception as exc:  # per-cell failures must not kill the sweep
        return SweepCell(t_r=t_r, t_i=t_i, error=f"{type(exc).__name__}: {exc}")


def sweep_rabi_map(
    shape: TrapShape,
    a_max: float,
    a_min: float,
    t_r_grid: Sequence[float],
    t_i_grid: Sequence[float],
    initial: Union[str, tuple[complex, complex]] = "zero",
    n: int = 512,
    dt: float = DEFAULT_DT_1D,
    workers: int = 0,
) -> list[list[SweepCell]]:
    """One gate run per (t_r, t_i) cell; row-major [i_tr][i_ti].

    Deterministic and order-independent: identical results whether run
    serially (workers <= 1) or across processes.
    """
    if len(t_r_grid) == 0 or len(t_i_grid) == 0:
        raise ValueError("sweep grids must be non-empty")
    for g in (t_r_grid, t_i_grid):
        if list(g) != sorted(g):
            raise ValueError("sweep grids must ascend")
    tasks = [
        (shape, a_max, a_min, float(tr), float(ti), n, dt, initial)
        for tr in t_r_grid
        for ti in t_i_grid
    ]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_sweep_cell, tasks, chunksize=4))
    else:
        flat = [_sweep_cell(t) for t in tasks]
    ncols = len(t_i_grid)
    return [flat[i * ncols : (i + 1) * ncols] for i in range(len(t_r_grid))]


def ramp_pulse_area(
    tables: DoubleWellTables, traj: TrajectorySpec, dt: float = 0.05
) -> float:
    """integral Omega(a(t)) dt over the whole cycle (hold included)."""
    from .traps import separation_at

    ts = np.arange(0.0, traj.duration, dt) + dt / 2.0
    ts = ts[ts < traj.duration]
    return float(np.sum(tables.omega(separation_at(traj, ts))) * dt)


def calibrate_pulse(
    shape: TrapShape,
    a_max: float,
    a_min: float,
    t_r: float,
    target_area: float,
    grid: Optional[Grid1D] = None,
    dt: float = DEFAULT_DT_1D,
    tables: Optional[DoubleWellTables] = None,
    tol: float = 1e-3,
    max_iter: int = 10,
) -> float:
    """Smallest hold time t_i >= 0 realizing the target pulse area.

    Matches |rho1 - sin^2(area/2)| < tol on full simulated cycles; the
    splitting-table area integral provides only the starting guess. For
    2*pi-multiple targets the condition is the return rho0 > 1 - tol.
    """
    if grid is None:
        grid = default_grid(a_max)
    if tables is None:
        tables = DoubleWellTables(
            lambda a: potential_double_well(shape, a, grid.x),
            grid, a_lo=min(a_min * 0.9, a_min - 0.05), a_hi=a_max * 1.02,
        )
    basis = QubitBasis.for_shape(shape, a_max, grid)
    omega_min = float(tables.omega(a_min))
    if omega_min <= 0:
        raise CalibrationFailedError("no tunneling at a_min", [])
    target_rho1 = float(np.sin(target_area / 2.0) ** 2)
    two_pi_type = abs(target_rho1) < 1e-12 and target_area > 0

    def rho1_at(t_i: float) -> GateRunResult:
        traj = TrajectorySpec(a_max=a_max, a_min=a_min, t_r=t_r, t_i=t_i)
        return run_single_qubit(shape, traj, "zero", grid=grid, dt=dt, basis=basis)

    # adiabaticity precondition
    probe = rho1_at(0.0)
    if probe.leakage > ADIABATIC_LEAKAGE:
        raise CalibrationFailedError(
            f"ramp not adiabatic: leakage {probe.leakage:.3g} at t_i=0",
            [(0.0, probe.rho1)],
        )

    area0 = ramp_pulse_area(
        tables, TrajectorySpec(a_max=a_max, a_min=a_min, t_r=t_r, t_i=0.0)
    )
    t_i = (target_area - area0) / omega_min
    while t_i < 0.0:
        t_i += 2.0 * np.pi / omega_min

    trace: list[tuple[float, float]] = [(0.0, probe.rho1)]
    # phase estimate from the t_i = 0 run, branch fixed by the slope there
    psi0 = 2.0 * np.arcsin(np.sqrt(np.clip(probe.rho1 / max(1 - probe.leakage, 1e-9),
                                           0.0, 1.0)))
    d = rho1_at(min(1.0, 0.1 * 2 * np.pi / omega_min))
    if d.rho1 < probe.rho1:
        psi0 = 2.0 * np.pi - psi0
    t_pred = (target_area - psi0) / omega_min
    while t_pred < 0.0:
        t_pred += 2.0 * np.pi / omega_min

    t_i = t_pred
    for _ in range(max_iter):
        res = rho1_at(t_i)
        trace.append((t_i, res.rho1))
        if two_pi_type:
            if res.rho0 > 1.0 - tol:
                return t_i
        elif abs(res.rho1 - target_rho1) < tol:
            return t_i
        # refine the local phase and re-aim at the target
        contrast = max(1.0 - res.leakage, 1e-9)
        psi = 2.0 * np.arcsin(np.sqrt(np.clip(res.rho1 / contrast, 0.0, 1.0)))
        probe2 = rho1_at(t_i + 0.05 * 2 * np.pi / omega_min)
        if probe2.rho1 < res.rho1:
            psi = 2.0 * np.pi - psi
        target_mod = np.mod(target_area, 2.0 * np.pi)
        delta = np.mod(target_mod - psi + np.pi, 2.0 * np.pi) - np.pi
        step = delta / omega_min
        if t_i + step < 0.0:
            step += 2.0 * np.pi / omega_min
        t_i = t_i + step
    raise CalibrationFailedError(
        f"no t_i matching area {target_area} within {tol}", trace
    )
