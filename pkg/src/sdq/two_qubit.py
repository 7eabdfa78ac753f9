"""Two-qubit collisional phase gate.

The collisional step approaches two traps holding one atom each, applies an
n*2pi tunneling pulse, and separates them again. The two-particle return
amplitude carries a total phase phi; subtracting twice the single-particle
phase phi_s of the identical trajectory isolates the collisional part
phi_c = phi - 2 phi_s, and F = rho (cos(phi_c - pi) + 1)/2.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .grids import Grid1D, Wavefunction1D, overlap, symmetrized_product
from .propagate import propagate_1d, propagate_2d
from .single_qubit import ADIABATIC_LEAKAGE, QubitBasis, run_single_qubit
from .traps import TrajectorySpec, TrapShape, default_grid, potential_sampler
from .units import UnitSystem

DEFAULT_N_2D = 256
DEFAULT_DT_2D = 5e-3


class MiscalibratedPulseError(RuntimeError):
    pass


class GateLeakageError(RuntimeError):
    pass


def effective_1d_coupling(units: UnitSystem, a_t: float) -> float:
    """Dimensionless 1D contact strength from the 3D scattering length.

    The 3D contact 4*pi*hbar^2*a_t/m integrated over the transverse Gaussian
    ground states of frequencies omega_y, omega_z gives 2*hbar*a_t*
    sqrt(omega_y*omega_z); nondimensionalizing by hbar*omega_x/alpha yields
    g1d = 2*a_t*alpha*sqrt(omega_y*omega_z)/omega_x.
    """
    if a_t < 0:
        raise ValueError("scattering length must be >= 0")
    alpha = 1.0 / units.alpha_inv
    return 2.0 * a_t * alpha * np.sqrt(units.omega_y * units.omega_z) / units.omega_x


@dataclass(frozen=True)
class InteractionParams:
    a_t: float      # meters
    g1d: float      # dimensionless

    def __post_init__(self):
        if self.a_t < 0:
            raise ValueError("scattering length must be >= 0")
        if (self.g1d == 0.0) != (self.a_t == 0.0):
            raise ValueError("g1d must vanish exactly when a_t does")

    @classmethod
    def from_units(cls, units: UnitSystem, a_t: float) -> "InteractionParams":
        return cls(a_t=a_t, g1d=effective_1d_coupling(units, a_t))


@dataclass
class PhaseGateResult:
    rho: float            # two-particle return probability
    phi_s: float          # single-particle phase of the same trajectory
    phi: float            # total two-particle phase
    phi_c: float          # phi - 2 phi_s, wrapped to (-pi, pi]
    fidelity: float       # rho (cos(phi_c - pi) + 1) / 2
    return_1p: float = 1.0       # single-particle return probability
    phi_g0: float = 0.0          # two-particle phase of the g = 0 run
    leakage_1p: float = 0.0


def _wrap(angle: float) -> float:
    out = float(np.mod(angle + np.pi, 2.0 * np.pi) - np.pi)
    return np.pi if out == -np.pi else out


def phase_gate_fidelity(rho: float, phi_c: float) -> float:
    return rho * (np.cos(phi_c - np.pi) + 1.0) / 2.0


def run_collisional_hold(
    shape: TrapShape,
    traj: TrajectorySpec,
    g1d: float,
    grid: Optional[Grid1D] = None,
    dt: float = DEFAULT_DT_2D,
    require_calibrated: bool = True,
    g0_check: bool = True,
    fft_workers: int = 1,
) -> PhaseGateResult:
    """Collisional n*2pi hold between two traps holding one atom each.

    Runs the two-particle trajectory with g1d and with g = 0, plus a 1D run
    for phi_s at the same resolution (phi(g=0) = 2 phi_s is a standing
    consistency check; skip the g = 0 run with g0_check=False). With
    require_calibrated, a single-particle return below 0.99 raises
    MiscalibratedPulseError.
    """
    if g1d < 0:
        raise ValueError("g1d must be >= 0")
    if grid is None:
        grid = default_grid(traj.a_max, DEFAULT_N_2D)
    basis = QubitBasis.for_shape(shape, traj.a_max, grid)
    psi0 = symmetrized_product(basis.left, basis.right)
    v_of_t = potential_sampler(shape, traj, grid)

    psi_g = propagate_2d(psi0, v_of_t, g1d, 0.0, traj.duration, dt,
                         fft_workers=fft_workers)
    amp_g = overlap(psi0, psi_g)

    if g0_check:
        psi_g0 = propagate_2d(psi0, v_of_t, 0.0, 0.0, traj.duration, dt,
                              fft_workers=fft_workers)
        amp_g0 = overlap(psi0, psi_g0)
    else:
        amp_g0 = None

    psi_1p = propagate_1d(basis.left.copy(), v_of_t, 0.0, traj.duration, dt)
    amp_1p = overlap(basis.left, psi_1p)
    return_1p = abs(amp_1p) ** 2
    leak_1p = 1.0 - return_1p - abs(overlap(basis.right, psi_1p)) ** 2

    if require_calibrated and return_1p < 0.99:
        raise MiscalibratedPulseError(
            f"single-particle return {return_1p:.4f} < 0.99: "
            "trajectory is not an n*2pi pulse"
        )

    phi = float(np.angle(amp_g))
    phi_s = float(np.angle(amp_1p))
    phi_c = _wrap(phi - 2.0 * phi_s)
    rho = float(abs(amp_g) ** 2)
    return PhaseGateResult(
        rho=rho,
        phi_s=phi_s,
        phi=phi,
        phi_c=phi_c,
        fidelity=float(phase_gate_fidelity(rho, phi_c)),
        return_1p=float(return_1p),
        phi_g0=float(np.angle(amp_g0)) if amp_g0 is not None else 2.0 * phi_s,
        leakage_1p=float(leak_1p),
    )


@dataclass
class FidelityCell:
    t_r: float
    t_i: float
    result: Optional[PhaseGateResult] = None
    error: Optional[str] = None


def _fidelity_cell(args) -> FidelityCell:
    shape, a_max, a_min, t_r, t_i, g1d, n, dt = args
    try:
        traj = TrajectorySpec(a_max=a_max, a_min=a_min, t_r=t_r, t_i=t_i)
        res = run_collisional_hold(
            shape, traj, g1d, grid=default_grid(a_max, n), dt=dt,
            require_calibrated=False,
        )
        return FidelityCell(t_r=t_r, t_i=t_i, result=res)
    except Exception as exc:
        return FidelityCell(t_r=t_r, t_i=t_i, error=f"{type(exc).__name__}: {exc}")


def fidelity_map(
    shape: TrapShape,
    a_max: float,
    a_min: float,
    t_r_grid: Sequence[float],
    t_i_grid: Sequence[float],
    g1d: float,
    n: int = DEFAULT_N_2D,
    dt: float = DEFAULT_DT_2D,
    workers: int = 0,
) -> list[list[FidelityCell]]:
    """Fig.2(c)-style map: one collisional hold per (t_r, t_i) cell.

    Off-resonant cells (not n*2pi pulses) are legitimate low-F entries, so
    the per-cell runs skip the calibration gate. Each 2D cell costs minutes
    at the default resolution; keep grids small or use workers.
    """
    if len(t_r_grid) == 0 or len(t_i_grid) == 0:
        raise ValueError("sweep grids must be non-empty")
    tasks = [
        (shape, a_max, a_min, float(tr), float(ti), g1d, n, dt)
        for tr in t_r_grid
        for ti in t_i_grid
    ]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(_fidelity_cell, tasks, chunksize=1))
    else:
        flat = [_fidelity_cell(t) for t in tasks]
    ncols = len(t_i_grid)
    return [flat[i * ncols : (i + 1) * ncols] for i in range(len(t_r_grid))]


# ---------------------------------------------------------------------------
# full gate sequences

IN_LINE = "in_line"
SIDE_BY_SIDE = "side_by_side"

LOGICAL_INPUTS = ("00", "01", "10", "11")


@dataclass(frozen=True)
class PulseStep:
    kind: str                  # "pi_b" or "collisional_hold"
    traj: TrajectorySpec


def standard_sequence(
    arrangement: str, pi_traj: Optional[TrajectorySpec], hold_traj: TrajectorySpec
) -> tuple[PulseStep, ...]:
    if arrangement == IN_LINE:
        if pi_traj is None:
            raise ValueError("in-line arrangement needs a calibrated pi pulse")
        return (
            PulseStep("pi_b", pi_traj),
            PulseStep("collisional_hold", hold_traj),
            PulseStep("pi_b", pi_traj),
        )
    if arrangement == SIDE_BY_SIDE:
        return (PulseStep("collisional_hold", hold_traj),)
    raise ValueError(f"unknown arrangement {arrangement!r}")


@dataclass
class StepRecord:
    step: int
    kind: str
    input: str
    amplitude: complex
    leakage: float


@dataclass
class PhaseGateTable:
    arrangement: str
    raw_phase: dict[str, float]
    return_prob: dict[str, float]
    absorbed_phase: dict[str, float]      # (0, 0, 0, phi_c) up to wrapping
    collisional_phase: float
    success: bool
    tolerance: float
    steps: list[StepRecord] = field(default_factory=list)


def _idle_energy(shape: TrapShape, a_max: float, grid: Grid1D) -> float:
    from .eigen import stationary_states
    from .traps import potential_single_well

    return stationary_states(
        grid, potential_single_well(shape, -a_max, grid.x), 1
    )[0].energy


def run_phase_gate(
    arrangement: str,
    shape: TrapShape,
    pulse_sequence: Sequence[PulseStep],
    g1d: float,
    logical_inputs: Sequence[str] = LOGICAL_INPUTS,
    grid_1d: Optional[Grid1D] = None,
    dt_1d: float = 2e-3,
    n_2d: int = DEFAULT_N_2D,
    dt_2d: float = DEFAULT_DT_2D,
    phase_tolerance: float = 0.05,
    leakage_threshold: float = ADIABATIC_LEAKAGE,
) -> PhaseGateTable:
    """Simulate the full gate sequence input by input.

    Atoms in the moving trap pair are propagated (1D alone, 2D when both
    inputs collide); atoms in static traps contribute exact ground-state
    idle phases. Single-particle phases are then absorbed into the basis so
    a working gate leaves the table (0, 0, 0, pi).
    """
    for inp in logical_inputs:
        if inp not in LOGICAL_INPUTS:
            raise ValueError(f"unknown logical input {inp!r}")
    steps = list(pulse_sequence)
    if not steps:
        raise ValueError("empty pulse sequence")

    hold = next((s for s in steps if s.kind == "collisional_hold"), None)
    if hold is None:
        raise ValueError("sequence must contain the collisional hold")

    # shared 1D machinery at the pi-pulse / single-2pi resolution
    a_max = steps[0].traj.a_max
    if grid_1d is None:
        grid_1d = default_grid(a_max)
    e_idle = _idle_energy(shape, a_max, grid_1d)

    records: list[StepRecord] = []

    def single_run(traj: TrajectorySpec, start: str) -> tuple[complex, complex, float]:
        """(amp_stay, amp_swap, leakage) for one atom in the moving pair."""
        res = run_single_qubit(shape, traj, start, grid=grid_1d, dt=dt_1d)
        a0 = np.sqrt(res.rho0) * np.exp(1j * res.phase0)
        a1 = np.sqrt(res.rho1) * np.exp(1j * res.phase1)
        if start == "zero":
            return a0, a1, res.leakage
        return a1, a0, res.leakage

    hold_result: Optional[PhaseGateResult] = None

    def hold_amplitudes() -> PhaseGateResult:
        nonlocal hold_result
        if hold_result is None:
            hold_result = run_collisional_hold(
                shape, hold.traj, g1d,
                grid=default_grid(hold.traj.a_max, n_2d), dt=dt_2d,
            )
        return hold_result

    raw_phase: dict[str, float] = {}
    return_prob: dict[str, float] = {}

    for inp in logical_inputs:
        i_a, i_b = int(inp[0]), int(inp[1])
        # trap occupied by each atom, tracked through the sequence
        pos_a, pos_b = f"A{i_a}", f"B{i_b}"
        amp = 1.0 + 0.0j
        for si, step in enumerate(steps):
            T = step.traj.duration
            if step.kind == "pi_b":
                stay, swap, leak = single_run(step.traj, "zero")
                if leak > leakage_threshold:
                    raise GateLeakageError(
                        f"step {si} (pi_b) leakage {leak:.3g} > {leakage_threshold}"
                    )
                if abs(swap) ** 2 < 1.0 - 10 * leakage_threshold:
                    raise MiscalibratedPulseError(
                        f"step {si}: pi pulse transfers only {abs(swap)**2:.4f}"
                    )
                # the B atom swaps traps; the A atom idles
                amp *= swap
                pos_b = "B1" if pos_b == "B0" else "B0"
                amp *= np.exp(-1j * e_idle * T)
                records.append(StepRecord(si, step.kind, inp, swap, leak))
            else:  # collisional hold between a specific trap pair
                pair = (
                    ("A1", "B0") if arrangement == IN_LINE else ("A1", "B1")
                )
                in_a = pos_a in pair
                in_b = pos_b in pair
                if in_a and in_b:
                    res = hold_amplitudes()
                    if res.leakage_1p > leakage_threshold:
                        raise GateLeakageError(
                            f"step {si} (hold) leakage {res.leakage_1p:.3g}"
                        )
                    a2 = np.sqrt(res.rho) * np.exp(1j * res.phi)
                    amp *= a2
                    records.append(StepRecord(si, step.kind, inp, a2, res.leakage_1p))
                elif in_a or in_b:
                    stay, _, leak = single_run(step.traj, "zero")
                    if leak > leakage_threshold:
                        raise GateLeakageError(
                            f"step {si} (hold, single atom) leakage {leak:.3g}"
                        )
                    if abs(stay) ** 2 < 0.99:
                        raise MiscalibratedPulseError(
                            f"step {si}: single-particle return "
                            f"{abs(stay)**2:.4f} < 0.99"
                        )
                    amp *= stay
                    amp *= np.exp(-1j * e_idle * T)  # the other atom idles
                    records.append(StepRecord(si, step.kind, inp, stay, leak))
                else:
                    amp *= np.exp(-2j * e_idle * T)
                    records.append(StepRecord(si, step.kind, inp, 1.0 + 0j, 0.0))
        raw_phase[inp] = float(np.angle(amp))
        return_prob[inp] = float(abs(amp) ** 2)

    absorbed = {}
    if set(LOGICAL_INPUTS) <= set(logical_inputs):
        base = raw_phase["00"]
        da = raw_phase["10"] - base
        db = raw_phase["01"] - base
        for inp in LOGICAL_INPUTS:
            i_a, i_b = int(inp[0]), int(inp[1])
            absorbed[inp] = _wrap(raw_phase[inp] - base - i_a * da - i_b * db)
        phi_c = absorbed["11"]
    else:
        phi_c = float("nan")
    success = bool(
        absorbed
        and all(abs(absorbed[k]) < phase_tolerance for k in ("00", "01", "10"))
        and abs(_wrap(phi_c - np.pi)) < phase_tolerance
    )
    return PhaseGateTable(
        arrangement=arrangement,
        raw_phase=raw_phase,
        return_prob=return_prob,
        absorbed_phase=absorbed,
        collisional_phase=phi_c,
        success=success,
        tolerance=phase_tolerance,
        steps=records,
    )
