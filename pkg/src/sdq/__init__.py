"""Spatially delocalized qubits: gates and entanglement in movable microtraps."""

__version__ = "0.1.0"

from .units import UnitSystem, RB87_MASS_KG, BOHR_RADIUS_M, HBAR
from .grids import (
    Grid1D,
    GridMismatchError,
    Wavefunction1D,
    Wavefunction2D,
    overlap,
    symmetric_grid,
    symmetrized_product,
)
from .eigen import (
    BoundStateCountError,
    DoubleWellTables,
    EigenPair,
    localized_doublet,
    relative_contact_shift,
    splitting_frequency,
    stationary_states,
)
from .propagate import PropagationDivergedError, propagate_1d, propagate_2d
from .traps import (
    TrajectorySpec,
    TrapShape,
    default_grid,
    hold_separation,
    potential_double_well,
    potential_single_well,
    potential_sampler,
    separation_at,
)
from .single_qubit import (
    CalibrationFailedError,
    GateRunResult,
    QubitBasis,
    calibrate_pulse,
    run_single_qubit,
    sweep_rabi_map,
)
from .two_qubit import (
    GateLeakageError,
    InteractionParams,
    MiscalibratedPulseError,
    PhaseGateResult,
    PhaseGateTable,
    PulseStep,
    effective_1d_coupling,
    fidelity_map,
    run_collisional_hold,
    run_phase_gate,
    standard_sequence,
)
from .entangler import (
    EntanglerState,
    HubbardParams,
    bell_fidelity,
    evolve_two_boson,
    find_nodes,
    hubbard_from_traps,
    populations,
)
from .trajopt import (
    OptimizationConfig,
    OptimizationResult,
    leakage_objective,
    optimize_trajectory,
    rabi_after_optimized_ramp,
)
