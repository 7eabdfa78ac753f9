"""Acceptance checks: each criterion measured at its stated tolerance.

Shared by the CLI (`sdq verify`) and the pytest acceptance module. Every
check returns a CheckResult carrying the measured numbers next to their
thresholds; callers decide how to report or assert.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Optional

import numpy as np
from scipy.optimize import curve_fit

from ..eigen import localized_doublet, splitting_frequency, stationary_states
from ..entangler import (
    bell_fidelity,
    evolve_two_boson,
    hubbard_from_traps,
    populations,
    two_site_evolution,
)
from ..grids import Wavefunction1D, overlap, symmetrized_product
from ..propagate import propagate_1d, propagate_2d
from ..single_qubit import QubitBasis, calibrate_pulse, run_single_qubit, sweep_rabi_map
from ..trajopt import OptimizationConfig, optimize_trajectory
from ..traps import (
    TrajectorySpec,
    TrapShape,
    default_grid,
    potential_double_well,
    potential_sampler,
)
from ..two_qubit import (
    IN_LINE,
    PulseStep,
    effective_1d_coupling,
    run_collisional_hold,
    run_phase_gate,
    standard_sequence,
)
from ..units import BOHR_RADIUS_M, RB87_MICROTRAP, UnitSystem

SHAPE = TrapShape()
A_T = 106 * BOHR_RADIUS_M
FIG4_UNITS = UnitSystem(omega_x=6.0e5, omega_y=6.0e5, omega_z=6.0e5)

# phase-gate cells pre-located with the dressed few-mode model and pinned by
# development-time grid runs; physical parameters are the Fig.2 set, the
# (a_min, t_r, t_i) knobs are the gate controls
PHASE_GATE_SCAN_TR = (55.0, 60.0)
PHASE_GATE_SCAN_TI = (62.0, 64.0)
PHASE_GATE_SCAN_AMIN = 1.8
PHASE_GATE_INLINE_AMIN = 1.70
PHASE_GATE_INLINE_TR = 86.0


@dataclass
class Metric:
    name: str
    measured: float
    comparator: str      # "<", ">", "in"
    threshold: Any
    passed: bool


@dataclass
class CheckResult:
    name: str
    passed: bool
    metrics: list[Metric] = field(default_factory=list)
    elapsed_s: float = 0.0
    notes: str = ""

    def add(self, name: str, measured: float, comparator: str, threshold) -> Metric:
        if comparator == "<":
            ok = measured < threshold
        elif comparator == ">":
            ok = measured > threshold
        elif comparator == "in":
            lo, hi = threshold
            ok = lo <= measured <= hi
        else:
            raise ValueError(comparator)
        m = Metric(name, float(measured), comparator, threshold, bool(ok))
        self.metrics.append(m)
        return m

    def finish(self) -> "CheckResult":
        self.passed = all(m.passed for m in self.metrics)
        return self


def _num(overrides: Optional[dict], key: str, default):
    if overrides and key in overrides:
        return overrides[key]
    return default


# ---------------------------------------------------------------------------


def check_eq1_two_level(overrides=None) -> CheckResult:
    """Frozen double well at a=1.8: population follows sin^2(Omega t / 2)."""
    t0 = time.time()
    res = CheckResult("eq1_two_level", False)
    dt = _num(overrides, "dt_1d", 2e-3)
    n = _num(overrides, "n_1d", 512)
    grid = default_grid(5.0, n)
    v = potential_double_well(SHAPE, 1.8, grid.x)
    left, right, omega = localized_doublet(grid, v)
    period = 2.0 * np.pi / omega

    errs = []

    def watch(t, psi):
        rho1 = abs(overlap(right, psi)) ** 2
        errs.append(abs(rho1 - np.sin(omega * t / 2.0) ** 2))

    propagate_1d(left.copy(), lambda t: v, 0.0, period, dt,
                 observer=watch, observe_every=50)
    res.add("max |rho1 - sin^2(Omega t/2)|", max(errs), "<", 1e-2)
    res.elapsed_s = time.time() - t0
    res.add("runtime_s", res.elapsed_s, "<", 10.0)
    return res.finish()


def check_degenerate_splitting(overrides=None) -> CheckResult:
    """At a=5 the doublet is degenerate and a no-approach cycle does nothing."""
    t0 = time.time()
    res = CheckResult("degenerate_splitting", False)
    grid = default_grid(5.0, 1024)
    omega = splitting_frequency(
        lambda a: potential_double_well(SHAPE, a, grid.x), 5.0, grid
    )
    res.add("Omega(a=5)", abs(omega), "<", 1e-6)
    traj = TrajectorySpec(a_max=5.0, a_min=5.0, t_r=30.0, t_i=0.0)
    run = run_single_qubit(SHAPE, traj, "zero",
                           grid=default_grid(5.0, _num(overrides, "n_1d", 512)),
                           dt=_num(overrides, "dt_1d", 2e-3))
    res.add("rho1 after no-approach cycle", run.rho1, "<", 1e-3)
    res.elapsed_s = time.time() - t0
    return res.finish()


def _rabi_model(t, amp, omega, phase, floor):
    return amp * np.sin(omega * t / 2.0 + phase) ** 2 + floor


def check_fig1_qualitative(overrides=None, workers: Optional[int] = None) -> CheckResult:
    """16x16 sweep: sinusoidal stripes at Omega(a_min); leakage columns."""
    t0 = time.time()
    res = CheckResult("fig1_qualitative", False)
    n = _num(overrides, "n_1d", 512)
    dt = _num(overrides, "dt_1d", 2e-3)
    t_r_grid = list(np.linspace(2.0, 80.0, 16))
    t_i_grid = list(np.linspace(0.0, 150.0, 16))
    cells = sweep_rabi_map(
        SHAPE, 5.0, 1.8, t_r_grid, t_i_grid, n=n, dt=dt,
        workers=workers if workers is not None else (os.cpu_count() or 1),
    )
    grid = default_grid(5.0, 1024)
    omega_ref = splitting_frequency(
        lambda a: potential_double_well(SHAPE, a, grid.x), 1.8, grid
    )
    last = cells[-1]
    rho1 = np.array([c.result.rho1 for c in last])
    ts = np.array([c.t_i for c in last])
    p0 = (rho1.max() - rho1.min(), omega_ref, 1.0, rho1.min())
    popt, _ = curve_fit(_rabi_model, ts, rho1, p0=p0, maxfev=20000)
    omega_fit = abs(popt[1])
    res.add("stripe frequency rel. error", abs(omega_fit - omega_ref) / omega_ref,
            "<", 0.02)
    leak_last = float(np.mean([c.result.leakage for c in cells[-1]]))
    leak_first = float(np.mean([c.result.leakage for c in cells[0]]))
    res.add("mean leakage, largest t_r", leak_last, "<", 1e-2)
    res.add("mean leakage, smallest t_r", leak_first, ">", 1e-2)
    res.elapsed_s = time.time() - t0
    return res.finish()


def check_collisional_null(overrides=None) -> CheckResult:
    """g = 0 run: no collisional phase, no fidelity."""
    t0 = time.time()
    res = CheckResult("collisional_null", False)
    traj = TrajectorySpec(a_max=5.0, a_min=1.8, t_r=30.0, t_i=20.0)
    out = run_collisional_hold(
        SHAPE, traj, 0.0,
        grid=default_grid(5.0, _num(overrides, "n_2d", 256)),
        dt=_num(overrides, "dt_2d", 5e-3),
        require_calibrated=False,
    )
    res.add("|phi_c| at g = 0", abs(out.phi_c), "<", 1e-6)
    res.add("fidelity at g = 0", out.fidelity, "<", 1e-6)
    res.elapsed_s = time.time() - t0
    return res.finish()


def check_phase_gate_existence(overrides=None) -> CheckResult:
    """Fidelity > 0.99 cell, in-line phase table, grid convergence of phi_c."""
    t0 = time.time()
    res = CheckResult("phase_gate_existence", False)
    g1d = effective_1d_coupling(RB87_MICROTRAP, A_T)
    n2 = _num(overrides, "n_2d", 256)
    dt2 = _num(overrides, "dt_2d", 5e-3)

    best = None
    for t_r in PHASE_GATE_SCAN_TR:
        for t_i in PHASE_GATE_SCAN_TI:
            traj = TrajectorySpec(
                a_max=5.0, a_min=PHASE_GATE_SCAN_AMIN, t_r=t_r, t_i=t_i
            )
            out = run_collisional_hold(
                SHAPE, traj, g1d, grid=default_grid(5.0, n2), dt=dt2,
                require_calibrated=False,
            )
            if best is None or out.fidelity > best[1].fidelity:
                best = (traj, out)
    best_traj, best_out = best
    res.add("max fidelity in scan", best_out.fidelity, ">", 0.99)
    res.add("phi(g=0) - 2 phi_s consistency",
            abs(np.angle(np.exp(1j * (best_out.phi_g0 - 2 * best_out.phi_s)))),
            "<", 1e-6)

    # in-line sequence at a calibrated n*2pi ridge cell
    t_i_seq = calibrate_pulse(
        SHAPE, 5.0, PHASE_GATE_INLINE_AMIN, PHASE_GATE_INLINE_TR, 2.0 * np.pi
    )
    hold_traj = TrajectorySpec(
        a_max=5.0, a_min=PHASE_GATE_INLINE_AMIN,
        t_r=PHASE_GATE_INLINE_TR, t_i=t_i_seq,
    )
    t_i_pi = calibrate_pulse(SHAPE, 5.0, 1.8, 60.0, np.pi)
    pi_traj = TrajectorySpec(a_max=5.0, a_min=1.8, t_r=60.0, t_i=t_i_pi)
    table = run_phase_gate(
        IN_LINE, SHAPE, standard_sequence(IN_LINE, pi_traj, hold_traj), g1d,
        n_2d=n2, dt_2d=dt2,
    )
    worst = max(
        abs(table.absorbed_phase[k]) for k in ("00", "01", "10")
    )
    dphi = abs(
        float(np.angle(np.exp(1j * (table.collisional_phase - np.pi))))
    )
    res.add("in-line |phases 00,01,10|", worst, "<", 0.05)
    res.add("in-line |phase 11 - pi|", dphi, "<", 0.05)

    # grid refinement of the best scan cell: n doubled, dt halved
    refined = run_collisional_hold(
        SHAPE, best_traj, g1d, grid=default_grid(5.0, 2 * n2), dt=dt2 / 2.0,
        require_calibrated=False, g0_check=False,
    )
    rel = abs(refined.phi_c - best_out.phi_c) / abs(refined.phi_c)
    res.add("phi_c refinement rel. change", rel, "<", 0.01)
    res.notes = (
        f"best cell t_r={best_traj.t_r}, t_i={best_traj.t_i}: "
        f"rho={best_out.rho:.5f}, phi_c={best_out.phi_c:+.5f}; "
        f"in-line hold t_i={t_i_seq:.3f}"
    )
    res.elapsed_s = time.time() - t0
    return res.finish()


@lru_cache(maxsize=1)
def _fig3_states():
    traj = TrajectorySpec(a_max=5.0, a_min=1.9, t_r=80.0, t_i=58.0)
    params = hubbard_from_traps(SHAPE, traj, RB87_MICROTRAP, A_T)
    states = evolve_two_boson(params, dt=0.01, n_samples=400)
    return traj, params, states


def check_eq2_symmetry(overrides=None) -> CheckResult:
    """Symmetric approach: rho00 = rho11 = rho_dq / 2 at every sample."""
    t0 = time.time()
    res = CheckResult("eq2_symmetry", False)
    _, _, states = _fig3_states()
    d_01 = 0.0
    d_dq = 0.0
    for s in states:
        p = populations(s)
        d_01 = max(d_01, abs(p[0] - p[3]))
        d_dq = max(d_dq, abs(p[0] - p[4] / 2.0))
    res.add("max |rho00 - rho11|", d_01, "<", 1e-6)
    res.add("max |rho00 - rho_dq/2|", d_dq, "<", 1e-6)
    res.elapsed_s = time.time() - t0
    return res.finish()


def check_entanglement_creation(overrides=None) -> CheckResult:
    """Final Bell fidelity and double-trap occupation at the Fig.3 parameters."""
    t0 = time.time()
    res = CheckResult("entanglement_creation", False)
    _, _, states = _fig3_states()
    final = states[-1]
    res.add("final Bell fidelity", bell_fidelity(final), ">", 0.95)
    res.add("final rho_dt", populations(final)[5], "<", 0.1)
    res.elapsed_s = time.time() - t0
    return res.finish()


def check_fig4_optimization(overrides=None) -> CheckResult:
    """Optimized Gaussian ramp beats 1% and the cosine baseline by >= 5x."""
    t0 = time.time()
    res = CheckResult("fig4_optimization", False)
    config = OptimizationConfig(
        shape=TrapShape(kind="gaussian", v0=200.0),
        a_max=70.0,
        a_min_hard=14.35,
        t_r=1100.0,
        knots=8,
        budget=_num(overrides, "budget", 150),
        seed=1,
        n=_num(overrides, "n_1d", 512),
    )
    result = optimize_trajectory(config)
    res.add("optimized ramp infidelity", result.infidelity, "<", 0.01)
    ratio = result.baseline_infidelity / max(result.infidelity, 1e-30)
    res.add("cosine baseline / optimized", ratio, ">", 5.0)
    res.notes = (
        f"baseline={result.baseline_infidelity:.3e}, "
        f"optimized={result.infidelity:.3e}, evals={result.evaluations}"
    )
    res.elapsed_s = time.time() - t0
    return res.finish()


def check_numerics_invariants(overrides=None) -> CheckResult:
    """Norm drift, exchange-symmetry drift, second-order dt convergence."""
    t0 = time.time()
    res = CheckResult("numerics_invariants", False)
    n = _num(overrides, "n_1d", 512)
    dt = _num(overrides, "dt_1d", 2e-3)
    grid = default_grid(5.0, n)
    v = potential_double_well(SHAPE, 1.8, grid.x)
    left, _, _ = localized_doublet(grid, v)
    out = propagate_1d(left.copy(), lambda t: v, 0.0, 10_000 * dt, dt)
    res.add("norm drift per 1e4 steps", abs(out.norm() - 1.0), "<", 1e-9)

    grid2 = default_grid(5.0, _num(overrides, "n_2d", 256))
    basis = QubitBasis.for_shape(SHAPE, 5.0, grid2)
    psi2 = symmetrized_product(basis.left, basis.right)
    traj2 = TrajectorySpec(a_max=5.0, a_min=1.8, t_r=10.0, t_i=5.0)
    out2 = propagate_2d(
        psi2, potential_sampler(SHAPE, traj2, grid2),
        effective_1d_coupling(RB87_MICROTRAP, A_T),
        0.0, traj2.duration, _num(overrides, "dt_2d", 5e-3),
    )
    res.add("2D exchange asymmetry", out2.exchange_asymmetry(), "<", 1e-9)

    traj = TrajectorySpec(a_max=5.0, a_min=1.8, t_r=10.0, t_i=0.0)
    v_of_t = potential_sampler(SHAPE, traj, grid)
    base_dt = _num(overrides, "dt_conv", 0.02)
    runs = {}
    for f, label in ((1.0, "dt"), (0.5, "dt/2"), (0.125, "ref")):
        runs[label] = propagate_1d(
            left.copy(), v_of_t, 0.0, traj.duration, base_dt * f
        )
    err1 = np.linalg.norm(runs["dt"].psi - runs["ref"].psi) * np.sqrt(grid.dx)
    err2 = np.linalg.norm(runs["dt/2"].psi - runs["ref"].psi) * np.sqrt(grid.dx)
    res.add("dt-halving error ratio", err1 / err2, "in", (3.0, 5.0))
    res.elapsed_s = time.time() - t0
    return res.finish()


def check_hubbard_crosscheck(overrides=None) -> CheckResult:
    """Two-site model vs exact two-particle grid over the Fig.3 trajectory."""
    t0 = time.time()
    res = CheckResult("hubbard_crosscheck", False)
    traj, params, _ = _fig3_states()
    n2 = _num(overrides, "n_2d", 256)
    dt2 = _num(overrides, "dt_2d", 5e-3)
    grid = default_grid(traj.a_max, n2)

    from ..traps import separation_at

    left0, right0, _ = localized_doublet(
        grid, potential_double_well(SHAPE, traj.a_max, grid.x), method="fd"
    )
    psi0 = symmetrized_product(left0, right0)
    samples = []

    def watch(t, psi):
        left, right, _ = localized_doublet(
            grid, potential_double_well(SHAPE, separation_at(traj, t), grid.x),
            method="fd",
        )
        a_lr = np.einsum("i,j,ij->", left.psi.conj(), right.psi.conj(), psi.psi) \
            * grid.dx**2
        a_rl = np.einsum("i,j,ij->", right.psi.conj(), left.psi.conj(), psi.psi) \
            * grid.dx**2
        a_ll = np.einsum("i,j,ij->", left.psi.conj(), left.psi.conj(), psi.psi) \
            * grid.dx**2
        a_rr = np.einsum("i,j,ij->", right.psi.conj(), right.psi.conj(), psi.psi) \
            * grid.dx**2
        samples.append(
            (t, 0.5 * abs(a_lr + a_rl) ** 2, abs(a_ll) ** 2 + abs(a_rr) ** 2)
        )

    steps = int(round(traj.duration / dt2))
    propagate_2d(
        psi0, potential_sampler(SHAPE, traj, grid), params.g1d,
        0.0, traj.duration, dt2,
        observer=watch, observe_every=max(1, steps // 150),
    )
    grid_rows = np.array(samples)
    model = two_site_evolution(params.two_site_terms, traj.duration, dt=0.01,
                               n_samples=600)
    p11 = np.interp(grid_rows[:, 0], model[:, 0], model[:, 1])
    pdb = np.interp(grid_rows[:, 0], model[:, 0], model[:, 2])
    res.add("max |p11 grid - model|", float(np.max(np.abs(grid_rows[:, 1] - p11))),
            "<", 0.05)
    res.add("max |p_pair grid - model|", float(np.max(np.abs(grid_rows[:, 2] - pdb))),
            "<", 0.05)
    res.elapsed_s = time.time() - t0
    return res.finish()


ALL_CHECKS: dict[str, Callable[..., CheckResult]] = {
    "eq1_two_level": check_eq1_two_level,
    "degenerate_splitting": check_degenerate_splitting,
    "fig1_qualitative": check_fig1_qualitative,
    "collisional_null": check_collisional_null,
    "phase_gate_existence": check_phase_gate_existence,
    "eq2_symmetry": check_eq2_symmetry,
    "entanglement_creation": check_entanglement_creation,
    "fig4_optimization": check_fig4_optimization,
    "numerics_invariants": check_numerics_invariants,
    "hubbard_crosscheck": check_hubbard_crosscheck,
}


def run_check(name: str, overrides: Optional[dict] = None) -> CheckResult:
    if name not in ALL_CHECKS:
        raise KeyError(f"unknown check {name!r}; known: {sorted(ALL_CHECKS)}")
    return ALL_CHECKS[name](overrides=overrides)


def run_all_checks(
    names: Optional[list[str]] = None, overrides: Optional[dict] = None
) -> list[CheckResult]:
    selected = names or list(ALL_CHECKS)
    return [run_check(name, overrides=overrides) for name in selected]
