"""Trap potential families and time-dependent trap-separation trajectories."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .grids import Grid1D, symmetric_grid

PIECEWISE_HARMONIC = "piecewise_harmonic"
GAUSSIAN = "gaussian"

# Box margin: trap centers never come within this many oscillator lengths of
# the wall, where amplitudes are < 1e-12.
BOX_MARGIN = 8.0


@dataclass(frozen=True)
class TrapShape:
    """Double-well family: cusp-joined harmonic wells or two summed Gaussians."""

    kind: str = PIECEWISE_HARMONIC
    omega: float = 1.0
    v0: Optional[float] = None   # Gaussian depth in units of hbar*omega_x

    def __post_init__(self):
        if self.kind not in (PIECEWISE_HARMONIC, GAUSSIAN):
            raise ValueError(f"unknown trap kind {self.kind!r}")
        if self.kind == GAUSSIAN and (self.v0 is None or self.v0 <= 0):
            raise ValueError("gaussian trap requires v0 > 0")
        if self.omega <= 0:
            raise ValueError("omega must be positive")


def potential_double_well(shape: TrapShape, a: float, x: np.ndarray) -> np.ndarray:
    """V(x) for wells centered at ±a.

    piecewise_harmonic: (omega^2/2)(|x| - a)^2, single well at a = 0.
    gaussian: -v0 [exp(-omega^2 (x-a)^2 / 2 v0) + exp(-omega^2 (x+a)^2 / 2 v0)],
    whose small-x single-well expansion is -v0 + omega^2 x^2 / 2.
    """
    if a < 0:
        raise ValueError("half-separation a must be >= 0")
    x = np.asarray(x, dtype=float)
    if shape.kind == PIECEWISE_HARMONIC:
        return 0.5 * shape.omega**2 * (np.abs(x) - a) ** 2
    w2 = shape.omega**2
    return -shape.v0 * (
        np.exp(-w2 * (x - a) ** 2 / (2.0 * shape.v0))
        + np.exp(-w2 * (x + a) ** 2 / (2.0 * shape.v0))
    )


def potential_single_well(shape: TrapShape, center: float, x: np.ndarray) -> np.ndarray:
    """One isolated well centered at `center` (for trap-resolved projectors)."""
    x = np.asarray(x, dtype=float)
    if shape.kind == PIECEWISE_HARMONIC:
        return 0.5 * shape.omega**2 * (x - center) ** 2
    w2 = shape.omega**2
    return -shape.v0 * np.exp(-w2 * (x - center) ** 2 / (2.0 * shape.v0))


def default_grid(a_max: float, n: int = 512) -> Grid1D:
    """Simulation box [-a_max - margin, a_max + margin)."""
    return symmetric_grid(a_max + BOX_MARGIN, n)


@dataclass(frozen=True)
class TrajectorySpec:
    """Half-separation a(t): ramp in, hold at a_min, mirrored ramp out.

    cosine profile: a(t) = a_min + (a_max - a_min)(1 + cos(pi t / t_r))/2 on
    the approach. spline profile: monotone-in-time PCHIP through `knots`
    ((t, a) pairs spanning [0, t_r], first knot pinned at (0, a_max)), values
    clamped to [a_min_hard, a_max]. The release ramp is the time mirror of
    the approach, so a(T - t) = a(t) exactly.
    """

    a_max: float
    a_min: float
    t_r: float
    t_i: float = 0.0
    profile: str = "cosine"
    knots: Optional[tuple[tuple[float, float], ...]] = None
    a_min_hard: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.a_min <= self.a_max):
            raise ValueError("require 0 < a_min <= a_max")
        if self.t_r <= 0.0:
            raise ValueError("ramp time t_r must be positive")
        if self.t_i < 0.0:
            raise ValueError("hold time t_i must be >= 0")
        if self.profile not in ("cosine", "spline"):
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.profile == "spline":
            if not self.knots or len(self.knots) < 3:
                raise ValueError("spline profile needs at least 3 knots")
            ts = [t for t, _ in self.knots]
            if ts != sorted(ts) or abs(ts[0]) > 1e-12 or abs(ts[-1] - self.t_r) > 1e-9:
                raise ValueError("knot times must ascend from 0 to t_r")
            if abs(self.knots[0][1] - self.a_max) > 1e-9:
                raise ValueError("first knot must sit at a_max")
            if self.a_min_hard < 0:
                raise ValueError("a_min_hard must be >= 0")
            object.__setattr__(self, "knots", tuple((float(t), float(a))
                                                    for t, a in self.knots))

    @property
    def duration(self) -> float:
        return 2.0 * self.t_r + self.t_i

@lru_cache(maxsize=64)
def _spline_interpolator(knots: tuple) -> PchipInterpolator:
    ts = np.array([t for t, _ in knots])
    avals = np.array([a for _, a in knots])
    return PchipInterpolator(ts, avals)


def _ramp_value(traj: TrajectorySpec, t_ramp):
    """a on the approach ramp, t_ramp in [0, t_r]."""
    if traj.profile == "cosine":
        return traj.a_min + (traj.a_max - traj.a_min) * (
            1.0 + np.cos(np.pi * t_ramp / traj.t_r)
        ) / 2.0
    f = _spline_interpolator(traj.knots)
    return np.clip(f(t_ramp), traj.a_min_hard, traj.a_max)


def separation_at(traj: TrajectorySpec, t):
    """Half-separation a(t) over the full cycle; errors outside [0, duration]."""
    t_arr = np.asarray(t, dtype=float)
    T = traj.duration
    eps = 1e-9 * max(1.0, T)
    if np.any(t_arr < -eps) or np.any(t_arr > T + eps):
        raise ValueError(f"t outside trajectory duration [0, {T}]")
    t_clip = np.clip(t_arr, 0.0, T)
    # mirror the release onto the approach, hold clamps to t_r
    t_eff = np.where(t_clip > T - traj.t_r, T - t_clip, t_clip)
    t_eff = np.minimum(t_eff, traj.t_r)
    if traj.profile == "spline":
        hold_a = float(_ramp_value(traj, traj.t_r))
        out = np.where(
            (t_clip >= traj.t_r) & (t_clip <= traj.t_r + traj.t_i),
            hold_a,
            _ramp_value(traj, t_eff),
        )
    else:
        out = _ramp_value(traj, t_eff)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def hold_separation(traj: TrajectorySpec) -> float:
    """Separation during the hold (a_min for cosine, ramp end for spline)."""
    return float(separation_at(traj, traj.t_r))


def potential_sampler(
    shape: TrapShape, traj: TrajectorySpec, grid: Grid1D
) -> Callable[[float], np.ndarray]:
    """Time-dependent double-well potential on the grid."""
    x = grid.x

    def v_of_t(t: float) -> np.ndarray:
        return potential_double_well(shape, separation_at(traj, t), x)

    return v_of_t


def cosine_ramp_knots(
    a_max: float, a_end: float, t_r: float, n_knots: int = 8
) -> tuple[tuple[float, float], ...]:
    """Knots sampling the cosine ramp (warm start for trajectory optimization)."""
    ts = np.linspace(0.0, t_r, n_knots)
    avals = a_end + (a_max - a_end) * (1.0 + np.cos(np.pi * ts / t_r)) / 2.0
    avals[0], avals[-1] = a_max, a_end
    return tuple((float(t), float(a)) for t, a in zip(ts, avals))
