"""Split-operator propagation of the time-dependent Schrödinger equation.

Strang (second-order) splitting with the kinetic half in spectral space and
the potential (plus, in 2D, the on-diagonal contact term) in position space.
The potential is sampled at the step midpoint, keeping global O(dt^2)
accuracy for time-dependent traps. Every factor is a pure phase, so the
norm is conserved to roundoff regardless of dt.
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft

from .grids import Grid1D, Wavefunction1D, Wavefunction2D

_CHECK_EVERY = 1000


class PropagationDivergedError(RuntimeError):
    pass


def _steps(t0: float, t1: float, dt: float) -> tuple[int, float]:
    """Whole steps plus a possible short final step."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    span = t1 - t0
    if span / dt < 1.0 - 1e-12:
        raise ValueError("(t1 - t0)/dt must be >= 1")
    n_full = int(np.floor(span / dt + 1e-12))
    rem = span - n_full * dt
    if rem < 1e-12 * max(1.0, abs(span)):
        rem = 0.0
    return n_full, rem


def propagate_1d(
    psi: Wavefunction1D,
    potential_at: Callable[[float], np.ndarray],
    t0: float,
    t1: float,
    dt: float,
    observer: Optional[Callable[[float, Wavefunction1D], None]] = None,
    observe_every: int = 0,
) -> Wavefunction1D:
    """Evolve psi under i dpsi/dt = [-(1/2) d2/dx2 + V(x, t)] psi."""
    grid = psi.grid
    out = _propagate_batch(
        psi.psi[:, None], grid, potential_at, t0, t1, dt,
        observer=(None if observer is None
                  else lambda t, m: observer(t, Wavefunction1D(grid, m[:, 0].copy()))),
        observe_every=observe_every,
    )
    return Wavefunction1D(grid, out[:, 0])


def _propagate_batch(
    mat: np.ndarray,
    grid: Grid1D,
    potential_at: Callable[[float], np.ndarray],
    t0: float,
    t1: float,
    dt: float,
    observer=None,
    observe_every: int = 0,
) -> np.ndarray:
    """Propagate several 1D states (columns of mat) through the same potential."""
    psi = np.array(mat, dtype=complex)
    n_full, rem = _steps(t0, t1, dt)
    kin = np.exp(-0.5j * dt * grid.k**2)[:, None]
    t = t0
    for i in range(n_full):
        v = potential_at(t + 0.5 * dt)
        ph = np.exp(-0.5j * dt * v)[:, None]
        psi *= ph
        psi = sfft.ifft(kin * sfft.fft(psi, axis=0, overwrite_x=True),
                        axis=0, overwrite_x=True)
        psi *= ph
        t += dt
        if i % _CHECK_EVERY == _CHECK_EVERY - 1 and not np.isfinite(
            psi[0, 0].real
        ):
            raise PropagationDivergedError(f"non-finite amplitudes at t={t}")
        if observer is not None and observe_every and (i + 1) % observe_every == 0:
            observer(t, psi)
    if rem > 0.0:
        v = potential_at(t + 0.5 * rem)
        ph = np.exp(-0.5j * rem * v)[:, None]
        kin_r = np.exp(-0.5j * rem * grid.k**2)[:, None]
        psi *= ph
        psi = sfft.ifft(kin_r * sfft.fft(psi, axis=0, overwrite_x=True),
                        axis=0, overwrite_x=True)
        psi *= ph
        t = t1
    if not np.all(np.isfinite(psi)):
        raise PropagationDivergedError(f"non-finite amplitudes at t={t}")
    return psi


def propagate_2d(
    psi: Wavefunction2D,
    potential_at: Callable[[float], np.ndarray],
    g: float,
    t0: float,
    t1: float,
    dt: float,
    observer: Optional[Callable[[float, Wavefunction2D], None]] = None,
    observe_every: int = 0,
    fft_workers: int = 1,
) -> Wavefunction2D:
    """Two particles on a line: H = sum_i [-(1/2) d2/dxi2 + V(xi, t)] + g δ(x1-x2).

    The contact term is the on-diagonal discrete delta (weight 1/dx), applied
    inside the potential half-steps.
    """
    if not np.isfinite(g):
        raise ValueError("contact strength g must be finite")
    grid = psi.grid
    n = grid.n
    out = np.array(psi.psi, dtype=complex)
    n_full, rem = _steps(t0, t1, dt)
    k2 = grid.k**2
    kin = np.exp(-0.25j * dt * k2)  # half along each axis -> full 2D kinetic step
    kin2 = np.multiply.outer(kin, kin)
    kin2 *= kin2  # exp(-i dt (k1^2+k2^2)/2)
    diag = np.arange(n)

    def _sub_run(nsteps: int, step: float, kin2_step: np.ndarray, t: float) -> float:
        nonlocal out
        gph = np.exp(-0.5j * step * g / grid.dx) if g != 0.0 else None
        for i in range(nsteps):
            v = potential_at(t + 0.5 * step)
            ph = np.exp(-0.5j * step * v)
            out *= ph[:, None]
            out *= ph[None, :]
            if gph is not None:
                out[diag, diag] *= gph
            tmp = sfft.fft2(out, overwrite_x=True, workers=fft_workers)
            tmp *= kin2_step
            out = sfft.ifft2(tmp, overwrite_x=True, workers=fft_workers)
            out *= ph[:, None]
            out *= ph[None, :]
            if gph is not None:
                out[diag, diag] *= gph
            t += step
            if i % _CHECK_EVERY == _CHECK_EVERY - 1 and not np.isfinite(
                out[0, 0].real
            ):
                raise PropagationDivergedError(f"non-finite amplitudes at t={t}")
            if observer is not None and observe_every and (i + 1) % observe_every == 0:
                observer(t, Wavefunction2D(grid, out.copy()))
        return t

    t = _sub_run(n_full, dt, kin2, t0)
    if rem > 0.0:
        kin_r = np.exp(-0.5j * rem * k2)
        _sub_run(1, rem, np.multiply.outer(kin_r, np.ones(n)) *
                 np.multiply.outer(np.ones(n), kin_r), t)
    if not np.all(np.isfinite(out)):
        raise PropagationDivergedError("non-finite amplitudes at end of run")
    return Wavefunction2D(grid, out)
