"""Uniform spatial grids and wavefunctions (1D and two-particle 1D)."""
from __future__ import annotations

import numpy as np


class GridMismatchError(ValueError):
    pass


class Grid1D:
    """Uniform periodic grid on [x_min, x_max); n must be a power of two >= 64."""

    def __init__(self, x_min: float, x_max: float, n: int):
        if n < 64 or (n & (n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 64, got {n}")
        if not x_max > x_min:
            raise ValueError("x_max must exceed x_min")
        self.x_min = float(x_min)
        self.x_max = float(x_max)
        self.n = int(n)
        self.x = np.linspace(self.x_min, self.x_max, self.n, endpoint=False)
        self.dx = self.x[1] - self.x[0]
        self.k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def __eq__(self, other):
        return (
            isinstance(other, Grid1D)
            and self.n == other.n
            and self.x_min == other.x_min
            and self.x_max == other.x_max
        )

    def __hash__(self):
        return hash((self.x_min, self.x_max, self.n))

    def __repr__(self):
        return f"Grid1D([{self.x_min}, {self.x_max}), n={self.n})"


def symmetric_grid(half_width: float, n: int) -> Grid1D:
    return Grid1D(-half_width, half_width, n)


class Wavefunction1D:
    """Complex amplitudes on a Grid1D; norm convention sum |psi|^2 dx = 1."""

    def __init__(self, grid: Grid1D, psi: np.ndarray):
        if psi.shape != (grid.n,):
            raise ValueError(f"amplitude shape {psi.shape} != ({grid.n},)")
        self.grid = grid
        self.psi = np.asarray(psi, dtype=complex)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.grid.dx))

    def normalize(self) -> "Wavefunction1D":
        self.psi /= self.norm()
        return self

    def copy(self) -> "Wavefunction1D":
        return Wavefunction1D(self.grid, self.psi.copy())


class Wavefunction2D:
    """Two-particle amplitudes psi[i, j] ~ psi(x1_i, x2_j) on a shared Grid1D."""

    def __init__(self, grid: Grid1D, psi: np.ndarray):
        if psi.shape != (grid.n, grid.n):
            raise ValueError(f"amplitude shape {psi.shape} != ({grid.n}, {grid.n})")
        self.grid = grid
        self.psi = np.asarray(psi, dtype=complex)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.grid.dx**2))

    def normalize(self) -> "Wavefunction2D":
        self.psi /= self.norm()
        return self

    def copy(self) -> "Wavefunction2D":
        return Wavefunction2D(self.grid, self.psi.copy())

    def exchange_asymmetry(self) -> float:
        """Norm of the exchange-antisymmetric component."""
        anti = 0.5 * (self.psi - self.psi.T)
        return float(np.sqrt(np.sum(np.abs(anti) ** 2) * self.grid.dx**2))


def symmetrized_product(a: Wavefunction1D, b: Wavefunction1D) -> Wavefunction2D:
    """Normalized bosonic product state from two single-particle states."""
    if a.grid != b.grid:
        raise GridMismatchError("product factors live on different grids")
    psi = np.outer(a.psi, b.psi)
    psi = psi + psi.T
    out = Wavefunction2D(a.grid, psi)
    return out.normalize()


def overlap(a, b) -> complex:
    """<a|b> with the grid measure (dx in 1D, dx^2 in 2D)."""
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")
    if isinstance(a, Wavefunction1D) and isinstance(b, Wavefunction1D):
        return complex(np.vdot(a.psi, b.psi) * a.grid.dx)
    if isinstance(a, Wavefunction2D) and isinstance(b, Wavefunction2D):
        return complex(np.vdot(a.psi, b.psi) * a.grid.dx**2)
    raise GridMismatchError("cannot overlap 1D with 2D wavefunction")
