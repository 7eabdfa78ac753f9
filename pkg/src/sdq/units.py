"""Unit system: dimensionless internals, physical inputs converted once.

Internally hbar = m = omega_x = 1: lengths in units of the ground-state
spread 1/alpha = sqrt(hbar/(m*omega_x)), times in 1/omega_x, energies in
hbar*omega_x. Physical quantities (SI) enter only through UnitSystem.
"""
from __future__ import annotations

from dataclasses import dataclass, field

HBAR = 1.054571817e-34          # J s
ATOMIC_MASS_KG = 1.66053906660e-27
RB87_MASS_KG = 86.909180527 * ATOMIC_MASS_KG
BOHR_RADIUS_M = 5.29177210903e-11


@dataclass(frozen=True)
class UnitSystem:
    """Trap frequencies and atomic mass defining the dimensionless units."""

    omega_x: float              # rad/s
    omega_y: float              # rad/s
    omega_z: float              # rad/s
    mass: float = RB87_MASS_KG  # kg
    alpha_inv: float = field(init=False)

    def __post_init__(self):
        for name in ("omega_x", "omega_y", "omega_z"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        object.__setattr__(
            self, "alpha_inv", (HBAR / (self.mass * self.omega_x)) ** 0.5
        )

    def length_to_dimensionless(self, meters: float) -> float:
        """Physical length -> units of alpha_inv."""
        return meters / self.alpha_inv

    def time_to_dimensionless(self, seconds: float) -> float:
        """Physical time -> units of 1/omega_x."""
        return seconds * self.omega_x


RB87_MICROTRAP = UnitSystem(omega_x=2.0e5, omega_y=2.0e5, omega_z=1.1e6)
RB87_GAUSSIAN_TRAP = UnitSystem(omega_x=6.0e5, omega_y=6.0e5, omega_z=6.0e5)
