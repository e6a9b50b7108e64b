"""Nearest-neighbour pair potentials, evaluated in the scaled separation.

All formulas take the dimensionless separation xi = distance / epsilon,
where epsilon = 1/N is the lattice small parameter, so a uniform chain with
spacing h = L/N sits at the scaled separation L.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "LennardJones",
    "Granular",
    "Potential",
    "potential_energy",
    "potential_deriv",
    "pair_force",
]

LATTICE_MINIMUM_FACTOR = 2.0 ** (1.0 / 6.0)


@dataclass(frozen=True)
class LennardJones:
    """12-6 potential; ``zero_distance`` is the separation where U = 0.

    The default places the minimum at scaled separation 1 (= L for L = 1),
    so the uniform lattice is an exact equilibrium.
    """

    depth: float = 0.25
    zero_distance: float = 1.0 / LATTICE_MINIMUM_FACTOR

    @property
    def minimum_distance(self) -> float:
        return LATTICE_MINIMUM_FACTOR * self.zero_distance


@dataclass(frozen=True)
class Granular:
    """Purely repulsive contact potential with finite range.

    Positive ``stiffness`` gives U > 0 and U' < 0 on (0, contact_range);
    both vanish at the contact range and beyond, so particles separated by
    more than ``contact_range`` (scaled) do not interact.
    """

    stiffness: float = 100.0
    exponent: float = 1.5
    contact_range: float = 1.0

    def __post_init__(self) -> None:
        if self.exponent <= 1.0:
            raise ValueError(f"exponent must exceed 1, got {self.exponent}")
        if self.contact_range <= 0.0:
            raise ValueError("contact_range must be positive")


Potential = Union[LennardJones, Granular]


def _check_positive(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0.0):
        raise ValueError("scaled separation must be positive; particles may not coincide")
    return xi


def potential_energy(pot: Potential, xi):
    """Pair energy at scaled separation xi."""
    xi = _check_positive(xi)
    if isinstance(pot, LennardJones):
        r6 = (pot.zero_distance / xi) ** 6
        return 4.0 * pot.depth * (r6 * r6 - r6)
    xs, p = pot.contact_range, pot.exponent
    inside = np.minimum(xi, xs)
    energy = pot.stiffness * (
        xs * inside ** (1.0 - p) / (p - 1.0)
        + inside * xs ** (1.0 - p)
        - p * xs ** (2.0 - p) / (p - 1.0)
    )
    return np.where(xi < xs, energy, 0.0)


def potential_deriv(pot: Potential, xi):
    """Analytic derivative dU/dxi at scaled separation xi."""
    xi = _check_positive(xi)
    if isinstance(pot, LennardJones):
        r6 = (pot.zero_distance / xi) ** 6
        return 24.0 * pot.depth * (r6 - 2.0 * r6 * r6) / xi
    xs, p = pot.contact_range, pot.exponent
    inside = np.minimum(xi, xs)
    deriv = pot.stiffness * (xs ** (1.0 - p) - xs * inside ** (-p))
    return np.where(xi < xs, deriv, 0.0)


def pair_force(pot: Potential, q_i, q_j, epsilon: float):
    """Signed force on the particle at q_i from the particle at q_j.

    Follows the scaled equations of motion epsilon*M*dv/dt = f, so the
    force is -sign(q_i - q_j) * U'(|q_i - q_j| / epsilon).
    """
    q_i = np.asarray(q_i, dtype=float)
    q_j = np.asarray(q_j, dtype=float)
    delta = q_i - q_j
    if np.any(delta == 0.0):
        raise ValueError("coincident particle positions")
    return -np.sign(delta) * potential_deriv(pot, np.abs(delta) / epsilon)
