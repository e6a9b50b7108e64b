"""Uniform periodic meshes and sampled fields.

Both the coarse (rendering / sub-filter) mesh and the fine mesh place their
first node half a cell from the origin, matching the initial particle
lattice, so fine-mesh nodes coincide with the reference lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Mesh",
    "Field",
    "wrap_displacement",
    "periodic_interp",
    "resample",
    "central_difference",
]


@dataclass(frozen=True)
class Mesh:
    count: int
    length: float
    role: str = ""

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("mesh needs at least one node")
        if self.length <= 0.0:
            raise ValueError("mesh length must be positive")

    @property
    def spacing(self) -> float:
        return self.length / self.count

    @cached_property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.count) + 0.5) * self.spacing


@dataclass(frozen=True)
class Field:
    """Samples of one quantity on a mesh."""

    mesh: Mesh
    values: np.ndarray
    quantity: str = ""

    def __post_init__(self) -> None:
        if self.values.shape != (self.mesh.count,):
            raise ValueError(
                f"{self.quantity or 'field'}: expected {self.mesh.count} values, "
                f"got shape {self.values.shape}"
            )


def wrap_displacement(d, L: float):
    """Minimal-image displacement in [-L/2, L/2); ties go to the negative image."""
    return (np.asarray(d, dtype=float) + 0.5 * L) % L - 0.5 * L


def periodic_interp(x, sample_x: np.ndarray, sample_y: np.ndarray, L: float):
    """Piecewise-linear periodic interpolation; sample_x must be sorted in [0, L)."""
    ext_x = np.concatenate(([sample_x[-1] - L], sample_x, [sample_x[0] + L]))
    ext_y = np.concatenate(([sample_y[-1]], sample_y, [sample_y[0]]))
    return np.interp(np.asarray(x, dtype=float) % L, ext_x, ext_y)


def resample(field: Field, mesh: Mesh, quantity: str | None = None) -> Field:
    """Render a field onto another mesh by periodic linear interpolation."""
    values = periodic_interp(mesh.nodes, field.mesh.nodes, field.values, field.mesh.length)
    return Field(mesh, values, quantity if quantity is not None else field.quantity)


def central_difference(values: np.ndarray, spacing: float) -> np.ndarray:
    """Second-order periodic central difference."""
    return (np.roll(values, -1) - np.roll(values, 1)) / (2.0 * spacing)
