"""Exact mesoscale averages and stresses computed from particle data.

Every node sum uses minimal-image wrapping, so all quantities are periodic.
Sums over particles or bonds are evaluated in blocks of mesh nodes to keep
the temporary (nodes x particles) arrays small.
"""

from __future__ import annotations

import numpy as np

from .chain import ChainState, bond_gaps
from .errors import OrderingError, VacuumError
from .kernel import WindowKernel
from .meshes import Field, Mesh, periodic_interp, wrap_displacement
from .potentials import Potential, potential_deriv

__all__ = [
    "average_density",
    "average_momentum",
    "average_velocity",
    "exact_convective_stress",
    "exact_interaction_stress",
    "exact_micro_fields",
]

_BLOCK = 64


def _kernel_sums(kernel: WindowKernel, nodes: np.ndarray, points: np.ndarray,
                 L: float, weights: list) -> list[np.ndarray]:
    """Sum_j w_j * psi_eta(wrap(x_i - p_j)) for several weight vectors at once."""
    out = [np.empty(nodes.size) for _ in weights]
    for lo in range(0, nodes.size, _BLOCK):
        hi = min(lo + _BLOCK, nodes.size)
        psi = kernel.psi_eta(wrap_displacement(nodes[lo:hi, None] - points[None, :], L))
        for res, w in zip(out, weights):
            res[lo:hi] = psi.sum(axis=1) if w is None else psi @ w
    return out


def average_density(state: ChainState, kernel: WindowKernel, mesh: Mesh) -> Field:
    """Mass-weighted kernel sum (M/N) * sum_j psi_eta(x - q_j)."""
    (s0,) = _kernel_sums(kernel, mesh.nodes, state.q, state.L, [None])
    return Field(mesh, (state.M / state.N) * s0, "density")


def average_momentum(state: ChainState, kernel: WindowKernel, mesh: Mesh) -> Field:
    (s1,) = _kernel_sums(kernel, mesh.nodes, state.q, state.L, [state.v])
    return Field(mesh, (state.M / state.N) * s1, "momentum")


def average_velocity(density: Field, momentum: Field) -> Field:
    if density.mesh != momentum.mesh:
        raise ValueError("density and momentum live on different meshes")
    if np.any(density.values <= 0.0):
        node = int(np.argmin(density.values))
        raise VacuumError(f"non-positive average density at node {node}")
    return Field(density.mesh, momentum.values / density.values, "velocity")


def exact_convective_stress(state: ChainState, kernel: WindowKernel, mesh: Mesh,
                            v_bar: Field) -> Field:
    """Velocity-fluctuation stress; non-positive by construction."""
    if v_bar.mesh != mesh:
        raise ValueError("v_bar must live on the target mesh")
    s0, s1, s2 = _kernel_sums(kernel, mesh.nodes, state.q, state.L,
                              [None, state.v, state.v * state.v])
    vb = v_bar.values
    values = -(state.M / state.N) * (s2 - 2.0 * vb * s1 + vb * vb * s0)
    return Field(mesh, values, "stress_convective")


def exact_interaction_stress(state: ChainState, pot: Potential,
                             kernel: WindowKernel, mesh: Mesh) -> Field:
    """Bond-force stress: sum over the N periodic bonds of
    -U'(gap/eps) * gap * (segment average of psi_eta)."""
    gaps = bond_gaps(state)
    if np.any(gaps <= 0.0):
        raise OrderingError("particle ordering violated")
    mids = state.q + 0.5 * gaps
    amplitude = -potential_deriv(pot, gaps * state.N) * gaps
    half = 0.5 * gaps
    nodes = mesh.nodes
    values = np.empty(nodes.size)
    for lo in range(0, nodes.size, _BLOCK):
        hi = min(lo + _BLOCK, nodes.size)
        u = wrap_displacement(nodes[lo:hi, None] - mids[None, :], state.L)
        seg = (kernel.cdf_eta(u + half) - kernel.cdf_eta(u - half)) / gaps
        values[lo:hi] = seg @ amplitude
    return Field(mesh, values, "stress_interaction")


def exact_micro_fields(state: ChainState, fine: Mesh) -> tuple[Field, Field]:
    """Exact Jacobian and velocity interpolants sampled on the fine mesh.

    The Jacobian h / gap lives at bond midpoints; both fields are rendered
    by periodic piecewise-linear interpolation.
    """
    gaps = bond_gaps(state)
    if np.any(gaps <= 0.0):
        raise OrderingError("particle ordering violated")
    L = state.L
    mids = (state.q + 0.5 * gaps) % L
    order = np.argsort(mids)
    jac = periodic_interp(fine.nodes, mids[order], (state.h / gaps)[order], L)
    pos = state.q % L
    order = np.argsort(pos)
    vel = periodic_interp(fine.nodes, pos[order], state.v[order], L)
    return Field(fine, jac, "jacobian"), Field(fine, vel, "velocity")
