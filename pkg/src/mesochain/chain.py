"""Scaled particle-chain ODE system with periodic boundary conditions.

Positions are stored unwrapped and strictly increasing within one period
(q_1 < ... < q_N < q_1 + L); the minimal-image wrap is applied only inside
force and kernel evaluations.  This keeps the position interpolant monotone,
which the Jacobian construction relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import OrderingError
from .potentials import Potential, potential_deriv, potential_energy

__all__ = [
    "ChainState",
    "LJDeterministic",
    "LJNoisy",
    "GranularGaussian",
    "GranularSine",
    "ICSpec",
    "init_positions",
    "initial_velocities",
    "bond_gaps",
    "total_forces",
    "verlet_step",
    "advance",
    "total_energy",
    "total_momentum",
]


@dataclass(frozen=True)
class ChainState:
    """Positions, velocities and bookkeeping for the N-particle system."""

    t: float
    q: np.ndarray
    v: np.ndarray
    M: float = 1.0
    L: float = 1.0

    def __post_init__(self) -> None:
        if self.q.shape != self.v.shape or self.q.ndim != 1:
            raise ValueError("q and v must be 1D arrays of equal length")

    @property
    def N(self) -> int:
        return self.q.size

    @property
    def epsilon(self) -> float:
        return 1.0 / self.N

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def particle_mass(self) -> float:
        return self.M / self.N


# Initial-condition variants.  Breakpoints are fractions of the domain
# length and satisfy l1 < l2 < l3 < l4 < 1.


@dataclass(frozen=True)
class LJDeterministic:
    """Smooth bump on (L/3, 2L/3) plus a narrow bump centred at 0.7 L."""


@dataclass(frozen=True)
class LJNoisy:
    """Deterministic profile plus seeded uniform noise on [-amplitude, amplitude]."""

    seed: int = 0
    amplitude: float = 1e-3


@dataclass(frozen=True)
class _PiecewiseCubicBase:
    l1: float
    l2: float
    l3: float
    l4: float
    plateau: float = 0.3

    def __post_init__(self) -> None:
        if not 0.0 <= self.l1 < self.l2 < self.l3 < self.l4 < 1.0:
            raise ValueError("breakpoints must satisfy 0 <= l1 < l2 < l3 < l4 < 1")


@dataclass(frozen=True)
class GranularGaussian(_PiecewiseCubicBase):
    """Cubic ramp / plateau base flow plus a narrow Gaussian bump.

    The bump standard deviation is ``sigma_factor * eta * L``, a sub-filter
    length for the default sigma_factor.
    """

    l1: float = 0.2
    l2: float = 0.4
    l3: float = 0.7
    l4: float = 0.9
    bump_amplitude: float = 0.1
    bump_center: float = 0.3
    sigma_factor: float = 0.2


@dataclass(frozen=True)
class GranularSine(_PiecewiseCubicBase):
    """Cubic base flow plus a sine perturbation on [0, l4*L].

    ``cycles`` full periods span [0, l4*L]; the defaults give period 0.012.
    """

    l1: float = 0.1
    l2: float = 0.2
    l3: float = 0.3
    l4: float = 0.6
    amplitude: float = 5.0
    cycles: int = 50


ICSpec = Union[LJDeterministic, LJNoisy, GranularGaussian, GranularSine]


def init_positions(N: int, L: float = 1.0) -> np.ndarray:
    """Uniform lattice q_j = (j - 1/2) h, j = 1..N."""
    if N < 2:
        raise ValueError(f"need at least 2 particles, got {N}")
    h = L / N
    return (np.arange(N) + 0.5) * h


def _lj_profile(u: np.ndarray) -> np.ndarray:
    wide = np.where(
        (u > 1.0 / 3.0) & (u < 2.0 / 3.0),
        (u - 1.0 / 3.0) ** 2 * (2.0 / 3.0 - u) ** 2 / 50.0,
        0.0,
    )
    s = u - 0.7
    narrow = np.where(np.abs(s) < 0.05, 660.0 * (0.05 ** 2 - s * s) ** 2, 0.0)
    return wide + narrow


def _cubic_base(spec: _PiecewiseCubicBase, q: np.ndarray, L: float) -> np.ndarray:
    l1, l2, l3, l4 = (f * L for f in (spec.l1, spec.l2, spec.l3, spec.l4))
    d2 = spec.plateau
    x1 = (3.0 * l2 - l1) / 2.0
    x2 = (3.0 * l3 - l4) / 2.0
    d1 = -2.0 * d2 / (l2 - l1) ** 3
    d3 = -2.0 * d2 / (l3 - l4) ** 3
    v = np.zeros_like(q)
    up = (q > l1) & (q <= l2)
    v[up] = d1 * (q[up] - x1) * (q[up] - l1) ** 2
    v[(q > l2) & (q <= l3)] = d2
    down = (q > l3) & (q <= l4)
    v[down] = d3 * (q[down] - x2) * (q[down] - l4) ** 2
    return v


def initial_velocities(spec: ICSpec, positions: np.ndarray, eta: float,
                       L: float = 1.0) -> np.ndarray:
    """Evaluate the initial velocity profile of ``spec`` at the lattice nodes."""
    q = np.asarray(positions, dtype=float)
    if isinstance(spec, LJDeterministic):
        return _lj_profile(q / L)
    if isinstance(spec, LJNoisy):
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        noise = rng.uniform(-spec.amplitude, spec.amplitude, size=q.size)
        return _lj_profile(q / L) + noise
    if isinstance(spec, GranularGaussian):
        sigma = spec.sigma_factor * eta * L
        bump = spec.bump_amplitude * np.exp(
            -((q - spec.bump_center * L) ** 2) / (2.0 * sigma * sigma)
        )
        return _cubic_base(spec, q, L) + bump
    if isinstance(spec, GranularSine):
        l4 = spec.l4 * L
        wave = np.where(
            q <= l4,
            spec.amplitude * np.sin(2.0 * np.pi * spec.cycles * q / l4),
            0.0,
        )
        return _cubic_base(spec, q, L) + wave
    raise ValueError(f"unknown initial-condition spec: {spec!r}")


def bond_gaps(state: ChainState) -> np.ndarray:
    """Gaps of the N periodic bonds; gap[j] joins particles j and j+1 (mod N)."""
    gaps = np.empty(state.N)
    gaps[:-1] = np.diff(state.q)
    gaps[-1] = state.q[0] + state.L - state.q[-1]
    return gaps


def _bond_forces(q: np.ndarray, L: float, N: int, pot: Potential) -> np.ndarray:
    gaps = np.empty(N)
    gaps[:-1] = np.diff(q)
    gaps[-1] = q[0] + L - q[-1]
    if np.any(gaps <= 0.0):
        raise OrderingError("particle ordering violated (non-positive bond gap)")
    # Positive value = repulsion: pushes the right particle right.
    return -potential_deriv(pot, gaps * N)


def total_forces(state: ChainState, pot: Potential) -> np.ndarray:
    """Nearest-neighbour forces, including the periodic wrap bond."""
    fb = _bond_forces(state.q, state.L, state.N, pot)
    return np.roll(fb, 1) - fb


def verlet_step(state: ChainState, pot: Potential, dt: float,
                forces: np.ndarray | None = None) -> ChainState:
    """One velocity-Verlet update with acceleration f / (epsilon * M)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    q, v, _ = _verlet_raw(state.q, state.v, state.particle_mass, state.L,
                          state.N, pot, dt, forces)
    return replace(state, t=state.t + dt, q=q, v=v)


def _verlet_raw(q, v, mass, L, N, pot, dt, forces=None):
    if forces is None:
        fb = _bond_forces(q, L, N, pot)
        forces = np.roll(fb, 1) - fb
    acc = forces / mass
    q_new = q + dt * v + (0.5 * dt * dt) * acc
    fb = _bond_forces(q_new, L, N, pot)
    f_new = np.roll(fb, 1) - fb
    v_new = v + (0.5 * dt) * (acc + f_new / mass)
    return q_new, v_new, f_new


def advance(state: ChainState, pot: Potential, dt: float, n_steps: int) -> ChainState:
    """Advance ``n_steps`` Verlet steps, reusing force evaluations."""
    q, v = state.q.copy(), state.v.copy()
    mass = state.particle_mass
    forces = None
    for _ in range(n_steps):
        q, v, forces = _verlet_raw(q, v, mass, state.L, state.N, pot, dt, forces)
    return replace(state, t=state.t + n_steps * dt, q=q, v=v)


def total_energy(state: ChainState, pot: Potential) -> float:
    """Conserved energy of the scaled system.

    The pair term carries the same 1/N scaling as the forces, so the total
    stays bounded independent of N; this is the quantity the integrator
    conserves and the drift diagnostic monitors.
    """
    kinetic = 0.5 * state.particle_mass * float(np.dot(state.v, state.v))
    gaps = bond_gaps(state)
    pair = state.epsilon * float(np.sum(potential_energy(pot, gaps * state.N)))
    return kinetic + pair


def total_momentum(state: ChainState) -> float:
    return state.particle_mass * float(np.sum(state.v))
