"""Trapezoidal averaging window and its exact integrals.

The window profile is flat on [-a, a], decays linearly to zero at +-b and
has unit integral.  Rescaling by the mesoscale fraction ``eta`` gives the
averaging kernel with support [-b*eta, b*eta].  Because the profile is
piecewise linear, its antiderivative is available in closed form, which
makes segment integrals (bond weights) exact instead of quadrature-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["WindowKernel"]


@dataclass(frozen=True)
class WindowKernel:
    """Unit-mass trapezoidal window rescaled to the averaging length.

    Parameters
    ----------
    eta:
        Mesoscale resolution as a fraction of the domain length, in (0, 1).
    L:
        Domain length; the default half-widths are tied to it.
    a, b:
        Inner and outer half-widths of the profile in the scaled variable
        xi = x / eta.  Default to L/2 and 3L/2.
    """

    eta: float
    L: float = 1.0
    a: float | None = None
    b: float | None = None

    def __post_init__(self) -> None:
        if self.a is None:
            object.__setattr__(self, "a", 0.5 * self.L)
        if self.b is None:
            object.__setattr__(self, "b", 1.5 * self.L)
        if not 0.0 < self.a < self.b:
            raise ValueError(f"need 0 < a < b, got a={self.a}, b={self.b}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if self.L <= 0.0:
            raise ValueError(f"domain length must be positive, got {self.L}")

    @property
    def support_radius(self) -> float:
        """Physical half-width b*eta of the rescaled window."""
        return self.b * self.eta

    def psi(self, xi):
        """Profile value at the scaled coordinate xi (even, unit integral)."""
        xi = np.abs(np.asarray(xi, dtype=float))
        a, b = self.a, self.b
        flat = 1.0 / (a + b)
        slope = (b - xi) / (b * b - a * a)
        return np.where(xi <= a, flat, np.where(xi < b, slope, 0.0))

    def psi_eta(self, x):
        """Rescaled window eta^-1 * psi(x / eta); support [-b*eta, b*eta]."""
        return self.psi(np.asarray(x, dtype=float) / self.eta) / self.eta

    def cdf(self, xi):
        """Exact antiderivative of ``psi`` from -infinity, evaluated at xi."""
        xi = np.asarray(xi, dtype=float)
        a, b = self.a, self.b
        two_area = 2.0 * (b * b - a * a)
        left_corner = (b - a) / (2.0 * (b + a))
        ramp_up = np.clip(xi + b, 0.0, None) ** 2 / two_area
        mid = left_corner + (np.clip(xi, -a, a) + a) / (a + b)
        ramp_down = 1.0 - np.clip(b - xi, 0.0, None) ** 2 / two_area
        return np.where(xi <= -a, np.minimum(ramp_up, left_corner),
                        np.where(xi < a, mid, np.maximum(ramp_down, 1.0 - left_corner)))

    def cdf_eta(self, x):
        """Antiderivative of ``psi_eta``; dimensionless, 0 at -b*eta, 1 at b*eta."""
        return self.cdf(np.asarray(x, dtype=float) / self.eta)

    def integrate_psi_eta(self, lo, hi):
        """Exact integral of ``psi_eta`` over [lo, hi]."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if np.any(hi < lo):
            raise ValueError("integration bounds must satisfy lo <= hi")
        return self.cdf_eta(hi) - self.cdf_eta(lo)

    def bond_weight(self, x, q_left, q_right):
        """Average of ``psi_eta`` along the segment from q_left to q_right.

        Evaluates int_0^1 psi_eta(x - s*q_right - (1-s)*q_left) ds exactly as
        a difference of antiderivative values divided by the segment length;
        a degenerate segment falls back to a point evaluation.  Symmetric in
        (q_left, q_right).
        """
        x = np.asarray(x, dtype=float)
        q_left = np.asarray(q_left, dtype=float)
        q_right = np.asarray(q_right, dtype=float)
        gap = q_right - q_left
        degenerate = np.abs(gap) < 1e-9 * self.eta * self.b
        safe_gap = np.where(degenerate, 1.0, gap)
        weight = (self.cdf_eta(x - q_left) - self.cdf_eta(x - q_right)) / safe_gap
        midpoint = self.psi_eta(x - 0.5 * (q_left + q_right))
        return np.where(degenerate, midpoint, weight)
