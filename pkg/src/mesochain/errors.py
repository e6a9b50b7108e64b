"""Exception hierarchy shared across the package.

Config problems and numerical failures map to distinct CLI exit codes.
"""

from __future__ import annotations

__all__ = [
    "ConfigError",
    "NumericalError",
    "OrderingError",
    "VacuumError",
    "ReconstructionError",
]


class ConfigError(ValueError):
    """Invalid scenario configuration or config file."""


class NumericalError(RuntimeError):
    """A numerical stage failed (integration, averaging, reconstruction)."""


class OrderingError(NumericalError):
    """Particle ordering violated; usually means the step size is too large."""


class VacuumError(NumericalError):
    """Average density vanished or went negative where a division is needed."""


class ReconstructionError(NumericalError):
    """Deconvolution produced an unusable reconstruction."""
