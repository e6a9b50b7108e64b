"""Two-mesh discrete convolution operator and regularized inverses.

The operator A (coarse x fine) is the midpoint-rule discretization of
convolution with the averaging window: A[i, k] = dy * psi_eta(x_i - y_k)
with periodic wrapping.  Row sums are 1 up to quadrature error, so A maps
fine samples of the Jacobian to (L/M) * density samples.

Reported singular values are quadrature-normalized: the two meshes carry
different node counts, so the raw matrix spectrum is sqrt(D/N) times the
spectrum of the underlying convolution.  Scaling by sqrt(N/D) restores the
continuum normalization (largest singular value 1 for a unit-mass kernel)
and leaves the minimum-norm solution, relative cutoffs and condition
numbers unchanged.

A is independent of the dynamics, so its SVD is computed once, cached to
disk, and reused across runs.  The minimum-norm solution with a spectral
cutoff implements the truncated-SVD regularization; Landweber (on the
coarse square operator) and Tikhonov solvers are provided as comparison
baselines.
"""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .kernel import WindowKernel
from .meshes import Mesh, wrap_displacement

__all__ = [
    "ConvolutionOperator",
    "ConditionReport",
    "assemble_operator",
    "min_norm_solve",
    "landweber_solve",
    "tikhonov_solve",
    "condition_report",
]

log = logging.getLogger(__name__)

DEFAULT_CUTOFF_RATIO = 1e-12

_CACHE_MAGIC = b"MCSV"
_CACHE_VERSION = 1
_HEADER = struct.Struct("<IQQddd")  # version, D, N, eta, a, b


@dataclass
class ConvolutionOperator:
    """Quadrature matrix with cached SVD factors and spectral cutoff."""

    kernel: WindowKernel
    coarse: Mesh
    fine: Mesh
    matrix: np.ndarray
    left: np.ndarray        # D x D, columns are coarse singular vectors
    singular: np.ndarray    # D, quadrature-normalized, descending
    right: np.ndarray       # D x N, rows are fine singular vectors
    cutoff_ratio: float = DEFAULT_CUTOFF_RATIO
    _square: np.ndarray | None = field(default=None, repr=False)

    @property
    def norm_scale(self) -> float:
        """sqrt(N/D): converts raw matrix singular values to normalized ones."""
        return float(np.sqrt(self.fine.count / self.coarse.count))

    @property
    def cutoff(self) -> float:
        return self.cutoff_ratio * self.singular[0]

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Forward map: fine samples -> coarse averages."""
        return self.matrix @ values

    def coarse_square(self) -> np.ndarray:
        """Square coarse-to-coarse discretization of the same convolution."""
        if self._square is None:
            nodes = self.coarse.nodes
            u = wrap_displacement(nodes[:, None] - nodes[None, :], self.coarse.length)
            self._square = self.coarse.spacing * self.kernel.psi_eta(u)
        return self._square


@dataclass(frozen=True)
class ConditionReport:
    sigma_max: float
    sigma_min: float
    condition: float
    truncated_count: int


def _cache_key(D: int, N: int, kernel: WindowKernel) -> str:
    blob = _HEADER.pack(_CACHE_VERSION, D, N, kernel.eta, kernel.a, kernel.b)
    return hashlib.sha256(blob).hexdigest()[:16]


def _save_svd(path: Path, op: ConvolutionOperator) -> None:
    D, N = op.matrix.shape
    header = _CACHE_MAGIC + _HEADER.pack(
        _CACHE_VERSION, D, N, op.kernel.eta, op.kernel.a, op.kernel.b
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(op.left, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(op.singular, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(op.right, dtype="<f8").tobytes())


def _load_svd(path: Path, D: int, N: int, kernel: WindowKernel):
    raw = path.read_bytes()
    if raw[:4] != _CACHE_MAGIC:
        raise ValueError(f"{path}: not an SVD cache file")
    version, d, n, eta, a, b = _HEADER.unpack_from(raw, 4)
    if version != _CACHE_VERSION or (d, n) != (D, N):
        return None
    if not (eta == kernel.eta and a == kernel.a and b == kernel.b):
        return None
    offset = 4 + _HEADER.size
    left = np.frombuffer(raw, dtype="<f8", count=D * D, offset=offset).reshape(D, D)
    offset += D * D * 8
    singular = np.frombuffer(raw, dtype="<f8", count=D, offset=offset)
    offset += D * 8
    right = np.frombuffer(raw, dtype="<f8", count=D * N, offset=offset).reshape(D, N)
    return left.copy(), singular.copy(), right.copy()


def assemble_operator(kernel: WindowKernel, coarse: Mesh, fine: Mesh,
                      cutoff_ratio: float = DEFAULT_CUTOFF_RATIO,
                      cache_dir: str | Path | None = None) -> ConvolutionOperator:
    """Build the coarse x fine quadrature matrix and its SVD.

    With ``cache_dir`` set, SVD factors are loaded from / stored to a
    versioned little-endian binary file keyed by (D, N, eta, a, b).
    """
    D, N = coarse.count, fine.count
    if D >= N:
        raise ValueError(f"need coarse count < fine count, got D={D}, N={N}")
    dy = fine.spacing
    matrix = np.empty((D, N))
    y = fine.nodes
    for i, x in enumerate(coarse.nodes):
        matrix[i] = dy * kernel.psi_eta(wrap_displacement(x - y, fine.length))

    factors = None
    cache_path = None
    if cache_dir is not None:
        cache_path = Path(cache_dir) / f"svd-{_cache_key(D, N, kernel)}.bin"
        if cache_path.exists():
            factors = _load_svd(cache_path, D, N, kernel)
    if factors is None:
        left, singular, right = np.linalg.svd(matrix, full_matrices=False)
        singular = singular * np.sqrt(N / D)
        if cache_path is not None:
            cache_path.parent.mkdir(parents=True, exist_ok=True)
            op_tmp = ConvolutionOperator(kernel, coarse, fine, matrix,
                                         left, singular, right, cutoff_ratio)
            _save_svd(cache_path, op_tmp)
    else:
        left, singular, right = factors

    op = ConvolutionOperator(kernel, coarse, fine, matrix, left, singular,
                             right, cutoff_ratio)
    dropped = int(np.sum(singular < op.cutoff))
    if dropped:
        log.warning(
            "operator is rank deficient below D: %d singular values under the "
            "cutoff, smallest sigma = %.3e", dropped, singular[-1],
        )
    return op


def min_norm_solve(op: ConvolutionOperator, gbar: np.ndarray) -> np.ndarray:
    """Minimum-norm solution of A g = gbar with truncated-SVD filtering.

    Components along singular directions below the cutoff are discarded;
    when nothing is truncated this equals A^T (A A^T)^-1 gbar exactly.
    """
    gbar = np.asarray(gbar, dtype=float)
    if gbar.shape != (op.coarse.count,):
        raise ValueError(f"right-hand side must have length {op.coarse.count}")
    coeffs = op.left.T @ gbar
    keep = op.singular >= op.cutoff
    scaled = np.zeros_like(coeffs)
    # Raw matrix singular values are singular / norm_scale.
    scaled[keep] = coeffs[keep] * op.norm_scale / op.singular[keep]
    return op.right.T @ scaled


def landweber_solve(op: ConvolutionOperator, gbar: np.ndarray, n: int) -> np.ndarray:
    """Iterated-sum deconvolution g_n = sum_{k=0}^n (I - R)^k gbar.

    Runs on the coarse square operator; ``n`` is the regularization
    parameter and n = 0 returns ``gbar`` unchanged.
    """
    if n < 0:
        raise ValueError("iteration count must be non-negative")
    gbar = np.asarray(gbar, dtype=float)
    R = op.coarse_square()
    g = gbar.copy()
    for _ in range(n):
        g = gbar + g - R @ g
    return g


def tikhonov_solve(op: ConvolutionOperator, gbar: np.ndarray, alpha: float,
                   stabilizer: str = "identity") -> np.ndarray:
    """Solve the stabilized normal equations (A^T A + alpha C) g = A^T gbar.

    With the identity stabilizer this is the spectral filter
    sigma^2 / (sigma^2 + alpha) applied in the SVD basis; the Laplacian
    stabilizer (dimensionless periodic second difference) is solved by
    conjugate gradients on the fine mesh.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    gbar = np.asarray(gbar, dtype=float)
    if stabilizer == "identity":
        coeffs = op.left.T @ gbar
        filt = op.norm_scale * op.singular / (op.singular ** 2 + alpha)
        return op.right.T @ (filt * coeffs)
    if stabilizer != "laplacian":
        raise ValueError(f"unknown stabilizer {stabilizer!r}")

    # Quadrature-normalized normal equations: (A~^T A~ + alpha C) g = A~^T g~
    # with A~ = norm_scale * A, divided through by norm_scale^2.
    A = op.matrix
    rhs = A.T @ gbar
    n = A.shape[1]
    alpha_eff = alpha / op.norm_scale ** 2

    def matvec(g):
        lap = 2.0 * g - np.roll(g, 1) - np.roll(g, -1)
        return A.T @ (A @ g) + alpha_eff * lap

    system = LinearOperator((n, n), matvec=matvec)
    solution, info = cg(system, rhs, rtol=1e-12, atol=0.0, maxiter=10 * n)
    if info != 0:
        raise np.linalg.LinAlgError(f"Tikhonov CG did not converge (info={info})")
    return solution


def condition_report(op: ConvolutionOperator) -> ConditionReport:
    """Spectral diagnostics: extreme singular values and truncation count."""
    s_max = float(op.singular[0])
    s_min = float(op.singular[-1])
    condition = s_max / s_min if s_min > 0.0 else np.inf
    truncated = int(np.sum(op.singular < op.cutoff))
    return ConditionReport(s_max, s_min, condition, truncated)
