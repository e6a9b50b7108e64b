from __future__ import annotations

import numpy as np
import pytest

from mesochain import Mesh, WindowKernel, assemble_operator


@pytest.fixture(scope="session")
def svd_cache(tmp_path_factory):
    """Shared on-disk SVD cache so operators are factorized once per session."""
    return tmp_path_factory.mktemp("svd-cache")


@pytest.fixture(scope="session")
def small_operator(svd_cache):
    """Well-resolved small operator: D=100, N=800, eta=0.05."""
    kernel = WindowKernel(eta=0.05)
    return assemble_operator(kernel, Mesh(100, 1.0, "coarse"),
                             Mesh(800, 1.0, "fine"), cache_dir=svd_cache)


@pytest.fixture(scope="session")
def paper_operator(svd_cache):
    """The default-scale operator: D=500, N=10000, eta=0.01."""
    kernel = WindowKernel(eta=0.01)
    return assemble_operator(kernel, Mesh(500, 1.0, "coarse"),
                             Mesh(10000, 1.0, "fine"), cache_dir=svd_cache)


def rel_linf(exact: np.ndarray, approx: np.ndarray) -> float:
    exact = np.asarray(exact, dtype=float)
    approx = np.asarray(approx, dtype=float)
    return float(np.max(np.abs(exact - approx)) / np.max(np.abs(exact)))
