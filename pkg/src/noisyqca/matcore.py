"""Dense complex-matrix helpers shared by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; the
functions here add the shape and finiteness checks the rest of the package
relies on.
"""

from __future__ import annotations

import numpy as np

DEFAULT_TOL = 1e-9


def as_cmatrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D complex128 array, raising on bad input."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def _square(a) -> np.ndarray:
    arr = as_cmatrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def matmul(a, b) -> np.ndarray:
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_cmatrix(a).conj().T


def trace(a) -> complex:
    return complex(np.trace(_square(a)))


def is_hermitian_psd(a, tol: float = DEFAULT_TOL) -> bool:
    """True if ``a`` is Hermitian and positive semidefinite up to ``tol``.

    Hermiticity is checked entrywise in the max norm, positivity through the
    eigenvalues of the Hermitian part.
    """
    a = _square(a)
    if np.max(np.abs(a - a.conj().T), initial=0.0) > tol:
        return False
    herm = 0.5 * (a + a.conj().T)
    return bool(np.linalg.eigvalsh(herm).min() >= -tol)


def max_abs(a) -> float:
    """Max-norm of an array (0.0 for empty input)."""
    return float(np.max(np.abs(np.asarray(a)), initial=0.0))
