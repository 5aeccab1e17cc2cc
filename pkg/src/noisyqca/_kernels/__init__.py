"""Hot kernels with a compiled implementation and a NumPy fallback.

The compiled extension is used when it imports; setting the environment
variable ``NOISYQCA_PURE_PYTHON=1`` forces the fallback.  Both backends share
one contract, documented on :func:`apply_layer`.
"""

import os

import numpy as np

from . import _layer_py

BACKEND = "python"
_impl = _layer_py.apply_layer

if os.environ.get("NOISYQCA_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _layer_cy
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        _impl = _layer_cy.apply_layer


def sparse_rows(ops):
    """Row-sparse form of dense operators ``ops`` (shape ``(M, d, d)``).

    Returns ``(cols, vals)`` of shape ``(M, d, R)`` where ``R`` is the largest
    number of nonzeros in any row; short rows are padded with column 0 and
    value 0.
    """
    ops = np.asarray(ops, dtype=np.complex128)
    nk, d, _ = ops.shape
    nz = ops != 0
    r = max(1, int(nz.sum(axis=2).max()))
    cols = np.zeros((nk, d, r), dtype=np.intp)
    vals = np.zeros((nk, d, r), dtype=np.complex128)
    for mu in range(nk):
        for i in range(d):
            idx = np.flatnonzero(nz[mu, i])
            cols[mu, i, : idx.size] = idx
            vals[mu, i, : idx.size] = ops[mu, i, idx]
    return cols, vals


def apply_layer(rho, cols, vals, backend=None):
    """Apply ``rho -> sum_mu K_mu rho K_mu^dag`` to a batch of density matrices.

    Parameters
    ----------
    rho : ndarray, shape (B, d, d), complex128
    cols, vals : ndarray, shape (M, d, R)
        Row-sparse Kraus operators from :func:`sparse_rows`.
    backend : {"cython", "python"}, optional
        Override the import-time selection.
    """
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    if rho.ndim != 3 or rho.shape[1] != rho.shape[2] or rho.shape[1] != cols.shape[1]:
        raise ValueError(f"state batch shape {rho.shape} does not match operators of dim {cols.shape[1]}")
    cols = np.ascontiguousarray(cols, dtype=np.intp)
    vals = np.ascontiguousarray(vals, dtype=np.complex128)
    if backend is None:
        impl = _impl
    elif backend == "python":
        impl = _layer_py.apply_layer
    elif backend == "cython":
        from . import _layer_cy

        impl = _layer_cy.apply_layer
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return impl(rho, cols, vals)
