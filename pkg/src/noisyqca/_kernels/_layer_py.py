"""NumPy implementation of the Kraus-layer kernel (fallback when the extension is absent)."""

import numpy as np


def apply_layer(rho, cols, vals):
    """out[b] = sum_mu K_mu rho[b] K_mu^dag, with K_mu given row-sparse by (cols, vals)."""
    rho = np.ascontiguousarray(rho, dtype=np.complex128)
    nb, d, _ = rho.shape
    nk, _, r = cols.shape
    out = np.zeros((nb, d, d), dtype=np.complex128)
    for mu in range(nk):
        tmp = np.zeros((nb, d, d), dtype=np.complex128)
        for a in range(r):
            tmp += vals[mu, :, a][None, :, None] * rho[:, cols[mu, :, a], :]
        acc = np.zeros((nb, d, d), dtype=np.complex128)
        for a in range(r):
            acc += tmp[:, :, cols[mu, :, a]] * vals[mu, :, a].conj()[None, None, :]
        out += acc
    return out
