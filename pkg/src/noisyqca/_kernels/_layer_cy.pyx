# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled Kraus-layer kernel on row-sparse operators."""

import numpy as np


def apply_layer(const double complex[:, :, ::1] rho,
                const Py_ssize_t[:, :, ::1] cols,
                const double complex[:, :, ::1] vals):
    """out[b] = sum_mu K_mu rho[b] K_mu^dag, with K_mu given row-sparse by (cols, vals)."""
    cdef Py_ssize_t nb = rho.shape[0], d = rho.shape[1]
    cdef Py_ssize_t nk = cols.shape[0], r = cols.shape[2]
    cdef Py_ssize_t b, mu, i, j, a, c
    cdef double complex v, acc
    if rho.shape[2] != d or cols.shape[1] != d or vals.shape[0] != nk \
            or vals.shape[1] != d or vals.shape[2] != r:
        raise ValueError("inconsistent shapes for rho / cols / vals")

    out_arr = np.zeros((nb, d, d), dtype=np.complex128)
    tmp_arr = np.empty((d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] out = out_arr
    cdef double complex[:, ::1] tmp = tmp_arr

    with nogil:
        for b in range(nb):
            for mu in range(nk):
                # tmp = K_mu rho[b]
                for i in range(d):
                    for j in range(d):
                        tmp[i, j] = 0
                    for a in range(r):
                        v = vals[mu, i, a]
                        if v.real == 0 and v.imag == 0:
                            continue
                        c = cols[mu, i, a]
                        for j in range(d):
                            tmp[i, j] = tmp[i, j] + v * rho[b, c, j]
                # out[b] += tmp K_mu^dag
                for i in range(d):
                    for j in range(d):
                        acc = 0
                        for a in range(r):
                            v = vals[mu, j, a]
                            if v.real == 0 and v.imag == 0:
                                continue
                            acc = acc + tmp[i, cols[mu, j, a]] * v.conjugate()
                        out[b, i, j] = out[b, i, j] + acc
    return out_arr
