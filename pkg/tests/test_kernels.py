import os
import subprocess
import sys

import numpy as np
import pytest

from noisyqca import _kernels
from noisyqca.automaton import AutomatonSpec, Layer, Topology, noise_vectors_T
from noisyqca.channels import LocalChannelParams

from .conftest import random_state

try:
    from noisyqca._kernels import _layer_cy  # noqa: F401

    HAVE_CY = True
except ImportError:
    HAVE_CY = False

BACKENDS = ["python"] + (["cython"] if HAVE_CY else [])


def dense_layer(rho, ops):
    return np.einsum("mij,bjk,mlk->bil", ops, rho, ops.conj())


def make_ops(n, boundary, layer, noisy):
    params = LocalChannelParams(0.7, 0.2, 0.4, 0.3, 2.0)
    w = noise_vectors_T(0.4, 0.5, 0.5, n) if noisy else None
    spec = AutomatonSpec.build(Topology(n, boundary), params, (1, 0.5, 0.2), w, causal=not noisy)
    return spec.kraus(layer).ops


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("boundary", ["ring", "open_chain"])
@pytest.mark.parametrize("noisy", [False, True])
def test_backend_matches_dense(rng, backend, boundary, noisy):
    for layer in Layer:
        ops = make_ops(8, boundary, layer, noisy)
        cols, vals = _kernels.sparse_rows(ops)
        rho = np.stack([random_state(9, rng) for _ in range(5)])
        out = _kernels.apply_layer(rho, cols, vals, backend=backend)
        assert np.max(np.abs(out - dense_layer(rho, ops))) <= 1e-14


@pytest.mark.skipif(not HAVE_CY, reason="compiled extension not built")
def test_backends_agree_bitwise_shape(rng):
    ops = make_ops(10, "ring", Layer.ODD, True)
    cols, vals = _kernels.sparse_rows(ops)
    rho = np.stack([random_state(11, rng) for _ in range(3)])
    a = _kernels.apply_layer(rho, cols, vals, backend="cython")
    b = _kernels.apply_layer(rho, cols, vals, backend="python")
    assert a.shape == b.shape and a.dtype == b.dtype
    assert np.max(np.abs(a - b)) <= 1e-15


def test_sparse_rows_roundtrip():
    ops = make_ops(6, "ring", Layer.EVEN, True)
    cols, vals = _kernels.sparse_rows(ops)
    rebuilt = np.zeros_like(ops)
    for mu in range(ops.shape[0]):
        for i in range(ops.shape[1]):
            np.add.at(rebuilt[mu, i], cols[mu, i], vals[mu, i])
    assert np.array_equal(rebuilt, ops)


def test_bad_inputs():
    ops = make_ops(6, "ring", Layer.EVEN, False)
    cols, vals = _kernels.sparse_rows(ops)
    with pytest.raises(ValueError):
        _kernels.apply_layer(np.zeros((1, 5, 5)), cols, vals)
    with pytest.raises(ValueError):
        _kernels.apply_layer(np.zeros((1, 7, 7)), cols, vals, backend="fortran")


def test_env_var_forces_fallback():
    env = dict(os.environ, NOISYQCA_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import noisyqca; print(noisyqca.KERNEL_BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
