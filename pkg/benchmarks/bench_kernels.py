"""Time one automaton step on a batch of states: compiled kernel, NumPy fallback, dense einsum.

    python benchmarks/bench_kernels.py [--batch 128] [--sizes 8 32 64 128]
"""

import argparse
import timeit

import numpy as np

from noisyqca import _kernels
from noisyqca.automaton import AutomatonSpec, Layer, Topology, noise_vectors_T
from noisyqca.channels import LocalChannelParams


def random_batch(batch, dim, rng):
    g = rng.normal(size=(batch, dim, dim)) + 1j * rng.normal(size=(batch, dim, dim))
    rho = g @ np.conj(np.swapaxes(g, 1, 2))
    return rho / np.trace(rho, axis1=1, axis2=2).real[:, None, None]


def dense_step(rho, layers):
    # batched BLAS products, summed over the Kraus index
    for ops in layers:
        kd = np.conj(np.swapaxes(ops, 1, 2))[:, None]
        rho = np.sum(ops[:, None] @ rho[None] @ kd, axis=0)
    return rho


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=128)
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 32, 64, 128])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    params = LocalChannelParams(0.7, 0.3, 0.4, 0.0, np.pi)
    backends = ["python"] + (["cython"] if _kernels.BACKEND == "cython" else [])
    print(f"batch={args.batch}, best of {args.repeat}, times in ms per step")
    print(f"{'N':>5} {'dense':>10} " + " ".join(f"{b:>10}" for b in backends) + "   max |diff|")
    for n in args.sizes:
        w = noise_vectors_T(0.4, 0.4, 0.5, n)
        spec = AutomatonSpec.build(Topology(n, "ring"), params, (1, 0, 0), w, causal=False)
        ops = [spec.kraus(layer).ops for layer in (Layer.EVEN, Layer.ODD)]
        sparse = [_kernels.sparse_rows(o) for o in ops]
        rho = random_batch(args.batch, n + 1, rng)

        def kernel_step(backend):
            out = rho
            for cols, vals in sparse:
                out = _kernels.apply_layer(out, cols, vals, backend=backend)
            return out

        ref = dense_step(rho, ops)
        times = {"dense": min(timeit.repeat(lambda: dense_step(rho, ops), number=1, repeat=args.repeat))}
        diff = 0.0
        for b in backends:
            times[b] = min(timeit.repeat(lambda b=b: kernel_step(b), number=1, repeat=args.repeat))
            diff = max(diff, float(np.max(np.abs(kernel_step(b) - ref))))
        row = " ".join(f"{1e3 * times[k]:10.3f}" for k in ["dense"] + backends)
        print(f"{n:5d} {row}   {diff:.1e}")


if __name__ == "__main__":
    main()
