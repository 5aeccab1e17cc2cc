"""Executable checks of translational invariance and causality.

The causality check is operational: it builds pairs of global states that
agree on the reduced state of a neighborhood, applies the layer acting on
that neighborhood and compares the resulting single-site states.  Pairs can
only disagree through the vacuum population, so the difference is predicted
exactly by the vacuum couplings and pumping vectors of the site::

    d_pop = (rho00 - rho00') * sum_mu |W_mu[x]|^2
    d_coh = (rho00 - rho00') * sum_mu W_mu[x] conj(z_mu)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .automaton import AutomatonSpec, Layer
from .evolution import half_step, reduce_neighborhood, reduce_site

CAUSALITY_TOL = 1e-10


def check_translational_invariance(spec: AutomatonSpec) -> float:
    """Max-norm of ``sum_mu [S2, K_mu]`` over both layers, ``S2`` the two-site shift.

    Only defined on rings: an open chain has no global translation symmetry.
    """
    topo = spec.topology
    if not topo.is_ring:
        raise ValueError("translational invariance is only defined on rings")
    s2 = np.zeros((topo.dim, topo.dim))
    s2[0, 0] = 1.0
    s2[1:, 1:] = topo.shift(2)
    residual = 0.0
    for layer in Layer:
        ops = spec.kraus(layer).ops
        comm = np.einsum("ij,mjk->ik", s2, ops) - np.einsum("mij,jk->ik", ops, s2)
        residual = max(residual, float(np.max(np.abs(comm))))
    return residual


def predicted_difference(spec: AutomatonSpec, x: int, delta: float) -> np.ndarray:
    """Analytic ``rho_x_new - rho_x_new'`` for vacuum populations differing by ``delta``."""
    layer = spec.topology.layer_of(x)
    ops = spec.kraus(layer).ops
    w = ops[:, x, 0]
    z = ops[:, 0, 0]
    pop = delta * float(np.sum(np.abs(w) ** 2))
    coh = delta * complex(np.sum(w * z.conj()))
    return np.array([[-pop, np.conj(coh)], [coh, pop]], dtype=np.complex128)


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    qmat, r = np.linalg.qr(g)
    return qmat * (np.diagonal(r) / np.abs(np.diagonal(r)))


def neighborhood_pair(spec: AutomatonSpec, x: int, delta: float, rng: np.random.Generator):
    """Two random states with equal reduced state on ``(x, x+1)`` and ``rho00 - rho00' = delta``.

    The second state moves weight ``delta`` from the vacuum to a site outside
    the neighborhood and scrambles the rest of the lattice with a random
    unitary that leaves the vacuum and the neighborhood alone.
    """
    topo = spec.topology
    y = topo.neighbor(x)
    d = topo.dim
    outside = [s for s in range(1, topo.n_sites + 1) if s not in (x, y)]
    sigma = random_density_matrix(d, rng)
    scramble = np.eye(d, dtype=np.complex128)
    scramble[np.ix_(outside, outside)] = random_unitary(len(outside), rng)
    sigma_p = scramble @ sigma @ scramble.conj().T
    far = outside[rng.integers(len(outside))]

    rho = (1.0 - delta) * sigma
    rho[0, 0] += delta
    rho_p = (1.0 - delta) * sigma_p
    rho_p[far, far] += delta
    return rho, rho_p


@dataclass
class CausalityReport:
    trials: int
    max_difference: float
    max_prediction_error: float
    max_neighborhood_mismatch: float
    records: list = field(default_factory=list, repr=False)

    @property
    def causal(self) -> bool:
        return self.max_difference <= CAUSALITY_TOL

    @property
    def prediction_ok(self) -> bool:
        return self.max_prediction_error <= CAUSALITY_TOL

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "max_difference": self.max_difference,
            "max_prediction_error": self.max_prediction_error,
            "max_neighborhood_mismatch": self.max_neighborhood_mismatch,
            "causal": self.causal,
            "prediction_ok": self.prediction_ok,
        }


def check_causality_operational(spec: AutomatonSpec, trials: int = 100, seed: int = 0, delta: float | None = None) -> CausalityReport:
    """Compare single-site states after a half step for neighborhood-equivalent pairs.

    ``delta`` fixes the vacuum-population difference of every pair; by default
    it is drawn uniformly from (0.05, 0.95) per trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    topo = spec.topology
    rng = np.random.default_rng(seed)
    sites = list(range(1, topo.n_sites + 1)) if topo.is_ring else list(range(1, topo.n_sites))
    max_diff = max_err = max_mismatch = 0.0
    records = []
    for _ in range(trials):
        x = sites[rng.integers(len(sites))]
        dl = float(rng.uniform(0.05, 0.95)) if delta is None else float(delta)
        rho, rho_p = neighborhood_pair(spec, x, dl, rng)
        mismatch = float(np.max(np.abs(reduce_neighborhood(rho, x, topo.is_ring) - reduce_neighborhood(rho_p, x, topo.is_ring))))
        layer = topo.layer_of(x)
        diff = reduce_site(half_step(rho, spec, layer), x) - reduce_site(half_step(rho_p, spec, layer), x)
        err = float(np.max(np.abs(diff - predicted_difference(spec, x, dl))))
        size = float(np.max(np.abs(diff)))
        max_diff = max(max_diff, size)
        max_err = max(max_err, err)
        max_mismatch = max(max_mismatch, mismatch)
        records.append({"site": x, "delta": dl, "difference": size, "prediction_error": err})
    return CausalityReport(trials, max_diff, max_err, max_mismatch, records)
