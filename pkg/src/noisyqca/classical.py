"""Partitioned classical random walk on the lattice.

Written without any of the Kraus machinery so it can serve as an independent
reference for the completely dephased quantum automaton.  A probability
vector has length N+1: entry 0 is the no-excitation probability (left
untouched), entries 1..N the site occupations.
"""

from __future__ import annotations

import numpy as np

PROB_TOL = 1e-12


def _pairs(n_sites: int, ring: bool, layer: str) -> list[tuple[int, int]]:
    if layer == "even":
        return [(i, i + 1) for i in range(1, n_sites, 2)]
    if layer == "odd":
        pairs = [(i, i + 1) for i in range(2, n_sites, 2)]
        return pairs + [(n_sites, 1)] if ring else pairs
    raise ValueError(f"unknown layer {layer!r}")


def _check_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError(f"probability vector must be 1-D with vacuum entry, got shape {v.shape}")
    if np.any(v < -PROB_TOL) or abs(v.sum() - 1.0) > PROB_TOL:
        raise ValueError("not a probability vector")
    return v


def _is_ring(topology) -> bool:
    if isinstance(topology, str):
        if topology not in ("ring", "open_chain"):
            raise ValueError(f"unknown boundary {topology!r}")
        return topology == "ring"
    return bool(topology.is_ring)


def markov_layer(v, p: float, q: float, topology, layer: str) -> np.ndarray:
    """Apply ``[[1-p, q], [p, 1-q]]`` to every (first, second) pair of one layer.

    ``topology`` is ``"ring"``, ``"open_chain"`` or any object with ``is_ring``.
    """
    ring = _is_ring(topology)
    v = _check_vector(v)
    n = v.size - 1
    out = v.copy()
    for i, j in _pairs(n, ring, layer):
        a, b = v[i], v[j]
        out[i] = (1.0 - p) * a + q * b
        out[j] = p * a + (1.0 - q) * b
    return out


def markov_step(v, p: float, q: float, topology, layer_order=("even", "odd")) -> np.ndarray:
    """One full time step of the partitioned walk.

    On an open chain sites 1 and N sit out the odd layer.
    """
    if not (0.0 <= q <= 1.0 and 0.0 <= p <= 1.0):
        raise ValueError("p and q must be probabilities")
    for layer in layer_order:
        v = markov_layer(v, p, q, topology, layer)
    return v


def markov_evolve(v, p: float, q: float, topology, t_max: int) -> np.ndarray:
    """Array of shape ``(t_max + 1, N + 1)`` with the distribution at each step."""
    out = [_check_vector(v)]
    for _ in range(t_max):
        out.append(markov_step(out[-1], p, q, topology))
    return np.array(out)
