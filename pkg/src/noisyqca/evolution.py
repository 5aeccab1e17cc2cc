"""Global states in the vacuum-plus-single-excitation sector and their dynamics.

A state is an ``(N+1) x (N+1)`` density matrix over ``|0>`` (vacuum) and
``|n>`` (excitation on site ``n``).  :func:`step` and :func:`half_step` act on
one state with dense Kraus sums; :class:`BatchPropagator` pushes whole trial
batches through the compiled layer kernel.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .automaton import AutomatonSpec, Layer
from .matcore import is_hermitian_psd

STATE_TOL = 1e-12
PSD_TOL = 1e-9
LAYER_ORDER = (Layer.EVEN, Layer.ODD)


class NumericalError(RuntimeError):
    """A state left the set of density matrices beyond tolerance."""


def embed_sender_state(alpha: complex, beta: complex, sender: int, n_sites: int) -> np.ndarray:
    """Pure state ``alpha|0> + beta|sender>`` as a global density matrix."""
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > STATE_TOL:
        raise ValueError(f"sender state is not normalized: |alpha|^2 + |beta|^2 = {abs(alpha)**2 + abs(beta)**2!r}")
    if not 1 <= sender <= n_sites:
        raise IndexError(f"sender site {sender} outside 1..{n_sites}")
    psi = np.zeros(n_sites + 1, dtype=np.complex128)
    psi[0] = alpha
    psi[sender] = beta
    return np.outer(psi, psi.conj())


def check_state(rho, tol: float = STATE_TOL, psd_tol: float = PSD_TOL) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NumericalError(f"state has shape {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > tol:
        raise NumericalError(f"state is not Hermitian (deviation {herm:.3e})")
    tr = abs(np.trace(rho) - 1.0)
    if tr > tol:
        raise NumericalError(f"state trace deviates from 1 by {tr:.3e}")
    if not is_hermitian_psd(rho, psd_tol):
        raise NumericalError(f"state is not positive semidefinite (min eigenvalue {np.linalg.eigvalsh(rho).min():.3e})")


def _dims(state, spec: AutomatonSpec) -> np.ndarray:
    rho = np.asarray(state, dtype=np.complex128)
    d = spec.topology.dim
    if rho.shape != (d, d):
        raise ValueError(f"state of shape {rho.shape} does not match automaton dimension {d}")
    return rho


def half_step(state, spec: AutomatonSpec, layer) -> np.ndarray:
    """Apply a single partition layer."""
    return spec.kraus(layer).apply(_dims(state, spec))


def step(state, spec: AutomatonSpec) -> np.ndarray:
    """One automaton time step: the even layer, then the odd layer."""
    rho = _dims(state, spec)
    for layer in LAYER_ORDER:
        rho = spec.kraus(layer).apply(rho)
    return rho


def evolve(state, spec: AutomatonSpec, t_max: int) -> list[np.ndarray]:
    """Trajectory ``[rho(0), ..., rho(t_max)]``."""
    traj = [_dims(state, spec)]
    for _ in range(t_max):
        traj.append(step(traj[-1], spec))
    return traj


def _site_index(state, x: int) -> int:
    n = np.asarray(state).shape[-1] - 1
    if not 1 <= x <= n:
        raise IndexError(f"site {x} outside 1..{n}")
    return x


def reduce_site(state, x: int) -> np.ndarray:
    """Reduced 2x2 state of qubit ``x`` in the basis (ground, excited)."""
    rho = np.asarray(state)
    x = _site_index(rho, x)
    diag = np.real(np.diagonal(rho))
    out = np.empty((2, 2), dtype=np.complex128)
    out[0, 0] = diag.sum() - diag[x]
    out[1, 1] = diag[x]
    out[0, 1] = rho[0, x]
    out[1, 0] = rho[x, 0]
    return out


def reduce_neighborhood(state, x: int, ring: bool = False) -> np.ndarray:
    """Reduced 3x3 state of the neighborhood ``(x, x + 1)`` in basis (vacuum, x, y)."""
    rho = np.asarray(state)
    n = rho.shape[-1] - 1
    x = _site_index(rho, x)
    if x == n:
        if not ring:
            raise IndexError(f"site {x} has no right neighbor on an open chain")
        y = 1
    else:
        y = x + 1
    diag = np.real(np.diagonal(rho))
    idx = [0, x, y]
    out = rho[np.ix_(idx, idx)].astype(np.complex128)
    out[0, 0] = diag.sum() - diag[x] - diag[y]
    return out


def transfer_fidelity(state, x: int, alpha: complex, beta: complex) -> float:
    """Overlap of the reduced state on ``x`` with ``alpha|0> + beta|1>``."""
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > STATE_TOL:
        raise ValueError("target state is not normalized")
    psi = np.array([alpha, beta], dtype=np.complex128)
    return float(np.real(psi.conj() @ reduce_site(state, x) @ psi))


def mean_excitation_position(state) -> float:
    pops = np.real(np.diagonal(np.asarray(state)))[1:]
    total = pops.sum()
    if total <= 0:
        raise ValueError("no population in the single-excitation sector")
    return float(np.arange(1, pops.size + 1) @ pops / total)


def conductivity(trajectory, target: int) -> float:
    """Time-averaged population of ``target`` over ``trajectory[1:]``.

    ``trajectory[0]`` is the initial state and is excluded from the average.
    """
    if len(trajectory) < 2:
        raise ValueError("conductivity needs at least one evolved state after the initial one")
    pops = [np.real(np.asarray(rho)[_site_index(rho, target), target]) for rho in trajectory[1:]]
    return float(np.mean(pops))


class BatchPropagator:
    """Applies automaton steps to a batch of states with the layer kernel.

    The global Kraus operators are converted to row-sparse form once; each
    layer then costs O(d^2) per state instead of a dense O(d^3) product.
    """

    def __init__(self, spec: AutomatonSpec, backend: str | None = None):
        self.spec = spec
        self.backend = backend
        self.dim = spec.topology.dim
        self._layers = [_kernels.sparse_rows(spec.kraus(layer).ops) for layer in LAYER_ORDER]

    def step(self, rho: np.ndarray) -> np.ndarray:
        for cols, vals in self._layers:
            rho = _kernels.apply_layer(rho, cols, vals, backend=self.backend)
        return rho

    def half_step(self, rho: np.ndarray, layer) -> np.ndarray:
        cols, vals = self._layers[LAYER_ORDER.index(Layer(layer))]
        return _kernels.apply_layer(rho, cols, vals, backend=self.backend)
