"""Local two-site maps: stochastic matrix, noise channels and the Kraus triple.

A neighborhood holds one excitation shared by two sites, so every local map
acts on a 2-dimensional space with basis ``(first site, second site)``.  In
the single-qubit picture used for the classical embedding the same basis is
read as ``(excited, ground)`` and a diagonal state ``diag(m, 1 - m)`` carries
excitation probability ``m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matcore import DEFAULT_TOL, is_hermitian_psd

TWO_PI = 2.0 * math.pi

_I2 = np.eye(2, dtype=np.complex128)
_SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def _check_probability(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class LocalChannelParams:
    """Parameters of the local map on one neighborhood.

    ``p`` and ``q`` are the hopping probabilities of the embedded random walk
    (``p >= q``), ``xi`` the dephasing strength and ``phi1``/``phi2`` the two
    free phases of the local unitary.  The amplitude-damping strength is not
    free: the local unitary only exists for ``eta = p - q``.
    """

    p: float
    q: float
    xi: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        _check_probability("p", self.p)
        _check_probability("q", self.q)
        _check_probability("xi", self.xi)
        if self.p < self.q:
            raise ValueError(f"transfer direction requires p >= q, got p={self.p}, q={self.q}")
        for name in ("phi1", "phi2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def eta(self) -> float:
        return self.p - self.q

    @property
    def one_minus_eta(self) -> float:
        # written as (1 - p) + q so that p = 1, q = eps keeps full precision
        return (1.0 - self.p) + self.q


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Ordered Kraus operators of equal dimension, stored as an ``(M, d, d)`` array."""

    ops: np.ndarray

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=np.complex128)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise ValueError(f"Kraus operators must have shape (M, d, d), got {ops.shape}")
        if not np.all(np.isfinite(ops)):
            raise ValueError("Kraus operators have non-finite entries")
        ops.setflags(write=False)
        object.__setattr__(self, "ops", ops)

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    def __len__(self) -> int:
        return self.ops.shape[0]

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, index) -> np.ndarray:
        return self.ops[index]

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.complex128)
        return np.einsum("mij,jk,mlk->il", self.ops, rho, self.ops.conj())

    def completeness_residual(self) -> float:
        """Max-norm distance of ``sum_mu K_mu^dag K_mu`` from the identity."""
        total = np.einsum("mji,mjk->ik", self.ops.conj(), self.ops)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def choi(self) -> np.ndarray:
        """Choi matrix ``sum_ij |i><j| (x) Phi(|i><j|)``."""
        d = self.dim
        choi = np.zeros((d * d, d * d), dtype=np.complex128)
        for k in self.ops:
            # column-stacking vec(K) gives the (input, output) ordering used above
            v = k.T.reshape(-1)
            choi += np.outer(v, v.conj())
        return choi

    def is_cptp(self, tp_tol: float = 1e-12, cp_tol: float = DEFAULT_TOL) -> bool:
        return self.completeness_residual() <= tp_tol and is_hermitian_psd(self.choi(), cp_tol)


def stochastic_matrix(p: float, q: float) -> np.ndarray:
    """Column-stochastic two-state transition matrix ``[[1-p, q], [p, 1-q]]``."""
    _check_probability("p", p)
    _check_probability("q", q)
    return np.array([[1.0 - p, q], [p, 1.0 - q]])


def dephasing_kraus(xi: float) -> KrausSet:
    """Three-operator dephasing channel; coherences shrink by a factor ``1 - xi``."""
    _check_probability("xi", xi)
    return KrausSet(
        np.stack(
            [
                math.sqrt(1.0 - xi) * _I2,
                math.sqrt(xi) * (_I2 + _SZ) / 2,
                math.sqrt(xi) * (_SZ - _I2) / 2,
            ]
        )
    )


def amplitude_damping_kraus(eta: float) -> KrausSet:
    """Amplitude damping towards the first basis state.

    Negative ``eta`` gives the swapped channel ``sx L sx`` with strength
    ``|eta|``, which damps towards the second basis state instead.
    """
    if not (-1.0 <= eta <= 1.0):
        raise ValueError(f"eta must lie in [-1, 1], got {eta!r}")
    g = abs(eta)
    l0 = (_I2 + _SZ) / 2 + math.sqrt(1.0 - g) * (_I2 - _SZ) / 2
    l1 = math.sqrt(g) * (_SX + 1j * _SY) / 2
    if eta < 0:
        l0, l1 = _SX @ l0 @ _SX, _SX @ l1 @ _SX
    return KrausSet(np.stack([l0, l1]))


def general_unitary(theta: float, phi1: float, phi2: float) -> np.ndarray:
    """Two-parameter-phase unitary with hopping amplitude ``sin(theta)``."""
    c, s = math.cos(theta), math.sin(theta)
    e1, e2 = np.exp(1j * phi1), np.exp(1j * phi2)
    return np.array([[c, s * e2], [-s * e1, c * e1 * e2]])


def stochastic_angle(p: float, q: float) -> float:
    """Rotation angle whose dephased unitary reproduces ``T_{p,q}`` after damping.

    ``cos(2 theta) = (1 - p - q) / (1 - |q - p|)``; the ratio is clipped to
    [-1, 1] against rounding, and ``p = q = 1`` (a 0/0 ratio) maps to the
    swap angle ``pi/2``.
    """
    _check_probability("p", p)
    _check_probability("q", q)
    denom = 1.0 - abs(q - p)
    if denom == 0.0:
        return math.pi / 2
    ratio = min(1.0, max(-1.0, (1.0 - p - q) / denom))
    return 0.5 * math.acos(ratio)


def _require_unitary_part(params: LocalChannelParams) -> float:
    om = params.one_minus_eta
    if om <= 0.0:
        raise ValueError("p = 1, q = 0 (eta = 1) has no local unitary; use q > 0")
    return om


def local_unitary(params: LocalChannelParams) -> np.ndarray:
    p, q = params.p, params.q
    om = _require_unitary_part(params)
    e1, e2 = np.exp(1j * params.phi1), np.exp(1j * params.phi2)
    a = math.sqrt((1.0 - p) / om)
    b = math.sqrt(q / om)
    return np.array([[a, b * e2], [b * e1, -a * e1 * e2]])


def local_kraus_triple(params: LocalChannelParams) -> KrausSet:
    """Unitary, dephasing and amplitude damping composed into three Kraus operators.

    ``K2`` carries the prefactor ``sqrt(eta / (1 - eta))`` on its matrix; every
    entry is evaluated as a single square root of a combined ratio so that
    ``p = 1, q -> 0`` (where ``1 - eta = q``) stays finite and accurate.
    """
    p, q, xi = params.p, params.q, params.xi
    om = _require_unitary_part(params)
    eta = params.eta
    e1, e2 = np.exp(1j * params.phi1), np.exp(1j * params.phi2)
    c0 = 1.0 - xi / 2
    c1 = xi / 2

    def block(c, sign):
        return np.array(
            [
                [math.sqrt(c * (1.0 - p)), math.sqrt(c * q) * e2],
                [sign * math.sqrt(c * q / om) * e1, -sign * math.sqrt(c * (1.0 - p) / om) * e1 * e2],
            ]
        )

    k2 = np.array(
        [
            [0.0, 0.0],
            [math.sqrt(eta * (1.0 - p) / om), math.sqrt(eta * q / om) * e2],
        ]
    )
    return KrausSet(np.stack([block(c0, 1.0), block(c1, -1.0), k2]))


def classical_embedding_channel(params: LocalChannelParams) -> KrausSet:
    """Complete dephasing of ``U_{f(theta)}`` followed by amplitude damping ``eta = q - p``.

    Built from the generic unitary, the dephasing channel at ``xi = 1`` and the
    (swapped) amplitude damping channel, with no use of the Kraus triple.
    """
    u = general_unitary(stochastic_angle(params.p, params.q), params.phi1, params.phi2)
    deph = dephasing_kraus(1.0)
    damp = amplitude_damping_kraus(params.q - params.p)
    ops = [l @ d @ u for l in damp for d in deph]
    return KrausSet(np.stack(ops))


def embedded_stochastic_action(params: LocalChannelParams, m: float) -> float:
    """Excitation probability after one completely dephased local step."""
    _check_probability("m", m)
    return (1.0 - params.p - params.q) * m + params.q
