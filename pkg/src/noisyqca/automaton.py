"""Global (N+1)-dimensional Kraus operators for the two partition layers.

Basis index 0 is the global vacuum, index ``n`` (1..N) the state with the
single excitation on site ``n``.  Each global operator has the block form::

    [[z_mu, 0    ],
     [W_mu, K_mu ]]

where ``K_mu`` is block diagonal with one local 2x2 Kraus operator per
neighborhood and ``W_mu`` pumps an excitation out of the vacuum.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channels import KrausSet, LocalChannelParams, local_kraus_triple

N_KRAUS = 3
IDENTITY_TOL = 1e-12
CAUSAL_TOL = 1e-12


class ConstraintError(ValueError):
    """Raised when an automaton violates one of its defining constraints."""


class Boundary(str, enum.Enum):
    OPEN_CHAIN = "open_chain"
    RING = "ring"


class Layer(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class Topology:
    n_sites: int
    boundary: Boundary = Boundary.RING

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.n_sites < 4 or self.n_sites % 2:
            raise ValueError(f"n_sites must be even and >= 4, got {self.n_sites}")

    @property
    def is_ring(self) -> bool:
        return self.boundary is Boundary.RING

    @property
    def dim(self) -> int:
        return self.n_sites + 1

    def pairs(self, layer) -> list[tuple[int, int]]:
        """Neighborhoods ``(first, second)`` of a layer, as 1-based site indices."""
        n = self.n_sites
        if Layer(layer) is Layer.EVEN:
            return [(i, i + 1) for i in range(1, n, 2)]
        pairs = [(i, i + 1) for i in range(2, n, 2)]
        if self.is_ring:
            pairs.append((n, 1))
        return pairs

    def idle_sites(self, layer) -> list[int]:
        if Layer(layer) is Layer.ODD and not self.is_ring:
            return [1, self.n_sites]
        return []

    def neighbor(self, x: int) -> int:
        """Right neighbor of site ``x`` (wrapping on rings)."""
        if not 1 <= x <= self.n_sites:
            raise IndexError(f"site {x} outside 1..{self.n_sites}")
        if x == self.n_sites:
            if not self.is_ring:
                raise IndexError(f"site {x} has no right neighbor on an open chain")
            return 1
        return x + 1

    def layer_of(self, x: int) -> Layer:
        """Layer in which ``(x, neighbor(x))`` is a neighborhood."""
        self.neighbor(x)
        return Layer.EVEN if x % 2 == 1 else Layer.ODD

    def default_receiver(self) -> int:
        return self.n_sites // 2 + 1 if self.is_ring else self.n_sites

    def shift(self, k: int = 1) -> np.ndarray:
        """Permutation ``|n> -> |n + k>`` on the N sites (periodic)."""
        n = self.n_sites
        s = np.zeros((n, n))
        for i in range(n):
            s[(i + k) % n, i] = 1.0
        return s


@dataclass(frozen=True, eq=False)
class PumpingVectors:
    """Local pumping vectors ``w_mu = (w_mu^0, w_mu^1)``.

    ``w`` has shape ``(3, 2)`` for translationally replicated vectors, or
    ``(3, n_blocks, 2)`` for an explicit per-neighborhood assignment.
    """

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.complex128)
        if w.shape[0] != N_KRAUS or w.shape[-1] != 2 or w.ndim not in (2, 3):
            raise ValueError(f"pumping vectors must have shape (3, 2) or (3, B, 2), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("pumping vectors have non-finite entries")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def zeros(cls) -> "PumpingVectors":
        return cls(np.zeros((N_KRAUS, 2)))

    @property
    def replicated(self) -> bool:
        return self.w.ndim == 2

    @property
    def is_zero(self) -> bool:
        return not np.any(self.w)

    def block(self, index: int) -> np.ndarray:
        """The ``(3, 2)`` vectors on neighborhood ``index``."""
        return self.w if self.replicated else self.w[:, index, :]

    def blocks(self, n_blocks: int) -> np.ndarray:
        if self.replicated:
            return np.broadcast_to(self.w[:, None, :], (N_KRAUS, n_blocks, 2))
        if self.w.shape[1] < n_blocks:
            raise ValueError(f"need pumping vectors for {n_blocks} blocks, have {self.w.shape[1]}")
        return self.w[:, :n_blocks, :]

    def squared_norm(self, n_blocks: int) -> float:
        """``sum_mu ||W_mu||^2`` for a layer with ``n_blocks`` neighborhoods."""
        return float(np.sum(np.abs(self.blocks(n_blocks)) ** 2))


@dataclass(frozen=True, eq=False)
class VacuumCoupling:
    z: np.ndarray
    c_weights: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.complex128)
        if z.shape != (N_KRAUS,):
            raise ValueError(f"need {N_KRAUS} vacuum couplings, got shape {z.shape}")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "c_weights", tuple(float(c) for c in self.c_weights))


def normalize_coupling(c_weights, pumping: PumpingVectors, n_sites: int, n_blocks: int | None = None) -> VacuumCoupling:
    """Scale the relative weights so that ``sum|z|^2 + sum||W||^2 = 1``.

    ``n_blocks`` defaults to ``n_sites / 2``; the odd layer of an open chain
    has one neighborhood fewer.
    """
    c = np.asarray(c_weights, dtype=float)
    if c.shape != (N_KRAUS,) or np.any(c < 0):
        raise ValueError(f"c_weights must be three nonnegative numbers, got {c_weights!r}")
    if not np.any(c):
        raise ValueError("c_weights must not all be zero")
    if n_blocks is None:
        n_blocks = n_sites // 2
    remaining = 1.0 - pumping.squared_norm(n_blocks)
    if remaining < 0:
        raise ValueError(f"pumping norm {1.0 - remaining:.6g} exceeds 1; no vacuum weight left")
    scale = math.sqrt(remaining / float(np.sum(c**2)))
    return VacuumCoupling(c * scale, tuple(c))


def noise_vectors_T(xi: float, eta: float, strength: float, n_sites: int) -> PumpingVectors:
    """Balanced real pumping vectors of noise strength ``T``.

    Every component is bounded by ``T / sqrt(3 N)`` and the set lies in the
    kernel ``sum_mu K_mu^dag w_mu = 0`` of the local Kraus triple.  These
    vectors do not satisfy the causality lines, so automata using them need
    ``causal=False``.
    """
    if not (0.0 <= xi <= 1.0):
        raise ValueError(f"xi must lie in [0, 1], got {xi!r}")
    if not (0.0 <= eta < 1.0):
        raise ValueError(f"eta must lie in [0, 1), got {eta!r}")
    if strength < 0:
        raise ValueError(f"noise strength must be nonnegative, got {strength!r}")
    a = strength / math.sqrt(3 * n_sites)
    h = xi / 2
    w0 = -a * math.sqrt(h / (1.0 - h))
    w2 = a * math.sqrt(h) * math.sqrt(1.0 - eta)
    return PumpingVectors(
        np.array(
            [
                [w0, w0],
                [a * (1.0 - math.sqrt(eta)), -a],
                [w2, w2],
            ]
        )
    )


def kernel_residual(params: LocalChannelParams, w) -> float:
    """Max-norm of ``sum_mu K_mu^dag w_mu`` for local vectors ``w`` of shape (3, 2)."""
    ks = local_kraus_triple(params).ops
    w = np.asarray(w, dtype=np.complex128)
    return float(np.max(np.abs(np.einsum("mji,mj->i", ks.conj(), w))))


def causal_noise_vectors(params: LocalChannelParams, strength: float, n_sites: int) -> PumpingVectors:
    """Real pumping vectors in the local kernel with ``sum_mu w_mu^i = 0``.

    Paired with equal vacuum couplings ``z_mu = z`` these satisfy every line
    of the causal constraint set.  The solution is the leading null vector of
    the stacked linear conditions, scaled so its largest component equals
    ``T / sqrt(3 N)``.
    """
    if strength < 0:
        raise ValueError(f"noise strength must be nonnegative, got {strength!r}")
    if strength == 0:
        return PumpingVectors.zeros()
    ks = local_kraus_triple(params).ops
    # unknowns ordered (w0^0, w0^1, w1^0, w1^1, w2^0, w2^1)
    kernel = np.concatenate([k.conj().T for k in ks], axis=1)
    sums = np.array([[1, 0, 1, 0, 1, 0], [0, 1, 0, 1, 0, 1]], dtype=float)
    system = np.vstack([kernel.real, kernel.imag, sums])
    _, sv, vh = np.linalg.svd(system)
    rank = int(np.sum(sv > 1e-12 * sv.max()))
    if rank >= 6:
        raise ConstraintError("no nonzero causal pumping vectors exist for these parameters")
    v = vh[rank]
    v = v / np.max(np.abs(v))
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return PumpingVectors(v.reshape(N_KRAUS, 2) * strength / math.sqrt(3 * n_sites))


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    residual: float
    passed: bool
    layer: str | None = None


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[ConstraintCheck]:
        return [c for c in self.checks if not c.passed]

    def by_name(self, name: str) -> list[ConstraintCheck]:
        return [c for c in self.checks if c.name == name]

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "layer": c.layer, "residual": c.residual, "passed": c.passed}
                for c in self.checks
            ],
        }

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            where = f"[{c.layer}] " if c.layer else ""
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {where}{c.name}: residual {c.residual:.3e}")
        return "\n".join(lines)


# constraint names, in the order the report lists them
REPLICATION = "pumping replicated W = (+) w"
NO_DISSIPATION = "no dissipation V = 0"
NORMALIZATION = "normalization sum(|z|^2 + ||W||^2) = 1"
KERNEL = "kernel sum K^dag w = 0"
CAUSAL_ZW = "causality sum z w^i = 0"
CAUSAL_W = "causality sum w^i = 0"
IDENTITY_LINES = (NO_DISSIPATION, NORMALIZATION, KERNEL)
CAUSAL_LINES = (REPLICATION, CAUSAL_ZW, CAUSAL_W)


@dataclass(frozen=True, eq=False)
class AutomatonSpec:
    """Everything needed to assemble the global Kraus operators.

    ``causal`` records whether the causality lines of the constraint set are
    enforced at assembly time; the relaxed-causality pumping construction
    needs ``causal=False``.
    """

    topology: Topology
    params: LocalChannelParams
    coupling: VacuumCoupling = field(default_factory=lambda: VacuumCoupling(np.array([1.0, 0.0, 0.0])))
    pumping: PumpingVectors = field(default_factory=PumpingVectors.zeros)
    causal: bool = True

    @classmethod
    def build(
        cls,
        topology: Topology,
        params: LocalChannelParams,
        c_weights=(1.0, 0.0, 0.0),
        pumping: PumpingVectors | None = None,
        causal: bool = True,
    ) -> "AutomatonSpec":
        pumping = PumpingVectors.zeros() if pumping is None else pumping
        coupling = normalize_coupling(c_weights, pumping, topology.n_sites)
        return cls(topology, params, coupling, pumping, causal)

    @cached_property
    def local_kraus(self) -> KrausSet:
        return local_kraus_triple(self.params)

    def layer_blocks(self, layer) -> int:
        return len(self.topology.pairs(layer))

    def layer_z(self, layer) -> np.ndarray:
        """Vacuum couplings used by a layer.

        The odd layer of an open chain has fixed weights (1, 0, 0), normalized
        against its own (smaller) number of neighborhoods.
        """
        if Layer(layer) is Layer.ODD and not self.topology.is_ring:
            return normalize_coupling(
                (1.0, 0.0, 0.0), self.pumping, self.topology.n_sites, self.layer_blocks(layer)
            ).z
        return self.coupling.z

    def layer_pumping(self, layer) -> np.ndarray:
        """Global pumping vectors ``W_mu`` of a layer, shape ``(3, N)`` (site n at column n-1)."""
        pairs = self.topology.pairs(layer)
        w = self.pumping.blocks(len(pairs))
        out = np.zeros((N_KRAUS, self.topology.n_sites), dtype=np.complex128)
        for b, (i, j) in enumerate(pairs):
            out[:, i - 1] = w[:, b, 0]
            out[:, j - 1] = w[:, b, 1]
        return out

    def kraus(self, layer) -> KrausSet:
        """Assembled global Kraus set of a layer (cached, validated)."""
        return self._assembled[Layer(layer)]

    @cached_property
    def _assembled(self) -> dict:
        report = check_causal_class(self)
        required = IDENTITY_LINES + (CAUSAL_LINES if self.causal else ())
        bad = [c for c in report.failures() if c.name in required]
        if bad:
            detail = "; ".join(f"{c.name} ({c.layer}, residual {c.residual:.3e})" for c in bad)
            raise ConstraintError(f"automaton violates: {detail}")
        return {layer: _assemble(self, layer) for layer in Layer}


def _assemble(spec: AutomatonSpec, layer: Layer) -> KrausSet:
    topo = spec.topology
    d = topo.dim
    local = spec.local_kraus.ops
    ops = np.zeros((N_KRAUS, d, d), dtype=np.complex128)
    ops[:, 0, 0] = spec.layer_z(layer)
    ops[:, 1:, 0] = spec.layer_pumping(layer)
    for i, j in topo.pairs(layer):
        idx = np.array([i, j])
        ops[:, idx[:, None], idx[None, :]] = local
    for s in topo.idle_sites(layer):
        ops[0, s, s] = 1.0
    return KrausSet(ops)


def assemble_global_kraus(spec: AutomatonSpec, layer) -> KrausSet:
    return spec.kraus(layer)


def check_causal_class(spec: AutomatonSpec, tol: float = CAUSAL_TOL) -> ConstraintReport:
    """Evaluate each line of the causal noisy-automaton constraint set.

    Lines are evaluated per layer on the operators that would be assembled;
    nothing is raised, failing lines are reported with their residuals.
    """
    checks = []
    local = spec.local_kraus.ops
    for layer in Layer:
        n_blocks = spec.layer_blocks(layer)
        z = spec.layer_z(layer)
        w = spec.pumping.blocks(n_blocks)
        W = spec.layer_pumping(layer)
        name = layer.value

        if spec.pumping.replicated:
            rep = 0.0
        else:
            rep = float(np.max(np.abs(w - w[:, :1, :])))
        checks.append(ConstraintCheck(REPLICATION, rep, rep <= tol, name))
        checks.append(ConstraintCheck(NO_DISSIPATION, 0.0, True, name))

        norm = abs(float(np.sum(np.abs(z) ** 2) + np.sum(np.abs(W) ** 2)) - 1.0)
        checks.append(ConstraintCheck(NORMALIZATION, norm, norm <= tol, name))

        kern = 0.0
        for b in range(n_blocks):
            kern = max(kern, float(np.max(np.abs(np.einsum("mji,mj->i", local.conj(), w[:, b, :])))))
        checks.append(ConstraintCheck(KERNEL, kern, kern <= tol, name))

        zw = float(np.max(np.abs(np.einsum("m,mbi->bi", z, w)), initial=0.0))
        checks.append(ConstraintCheck(CAUSAL_ZW, zw, zw <= tol, name))
        sw = float(np.max(np.abs(np.sum(w, axis=0)), initial=0.0))
        checks.append(ConstraintCheck(CAUSAL_W, sw, sw <= tol, name))
    return ConstraintReport(tuple(checks))
