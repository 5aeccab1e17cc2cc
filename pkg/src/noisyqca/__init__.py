"""Noisy quantum cellular automata for state transfer on qubit lattices."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .automaton import (
    AutomatonSpec,
    Boundary,
    ConstraintError,
    Layer,
    PumpingVectors,
    Topology,
    VacuumCoupling,
    assemble_global_kraus,
    causal_noise_vectors,
    check_causal_class,
    noise_vectors_T,
    normalize_coupling,
)
from .channels import KrausSet, LocalChannelParams, local_kraus_triple, local_unitary
from .evolution import (
    embed_sender_state,
    half_step,
    reduce_neighborhood,
    reduce_site,
    step,
    transfer_fidelity,
)
from .verify import check_causality_operational, check_translational_invariance

__version__ = "0.1.0"
