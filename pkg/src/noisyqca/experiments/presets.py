"""Named experiment presets, one per reproduced figure.

Each preset expands to the list of configs behind the curves of one figure.
"""

from __future__ import annotations

import math

import numpy as np

from .config import ExperimentConfig

EPSILON = 5e-3
OPTIMAL_PHASES = (0.0, math.pi)


def fig3_phases(trials: int = 1000, seed: int = 0) -> list[ExperimentConfig]:
    """Chain of 8, p = q = 0.5, no noise, three phase choices."""
    base = ExperimentConfig(name="fig3_phases", n_sites=8, boundary="open_chain", p=0.5, q=0.5, trials=trials, seed=seed)
    return [
        base.replace(name=f"fig3_phases[phi1={a:.4g},phi2={b:.4g}]", phi1=a, phi2=b)
        for a, b in ((0.0, 0.0), (0.0, math.pi), (math.pi, 0.0))
    ]


def fig3b_conductivity(trials: int = 1, seed: int = 0, points: int = 17) -> list[ExperimentConfig]:
    """Single-excitation conductivity on a chain of 6 vs phi1 + phi2, three dephasing levels.

    The dynamics starts from a definite excitation, so one trial is exact.
    """
    base = ExperimentConfig(
        name="fig3b_conductivity",
        n_sites=6,
        p=0.5,
        q=0.5,
        phi1=0.0,
        initial="excitation",
        t_max=160,
        trials=trials,
        seed=seed,
        observables=("conductivity", "mean_position"),
    )
    return [
        base.replace(name=f"fig3b_conductivity[xi={xi:g},phase_sum={s:.4f}]", xi=xi, phi2=float(s))
        for xi in (0.0, 0.3, 1.0)
        for s in np.linspace(0.0, 2.0 * math.pi, points)
    ]


def fig4a_chain_pq(trials: int = 1000, seed: int = 0) -> list[ExperimentConfig]:
    """Chain of 8 with optimal phases, equal and unequal (p, q)."""
    base = ExperimentConfig(name="fig4a_chain_pq", n_sites=8, phi1=OPTIMAL_PHASES[0], phi2=OPTIMAL_PHASES[1], trials=trials, seed=seed)
    settings = ((0.5, 0.5), (0.7, 0.7), (0.9, 0.9), (0.7, 0.3), (0.9, 0.1))
    return [base.replace(name=f"fig4a_chain_pq[p={p:g},q={q:g}]", p=p, q=q) for p, q in settings]


def _extremes(name: str, boundary: str, trials: int, seed: int) -> list[ExperimentConfig]:
    # zero phases make p = q = 1 an exact swap
    base = ExperimentConfig(name=name, n_sites=8, boundary=boundary, phi1=0.0, phi2=0.0, trials=trials, seed=seed)
    return [
        base.replace(name=f"{name}[p=1,q={EPSILON:g}]", p=1.0, q=EPSILON, observables=("fidelity", "population")),
        base.replace(name=f"{name}[p=1,q=1]", p=1.0, q=1.0),
    ]


def fig4b_extremes(trials: int = 1000, seed: int = 0) -> list[ExperimentConfig]:
    """Maximal damping and swap channel on a chain of 8."""
    return _extremes("fig4b_extremes", "open_chain", trials, seed)


def fig4c_ring(trials: int = 1000, seed: int = 0) -> list[ExperimentConfig]:
    """Ring of 8 with optimal phases, p = q in {0.5, 0.7, 0.9}."""
    base = ExperimentConfig(name="fig4c_ring", n_sites=8, boundary="ring", phi1=OPTIMAL_PHASES[0], phi2=OPTIMAL_PHASES[1], trials=trials, seed=seed)
    return [base.replace(name=f"fig4c_ring[p=q={p:g}]", p=p, q=p) for p in (0.5, 0.7, 0.9)]


def fig4d_ring_extremes(trials: int = 1000, seed: int = 0) -> list[ExperimentConfig]:
    """Maximal damping and swap channel on a ring of 8; the two curves coincide."""
    return _extremes("fig4d_ring_extremes", "ring", trials, seed)


def fig6_noise(trials: int = 1000, seed: int = 0) -> list[ExperimentConfig]:
    """Swap dynamics on a ring of 8: noiseless, dephased, and with relaxed-causality pumping."""
    base = ExperimentConfig(name="fig6_noise", n_sites=8, boundary="ring", p=1.0, q=1.0, phi1=0.0, phi2=0.0, trials=trials, seed=seed)
    return [
        base.replace(name="fig6_noise[noiseless]"),
        base.replace(name="fig6_noise[xi=0.1]", xi=0.1),
        base.replace(name="fig6_noise[T=0.1]", pumping="T", noise_strength=0.1, allow_noncausal=True),
    ]


PRESETS = {
    "fig3_phases": fig3_phases,
    "fig3b_conductivity": fig3b_conductivity,
    "fig4a_chain_pq": fig4a_chain_pq,
    "fig4b_extremes": fig4b_extremes,
    "fig4c_ring": fig4c_ring,
    "fig4d_ring_extremes": fig4d_ring_extremes,
    "fig6_noise": fig6_noise,
}


def preset(name: str, trials: int | None = None, seed: int = 0) -> list[ExperimentConfig]:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
    return factory(seed=seed) if trials is None else factory(trials=trials, seed=seed)
