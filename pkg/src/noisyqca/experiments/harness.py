"""Monte-Carlo harness: Haar sampling, batched evolution and trial averaging.

Every trial draws its initial state from its own random stream, derived from
``(seed, trial index)`` alone, and trials are evolved in fixed-size chunks.
Results are therefore bit-identical whatever the number of worker threads.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from .. import _kernels
from ..automaton import CAUSAL_LINES, ConstraintError, check_causal_class
from ..evolution import PSD_TOL, STATE_TOL, BatchPropagator
from .config import ExperimentConfig

log = logging.getLogger(__name__)

CHUNK = 128
CLASSICAL_FIDELITY = 2.0 / 3.0


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent random stream for one trial of a run."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def haar_qubit(rng: np.random.Generator) -> tuple[float, complex]:
    """Haar-random pure qubit ``alpha|0> + beta|1>`` with ``alpha`` real and nonnegative."""
    cos_theta = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    alpha = math.sqrt((1.0 + cos_theta) / 2.0)
    beta = complex(np.exp(1j * phi)) * math.sqrt((1.0 - cos_theta) / 2.0)
    return alpha, beta


@dataclass
class RunResult:
    config: ExperimentConfig
    t: np.ndarray
    means: dict
    stderrs: dict
    counts: dict
    metadata: dict = field(default_factory=dict)
    aborted: list = field(default_factory=list)

    def mean(self, observable: str) -> np.ndarray:
        return self.means[observable]

    def stderr(self, observable: str) -> np.ndarray:
        return self.stderrs[observable]

    @property
    def observables(self) -> list[str]:
        return list(self.means)


def _initial_amplitudes(config: ExperimentConfig, trials: range) -> tuple[np.ndarray, np.ndarray]:
    if config.initial == "excitation":
        n = len(trials)
        return np.zeros(n, dtype=np.complex128), np.ones(n, dtype=np.complex128)
    amps = [haar_qubit(trial_rng(config.seed, k)) for k in trials]
    return (
        np.array([a for a, _ in amps], dtype=np.complex128),
        np.array([b for _, b in amps], dtype=np.complex128),
    )


def _series_names(config: ExperimentConfig) -> list[str]:
    names = []
    for obs in config.observables:
        if obs == "diagnostics":
            names += ["trace_error", "min_eigenvalue"]
        else:
            names.append(obs)
    return names


def _run_chunk(config: ExperimentConfig, prop: BatchPropagator, trials: range, full_psd: bool):
    """Evolve one chunk of trials; returns per-trial series and abort records."""
    n_sites = config.n_sites
    x = config.target
    s = config.sender
    alpha, beta = _initial_amplitudes(config, trials)
    nb = len(trials)
    d = n_sites + 1
    rho = np.zeros((nb, d, d), dtype=np.complex128)
    rho[:, 0, 0] = np.abs(alpha) ** 2
    rho[:, s, s] = np.abs(beta) ** 2
    rho[:, 0, s] = alpha * beta.conj()
    rho[:, s, 0] = alpha.conj() * beta

    names = _series_names(config)
    out = {name: np.full((nb, config.t_max + 1), np.nan) for name in names}
    alive = np.ones(nb, dtype=bool)
    aborted = []
    sites = np.arange(1, d)

    for t in range(config.t_max + 1):
        if t > 0:
            rho = prop.step(rho)
        diag = np.real(np.einsum("bii->bi", rho))
        trace_err = np.abs(np.einsum("bii->b", rho) - 1.0)
        herm_err = np.max(np.abs(rho - np.conj(np.swapaxes(rho, 1, 2))), axis=(1, 2))
        if full_psd:
            min_eig = np.linalg.eigvalsh(0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))).min(axis=1)
        else:
            min_eig = diag.min(axis=1)
        bad = alive & ((trace_err > STATE_TOL) | (herm_err > STATE_TOL) | (min_eig < -PSD_TOL))
        for b in np.flatnonzero(bad):
            reason = f"trace error {trace_err[b]:.3e}, hermiticity {herm_err[b]:.3e}, min eigenvalue {min_eig[b]:.3e}"
            aborted.append({"trial": trials[b], "t": t, "reason": reason})
            log.warning("trial %d aborted at t=%d: %s", trials[b], t, reason)
        alive &= ~bad
        live = alive

        pop = diag[:, x]
        if "fidelity" in out:
            ground = diag.sum(axis=1) - pop
            coh = rho[:, 0, x]
            f = np.abs(alpha) ** 2 * ground + np.abs(beta) ** 2 * pop + 2.0 * np.real(alpha.conj() * beta * coh)
            out["fidelity"][live, t] = f[live]
        if "population" in out:
            out["population"][live, t] = pop[live]
        if "mean_position" in out:
            ses = diag[:, 1:].sum(axis=1)
            ok = live & (ses > 1e-14)
            out["mean_position"][ok, t] = (diag[ok, 1:] @ sites) / ses[ok]
        if "conductivity" in out and t > 0:
            # running time average of the receiver population over steps 1..t
            prev = out["conductivity"][:, t - 1] if t > 1 else np.zeros(nb)
            out["conductivity"][live, t] = (prev[live] * (t - 1) + pop[live]) / t
        if "trace_error" in out:
            out["trace_error"][live, t] = trace_err[live]
            out["min_eigenvalue"][live, t] = min_eig[live]
    return out, aborted


def _aggregate(series: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    counts = np.sum(~np.isnan(series), axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        total = np.nansum(series, axis=0)
        mean = np.where(counts > 0, total / np.maximum(counts, 1), np.nan)
        dev = np.where(np.isnan(series), 0.0, series - mean)
        var = np.sum(dev**2, axis=0) / np.maximum(counts - 1, 1)
        stderr = np.where(counts > 1, np.sqrt(var / np.maximum(counts, 1)), np.where(counts == 1, 0.0, np.nan))
    return mean, stderr, counts


def constraint_gate(config: ExperimentConfig, spec=None):
    """Causal-class report for ``config``; raises if non-causal without the override."""
    spec = config.automaton() if spec is None else spec
    report = check_causal_class(spec)
    broken = [c for c in report.failures() if c.name in CAUSAL_LINES]
    if broken and not config.allow_noncausal:
        names = sorted({c.name for c in broken})
        raise ConstraintError(
            f"{config.name}: automaton is not causal ({', '.join(names)}); "
            "set allow_noncausal / pass --allow-noncausal to run it anyway"
        )
    return spec, report


def run_experiment(config: ExperimentConfig, threads: int = 1, backend: str | None = None) -> RunResult:
    """Average the requested observables over ``config.trials`` trials for t = 0..t_max."""
    start = time.perf_counter()
    spec, report = constraint_gate(config)
    prop = BatchPropagator(spec, backend=backend)
    full_psd = "diagnostics" in config.observables
    chunks = [range(k, min(k + CHUNK, config.trials)) for k in range(0, config.trials, CHUNK)]

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _run_chunk(config, prop, c, full_psd), chunks))
    else:
        parts = [_run_chunk(config, prop, c, full_psd) for c in chunks]

    names = _series_names(config)
    means, stderrs, counts = {}, {}, {}
    for name in names:
        series = np.concatenate([p[0][name] for p in parts], axis=0)
        means[name], stderrs[name], counts[name] = _aggregate(series)
    aborted = [a for p in parts for a in p[1]]

    metadata = {
        "config": config.to_dict(),
        "seed": config.seed,
        "receiver": config.target,
        "constraint_report": report.as_dict(),
        "aborted_trials": aborted,
        "wall_time_s": time.perf_counter() - start,
        "code_version": __version__,
        "kernel_backend": backend or _kernels.BACKEND,
        "numpy_version": np.__version__,
    }
    return RunResult(config, np.arange(config.t_max + 1), means, stderrs, counts, metadata, aborted)


class SweepError(RuntimeError):
    def __init__(self, errors, results):
        self.errors = errors
        self.results = results
        detail = "; ".join(f"{name}: {err}" for _, name, err in errors)
        super().__init__(f"{len(errors)} sweep config(s) failed: {detail}")


def sweep(configs, threads: int = 1, backend: str | None = None) -> list[RunResult]:
    """Run every config (each with its own seed); failures are collected and raised together."""
    configs = list(configs)
    if not configs:
        raise ValueError("sweep needs at least one config")

    def one(cfg):
        try:
            return run_experiment(cfg, threads=1, backend=backend), None
        except Exception as exc:  # collected per config, re-raised below
            return None, exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, configs))
    else:
        outcomes = [one(c) for c in configs]
    errors = [(i, cfg.name, err) for i, (cfg, (_, err)) in enumerate(zip(configs, outcomes)) if err is not None]
    results = [res for res, _ in outcomes]
    if errors:
        raise SweepError(errors, results)
    return results
