"""Experiment configuration and its YAML file format.

A config file is a mapping with a ``schema_version`` and five sections::

    schema_version: 1
    name: fig3_phases
    lattice:  {n_sites: 8, boundary: open_chain}
    channel:  {p: 0.5, q: 0.5, xi: 0.0, phi1: 0, phi2: pi}
    noise:    {pumping: off, strength: 0.0, c_weights: [1, 0, 0]}
    transfer: {sender: 1, receiver: null, initial: haar}
    run:      {t_max: 100, trials: 1000, seed: 1234, observables: [fidelity]}
    allow_noncausal: false

Unknown keys anywhere are rejected.  Phases may be written as numbers or as
simple multiples of ``pi`` (``pi``, ``-pi/2``, ``3*pi/4``).
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import re
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..automaton import (
    AutomatonSpec,
    Topology,
    causal_noise_vectors,
    noise_vectors_T,
)
from ..channels import LocalChannelParams

SCHEMA_VERSION = 1
OBSERVABLES = ("fidelity", "population", "mean_position", "conductivity", "diagnostics")
PUMPING_MODES = ("off", "T", "causal")
INITIAL_MODES = ("haar", "excitation")


class ConfigError(ValueError):
    pass


_PI_RE = re.compile(r"^\s*([-+]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(value) -> float:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            coef = m.group(1)
            coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
            denom = float(m.group(2)) if m.group(2) else 1.0
            return coef * math.pi / denom
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"cannot read angle {value!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "run"
    n_sites: int = 8
    boundary: str = "open_chain"
    p: float = 0.5
    q: float = 0.5
    xi: float = 0.0
    phi1: float = 0.0
    phi2: float = math.pi
    pumping: str = "off"
    noise_strength: float = 0.0
    c_weights: tuple = (1.0, 0.0, 0.0)
    sender: int = 1
    receiver: int | None = None
    initial: str = "haar"
    t_max: int = 100
    trials: int = 1000
    seed: int = 0
    observables: tuple = ("fidelity",)
    allow_noncausal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "c_weights", tuple(float(c) for c in self.c_weights))
        object.__setattr__(self, "observables", tuple(self.observables))
        if self.pumping not in PUMPING_MODES:
            raise ConfigError(f"pumping must be one of {PUMPING_MODES}, got {self.pumping!r}")
        if self.initial not in INITIAL_MODES:
            raise ConfigError(f"initial must be one of {INITIAL_MODES}, got {self.initial!r}")
        bad = [o for o in self.observables if o not in OBSERVABLES]
        if bad or not self.observables:
            raise ConfigError(f"observables must be a non-empty subset of {OBSERVABLES}, got {self.observables!r}")
        if self.trials < 1 or self.t_max < 1:
            raise ConfigError("trials and t_max must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        topo = self.topology()
        for site in (self.sender, self.target):
            if not 1 <= site <= topo.n_sites:
                raise ConfigError(f"site {site} outside 1..{topo.n_sites}")
        self.params()

    @property
    def target(self) -> int:
        return self.topology().default_receiver() if self.receiver is None else self.receiver

    def topology(self) -> Topology:
        try:
            return Topology(self.n_sites, self.boundary)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def params(self) -> LocalChannelParams:
        try:
            return LocalChannelParams(self.p, self.q, self.xi, self.phi1, self.phi2)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def automaton(self) -> AutomatonSpec:
        """The automaton this config describes.

        ``pumping: causal`` uses equal vacuum couplings whatever ``c_weights``
        says, since that is the only branch compatible with nonzero causal
        pumping.  ``pumping: T`` builds the relaxed-causality automaton.
        """
        topo, params = self.topology(), self.params()
        if self.pumping == "off":
            return AutomatonSpec.build(topo, params, self.c_weights)
        if self.pumping == "T":
            w = noise_vectors_T(params.xi, params.eta, self.noise_strength, topo.n_sites)
            return AutomatonSpec.build(topo, params, self.c_weights, w, causal=False)
        w = causal_noise_vectors(params, self.noise_strength, topo.n_sites)
        return AutomatonSpec.build(topo, params, (1.0, 1.0, 1.0), w, causal=True)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "lattice": {"n_sites": self.n_sites, "boundary": self.boundary},
            "channel": {"p": self.p, "q": self.q, "xi": self.xi, "phi1": self.phi1, "phi2": self.phi2},
            "noise": {"pumping": self.pumping, "strength": self.noise_strength, "c_weights": list(self.c_weights)},
            "transfer": {"sender": self.sender, "receiver": self.receiver, "initial": self.initial},
            "run": {
                "t_max": self.t_max,
                "trials": self.trials,
                "seed": self.seed,
                "observables": list(self.observables),
            },
            "allow_noncausal": self.allow_noncausal,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        version = data.pop("schema_version", None)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
        return cls(**_flatten(data))


# section -> {file key: field name}
_SECTIONS = {
    "lattice": {"n_sites": "n_sites", "boundary": "boundary"},
    "channel": {"p": "p", "q": "q", "xi": "xi", "phi1": "phi1", "phi2": "phi2"},
    "noise": {"pumping": "pumping", "strength": "noise_strength", "c_weights": "c_weights"},
    "transfer": {"sender": "sender", "receiver": "receiver", "initial": "initial"},
    "run": {"t_max": "t_max", "trials": "trials", "seed": "seed", "observables": "observables"},
}
_TOP_LEVEL = {"name", "allow_noncausal"}


def _flatten(data: dict) -> dict:
    out = {}
    for key, value in data.items():
        if key in _TOP_LEVEL:
            out[key] = value
            continue
        if key not in _SECTIONS:
            raise ConfigError(f"unknown config key {key!r}")
        if not isinstance(value, dict):
            raise ConfigError(f"section {key!r} must be a mapping")
        for sub, v in value.items():
            if sub not in _SECTIONS[key]:
                raise ConfigError(f"unknown config key {key}.{sub}")
            out[_SECTIONS[key][sub]] = v
    for angle in ("phi1", "phi2"):
        if angle in out:
            out[angle] = parse_angle(out[angle])
    if out.get("pumping") is False:
        # YAML 1.1 reads a bare `off` as false
        out["pumping"] = "off"
    return out


def field_name(dotted: str) -> str:
    """Map a dotted file key such as ``channel.phi2`` to its config field."""
    section, _, sub = dotted.partition(".")
    if not sub:
        if section in _TOP_LEVEL:
            return section
        raise ConfigError(f"unknown config key {dotted!r}")
    try:
        return _SECTIONS[section][sub]
    except KeyError:
        raise ConfigError(f"unknown config key {dotted!r}") from None


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return ExperimentConfig.from_dict(data)


def dump_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))


def load_sweep(path) -> list[ExperimentConfig]:
    """Expand a sweep file (``base`` config plus a ``grid`` of dotted keys) into configs."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    unknown = set(data) - {"schema_version", "base", "grid"}
    if unknown:
        raise ConfigError(f"unknown sweep keys {sorted(unknown)}")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {data.get('schema_version')!r}")
    base = ExperimentConfig.from_dict({"schema_version": SCHEMA_VERSION, **(data.get("base") or {})})
    grid = data.get("grid") or {}
    if not isinstance(grid, dict):
        raise ConfigError("grid must map dotted keys to value lists")
    keys = list(grid)
    fields = [field_name(k) for k in keys]
    values = [list(grid[k]) for k in keys]
    configs = []
    for combo in itertools.product(*values):
        changes = {}
        for f, v in zip(fields, combo):
            changes[f] = parse_angle(v) if f in ("phi1", "phi2") else v
        suffix = ",".join(f"{k.split('.')[-1]}={v}" for k, v in zip(keys, combo))
        name = f"{base.name}[{suffix}]" if suffix else base.name
        configs.append(base.replace(name=name, **changes))
    if not configs:
        raise ConfigError("sweep expands to no configs")
    return configs
