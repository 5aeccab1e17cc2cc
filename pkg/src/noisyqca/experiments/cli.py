"""Command-line entry point: ``noisyqca {run,preset,sweep,verify}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..automaton import CAUSAL_LINES, ConstraintError, check_causal_class
from ..verify import check_causality_operational, check_translational_invariance
from .config import ConfigError, load_config, load_sweep
from .export import export
from .harness import SweepError, run_experiment, sweep
from .presets import PRESETS, preset


def _overrides(cfg, args):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.allow_noncausal:
        changes["allow_noncausal"] = True
    return cfg.replace(**changes) if changes else cfg


def _write(results, args) -> None:
    for res in results:
        files = export(res, args.out, format=args.format, plot=args.plot)
        line = ", ".join(str(p) for p in files.values())
        n_abort = len(res.aborted)
        note = f" ({n_abort} aborted trials)" if n_abort else ""
        print(f"{res.config.name}: wrote {line}{note}")


def _run_all(configs, args):
    if len(configs) == 1:
        return [run_experiment(configs[0], threads=args.threads)]
    return sweep(configs, threads=args.threads)


def cmd_run(args) -> int:
    cfg = _overrides(load_config(args.config), args)
    _write([run_experiment(cfg, threads=args.threads)], args)
    return 0


def cmd_sweep(args) -> int:
    configs = [_overrides(c, args) for c in load_sweep(args.config)]
    _write(_run_all(configs, args), args)
    return 0


def cmd_preset(args) -> int:
    if args.list or args.name is None:
        for name, factory in PRESETS.items():
            doc = (factory.__doc__ or "").strip()
            print(f"{name:22s} {doc.splitlines()[0] if doc else ''}")
        return 0
    seed = 0 if args.seed is None else args.seed
    configs = preset(args.name, trials=args.trials, seed=seed)
    if args.allow_noncausal:
        configs = [c.replace(allow_noncausal=True) for c in configs]
    _write(_run_all(configs, args), args)
    return 0


def cmd_verify(args) -> int:
    cfg = _overrides(load_config(args.config), args)
    spec = cfg.automaton()
    report = check_causal_class(spec)
    print(f"[{cfg.name}] constraint report")
    print(report)
    if spec.topology.is_ring:
        res = check_translational_invariance(spec)
        print(f"translational invariance residual: {res:.3e}")
    caus = check_causality_operational(spec, trials=args.causality_trials, seed=cfg.seed)
    print(
        f"operational causality ({caus.trials} pairs): max difference {caus.max_difference:.3e}, "
        f"max deviation from prediction {caus.max_prediction_error:.3e}"
    )
    causal_fail = [c for c in report.failures() if c.name in CAUSAL_LINES]
    return 1 if causal_fail else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisyqca", description="Noisy quantum cellular automata: state-transfer experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress and aborted trials")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--trials", type=int, help="override the number of Haar trials")
    common.add_argument("--allow-noncausal", action="store_true", help="run automata that break the causality constraints")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--out", type=Path, default=Path("results"), help="output directory (default: results)")
    output.add_argument("--threads", type=int, default=1, help="worker threads")
    output.add_argument("--format", choices=("csv", "json"), default="csv")
    output.add_argument("--plot", action="store_true", help="also write a matplotlib script per run")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common, output], help="run one config file")
    p.add_argument("config", type=Path)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", parents=[common, output], help="run a figure preset by name")
    p.add_argument("name", nargs="?", choices=sorted(PRESETS))
    p.add_argument("--list", action="store_true", help="list presets and exit")
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("sweep", parents=[common, output], help="run a sweep file (base config plus grid)")
    p.add_argument("config", type=Path)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="print constraint and causality reports for a config")
    p.add_argument("config", type=Path)
    p.add_argument("--causality-trials", type=int, default=100)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ConstraintError, SweepError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
