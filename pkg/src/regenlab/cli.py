"""Command line: ``regenlab list | run | histogram | path``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .closedform import GwiParams
from .cutout import gwi_cutout_lengths, uncovered_mask
from .errors import ParameterError, UsageError
from .experiments import (
    DEFAULT_SEED, EXPERIMENT_IDS, ExperimentConfig, build_report, list_experiments, resolve, timed_run,
)
from .localtime import excursion_lengths
from .processes import (
    SIMPLE_SYMMETRIC, heavy, reflect_at_minimum, simulate_gw, simulate_gwi_direct,
    simulate_lattice_walk, simulate_perturbed_reflected_walk,
)
from .randomness import derive_stream

VERSION = f"v{__version__}"


def _format_value(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_samples(path: str | Path, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replica_id", "value"])
        if values is not None:
            for i, v in enumerate(np.asarray(values).ravel()):
                w.writerow([i, _format_value(v)])


def run_experiment(config: ExperimentConfig) -> dict:
    """Run, write the configured outputs, and return the report."""
    result, runtime_ms = timed_run(config)
    report = build_report(config, result, runtime_ms, VERSION)
    if config.out:
        Path(config.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    if config.samples:
        write_samples(config.samples, result.samples)
    return report


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
        if args.experiment and args.experiment != cfg.experiment:
            cfg.experiment = args.experiment
    elif args.experiment:
        cfg = ExperimentConfig(args.experiment)
    else:
        raise UsageError("need --experiment or --config")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.replicas is not None:
        cfg.replicas = args.replicas
    if args.out is not None:
        cfg.out = args.out
    if args.samples is not None:
        cfg.samples = args.samples
    return cfg


def _cmd_list(args) -> int:
    rows = list_experiments()
    width = max(len(i) for i, _ in rows)
    for exp_id, claim in rows:
        print(f"{exp_id:<{width}}  {claim}")
    return 0


def _cmd_run(args) -> int:
    cfg = _config_from_args(args)
    resolve(cfg)  # fail fast on bad ids and parameters
    report = run_experiment(cfg)
    if not cfg.out:
        print(json.dumps(report, indent=2, sort_keys=True))
    for row in report["grid"]:
        flag = "pass" if row["pass"] else "FAIL"
        print(f"[{flag}] n={row['n']:<6} {row['check']:<36} estimate={row['estimate']:.6g} "
              f"reference={row['reference']}", file=sys.stderr)
    print(f"{report['experiment']}: {report['verdict']} ({report['runtime_ms']} ms)", file=sys.stderr)
    return 0 if report["verdict"] == "PASS" else 1


def _cmd_histogram(args) -> int:
    params = GwiParams(args.p)
    hits = np.zeros(args.horizon + 1, dtype=np.int64)
    per = max(1, 2**20 // (args.horizon + 1))
    for b, start in enumerate(range(0, args.replicas, per)):
        size = min(per, args.replicas - start)
        lengths = gwi_cutout_lengths(derive_stream(args.seed, (len(EXPERIMENT_IDS), b)), params, args.horizon, size)
        hits += uncovered_mask(lengths).sum(axis=0)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "hits", "total"])
        for j, h in enumerate(hits):
            w.writerow([j, int(h), args.replicas])
    return 0


_PATHS = {
    "ssrw": lambda r, a: simulate_lattice_walk(r, SIMPLE_SYMMETRIC, a.horizon),
    "reflected-ssrw": lambda r, a: reflect_at_minimum(simulate_lattice_walk(r, SIMPLE_SYMMETRIC, a.horizon)),
    "heavy": lambda r, a: simulate_lattice_walk(r, heavy(a.alpha), a.horizon),
    "gw": lambda r, a: simulate_gw(r, a.initial, a.horizon),
    "gwi": lambda r, a: simulate_gwi_direct(r, a.p, a.horizon),
    "perturbed": lambda r, a: simulate_perturbed_reflected_walk(r, 1 / max(a.horizon, 1), a.horizon),
}


def _cmd_path(args) -> int:
    path = _PATHS[args.process](derive_stream(args.seed, (len(EXPERIMENT_IDS) + 1,)), args)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step_index", "lattice_value"])
        for k, v in enumerate(path.values):
            w.writerow([k, int(v)])
    if args.excursions:
        with open(args.excursions, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["start", "end", "length", "censored"])
            for r in excursion_lengths(path):
                w.writerow([r.start, r.end, r.length, int(r.censored)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regenlab", description="Seeded experiments on discrete regenerative processes.")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list experiment ids and the claims they check").set_defaults(func=_cmd_list)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--experiment", help=f"one of: {', '.join(EXPERIMENT_IDS)}")
    run.add_argument("--config", help="JSON config; flags override its fields")
    run.add_argument("--seed", type=int)
    run.add_argument("--replicas", type=int)
    run.add_argument("--out", help="report JSON path (stdout when omitted)")
    run.add_argument("--samples", help="per-replica CSV path")
    run.set_defaults(func=_cmd_run)

    hist = sub.add_parser("histogram", help="uncovered-index histogram of GWI cutout sets as CSV")
    hist.add_argument("--p", type=float, default=1 / 3)
    hist.add_argument("--horizon", type=int, default=50)
    hist.add_argument("--replicas", type=int, default=10_000)
    hist.add_argument("--seed", type=int, default=DEFAULT_SEED)
    hist.add_argument("--out", required=True)
    hist.set_defaults(func=_cmd_histogram)

    path = sub.add_parser("path", help="one simulated path (and its excursions) as CSV")
    path.add_argument("--process", choices=sorted(_PATHS), default="reflected-ssrw")
    path.add_argument("--horizon", type=int, default=1000)
    path.add_argument("--seed", type=int, default=DEFAULT_SEED)
    path.add_argument("--alpha", type=float, default=1.5)
    path.add_argument("--p", type=float, default=1 / 3)
    path.add_argument("--initial", type=int, default=10)
    path.add_argument("--out", required=True)
    path.add_argument("--excursions", help="also write excursion records (start, end, length, censored)")
    path.set_defaults(func=_cmd_path)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
