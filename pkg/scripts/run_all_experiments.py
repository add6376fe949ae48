"""Run every registered experiment at its defaults and write reports and samples.

    python3 scripts/run_all_experiments.py --out-dir results [--seed N] [--only id ...]
"""
import argparse
import sys
from pathlib import Path

from regenlab.cli import run_experiment
from regenlab.experiments import DEFAULT_SEED, EXPERIMENT_IDS, ExperimentConfig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--only", nargs="+", choices=EXPERIMENT_IDS)
    args = ap.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    verdicts = {}
    for exp_id in args.only or EXPERIMENT_IDS:
        cfg = ExperimentConfig(exp_id, seed=args.seed, out=str(out / f"{exp_id}.json"),
                               samples=str(out / f"{exp_id}.csv"))
        report = run_experiment(cfg)
        verdicts[exp_id] = report["verdict"]
        print(f"{exp_id:<26} {report['verdict']}  {report['runtime_ms'] / 1000:8.1f} s", flush=True)

    # the negative control is meant to fail
    unexpected = [k for k, v in verdicts.items() if (v == "FAIL") != (k == "negative-control")]
    if unexpected:
        print("unexpected verdicts: " + ", ".join(unexpected))
    return 1 if unexpected else 0


if __name__ == "__main__":
    sys.exit(main())
