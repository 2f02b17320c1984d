"""Command-line entry point for the experiment harness."""
from __future__ import annotations

import argparse
import sys

from .experiments import (EXPERIMENT_NAMES, ConfigError, ExperimentConfig,
                          run_experiment)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ultratac-sim",
        description="Run a synthetic sensor experiment and write CSV/SVG results.")
    parser.add_argument("experiment", choices=EXPERIMENT_NAMES)
    parser.add_argument("--config", help="plain-text key=value config file")
    parser.add_argument("--seed", type=int, required=True,
                        help="master seed (required for reproducibility)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--noise", type=float, help="override echo noise std, volts")
    parser.add_argument("--trials", type=int, help="override trials per grid point")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.default(args.experiment)
        if args.config:
            cfg = cfg.apply_file(args.config)
        cfg.seed = args.seed
        cfg.output_dir = args.out
        if args.noise is not None:
            cfg.noise_std = args.noise
        if args.trials is not None:
            cfg.trials = args.trials
        cfg.validate()
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    result = run_experiment(cfg)
    _print_summary(args.experiment, result)
    return 0


def _print_summary(experiment: str, result) -> None:
    if experiment == "proximity":
        print(f"proximity: R2={result.r2:.6f} slope={result.slope:.4f} "
              f"max point error={100 * result.max_point_error_m:.3f} cm")
    elif experiment == "material":
        print(f"material: accuracy={100 * result.accuracy:.2f}% "
              f"pca ratios={[round(float(r), 4) for r in result.pca_ratios]}")
        for a, b, rate in result.confusable:
            print(f"  confusable: {a} vs {b} ({100 * rate:.0f}%)")
    elif experiment == "dualmodal":
        print(f"dualmodal: accuracy={100 * result.accuracy:.2f}% "
              f"(material {100 * result.material_accuracy:.2f}%, "
              f"pattern {100 * result.pattern_accuracy:.2f}%)")
    else:
        print(f"inspection: {result.n_correct}/{len(result.verdicts)} correct")
        for row in result.verdicts:
            name, tp, tc, pp, pc, ok, status = row
            print(f"  {name}: true=({tp},{tc}) predicted=({pp},{pc}) "
                  f"{'ok' if ok else 'WRONG'} [{status}]")


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
