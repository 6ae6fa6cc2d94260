"""Sensitivity of IMANN generalization to the initial CMA-ES step size.

For each step size, runs best-of-N restarts on one (formulation, size) and
prints the best and median error integral over the restarts.

    python3 scripts/sigma_sensitivity.py f9 16 --seed 100
"""
import argparse

import numpy as np

from imann.harness import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("formulation")
    ap.add_argument("size", type=int)
    ap.add_argument("--sigmas", default="0.05,0.1,0.2,0.5")
    ap.add_argument("--restarts", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for sigma in map(float, args.sigmas.split(",")):
        cfg = ExperimentConfig(args.formulation, "imann", sizes=[args.size],
                               restarts=args.restarts, sigma=sigma, seed=args.seed)
        R = np.array([a.error_integral for a in run_experiment(cfg).attempts])
        print(f"{args.formulation} n={args.size} seed={args.seed} sigma={sigma:<5g} "
              f"best={R.min():.4g} median={np.median(R):.4g}", flush=True)


if __name__ == "__main__":
    main()
