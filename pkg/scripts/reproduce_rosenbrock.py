"""IMANN (2-5-5-2) against dense baselines on the Rosenbrock formulation f9.

By default compares the deep baseline 2-32-32-16-1 and the equal-size
baseline 2-5-5-1 over grids of 4, 16, 64 and 256 points.

    python3 scripts/reproduce_rosenbrock.py --out results/rosen
"""
import argparse
import logging

from imann.harness import ExperimentConfig, emit_csv, emit_plot_data, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/rosen")
    ap.add_argument("--sizes", default="4,16,64,256")
    ap.add_argument("--dnn-archs", default="2-32-32-16-1,2-5-5-1")
    ap.add_argument("--restarts", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    sizes = [int(s) for s in args.sizes.split(",")]
    runs = [("imann", "2-5-5-2")] + [("dnn", a) for a in args.dnn_archs.split(",")]
    attempts, best = [], []
    for method, arch in runs:
        cfg = ExperimentConfig("f9", method, arch=arch, sizes=sizes, restarts=args.restarts,
                               seed=args.seed, workers=args.workers)
        res = run_experiment(cfg)
        attempts += res.attempts
        best += res.best
        for b in res.best:
            print(f"{method:5s} {arch:14s} n={b.dataset_size:3d} R={b.error_integral:.4g}")
    emit_csv(attempts, f"{args.out}/attempts.csv")
    emit_csv(best, f"{args.out}/best.csv")
    emit_plot_data(best, f"{args.out}/plots")


if __name__ == "__main__":
    main()
