"""Error integral against dataset size for the polynomial formulations f1..f8.

Runs IMANN and the dense baseline over the default 1-D size grid and writes
attempts.csv, best.csv and one plot-data file per (formulation, method).

    python3 scripts/reproduce_polynomial.py --out results/poly --restarts 20
"""
import argparse
import logging

from imann.harness import ExperimentConfig, emit_csv, emit_plot_data, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/poly")
    ap.add_argument("--formulations", default="f1,f2,f3,f4,f5,f6,f7,f8")
    ap.add_argument("--sizes", default="3,5,9,17,33,65")
    ap.add_argument("--restarts", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    sizes = [int(s) for s in args.sizes.split(",")]
    attempts, best = [], []
    for fid in args.formulations.split(","):
        for method in ("imann", "dnn"):
            cfg = ExperimentConfig(fid, method, sizes=sizes, restarts=args.restarts,
                                   seed=args.seed, workers=args.workers)
            res = run_experiment(cfg)
            attempts += res.attempts
            best += res.best
            for b in res.best:
                print(f"{fid} {method:5s} {b.arch:14s} n={b.dataset_size:3d} R={b.error_integral:.4g}")
    emit_csv(attempts, f"{args.out}/attempts.csv")
    emit_csv(best, f"{args.out}/best.csv")
    emit_plot_data(best, f"{args.out}/plots")


if __name__ == "__main__":
    main()
