"""Command line entry point: ``imann run|sweep|report``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .benchmarks import get_formulation, registry
from .harness import (METHODS, ExperimentConfig, best_per_size, emit_csv, emit_plot_data,
                      read_csv, run_experiment, write_outputs)

log = logging.getLogger(__name__)

# Flag name -> (ExperimentConfig field, parser for config-file/CLI strings)
_KEYS = {
    "formulation": ("formulation", str),
    "method": ("method", str),
    "arch": ("arch", str),
    "sizes": ("sizes", None),
    "restarts": ("restarts", int),
    "seed": ("seed", int),
    "out": ("out", str),
    "quad_points": ("quad_points", int),
    "workers": ("workers", int),
    "budget": ("budget", int),
    "sigma": ("sigma", float),
    "popsize": ("popsize", int),
    "fitness_target": ("fitness_target", float),
    "learning_rate": ("learning_rate", float),
    "epochs": ("epochs", int),
    "patience": ("patience", int),
}
_SWEEP_ONLY = {"formulations": None, "methods": None, "dnn_arch_2d": str}


def _int_list(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(tok) for tok in str(value).split(",") if tok.strip()]


def _str_list(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [tok.strip() for tok in str(value).split(",") if tok.strip()]


def load_config_file(path) -> dict:
    """Flat JSON object whose keys mirror the long flags (dashes or underscores)."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config file must hold a flat JSON object")
    out = {}
    for key, value in data.items():
        key = key.replace("-", "_")
        if key not in _KEYS and key not in _SWEEP_ONLY:
            raise ValueError(f"{path}: unknown config key {key!r}")
        if isinstance(value, dict):
            raise ValueError(f"{path}: config key {key!r} must not be nested")
        out[key] = value
    return out


def _add_common(p: argparse.ArgumentParser, single: bool) -> None:
    # every default is None so that config-file values can fill unset flags
    p.add_argument("--config", help="flat JSON file with default values for any flag")
    if single:
        p.add_argument("--formulation", choices=[f.id for f in registry()])
        p.add_argument("--method", choices=METHODS)
        p.add_argument("--arch", help='architecture string, e.g. "1-5-5-1"')
    p.add_argument("--sizes", help="comma separated dataset sizes, e.g. 3,5,9")
    p.add_argument("--restarts", type=int, help="attempts per dataset size (default 20)")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--quad-points", dest="quad_points", type=int,
                   help="Gauss-Legendre points per dimension (default 80)")
    p.add_argument("--workers", type=int, help="parallel worker processes (default 1)")
    p.add_argument("--budget", type=int, help="CMA-ES evaluations per attempt (default 100000)")
    p.add_argument("--sigma", type=float, help="CMA-ES initial step size (default 0.1)")
    p.add_argument("--popsize", type=int, help="CMA-ES population (default 4+3ln D)")
    p.add_argument("--fitness-target", dest="fitness_target", type=float,
                   help="CMA-ES stop fitness (default 1e-12)")
    p.add_argument("--learning-rate", dest="learning_rate", type=float,
                   help="DNN Adam step size (default 1e-3)")
    p.add_argument("--epochs", type=int, help="DNN max epochs (default 20000)")
    p.add_argument("--patience", type=int, help="DNN plateau patience (default 500)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imann", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="one method on one formulation")
    _add_common(run, single=True)

    sweep = sub.add_parser("sweep", help="both methods over many formulations")
    _add_common(sweep, single=False)
    sweep.add_argument("--formulations", help="comma separated ids (default f1..f9)")
    sweep.add_argument("--methods", help="comma separated methods (default imann,dnn)")
    sweep.add_argument("--dnn-arch-2d", dest="dnn_arch_2d",
                       help="DNN architecture for 2-D formulations (default 2-32-32-16-1)")

    report = sub.add_parser("report", help="aggregate attempt CSVs into best.csv and plot data")
    report.add_argument("inputs", nargs="+", help="attempt CSV files")
    report.add_argument("--out", required=True, help="output directory")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge built-in defaults < config file < explicit flags."""
    values = load_config_file(args.config) if args.config else {}
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command", "verbose", "inputs"):
            values[key] = value
    if "sizes" in values:
        values["sizes"] = _int_list(values["sizes"])
    for key, (_, conv) in _KEYS.items():
        if conv is not None and key in values and values[key] is not None:
            values[key] = conv(values[key])
    return values


def _config_kwargs(values: dict) -> dict:
    return {field: values[key] for key, (field, _) in _KEYS.items() if key in values}


def cmd_run(values: dict) -> int:
    for key in ("formulation", "method"):
        if key not in values:
            raise SystemExit(f"imann run: --{key} is required (flag or config file)")
    config = ExperimentConfig(**_config_kwargs(values))
    result = run_experiment(config)
    out = values.get("out") or f"results/{config.formulation}_{config.method}"
    for path in write_outputs(result, out):
        print(path)
    for rec in result.best:
        print(f"{rec.formulation} {rec.method} {rec.arch} n={rec.dataset_size} "
              f"best R={rec.error_integral:.6g} (restart {rec.restart_index})")
    return 0


def cmd_sweep(values: dict) -> int:
    formulations = _str_list(values.get("formulations", [f.id for f in registry()]))
    methods = _str_list(values.get("methods", list(METHODS)))
    out = Path(values.get("out") or "results/sweep")
    base = {k: v for k, v in _config_kwargs(values).items()
            if k not in ("formulation", "method", "arch", "out", "sizes")}
    sizes = values.get("sizes")
    attempts, best = [], []
    for form in formulations:
        dim = get_formulation(form).dimension
        for method in methods:
            kwargs = dict(base)
            if sizes:
                # a shared size list keeps only perfect squares for 2-D grids
                kwargs["sizes"] = sizes if dim == 1 else [s for s in sizes if math.isqrt(s) ** 2 == s] or None
            if method == "dnn" and dim == 2 and values.get("dnn_arch_2d"):
                kwargs["arch"] = values["dnn_arch_2d"]
            config = ExperimentConfig(formulation=form, method=method, **kwargs)
            log.info("sweep: %s %s %s sizes=%s", form, method, config.arch, config.sizes)
            result = run_experiment(config)
            attempts += result.attempts
            best += result.best
            for rec in result.best:
                print(f"{rec.formulation} {rec.method} {rec.arch} n={rec.dataset_size} "
                      f"R={rec.error_integral:.6g}")
    emit_csv(attempts, out / "attempts.csv")
    emit_csv(best, out / "best.csv")
    emit_plot_data(best, out / "plots")
    print(out)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    records = []
    for path in args.inputs:
        records += read_csv(path)
    best = best_per_size(records)
    out = Path(args.out)
    emit_csv(best, out / "best.csv")
    for path in emit_plot_data(best, out / "plots"):
        print(path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    if args.command == "report":
        return cmd_report(args)
    values = resolve(args)
    if args.command == "run":
        return cmd_run(values)
    return cmd_sweep(values)


if __name__ == "__main__":
    sys.exit(main())
