"""Experiment orchestration: grid datasets, seeded restarts, best-by-R selection, CSV output."""
from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .baseline import DnnSpec, TrainConfig, dnn_forward, train_dnn
from .benchmarks import ModelFormulation, get_formulation
from .cmaes import CmaConfig, optimize
from .hybrid import Dataset, HybridPredictor, objective_for
from .network import NetworkSpec, dimensionality
from .quadrature import Domain, error_integral

log = logging.getLogger(__name__)

CSV_COLUMNS = ("formulation", "method", "arch", "dataset_size", "restart_index", "seed",
               "fitness", "error_integral", "evals", "wall_time_ms", "status")
METHODS = ("imann", "dnn")

DEFAULT_SIZES_1D = (3, 5, 9, 17, 33, 65)
DEFAULT_SIZES_2D = (4, 16, 64, 256)


def default_arch(method: str, formulation: ModelFormulation) -> str:
    if method == "imann":
        return f"{formulation.dimension}-5-5-{formulation.subfunction_count}"
    if method == "dnn":
        return "1-32-16-16-1" if formulation.dimension == 1 else "2-32-32-16-1"
    raise ValueError(f"unknown method {method!r}")


def default_sizes(formulation: ModelFormulation) -> tuple[int, ...]:
    return DEFAULT_SIZES_1D if formulation.dimension == 1 else DEFAULT_SIZES_2D


@dataclass
class ExperimentConfig:
    formulation: str
    method: str
    arch: str | None = None
    sizes: Sequence[int] | None = None
    restarts: int = 20
    seed: int = 0
    quad_points: int = 80
    out: str | None = None
    workers: int = 1
    # IMANN optimizer
    budget: int = 100_000
    sigma: float = 0.1
    popsize: int | None = None
    fitness_target: float = 1e-12
    # DNN trainer
    learning_rate: float = 1e-3
    epochs: int = 20_000
    patience: int = 500

    def __post_init__(self):
        f = get_formulation(self.formulation)
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.arch is None:
            self.arch = default_arch(self.method, f)
        self.sizes = tuple(int(s) for s in (self.sizes or default_sizes(f)))
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ValueError("dataset sizes must be positive and non-empty")
        if f.dimension == 2:
            for s in self.sizes:
                if math.isqrt(s) ** 2 != s:
                    raise ValueError(f"2-D dataset size {s} is not a perfect square")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        self.network_spec()  # validate the architecture early

    @property
    def model(self) -> ModelFormulation:
        return get_formulation(self.formulation)

    def network_spec(self) -> NetworkSpec | DnnSpec:
        if self.method == "imann":
            spec = NetworkSpec.parse(self.arch)
            f = self.model
            if (spec.n_in, spec.n_out) != (f.dimension, f.subfunction_count):
                raise ValueError(f"IMANN {self.arch} does not fit {f.id} "
                                 f"({f.dimension} input(s), {f.subfunction_count} subfunction(s))")
            return spec
        spec = DnnSpec.parse(self.arch)
        if spec.n_in != self.model.dimension:
            raise ValueError(f"DNN {self.arch} does not fit the {self.model.dimension}-D input of {self.formulation}")
        return spec


@dataclass
class RunRecord:
    formulation: str
    method: str
    arch: str
    dataset_size: int
    restart_index: int
    seed: int
    fitness: float
    error_integral: float
    evals: int
    wall_time_ms: int
    status: str = "ok"  # ok | aborted | failed

    def row(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


@dataclass
class ExperimentResult:
    best: list[RunRecord] = field(default_factory=list)
    attempts: list[RunRecord] = field(default_factory=list)


def sample_grid(domain: Domain, per_dim: int) -> np.ndarray:
    """Equispaced grid including the endpoints, (per_dim**dim, dim), row-major."""
    if per_dim < 1:
        raise ValueError("need at least one point per dimension")
    if per_dim == 1:
        axes = [np.array([(lo + hi) / 2]) for lo, hi in domain.bounds]
    else:
        axes = [np.linspace(lo, hi, per_dim) for lo, hi in domain.bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def grid_dataset(formulation: ModelFormulation, size: int) -> Dataset:
    per_dim = size if formulation.dimension == 1 else math.isqrt(size)
    if per_dim ** formulation.dimension != size:
        raise ValueError(f"size {size} does not form a {formulation.dimension}-D grid")
    return Dataset.from_target(formulation, sample_grid(formulation.domain, per_dim))


def attempt_seed(base_seed: int, size_index: int, restart_index: int) -> int:
    return base_seed ^ (size_index * 1000 + restart_index)


def _score(predict, formulation: ModelFormulation, quad_points: int) -> tuple[float, str]:
    try:
        return error_integral(predict, formulation.target.evaluate, formulation.domain, quad_points), "ok"
    except ArithmeticError:  # non-finite prediction anywhere on the grid
        return math.inf, "failed"


def run_attempt(config: ExperimentConfig, dataset: Dataset, restart_index: int,
                size_index: int = 0) -> RunRecord:
    """Train one model on ``dataset`` and score it by the error integral over the domain."""
    f = config.model
    seed = attempt_seed(config.seed, size_index, restart_index)
    spec = config.network_spec()
    t0 = time.perf_counter()
    if config.method == "imann":
        cma = CmaConfig(dimension=dimensionality(spec), initial_sigma=config.sigma,
                        population=config.popsize, max_evaluations=config.budget,
                        fitness_target=config.fitness_target, seed=seed)
        res = optimize(objective_for(spec, f, dataset), cma)
        fit, evals = res.best_fitness, res.evaluations_used
        if math.isfinite(fit):
            predictor = HybridPredictor(spec, res.best_vector, f)
            R, status = _score(predictor, f, config.quad_points)
        else:
            R, status = math.inf, "failed"
        if status == "ok" and res.aborted:
            status = "aborted"
    else:
        tc = TrainConfig(learning_rate=config.learning_rate, max_epochs=config.epochs,
                         plateau_patience=config.patience, seed=seed)
        res = train_dnn(spec, dataset, tc)
        # report the same sum-of-squares measure the IMANN optimizes
        fit, evals = res.loss * len(dataset), res.epochs
        R, status = _score(lambda X: dnn_forward(spec, res.weights, X), f, config.quad_points)
        if status == "ok" and res.aborted:
            status = "aborted"
    wall = int(round((time.perf_counter() - t0) * 1000))
    return RunRecord(f.id, config.method, config.arch, len(dataset), restart_index, seed,
                     float(fit), float(R), int(evals), wall, status)


def _attempt_job(args) -> RunRecord:
    config, size_index, size, restart = args
    try:
        return run_attempt(config, grid_dataset(config.model, size), restart, size_index)
    except Exception as exc:  # one bad attempt must not stop the sweep
        log.warning("attempt %s/%s/%d/%d failed: %s", config.formulation, config.method, size, restart, exc)
        return RunRecord(config.formulation, config.method, config.arch, size, restart,
                         attempt_seed(config.seed, size_index, restart),
                         math.nan, math.inf, 0, 0, "failed")


def select_best(records: Iterable[RunRecord]) -> RunRecord:
    """Minimal-R record; failed ones only count when nothing else is available."""
    records = sorted(records, key=lambda r: r.restart_index)
    if not records:
        raise ValueError("no records to select from")
    usable = [r for r in records if r.status != "failed"] or records
    return min(usable, key=lambda r: (r.error_integral, r.restart_index))


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """All restarts for every dataset size; best attempt per size by minimal R."""
    jobs = [(config, i, size, r) for i, size in enumerate(config.sizes) for r in range(config.restarts)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            attempts = list(pool.map(_attempt_job, jobs))
    else:
        attempts = []
        for job in jobs:
            rec = _attempt_job(job)
            log.info("%s %s n=%d restart=%d R=%.3e F=%.3e", rec.formulation, rec.method,
                     rec.dataset_size, rec.restart_index, rec.error_integral, rec.fitness)
            attempts.append(rec)
    attempts.sort(key=lambda r: (config.sizes.index(r.dataset_size), r.restart_index))
    best = [select_best(r for r in attempts if r.dataset_size == size) for size in config.sizes]
    return ExperimentResult(best, attempts)


def emit_csv(records: Iterable[RunRecord], path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for rec in records:
                writer.writerow(rec.row())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


_CONVERTERS = {f.name: f.type for f in fields(RunRecord)}


def _convert(name: str, value: str):
    kind = _CONVERTERS[name]
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    return value


def read_csv(path) -> list[RunRecord]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader, ()))
            if header != CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected header {header}")
            return [RunRecord(**{c: _convert(c, v) for c, v in zip(CSV_COLUMNS, row)}) for row in reader]
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc


def best_per_size(records: Iterable[RunRecord]) -> list[RunRecord]:
    """Recompute the selection from attempt records, grouped by formulation/method/arch/size."""
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        groups.setdefault((rec.formulation, rec.method, rec.arch, rec.dataset_size), []).append(rec)
    return [select_best(groups[k]) for k in sorted(groups)]


def emit_plot_data(best: Iterable[RunRecord], out_dir) -> list[Path]:
    """One ``<formulation>_<method>_<arch>.dat`` file per series: ``dataset_size R`` rows."""
    out_dir = Path(out_dir)
    series: dict[tuple, list[RunRecord]] = {}
    for rec in best:
        series.setdefault((rec.formulation, rec.method, rec.arch), []).append(rec)
    written = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for (form, method, arch), recs in sorted(series.items()):
            path = out_dir / f"{form}_{method}_{arch}.dat"
            with path.open("w") as fh:
                fh.write("# dataset_size error_integral\n")
                for rec in sorted(recs, key=lambda r: r.dataset_size):
                    fh.write(f"{rec.dataset_size} {rec.error_integral!r}\n")
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write plot data under {out_dir}: {exc}") from exc
    return written


def read_plot_data(path) -> list[tuple[int, float]]:
    rows = np.loadtxt(path, ndmin=2)
    return [(int(n), float(r)) for n, r in rows]


def write_outputs(result: ExperimentResult, out_dir) -> list[Path]:
    """attempts.csv, best.csv and plots/*.dat under ``out_dir``."""
    out_dir = Path(out_dir)
    paths = [emit_csv(result.attempts, out_dir / "attempts.csv"),
             emit_csv(result.best, out_dir / "best.csv")]
    return paths + emit_plot_data(result.best, out_dir / "plots")
