import math
import random

import numpy as np
import pytest

from imann.benchmarks import get_formulation
from imann.harness import (CSV_COLUMNS, ExperimentConfig, RunRecord, attempt_seed, best_per_size,
                           emit_csv, emit_plot_data, grid_dataset, read_csv, read_plot_data,
                           run_attempt, run_experiment, sample_grid, select_best, write_outputs)
from imann.quadrature import Domain

FAST = dict(restarts=2, budget=600, quad_points=16, epochs=200, patience=50)


def test_grid_1d():
    assert sample_grid(Domain(((-4, 4),)), 5)[:, 0].tolist() == [-4, -2, 0, 2, 4]
    assert sample_grid(Domain(((-1, 1),)), 2)[:, 0].tolist() == [-1, 1]
    assert sample_grid(Domain(((-1, 3),)), 1)[:, 0].tolist() == [1]


def test_grid_2d_row_major():
    g = sample_grid(get_formulation("f9").domain, 4)
    assert g.shape == (16, 2)
    assert g[0].tolist() == [-1.4, -0.25] and g[-1].tolist() == [1.6, 3.75]
    assert g[1, 0] == -1.4 and g[4, 0] == pytest.approx(-0.4)


def test_grid_rejects_zero():
    with pytest.raises(ValueError):
        sample_grid(Domain(((0, 1),)), 0)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("f9", "imann", sizes=[5])
    with pytest.raises(ValueError):
        ExperimentConfig("f1", "imann", restarts=0)
    with pytest.raises(ValueError):
        ExperimentConfig("f1", "ga")
    with pytest.raises(ValueError):
        ExperimentConfig("f5", "imann", arch="1-5-5-1")
    with pytest.raises(KeyError):
        ExperimentConfig("f0", "imann")


def test_default_architectures():
    assert ExperimentConfig("f1", "imann").arch == "1-5-5-1"
    assert ExperimentConfig("f6", "imann").arch == "1-5-5-2"
    assert ExperimentConfig("f9", "imann").arch == "2-5-5-2"
    assert ExperimentConfig("f3", "dnn").arch == "1-32-16-16-1"
    assert ExperimentConfig("f9", "dnn").arch == "2-32-32-16-1"


def test_seed_schedule():
    assert attempt_seed(0, 0, 3) == 3
    assert attempt_seed(5, 2, 1) == 5 ^ 2001
    seeds = {attempt_seed(42, i, r) for i in range(4) for r in range(20)}
    assert len(seeds) == 80


def test_imann_attempt_reproducible():
    cfg = ExperimentConfig("f1", "imann", sizes=[5], **FAST)
    data = grid_dataset(cfg.model, 5)
    a = run_attempt(cfg, data, 1)
    b = run_attempt(cfg, data, 1)
    assert (a.fitness, a.error_integral, a.evals) == (b.fitness, b.error_integral, b.evals)
    assert a.evals == 600 - 600 % 15
    assert a.error_integral >= 0 and a.fitness >= 0


def test_dnn_attempt_on_single_point():
    cfg = ExperimentConfig("f1", "dnn", sizes=[1], **FAST)
    rec = run_attempt(cfg, grid_dataset(cfg.model, 1), 0)
    assert math.isfinite(rec.error_integral)
    assert rec.status == "ok"


def test_experiment_accounting_f9():
    cfg = ExperimentConfig("f9", "imann", sizes=[4, 16], **FAST)
    res = run_experiment(cfg)
    assert len(res.attempts) == 2 * cfg.restarts
    assert len(res.best) == 2
    for best in res.best:
        same = [a for a in res.attempts if a.dataset_size == best.dataset_size]
        assert all(best.error_integral <= a.error_integral for a in same)


def test_single_restart_best_is_the_attempt():
    cfg = ExperimentConfig("f2", "dnn", sizes=[3], **{**FAST, "restarts": 1})
    res = run_experiment(cfg)
    assert res.best == res.attempts


def _rec(i, R, status="ok", size=9):
    return RunRecord("f1", "imann", "1-5-5-1", size, i, i, 1.0, R, 10, 3, status)


def test_selection_ignores_failures_and_order():
    recs = [_rec(0, 5.0), _rec(1, math.inf, "failed"), _rec(2, 2.0), _rec(3, 2.0), _rec(4, 7.0, "aborted")]
    for _ in range(10):
        random.shuffle(recs)
        best = select_best(recs)
        assert best.restart_index == 2
    assert select_best([_rec(0, math.inf, "failed")]).status == "failed"


def test_best_per_size_recomputes_selection():
    recs = [_rec(0, 3.0, size=3), _rec(1, 1.0, size=3), _rec(0, 0.5, size=9), _rec(1, 0.7, size=9)]
    best = best_per_size(recs)
    assert [(b.dataset_size, b.restart_index) for b in best] == [(3, 1), (9, 0)]


def test_csv_schema_and_roundtrip(tmp_path):
    recs = [_rec(0, 0.1234567890123), _rec(1, math.inf, "failed"), _rec(2, 1e-300)]
    path = emit_csv(recs, tmp_path / "a.csv")
    header = path.read_text().splitlines()[0]
    assert header == "formulation,method,arch,dataset_size,restart_index,seed,fitness,error_integral,evals,wall_time_ms,status"
    assert tuple(header.split(",")) == CSV_COLUMNS
    assert read_csv(path) == recs


def test_csv_bad_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(p)


def test_csv_unwritable_path_mentions_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        emit_csv([], blocker / "sub" / "a.csv")


def test_plot_data(tmp_path):
    best = [_rec(0, 3.0, size=3), _rec(1, 1.0, size=9), _rec(0, 0.5, size=17)]
    (path,) = emit_plot_data(best, tmp_path)
    assert path.name == "f1_imann_1-5-5-1.dat"
    assert read_plot_data(path) == [(3, 3.0), (9, 1.0), (17, 0.5)]


def test_sweep_is_deterministic(tmp_path):
    cfg = ExperimentConfig("f5", "imann", sizes=[3, 5], **FAST)
    outs = []
    for run in ("a", "b"):
        write_outputs(run_experiment(cfg), tmp_path / run)
        rows = read_csv(tmp_path / run / "attempts.csv") + read_csv(tmp_path / run / "best.csv")
        outs.append([r.row()[:9] + r.row()[10:] for r in rows])  # drop wall_time_ms
    assert outs[0] == outs[1]
    assert (tmp_path / "a" / "plots" / "f5_imann_1-5-5-2.dat").exists()


def test_parallel_matches_serial():
    serial = run_experiment(ExperimentConfig("f1", "imann", sizes=[3], **FAST))
    parallel = run_experiment(ExperimentConfig("f1", "imann", sizes=[3], workers=2, **FAST))
    key = lambda recs: [(r.restart_index, r.seed, r.fitness, r.error_integral) for r in recs]
    assert key(serial.attempts) == key(parallel.attempts)
    assert key(serial.best) == key(parallel.best)


def test_grid_dataset_labels_with_target():
    d = grid_dataset(get_formulation("f9"), 16)
    assert len(d) == 16
    assert np.array_equal(d.y, get_formulation("f9").target.evaluate(d.x))
