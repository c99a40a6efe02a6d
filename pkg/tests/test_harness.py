import json
import math

import numpy as np
import pytest

from compsense import harness
from compsense.harness import ExperimentConfig, image_pipeline, make_compressible, run_experiment, run_trial
from compsense.netpbm import read_image, write_image
from compsense.noise import NoiseSpec
from compsense.sparsity import head_k, tail_k
from compsense.transform import adjoint, forward, make_transform


def test_compressible_exactly_sparse_limit():
    x = make_compressible(64, 5, math.inf, seed=3)
    assert np.count_nonzero(x) == 5
    np.testing.assert_allclose(np.abs(x[x != 0]), 8.0)


def test_compressible_tail_shrinks_with_decay():
    t1 = np.linalg.norm(tail_k(make_compressible(128, 4, 1.0, 7), 4))
    t2 = np.linalg.norm(tail_k(make_compressible(128, 4, 2.0, 7), 4))
    assert t2 < t1


def test_compressible_round_trip():
    F = make_transform("dft", 32)
    x = make_compressible(32, 3, 1.5, 1)
    np.testing.assert_allclose(adjoint(F, forward(F, x)), x, atol=1e-10)


def test_compressible_magnitudes():
    x = make_compressible(10, 2, 1.5, 0, scale=2.0)
    np.testing.assert_allclose(np.sort(np.abs(x))[::-1], 2.0 * np.arange(1, 11) ** -1.5)


@pytest.mark.parametrize("bench,kw", [
    ("l0-iht", dict(transform="dft", n=108, k=1, t=1)),
    ("l0-bp", dict(transform="hadamard", n=64, k=2, t=2, decay=math.inf)),
    ("l2-bp", dict(transform="dft", n=64, k=4)),
    ("linf-ds", dict(transform="dft", n=64, k=4)),
])
def test_zero_noise_exact_recovery(bench, kw):
    cfg = ExperimentConfig(bench, trials=3, noise="none", **{"decay": math.inf, **kw})
    for i in range(3):
        rec = run_trial(cfg, i)
        assert rec.converged
        assert rec.err_l2 <= 1e-5


def test_identical_seeds_identical_records():
    cfg = ExperimentConfig("l2-bp", transform="dft", n=32, k=2, trials=2, seed=4)
    assert run_trial(cfg, 1) == run_trial(cfg, 1)
    assert run_trial(cfg, 0) != run_trial(cfg, 1)


def test_zero_noise_experiment_metrics():
    cfg = ExperimentConfig("l0-iht", transform="dft", n=108, k=1, t=1, trials=10, noise="none", decay=math.inf)
    row, _ = run_experiment(cfg)
    for p in row.norms:
        assert row.delta[p] <= 1e-6
        assert row.Delta[p] == pytest.approx(row.mean_upsilon[p], abs=1e-6)


@pytest.mark.parametrize("bench,kw", [
    ("l0-iht", dict(transform="dft", n=108, k=1, t=1)),
    ("l0-iht", dict(transform="dft", n=32, k=1, t=1)),
    ("l0-bp", dict(transform="hadamard", n=64, k=2, t=2)),
    ("l2-bp", dict(transform="dft", n=64, k=4)),
])
def test_in_hypothesis_suite_has_no_violations(bench, kw):
    row, recs = run_experiment(ExperimentConfig(bench, trials=100, **kw))
    assert row.hypotheses_ok
    assert all(v == 0 for v in row.violations.values())
    assert row.trials_used == 100


def test_metric_identity():
    row, recs = run_experiment(ExperimentConfig("l2-bp", transform="dft", n=32, k=2, trials=30))
    for p in row.norms:
        assert abs(row.Delta[p] + row.delta[p] - row.mean_upsilon[p]) <= 1e-12


def test_out_of_hypothesis_omits_bounds():
    row, recs = run_experiment(ExperimentConfig("l0-iht", transform="dct", n=16, k=3, t=3, trials=3))
    assert not row.hypotheses_ok
    assert all(v is None for v in row.Delta.values())
    assert row.delta["l2"] is not None
    assert any("out-of-hypothesis" in n for n in row.notes)


def test_analysis_convention_runs():
    cfg = ExperimentConfig("l2-bp", transform="dft", n=32, k=2, trials=3, convention="analysis")
    row, _ = run_experiment(cfg)
    assert row.violations["l2"] == 0


def test_csv_reports_are_deterministic(tmp_path):
    cfg = ExperimentConfig("l0-iht", transform="dft", n=108, k=1, t=1, trials=20)
    run_experiment(cfg, out=tmp_path / "a", formats=("csv", "json", "svg"))
    run_experiment(cfg, jobs=2, out=tmp_path / "b")
    a = (tmp_path / "a" / "l0-iht.csv").read_bytes()
    assert a == (tmp_path / "b" / "l0-iht.csv").read_bytes()
    assert a.decode().splitlines()[0] == ",".join(harness.CSV_COLUMNS)
    summary = json.loads((tmp_path / "a" / "l0-iht.json").read_text())
    assert summary["config"]["seed"] == 0
    assert summary["metrics"]["trials_used"] == 20
    assert (tmp_path / "a" / "l0-iht.svg").read_text().startswith("<svg")


def test_failed_trials_are_excluded(caplog):
    from compsense.l1solve import SolverConfig

    cfg = ExperimentConfig("linf-ds", transform="dft", n=32, k=2, trials=3, solver=SolverConfig(max_iterations=5))
    row, recs = run_experiment(cfg)
    assert row.trials_failed == 3 and row.trials_used == 0
    assert "excluded" in caplog.text


def test_table_line_columns():
    row, _ = run_experiment(ExperimentConfig("l0-iht", transform="dft", n=108, k=1, t=1, trials=5))
    line = harness.table_line(row)
    names = [c.split("=")[0] for c in line.split()]
    assert names == ["t_avg", "delta_linf", "delta_l2", "Delta_linf", "Delta_l2"]


def test_config_validation():
    with pytest.raises(harness.ConfigError):
        ExperimentConfig("nope")
    with pytest.raises(harness.ConfigError):
        ExperimentConfig(trials=0)
    with pytest.raises(harness.ConfigError):
        ExperimentConfig("l0-iht", n=8, t=0)
    with pytest.raises(harness.ConfigError):
        ExperimentConfig(dataset="image-dir")


def _gradient(path, h=8, w=8, channels=1):
    yy, xx = np.mgrid[0:h, 0:w]
    img = np.stack([(16 * (xx + yy) + 20 * c) % 256 for c in range(channels)], axis=-1)
    write_image(path, img, 255)
    return img


def test_image_identity_at_full_budget(tmp_path):
    src = tmp_path / "g.ppm"
    img = _gradient(src, channels=3)
    out, rep = image_pipeline(src, 64, "IHT", out_path=tmp_path / "o.ppm", T=3)
    np.testing.assert_allclose(out * 255, img, atol=1.0)
    got, _ = read_image(tmp_path / "o.ppm")
    assert np.max(np.abs(got - img)) <= 1


def test_image_best_k_approximation(tmp_path):
    src = tmp_path / "g.pgm"
    img = _gradient(src)
    out, _ = image_pipeline(src, 10, "IHT", T=5)
    F = make_transform("dct2d", shape=(8, 8))
    x = img[:, :, 0].ravel() / 255.0
    want = np.clip(F.matrix.T @ head_k(F.matrix @ x, 10), 0, 1)
    np.testing.assert_allclose(out[:, :, 0].ravel(), want, atol=1e-10)


def test_image_l0_noise_flags_hypotheses(tmp_path):
    # 8x8 DCT has c = (2 cos^2(pi/16))^2 ~ 3.70, so k=16, t=1 is outside both IHT regimes
    src = tmp_path / "g.pgm"
    _gradient(src)
    out, rep = image_pipeline(src, 16, "IHT", NoiseSpec("L0", 3, 1), T=50)
    ch = rep["channels"][0]
    assert ch["hypotheses_ok"] is False and ch["upsilon_l2"] is None
    assert out.min() >= 0 and out.max() <= 1


def test_image_l0_in_hypothesis_within_bound(tmp_path):
    src = tmp_path / "g.pgm"
    _gradient(src, 32, 32)
    _, rep = image_pipeline(src, 1, "IHT", NoiseSpec("L0", 5, 1), T=60)
    ch = rep["channels"][0]
    assert ch["hypotheses_ok"]
    assert ch["coef_err_l2"] <= ch["upsilon_l2"]


@pytest.mark.parametrize("alg", ["BP", "DS", "BP-L0"])
def test_image_solvers_zero_noise(tmp_path, alg):
    src = tmp_path / "g.pgm"
    img = _gradient(src)
    out, rep = image_pipeline(src, 64, alg)
    assert rep["channels"][0]["converged"]
    np.testing.assert_allclose(out[:, :, 0] * 255, img[:, :, 0], atol=1e-3)


def test_image_size_cap(tmp_path):
    src = tmp_path / "big.pgm"
    write_image(src, np.zeros((65, 2), dtype=int))
    with pytest.raises(harness.ConfigError):
        image_pipeline(src, 1)


def test_image_dir_dataset(tmp_path):
    for i in range(2):
        _gradient(tmp_path / f"im{i}.pgm")
    cfg = ExperimentConfig("l2-bp", dataset="image-dir", image_dir=str(tmp_path), n=64, k=64, trials=2,
                           noise="none", convention="analysis")
    row, recs = run_experiment(cfg)
    assert row.trials_used == 2
    assert row.delta["l2"] <= 1e-5
