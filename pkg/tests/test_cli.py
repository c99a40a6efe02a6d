import json
import subprocess
import sys

import numpy as np
import pytest

from compsense.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main, read_vector, write_vector
from compsense.netpbm import write_image
from compsense.transform import make_transform, save_matrix_csv


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rip_json(capsys):
    code, out, _ = _run(["rip", "--transform", "dft", "--n", "4", "--k", "1", "--t", "1"], capsys)
    assert code == EXIT_OK
    d = json.loads(out)
    assert d["delta_exact"] == pytest.approx(0.5)
    assert {"k", "t", "n", "c", "delta_exact", "delta_theory", "supports_checked", "worst_support"} <= set(d)


def test_bounds_json(capsys):
    code, out, _ = _run(["bounds", "--theorem", "IHT-v1", "--c", "1", "--k", "1", "--t", "1", "--n", "108",
                         "--norm-tail", "1", "--T", "0"], capsys)
    d = json.loads(out)
    assert code == EXIT_OK and d["constants"]["rho"] == pytest.approx(0.5)


def test_recover_iht_round_trip(tmp_path, capsys):
    F = make_transform("dct", 16)
    x = np.zeros(16)
    x[[2, 9]] = [3.0, -2.0]
    write_vector(tmp_path / "y.csv", F.matrix @ x)
    code, _, _ = _run(["recover", "iht", "--transform", "dct", "--input", str(tmp_path / "y.csv"), "--k", "2",
                       "--t", "1", "--T", "60", "--output", str(tmp_path / "x.csv"),
                       "--diagnostics", str(tmp_path / "d.json")], capsys)
    assert code == EXIT_OK
    z = read_vector(tmp_path / "x.csv")
    assert z.shape == (32,)
    np.testing.assert_allclose(z[:16], x, atol=1e-8)
    assert json.loads((tmp_path / "d.json").read_text())["T"] == 60


@pytest.mark.parametrize("alg,flags", [("bp", ["--eta", "0.01"]), ("ds", ["--eta1", "0.01", "--eta2", "0.01"])])
def test_recover_solvers_complex(tmp_path, capsys, alg, flags):
    F = make_transform("dft", 16)
    x = np.zeros(16)
    x[4] = 2.0
    write_vector(tmp_path / "y.csv", F.matrix @ x)
    code, out, err = _run(["recover", alg, "--transform", "dft", "--input", str(tmp_path / "y.csv"), "--k", "1",
                           *flags], capsys)
    assert code == EXIT_OK
    assert json.loads(err)["feasible"]
    vals = np.array([complex(*map(float, line.split(","))) for line in out.strip().splitlines()])
    assert abs(vals[4] - 2.0) < 0.05


def test_recover_custom_transform(tmp_path, capsys):
    save_matrix_csv(tmp_path / "F.csv", make_transform("hadamard", 8).matrix)
    write_vector(tmp_path / "y.csv", np.ones(8))
    code, out, _ = _run(["recover", "bp", "--transform", f"file:{tmp_path / 'F.csv'}", "--input",
                         str(tmp_path / "y.csv"), "--k", "1", "--eta", "0"], capsys)
    assert code == EXIT_OK
    assert float(out.split()[0]) == pytest.approx(np.sqrt(8), abs=1e-5)


def test_missing_required(capsys):
    code, _, err = _run(["recover", "bp", "--k", "1"], capsys)
    assert code == EXIT_CONFIG and "--input" in err


def test_bad_choice_is_config_error(capsys):
    assert _run(["bench", "nope"], capsys)[0] == EXIT_CONFIG


def test_bench_writes_reports(tmp_path, capsys):
    code, out, _ = _run(["bench", "l0-iht", "--transform", "dft", "--n", "108", "--trials", "10",
                         "--out", str(tmp_path), "--format", "csv,json,svg"], capsys)
    assert code == EXIT_OK
    assert "t_avg=" in out and "violations" in out
    assert sorted(p.name for p in tmp_path.iterdir()) == ["l0-iht.csv", "l0-iht.json", "l0-iht.svg"]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ntransform = dft\nn=108\ntrials = 4\nmax-fail-rate=0.5\n")
    code, out, _ = _run(["bench", "l0-iht", "--config", str(cfg), "--trials", "6"], capsys)
    assert code == EXIT_OK
    assert "trials=6" in out
    cfg.write_text("bogus = 1\n")
    assert _run(["bench", "l0-iht", "--config", str(cfg)], capsys)[0] == EXIT_CONFIG


def test_fail_rate_exit_code(capsys):
    argv = ["bench", "linf-ds", "--transform", "dft", "--n", "16", "--k", "2", "--trials", "2",
            "--max-iterations", "5"]
    assert _run(argv, capsys)[0] == EXIT_SOLVER
    assert _run(argv + ["--max-fail-rate", "1.0"], capsys)[0] == EXIT_OK


def test_invalid_config_exit_code(capsys):
    assert _run(["bench", "l0-iht", "--n", "8", "--t", "0"], capsys)[0] == EXIT_CONFIG
    assert _run(["bench", "l0-iht", "--format", "xml"], capsys)[0] == EXIT_CONFIG


def test_image_command(tmp_path, capsys):
    src = tmp_path / "a.pgm"
    write_image(src, (np.arange(64).reshape(8, 8) * 3) % 256)
    code, out, _ = _run(["image", str(src), "--k", "64", "--T", "2", "--output", str(tmp_path / "b.pgm")], capsys)
    assert code == EXIT_OK
    assert json.loads(out)["channels"][0]["converged"]
    assert (tmp_path / "b.pgm").exists()
    assert _run(["image", str(src), "--k", "4", "--noise", "l0"], capsys)[0] == EXIT_CONFIG


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "compsense", "bounds", "--theorem", "DS-l2", "--k", "4", "--eta2", "0.1"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["upsilon"] == pytest.approx(1.2)
