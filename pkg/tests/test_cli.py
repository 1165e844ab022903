import csv
import subprocess
import sys

import numpy as np
import pytest

from pondharvest.cli import main
from pondharvest.config import load_preset, render_config
from pondharvest.errors import LinearSolveFailure
from pondharvest import scenario


def small(name="eichhornia-const140", **overrides):
    """Preset shortened to a few hundred steps, written as a config file."""
    from pondharvest.model import Discretization

    cfg = load_preset(name)
    disc = Discretization(cfg.disc.length, 20, overrides.pop("horizon", 3.0),
                          overrides.pop("n_time", 500))
    initial = cfg.initial
    return cfg.with_overrides(disc=disc, initial=initial, **overrides)


def write_cfg(tmp_path, cfg, fname="s.cfg"):
    path = tmp_path / fname
    path.write_text(render_config(cfg))
    return str(path)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_presets_command(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "eichhornia-const140" in out and "two-plant-high-700-350" in out
    assert len(out.strip().splitlines()) == 6


def test_levels_command(capsys):
    assert main(["levels", "eichhornia"]) == 0
    out = capsys.readouterr().out
    assert "w* = 368.3827" in out and "u* = 18.0425" in out


def test_levels_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_species = 1\n")
    assert main(["levels", str(bad)]) == 1
    assert "configuration error" in capsys.readouterr().err


def test_simulate_writes_files(tmp_path):
    cfg = small()
    out = tmp_path / "out"
    assert main(["simulate", write_cfg(tmp_path, cfg), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["diagnostics.csv", "field.csv", "levels.csv", "levels.txt", "surface.gp"]

    rows = read_rows(out / "field.csv")
    assert rows[0] == ["t", "x", "w_1", "u_1"]
    data = rows[1:]
    assert all(len(r) == 1 + 1 + 2 * 1 for r in data)
    times = sorted({float(r[0]) for r in data})
    np.testing.assert_allclose(times, np.arange(0, 501, 10) * 3.0 / 500, atol=5e-6)
    assert len(data) == len(times) * 20

    diag = read_rows(out / "diagnostics.csv")
    assert diag[0] == ["t", "inner_iterations", "residual", "controlled_nodes_1"]
    assert len(diag) == 501

    levels = read_rows(out / "levels.csv")
    assert float(levels[1][3]) == pytest.approx(368.38265306122, rel=1e-12)
    assert "w* = 368.3827" in (out / "levels.txt").read_text()
    assert "splot 'field.csv'" in (out / "surface.gp").read_text()


def test_two_species_csv_shape(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", write_cfg(tmp_path, small("two-plant-high-700-350")),
                 "--out", str(out)]) == 0
    rows = read_rows(out / "field.csv")
    assert rows[0] == ["t", "x", "w_1", "w_2", "u_1", "u_2"]
    assert all(len(r) == 6 for r in rows[1:])
    assert [float(v) for v in rows[1][2:]] == [700.0, 350.0, pytest.approx(299.919),
                                               pytest.approx(242.091)]


def test_csv_only_format(tmp_path):
    out = tmp_path / "o"
    main(["simulate", write_cfg(tmp_path, small(formats=("csv",))), "--out", str(out)])
    assert not (out / "surface.gp").exists()


def test_deterministic_output(tmp_path):
    path = write_cfg(tmp_path, small("eichhornia-linear80x"))
    main(["simulate", path, "--out", str(tmp_path / "a")])
    main(["simulate", path, "--out", str(tmp_path / "b")])
    for name in ("field.csv", "diagnostics.csv", "levels.txt", "levels.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_no_control_flag(tmp_path):
    out = tmp_path / "o"
    cfg = small(horizon=120.0, n_time=20000)
    assert main(["simulate", write_cfg(tmp_path, cfg), "--out", str(out), "--no-control"]) == 0
    rows = read_rows(out / "field.csv")
    final = [float(r[2]) for r in rows[1:] if float(r[0]) == 120.0]
    assert len(final) == 20
    assert max(abs(w - 700.68) for w in final) < 0.5
    assert all(float(r[3]) == 0.0 for r in rows[1:])


def test_ode_only(tmp_path):
    out = tmp_path / "o"
    cfg = small(horizon=30.0, n_time=5000)
    assert main(["simulate", write_cfg(tmp_path, cfg), "--out", str(out), "--ode-only"]) == 0
    rows = read_rows(out / "trajectory.csv")
    assert rows[0] == ["t", "w_1", "u_1"]
    assert float(rows[-1][0]) == 30.0
    assert float(rows[-1][1]) == pytest.approx(368.38, abs=0.01)
    assert not (out / "field.csv").exists()


def test_batch_jobs(tmp_path):
    a = write_cfg(tmp_path, small(), "a.cfg")
    b = write_cfg(tmp_path, small("two-plant-low-280-80"), "b.cfg")
    out = tmp_path / "batch"
    assert main(["simulate", a, b, "--jobs", "2", "--out", str(out)]) == 0
    for name in ("eichhornia-const140", "two-plant-low-280-80"):
        assert (out / name / "field.csv").is_file()
    # Parallel and sequential batches give identical bytes.
    seq = tmp_path / "seq"
    assert main(["simulate", a, b, "--out", str(seq)]) == 0
    assert ((out / "two-plant-low-280-80" / "field.csv").read_bytes()
            == (seq / "two-plant-low-280-80" / "field.csv").read_bytes())


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_species = 1\nspecies.1.a = 0\n")
    assert main(["simulate", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert main(["simulate", "no-such-preset"]) == 1
    assert not (tmp_path / "o").exists()


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    def broken(*args, **kwargs):
        raise LinearSolveFailure("zero pivot in row 3", step=17)

    monkeypatch.setattr(scenario, "run_pde", broken)
    out = tmp_path / "o"
    assert main(["simulate", write_cfg(tmp_path, small()), "--out", str(out)]) == 2
    assert "time step 17" in capsys.readouterr().err
    assert not out.exists() or not any(out.iterdir())


def test_partial_files_removed(tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise OSError("disk full")

    monkeypatch.setattr(scenario, "write_diagnostics_csv", fail)
    out = tmp_path / "o"
    assert main(["simulate", write_cfg(tmp_path, small()), "--out", str(out)]) == 1
    assert list(out.iterdir()) == []


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pondharvest", "levels", "two-plant-high"],
                          capture_output=True, text=True, check=True)
    assert "w* = 414.2265" in proc.stdout and "w* = 110.6606" in proc.stdout
