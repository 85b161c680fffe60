import json

import numpy as np
import pytest

from apsquare import cli, experiments
from apsquare.config import RunConfig
from apsquare.experiments import Outcome
from apsquare.io import save_csv
from apsquare.lab import ScanResult
from apsquare.signal import Domain, Signal


def _main(*args):
    return cli.main([str(a) for a in args])


def test_sandwich_on_zero_signal_passes(tmp_path):
    out = tmp_path / "run"
    rc = _main("experiment", "sandwich", "--seed", 1, "--param", "zero=true", "--param", "trials=2", "--out", out)
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] and report["asserted"][0]["passed"]
    assert set(report) >= {"asserted", "reported", "config"}
    assert json.loads((out / "config.json").read_text())["seed"] == 1


def test_shifted_cover_passes(tmp_path):
    assert _main("experiment", "shifted_cover", "--seed", 7, "--out", tmp_path) == 0
    # the older id is an alias
    assert _main("experiment", "prop21", "--seed", 7, "--out", tmp_path) == 0


def test_missing_seed_is_a_config_error(tmp_path, capsys):
    assert _main("experiment", "shifted_cover", "--out", tmp_path) == 2
    assert "config.seed" in capsys.readouterr().err


def test_config_file_and_flag_override(tmp_path):
    cfg = RunConfig(seed=3, experiment={"id": "median", "params": {"trials": 20}}, out=str(tmp_path / "a"))
    (tmp_path / "c.json").write_text(cfg.to_json())
    assert _main("experiment", "--config", tmp_path / "c.json", "--seed", 4, "--out", tmp_path / "b") == 0
    echo = json.loads((tmp_path / "b" / "config.json").read_text())
    assert echo["seed"] == 4 and echo["experiment"]["params"]["trials"] == 20


def test_runs_are_byte_identical(tmp_path):
    out = tmp_path / "run"
    args = ("experiment", "pairing", "--seed", 11, "--param", "trials=3", "--out", out)
    assert _main(*args) == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert _main(*args) == 0
    assert first == {p.name: p.read_bytes() for p in out.iterdir()}


def test_failed_check_gives_nonzero_exit(tmp_path, monkeypatch):
    def broken(rng, p):
        out = Outcome("broken")
        out.check("always", False, "0 > 1")
        return out

    monkeypatch.setitem(experiments.EXPERIMENTS, "broken", broken)
    assert _main("experiment", "broken", "--seed", 0, "--out", tmp_path) == 1
    assert "[FAIL] always" in (tmp_path / "summary.txt").read_text()


def test_emit_writes_one_csv_per_scan(tmp_path):
    out = Outcome("x", scans=[ScanResult("aperture", "alpha", [1, 2, 4], [1.0, 1.5, 2.0]).fit()])
    files = cli.emit(out, RunConfig(seed=0), outdir=tmp_path)
    csvs = [f for f in files if f.suffix == ".csv"]
    assert len(csvs) == 1
    assert len(csvs[0].read_text().splitlines()) >= 4  # header + 3 rows


def test_emit_rejects_empty_results(tmp_path):
    with pytest.raises(ValueError):
        cli.emit(Outcome("empty"), RunConfig(seed=0), outdir=tmp_path)


def test_unknown_experiment(tmp_path, capsys):
    assert _main("experiment", "nope", "--seed", 1, "--out", tmp_path) == 2
    assert "unknown experiment" in capsys.readouterr().err


def test_validate_kernel_exit_codes(tmp_path):
    assert _main("validate-kernel", "--kernel", "haar", "--out", tmp_path) == 0
    assert _main("validate-kernel", "--kernel", "box", "--out", tmp_path) == 1
    assert json.loads((tmp_path / "kernel_report.json").read_text())["eps_ok"] is False


@pytest.fixture
def signal_file(tmp_path):
    dom = Domain(1, 2, 6)
    v = np.zeros(dom.cells)
    v[256:320] = np.arange(64) % 7
    save_csv(Signal(dom, v), tmp_path / "f.csv")
    save_csv(Signal(dom, 1 + v), tmp_path / "w.csv")
    return tmp_path


def test_decompose_writes_certified_family(signal_file):
    out = signal_file / "d"
    assert _main("decompose", "--input", signal_file / "f.csv", "--root", "0:0", "--out", out) == 0
    fam = json.loads((out / "family.json").read_text())
    assert fam["certificate"]["pass"]


def test_apchar_command(signal_file):
    out = signal_file / "a"
    assert _main("apchar", "--input", signal_file / "w.csv", "--p", 2, "--out", out) == 0
    assert json.loads((out / "apchar.json").read_text())["value"] >= 1


@pytest.mark.parametrize("op", ["S_alpha", "S_tilde", "gstar", "M", "sharp"])
def test_compute_command(signal_file, op):
    out = signal_file / "c"
    assert _main("compute", "--input", signal_file / "f.csv", "--op", op, "--out", out) == 0
    assert (out / f"{op}.csv").exists()


def test_bad_tgrid_flag(signal_file, capsys):
    rc = _main("experiment", "sandwich", "--seed", 1, "--tgrid", "0.1:2", "--out", signal_file)
    assert rc == 2 and "config.tgrid" in capsys.readouterr().err
