import json
from pathlib import Path

import numpy as np
import pytest

from transmon_stability import expsim, io
from transmon_stability.cli import main


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def _data_files(folder):
    return {p.name: p.read_bytes() for p in sorted(Path(folder).iterdir())
            if p.suffix != ".svg" and p.name != "manifest.json"}


def test_simulate_tls_writes_trace_and_manifest(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"ensemble": {"n_tls": 10}, "duration_h": 2, "cadence_s": 100}))
    code, out, _ = _run(capsys, "simulate", "tls", "--config", cfg, "--out", tmp_path / "d")
    assert code == 0
    man = json.loads((tmp_path / "d" / "manifest.json").read_text())
    assert man["seeds"] == {"seed": 0}
    assert "t1_trace.csv" in man["outputs"]
    head = (tmp_path / "d" / "t1_trace.csv").read_text().splitlines()[0]
    assert head == "# manifest=manifest.json"


def test_invalid_dynamics_names_enum(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"ensemble": {"dynamics": "jumpy"}}))
    code, _, err = _run(capsys, "simulate", "tls", "--config", cfg, "--out", tmp_path / "d")
    assert code == 2
    e = json.loads(err)["error"]
    assert "telegraphic" in e["message"] and e["exit_code"] == 2


def test_missing_input_file_is_io_error(tmp_path, capsys):
    code, _, err = _run(capsys, "analyze", "fit-decay", "--input", tmp_path / "nope.csv", "--out", tmp_path / "o")
    assert code == 4 and json.loads(err)["error"]["exit_code"] == 4


def test_empty_trace_dir_not_silent(tmp_path, capsys):
    (tmp_path / "t").mkdir()
    code, _, err = _run(capsys, "analyze", "stability", "--traces", tmp_path / "t", "--out", tmp_path / "o")
    assert code == 2 and "no datasets admitted" in err


def test_decay_roundtrip_and_units(tmp_path, capsys):
    assert _run(capsys, "simulate", "decay", "--seed", 3, "--out", tmp_path / "s")[0] == 0
    data = next(p for p in (tmp_path / "s").glob("*.csv"))
    code, _, _ = _run(capsys, "analyze", "fit-decay", "--input", data, "--out", tmp_path / "a",
                      "--units", "lab")
    assert code == 0
    rep = json.loads((tmp_path / "a" / "fit_decay.json").read_text())
    assert rep["units"] == "lab" and rep["t1_us"] == pytest.approx(30.0, rel=0.1)
    assert (tmp_path / "a" / "fit_decay.svg").exists()


def test_fit_failure_exit_code(tmp_path, capsys):
    c = io.write_record(expsim.simulate_decay_curve(30e-6, noise=expsim.NOISELESS), "decay", tmp_path / "d.csv")
    flat = "\n".join(l if l.startswith(("#", "tau")) else l.split(",")[0] + ",0.3"
                     for l in c.read_text().splitlines()) + "\n"
    c.write_text(flat)
    code, _, err = _run(capsys, "analyze", "fit-decay", "--input", c, "--out", tmp_path / "o")
    assert code == 3 and json.loads(err)["error"]["module"] == "fitters"


def test_readout_report_keys(tmp_path, capsys):
    _run(capsys, "simulate", "singleshot", "--out", tmp_path / "s")
    data = next((tmp_path / "s").glob("*.csv"))
    code, _, _ = _run(capsys, "analyze", "readout", "--input", data, "--out", tmp_path / "a")
    rep = json.loads((tmp_path / "a" / "readout.json").read_text())
    assert code == 0 and {"delta_m", "fidelity", "confusion", "t_eff_mk"} <= set(rep)


def test_benchmark_admission_and_override(tmp_path, capsys):
    rows = [{"label": f"q{k}", "mean_t1_us": t, "std_t1_us": 1.22e-2 * t ** 1.5,
             "n_samples": 900, "span_hours": 30} for k, t in enumerate([20.0, 60.0, 150.0, 400.0])]
    rows.append({"label": "short", "mean_t1_us": 50.0, "std_t1_us": 4.0, "n_samples": 100, "span_hours": 2})
    pts = tmp_path / "p.json"
    pts.write_text(json.dumps(rows))
    code, _, _ = _run(capsys, "analyze", "benchmark", "--points", pts, "--out", tmp_path / "a", "--units", "lab")
    rep = json.loads((tmp_path / "a" / "benchmark.json").read_text())
    assert code == 0 and rep["a"] == pytest.approx(1.22e-2, rel=1e-9) and len(rep["rejected"]) == 1
    code, _, _ = _run(capsys, "analyze", "benchmark", "--points", pts, "--out", tmp_path / "b",
                      "--override-admission")
    rep = json.loads((tmp_path / "b" / "benchmark.json").read_text())
    assert code == 0 and rep["n_points"] == 5 and rep["admission_override"]


@pytest.mark.parametrize("argv", [("simulate", "ramsey", "--seed", "4"), ("simulate", "singleshot"),
                                  ("simulate", "decay", "--seed", "9")])
def test_reruns_are_byte_identical(tmp_path, capsys, argv):
    assert _run(capsys, *argv, "--out", tmp_path / "r1")[0] == 0
    assert _run(capsys, *argv, "--out", tmp_path / "r2")[0] == 0
    a, b = _data_files(tmp_path / "r1"), _data_files(tmp_path / "r2")
    assert a == b and a
    m1 = json.loads((tmp_path / "r1" / "manifest.json").read_text())
    m2 = json.loads((tmp_path / "r2" / "manifest.json").read_text())
    assert m1["config_hash"] == m2["config_hash"]
