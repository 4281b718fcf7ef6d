import json
import subprocess
import sys

import pytest

from mbcoffset import cli


@pytest.fixture
def models(tmp_path):
    paths = {}
    for name, doc in {"dec": {"K1": 1, "tau1": 0.1},
                      "cpl": {"K1": 1, "tau1": 0.1, "K2": 0.1, "tau2": 1},
                      "degenerate": {"K1": 1, "tau1": 0.1, "K2": 1, "tau2": 0.1}}.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc))
        paths[name] = str(p)
    return paths


def _run(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_offset_analytic(models, capsys):
    code, out, _ = _run(["offset", "--model", models["dec"], "--omega-r", "1.27", "--analytic"], capsys)
    assert code == 0
    assert json.loads(out)["psi_star_deg"] == pytest.approx(7.238, abs=5e-4)
    code, out, _ = _run(["offset", "--model", models["cpl"], "--omega-r", "1.27", "--analytic"], capsys)
    assert json.loads(out)["psi_star_deg"] == pytest.approx(4.617, abs=5e-4)


def test_offset_grid(models, capsys, tmp_path):
    sweep = tmp_path / "sweep.csv"
    code, out, _ = _run(["offset", "--model", models["dec"], "--omega-r", "1.27", "--grid-search",
                         "--eval-omega", "1e-2", "--out", str(sweep)], capsys)
    assert code == 0
    assert abs(json.loads(out)["psi_star_deg"] - 7.2378) <= 0.1
    assert sweep.read_text().startswith("psi_o_deg,r_sharp")


def test_offset_median(models, capsys):
    code, out, _ = _run(["offset", "--model", models["dec"], models["dec"], models["cpl"], "--omega-r", "1.27",
                         "--grid-search", "--eval-omega", "1e-2", "--psi-min", "0", "--psi-max", "10"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["method"] == "grid-median" and doc["psi_star_deg"] == pytest.approx(7.2, abs=1e-9)


def test_margins_schema(models, capsys, tmp_path):
    report = tmp_path / "rep.json"
    code, out, _ = _run(["margins", "--model", models["dec"], "--omega-r", "1.27", "--ci", "2.65e-6",
                         "--psi-o", "44", "--loop", "1", "--out", str(report), "--bands", str(tmp_path / "b.csv")],
                        capsys)
    assert code == 0
    doc = json.loads(out)
    assert {"A_m_ext", "phi_m_ext_deg", "M_m_ext", "omega_p", "omega_g", "omega_m"} <= set(doc)
    assert json.loads(report.read_text()) == doc


def test_frf_and_rga(models, capsys, tmp_path):
    f = tmp_path / "f.csv"
    assert _run(["frf", "--model", models["cpl"], "--omega-r", "1.27", "--psi-o", "4.6", "--points", "7",
                 "--out", str(f)], capsys)[0] == 0
    assert len(f.read_text().splitlines()) == 8
    r = tmp_path / "r.csv"
    code, out, _ = _run(["rga", "--model", models["cpl"], "--omega-r", "1.27", "--psi-min", "0", "--psi-max", "10",
                         "--step", "0.5", "--out", str(r)], capsys)
    assert code == 0 and len(r.read_text().splitlines()) == 22


def test_ssmbc_command(capsys, tmp_path):
    from mbcoffset import ssmbc
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"models": [ssmbc.second_order_rotor(2, 0.3, 1, p, 1.27).to_dict() for p in (0, 1)]}))
    out = tmp_path / "t.json"
    code, _, _ = _run(["ssmbc", "--input", str(fam), "--psi-o", "10", "--out", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["models"]) == 2 and doc["psi_o_deg"] == 10


def test_simulate_and_spectra_deterministic(models, capsys, tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        code, _, _ = _run(["simulate", "--model", models["cpl"], "--omega-r", "1.27", "--mode", "open",
                           "--duration", "120", "--discard", "20", "--nperseg", "2048", "--out-dir", str(d)], capsys)
        assert code == 0
        code, _, _ = _run(["spectra", "--input", str(d / "timeseries.csv"), "--nperseg", "1024",
                           "--columns", "M_1", "theta_tilt", "--out", str(d / "psd.csv")], capsys)
        assert code == 0
        outs.append([(d / n).read_bytes() for n in ("timeseries.csv", "frf_estimate.csv", "config.json", "psd.csv")])
    assert outs[0] == outs[1]


def test_simulate_closed(models, capsys, tmp_path):
    code, out, _ = _run(["simulate", "--model", models["cpl"], "--omega-r", "1.27", "--mode", "closed", "--ci", "0.15",
                         "--dist-amplitude", "0.5", "--duration", "30", "--discard", "0",
                         "--out-dir", str(tmp_path)], capsys)
    assert code == 0 and json.loads(out)["samples"] == 3750


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["offset", "--model", "x.json", "--omega-r", "1"],
    ["offset", "--model", "x.json", "--omega-r", "1", "--analyt"],
    ["frf", "--model", "x.json", "--omega-r", "1", "--out", "f.csv", "--bogus"],
    [],
])
def test_usage_errors(argv, capsys):
    assert cli.run(argv) == 2


def test_computation_errors_emit_json(models, capsys, tmp_path):
    code, _, err = _run(["offset", "--model", models["degenerate"], "--omega-r", "1.27", "--analytic"], capsys)
    assert code == 1
    assert json.loads(err)["error"] == "DegenerateModelError"
    code, _, err = _run(["frf", "--model", str(tmp_path / "missing.json"), "--omega-r", "1", "--out", "f.csv"], capsys)
    assert code == 1 and json.loads(err)["command"] == "frf"


def test_help_lists_flags():
    proc = subprocess.run([sys.executable, "-m", "mbcoffset.cli", "margins", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for flag in ("--model", "--omega-r", "--ci", "--psi-o", "--loop", "--convention", "--out"):
        assert flag in proc.stdout
