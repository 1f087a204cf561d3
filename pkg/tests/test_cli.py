import json

import numpy as np
import pytest

from ses_forge import cli, hhl


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_aba_check(capsys):
    code, out, _ = run(capsys, "aba-check", "--n", "1,8", "--trials", "5", "--seed", "1")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,trials,max_residual"
    assert float(lines[1].split(",")[2]) < 1e-12
    assert float(lines[2].split(",")[2]) < 1e-9


def test_aba_check_rejects_non_unitary(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([[1.0, 1.0], [0.0, 1.0]]))
    code, _, err = run(capsys, "aba-check", "--input", str(path))
    assert code == 2
    assert "NotUnitary" in err


def test_seed_required(capsys):
    code, _, err = run(capsys, "hhl", "--n", "2")
    assert code == 2 and "--seed" in err


def test_compile_prints_time(tmp_path, capsys):
    gen = tmp_path / "a.json"
    gen.write_text(json.dumps([[1.0, 0.0], [0.0, -1.0]]))
    out_path = tmp_path / "sched.json"
    code, _, err = run(capsys, "compile", "--input", str(gen), "--out", str(out_path))
    assert code == 0
    assert "t = 3.183 ns" in err
    sched = json.loads(out_path.read_text())
    assert sched["bit_ordering"] == "little-endian-qubit1-lsb"
    assert len(sched["segments"]) == 1


def test_compile_zero_generator(tmp_path, capsys):
    gen = tmp_path / "z.json"
    gen.write_text(json.dumps([[0.0, 0.0], [0.0, 0.0]]))
    code, out, _ = run(capsys, "compile", "--input", str(gen))
    assert code == 0 and json.loads(out)["segments"] == []


def test_cu_verify(capsys):
    code, out, _ = run(capsys, "cu-verify", "--n", "2", "--trials", "2", "--seed", "0", "--format", "json")
    rows = json.loads(out)
    assert code == 0 and len(rows) == 2
    assert all(r["fidelity"] > 1 - 1e-12 for r in rows)
    code, out, _ = run(capsys, "cu-verify", "--n", "2", "--trials", "1", "--seed", "0", "--level", "device")
    assert float(out.splitlines()[1].split(",")[2]) > 1 - 1e-9


def test_cnot_bench_single_row(capsys):
    code, out, err = run(capsys, "cnot-bench", "--n", "1", "--tgate-ns", "10", "--eta-hz", "400e6")
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "n,eta_mhz,tgate_ns,omega_mhz,g_mhz,e_gate"
    assert row.startswith("1,400.0,10.0,400.0")


def test_cnot_bench_bad_quantization(capsys):
    code, _, err = run(capsys, "cnot-bench", "--n", "3", "--tgate-ns", "30.01")
    assert code == 2 and "InvalidParams" in err


def test_hhl_instance_file(tmp_path, capsys):
    inst = hhl.exact_phase_instance(3, 2, [1, 2, 3], np.random.default_rng(0))
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(inst.to_dict()))
    code, out, _ = run(capsys, "hhl", "--input", str(path), "--format", "json")
    (row,) = json.loads(out)
    assert code == 0 and row["e_algorithm"] < 1e-6 and row["schedule_time_s"] is None
    code, out, _ = run(capsys, "hhl", "--input", str(path), "--schedule-only")
    assert float(out.splitlines()[1].split(",")[5]) > 0


def test_hhl_sweep_reproducible(tmp_path, capsys):
    args = ["hhl", "--n", "2-3", "--m", "2", "--trials", "3", "--seed", "9"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "n,m,trial,e_algorithm,p_postselect,schedule_time_s"
    assert len(lines) == 7
    code, out, _ = run(capsys, *args, "--summary")
    assert out.splitlines()[0] == "n,m,mean_e_algorithm,stderr,mean_p_postselect"


def test_positive_parameters(capsys):
    code, _, err = run(capsys, "aba-check", "--seed", "1", "--gmax-hz", "-5")
    assert code == 2


def test_bad_level(capsys):
    code, _, _ = run(capsys, "hhl", "--seed", "1", "--level", "qutrit")
    assert code == 2


def test_parser_lists():
    assert cli._int_list("2-4,7") == (2, 3, 4, 7)
    assert cli._float_list("3e8,4e8") == (3e8, 4e8)
