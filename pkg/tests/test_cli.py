import json
from pathlib import Path

import numpy as np
import pytest

from qwcomplexity.cli import EXIT_INPUT, EXIT_NONCONVERGED, EXIT_OK, InputError, build_parser, load_json, run_cli
from qwcomplexity.quantum_model import PureState, channel_to_json, depolarizing_channel, state_to_json
from qwcomplexity.tensor_core import Operator, SystemShape, operator_to_json

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"


def data(name):
    return str(DATA / name)


def run_json(capsys, *argv):
    code = run_cli([*argv, "--json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_parser_has_all_subcommands():
    sub = build_parser()._subparsers._group_actions[0].choices
    assert set(sub) == {"w1", "complexity", "ac-complexity", "rate", "cost", "expcost", "verify", "reproduce-table1"}


def test_w1_all_zero_vs_all_one(capsys):
    code, doc = run_json(capsys, "w1", "--a", data("zero3.json"), "--b", data("ones3.json"))
    assert code == EXIT_OK
    r = doc["result"]
    assert r["value"] == pytest.approx(3.0, abs=1e-4)
    assert r["lower"] <= r["value"] <= r["upper"]
    assert r["converged"] is True
    assert doc["manifest"]["seed"] == 0


def test_w1_single_flip(capsys):
    code, doc = run_json(capsys, "w1", "--a", data("zero3.json"), "--b", data("e100.json"))
    assert code == EXIT_OK
    assert doc["result"]["value"] == pytest.approx(1.0, abs=1e-4)


def test_w1_text_output(capsys):
    assert run_cli(["w1", "--a", data("zero3.json"), "--b", data("e100.json")]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("value=1") and "converged=true" in out and "lower=" in out


def test_w1_operator_input(tmp_path, capsys):
    op = Operator(SystemShape(1, 2), np.diag([1.0, -1.0]))
    path = tmp_path / "op.json"
    path.write_text(json.dumps(operator_to_json(op)))
    code, doc = run_json(capsys, "w1", "--op", str(path))
    assert code == EXIT_OK and doc["result"]["value"] == 1.0


def test_w1_nonconvergence_exit_code(tmp_path, capsys, rng):
    g = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = g + g.conj().T
    h -= np.trace(h) / 8 * np.eye(8)
    path = tmp_path / "op.json"
    path.write_text(json.dumps(operator_to_json(Operator(SystemShape(3, 2), h))))
    code, doc = run_json(capsys, "w1", "--op", str(path), "--max-iter", "2", "--tol", "1e-12")
    assert code == EXIT_NONCONVERGED
    assert doc["result"]["converged"] is False
    assert doc["result"]["lower"] <= doc["result"]["upper"]


def test_w1_missing_arguments():
    assert run_cli(["w1", "--a", data("zero3.json")]) == EXIT_INPUT


def test_complexity_identity(capsys):
    code, doc = run_json(capsys, "complexity", "--channel", data("identity.json"))
    assert code == EXIT_OK
    assert doc["result"]["lower"] == doc["result"]["upper"] == 0.0


def test_complexity_hadamard_pair(capsys):
    code, doc = run_json(capsys, "complexity", "--channel", data("hadamard2.json"), "--restarts", "4")
    assert code == EXIT_OK
    assert doc["result"]["lower"] == pytest.approx(2.0, abs=1e-3)
    assert doc["result"]["upper"] == pytest.approx(2.0)


def test_ac_complexity_depolarizing(capsys):
    code, doc = run_json(capsys, "ac-complexity", "--channel", data("depolarizing_0.2.json"),
                         "--m-cap", "1", "--restarts", "4")
    assert code == EXIT_OK
    assert doc["result"]["lower"] == pytest.approx(0.6, abs=1e-3)
    assert [row[0] for row in doc["result"]["per_m"]] == [0, 1]


def test_rate(capsys):
    code, doc = run_json(capsys, "rate", "--state", data("plus.json"), "--hamiltonian", data("pauli_z.json"))
    assert code == EXIT_OK
    assert doc["rate"] == pytest.approx(1.0, abs=1e-3)
    assert doc["bound"] == pytest.approx(2 * np.sqrt(2))


def test_rate_rejects_mismatched_hamiltonian(capsys):
    assert run_cli(["rate", "--state", data("plus.json"), "--hamiltonian", data("pauli_z.json"),
                    "--support", "0", "1"]) == EXIT_INPUT


def test_cost_prints_note(capsys):
    assert run_cli(["cost", "--schedule", data("hadamard_schedule.json"), "--restarts", "4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "cost=1.570796327" in out
    assert "[pass]" in out and "note:" in out


def test_cost_json(capsys):
    code, doc = run_json(capsys, "cost", "--schedule", data("hadamard_schedule.json"), "--restarts", "4")
    assert code == EXIT_OK
    assert doc["check"]["pass"] is True
    assert doc["c_w1"]["lower"] == pytest.approx(1.0, abs=1e-4)


def test_expcost_cnot(capsys):
    code, doc = run_json(capsys, "expcost", "--circuit", data("cnot.json"))
    assert code == EXIT_OK
    assert abs(doc["total"] - np.pi) <= 1e-12


def test_expcost_chain_flags_discrepancy(capsys):
    assert run_cli(["expcost", "--circuit", data("cnot_chain3.json")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "R=6.28318530718" in out
    assert "note:" in out and "pi*n" in out


def test_verify_small_run(capsys):
    code, doc = run_json(capsys, "verify", "--instances", "1", "--restarts", "2")
    assert code == EXIT_OK
    assert doc["violations"] == 0
    assert any("soundness" in s["suite"] for s in doc["suites"])


def test_verify_rejects_corrupted_fixture(tmp_path, capsys):
    doc = channel_to_json(depolarizing_channel(0.2, 2))
    doc["kraus"][0][0][0] = [5.0, 0.0]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert run_cli(["verify", "--channel", str(path), "--instances", "1"]) == EXIT_INPUT
    assert "completeness" in capsys.readouterr().err


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "shape": {"n": 1, "d": 2},\n  "amplitudes": [1, 0,]\n}\n')
    assert run_cli(["w1", "--a", str(path), "--b", str(path)]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "line 3" in err and "column" in err
    with pytest.raises(InputError):
        load_json(str(path))


def test_missing_file(capsys):
    assert run_cli(["complexity", "--channel", "/nonexistent/ch.json"]) == EXIT_INPUT


def test_state_shape_mismatch(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(json.dumps(state_to_json(PureState.basis(SystemShape(1, 2), [0]))))
    assert run_cli(["w1", "--a", data("zero3.json"), "--b", str(path)]) == EXIT_INPUT


def test_unknown_subcommand(capsys):
    assert run_cli(["frobnicate"]) == EXIT_INPUT


def test_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("QW_THREADS", "many")
    assert run_cli(["complexity", "--channel", data("identity.json")]) == EXIT_INPUT


def test_reproduce_table1_writes_csv_and_manifest(tmp_path):
    out = tmp_path / "table.csv"
    assert run_cli(["reproduce-table1", "--fast", "--restarts", "2", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == "instance,quantity,formula_value,lower,upper,tolerance,pass"
    assert all(line.endswith(",true") for line in lines[1:])
    man = json.loads((tmp_path / "table.csv.manifest.json").read_text())
    assert man["seed"] == 0 and "version" in man


def test_outputs_are_byte_identical(tmp_path, monkeypatch):
    p = tmp_path / "c.json"
    outputs = []
    for threads in ("1", "2"):
        monkeypatch.setenv("QW_THREADS", threads)
        argv = ["complexity", "--channel", data("hadamard2.json"), "--restarts", "3", "--json", "--out", str(p)]
        assert run_cli(argv) == EXIT_OK
        outputs.append(p.read_bytes())
    assert outputs[0] == outputs[1]
    t = tmp_path / "t.csv"
    tables = []
    for _ in range(2):
        assert run_cli(["reproduce-table1", "--fast", "--restarts", "2", "--out", str(t)]) == EXIT_OK
        tables.append(t.read_bytes())
    assert tables[0] == tables[1]
