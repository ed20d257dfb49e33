import csv
import io
import json
import math

import pytest

from qtruncate.cli import cfmt, fmt, run

D2_ARGS = ["--preset", "qsd6", "--t2", "1/2,1/2", "--xi", "0,pi", "--ancilla", "1,0", "--detect", "1,0"]


def _run(capsys, argv):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_number_formatting():
    assert fmt(1 / 3) == 0.333333333333
    assert fmt(-0.0) == 0.0 and str(fmt(-0.0)) == "0.0"
    assert cfmt(1j) == [0.0, 1.0]


def test_simulate_d2(capsys):
    code, out, _ = _run(capsys, ["simulate", *D2_ARGS])
    assert code == 0
    data = json.loads(out)
    assert data["profile"] == [[-0.5, 0.0], [-0.5, 6.12323399574e-17]]
    assert data["profile_fidelity"] == 1.0
    assert data["probability"] == fmt(math.exp(-1) / 2)
    assert data["simulated_probability"] == data["probability"]
    assert data["ideal_fidelity"] == 1.0
    assert data["signal"]["cutoff"] == 20


def test_simulate_writes_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = _run(capsys, ["simulate", *D2_ARGS, "--out", str(path)])
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["d"] == 2


def test_simulate_signal_kinds(tmp_path, capsys):
    code, out, _ = _run(capsys, ["simulate", *D2_ARGS, "--signal", "fock:1"])
    assert code == 0 and json.loads(out)["probability"] == 0.25
    gam = tmp_path / "g.json"
    gam.write_text(json.dumps([1, [0, 1]]))
    code, out, _ = _run(capsys, ["simulate", *D2_ARGS, "--signal", f"custom:{gam}"])
    assert code == 0 and json.loads(out)["probability"] == 0.25
    code, out, _ = _run(capsys, ["simulate", *D2_ARGS, "--signal", "coherent:2:30"])
    assert code == 0 and json.loads(out)["signal"]["cutoff"] == 30


def test_simulate_circuit_file(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"preset": "qsd6", "t2": ["1/2", "1/2"], "xi": [0, "pi"]}))
    code, out, _ = _run(capsys, ["simulate", "--circuit", str(path), "--ancilla", "1,0", "--detect", "1,0"])
    assert code == 0 and json.loads(out)["profile_fidelity"] == 1.0


def test_impossible_pattern_has_zero_probability(capsys):
    code, out, _ = _run(capsys, ["simulate", "--preset", "qsd6", "--t2", "1,1", "--ancilla", "1,0", "--detect", "1,0"])
    data = json.loads(out)
    assert code == 0
    assert data["probability"] == 0.0 and data["profile_fidelity"] is None and data["output_state"] == []


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--preset", "qsd6", "--ancilla", "1,0", "--detect", "0,2"],
        ["simulate", "--preset", "qsd6", "--t2", "2,1"],
        ["simulate", "--preset", "qsd7"],
        ["simulate"],
        ["simulate", "--preset", "qsd6", "--signal", "squeezed:1"],
        ["simulate", "--preset", "qsd6", "--target", "trunc:5"],
        ["simulate", "--preset", "qsd6", "--ancilla", "1,0,0"],
        ["simulate", "--circuit", "/nonexistent.json"],
        ["verify", "--wirings", "qsd99"],
        ["sweep", "--preset", "qsd6", "--sweep", "B4=0:1:3"],
        ["optimize", "--preset", "qsd6", "--free", "T2"],
        ["optimize", "--preset", "qsd6", "--starts", "0"],
        ["frobnicate"],
    ],
)
def test_config_errors_exit_one(argv, capsys):
    try:
        code = run(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    assert code == 1
    capsys.readouterr()


def test_verify_exit_and_table(capsys):
    code, out, err = _run(capsys, ["verify"])
    assert code == 0
    data = json.loads(out)
    assert data["six_port_ok"] and data["consistency_error"] == 0.0
    assert "d5-numeric" in err and "REPRODUCED" in err


def test_optimize_feasible_and_infeasible(capsys):
    code, out, _ = _run(capsys, ["optimize", "--preset", "qsd6", "--ancilla", "1,0", "--detect", "1,0", "--starts", "4"])
    assert code == 0 and json.loads(out)["feasible"]
    code, out, _ = _run(
        capsys,
        ["optimize", "--preset", "qsd6", "--t2", "1,1", "--ancilla", "1,0", "--detect", "1,0", "--free", "", "--starts", "2"],
    )
    assert code == 2 and not json.loads(out)["feasible"]


def test_sweep_csv(capsys):
    code, out, _ = _run(capsys, ["sweep", *D2_ARGS, "--sweep", "T4=0:1:5"])
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["param", "fidelity", "probability", "c0_re", "c0_im", "c1_re", "c1_im"]
    assert len(rows) == 6
    assert [float(r[0]) for r in rows[1:]] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert float(rows[3][1]) == 1.0
    code, out, _ = _run(capsys, ["sweep", *D2_ARGS, "--sweep", "xi4=0:pi:1"])
    assert code == 0 and len(out.splitlines()) == 2


def test_outputs_are_byte_identical(capsys):
    _, a, _ = _run(capsys, ["optimize", "--preset", "qsd6", "--ancilla", "1,1", "--detect", "1,1", "--starts", "3", "--seed", "7"])
    _, b, _ = _run(capsys, ["optimize", "--preset", "qsd6", "--ancilla", "1,1", "--detect", "1,1", "--starts", "3", "--seed", "7"])
    assert a == b


def test_sweep_tied_parameters_and_json(capsys):
    args = ["--preset", "qsd8", "--t2", "1/2,1/2,1,1/2,1/2", "--target", "punch:4:0,2"]
    code, out, _ = _run(capsys, ["sweep", *args, "--sweep", "T2,T4=(3-sqrt(3))/3:1:2", "--format", "json"])
    rows = json.loads(out)
    assert code == 0 and len(rows) == 2
    assert rows[0]["fidelity"] == 1.0
    # all couplers fully transmitting: the pattern never heralds
    assert rows[1]["fidelity"] is None and rows[1]["probability"] == 0.0
    code, out, _ = _run(capsys, ["sweep", *args, "--sweep", "T2,T4=1:1:1"])
    assert out.splitlines()[1].split(",")[1] == ""
    code, _, _ = _run(capsys, ["sweep", *args, "--sweep", "T2,xi4=0:1:2"])
    assert code == 1
    code, _, _ = _run(capsys, ["sweep", *args, "--sweep", "T4=0:2:3"])
    assert code == 1
    code, _, _ = _run(capsys, ["sweep", *args, "--sweep", "T4=0:1:0"])
    assert code == 1


def test_transparent_eight_port(capsys):
    # identity network: only c_1 survives, so the probability is |gamma_1|^2
    code, out, _ = _run(capsys, ["simulate", "--preset", "qsd8"])
    data = json.loads(out)
    assert code == 0
    assert data["profile"] == [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]
    assert data["probability"] == fmt(math.exp(-1))
    assert data["scattering_matrix"][0] == [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]


def test_trivial_d1_target(capsys):
    code, out, _ = _run(
        capsys,
        ["optimize", "--preset", "qsd6", "--ancilla", "0,0", "--detect", "0,0", "--target", "trunc:1", "--starts", "2"],
    )
    assert code == 0 and json.loads(out)["fidelity"] == 1.0


def test_verify_csv_and_unknown_entry(capsys):
    code, out, _ = _run(capsys, ["verify", "--wirings", "qsd8", "--format", "csv"])
    lines = out.splitlines()
    assert code == 0 and lines[0] == "entry,wiring,status,fidelity,probability"
    assert len(lines) == 1 + 5 + 9
    code, _, _ = _run(capsys, ["verify", "--entries", "bogus"])
    assert code == 1


def test_malformed_circuit_file_has_no_output(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text('{"modes": 3, "elements": [{"type": "bs", "modes": [1, 4], "t2": 0.5}]}')
    code, out, err = _run(capsys, ["simulate", "--circuit", str(path), "--out", str(tmp_path / "o.json")])
    assert code == 1 and out == "" and "mode 4" in err
    assert not (tmp_path / "o.json").exists()
