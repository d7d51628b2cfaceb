import json
import math

import pytest

from tasep2c import __version__, identities
from tasep2c.cli import EXIT_ACCURACY, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_exact_leftmost_determinant(capsys):
    code, out, _ = run_cli(
        capsys,
        *"exact leftmost --n 2 --step-l 0 --position 1 --time 1 --method determinant".split(),
    )
    assert code == EXIT_OK
    record = json.loads(out)
    assert record["command"] == "exact leftmost"
    assert record["value"] == pytest.approx(math.exp(-1), abs=1e-12)
    assert record["method"] == "determinant"
    assert record["version"] == __version__
    assert "runtime" not in record


def test_exact_leftmost_single_particle(capsys):
    code, out, _ = run_cli(
        capsys, *"exact leftmost --n 1 --initial 0 --position 3 --time 2".split()
    )
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(0.180447, abs=1e-6)


def test_exact_transition_record(capsys):
    argv = (
        "exact transition --n 2 --initial 1,2 --final 1,3 "
        "--species 21 --final-species 21 --time 1"
    )
    code, out, _ = run_cli(capsys, *argv.split())
    assert code == EXIT_OK
    record = json.loads(out)
    assert 0 < record["value"] < 1
    assert record["parameters"]["final"] == "1,3"


def test_sweep_emits_csv_schema(capsys):
    code, out, _ = run_cli(
        capsys, *"exact leftmost --n 2 --step-l 0 --sweep 1..3 --time 1".split()
    )
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines[0] == "x,value,method,t,n"
    assert len(lines) == 4
    x, value, method, t, n = lines[1].split(",")
    assert (x, method, t, n) == ("1", "residue", "1.0", "2")
    assert float(value) == pytest.approx(math.exp(-1), abs=1e-12)


def test_sweep_csv_file(tmp_path, capsys):
    path = tmp_path / "sweep.csv"
    code, out, _ = run_cli(
        capsys,
        *f"exact leftmost --n 2 --step-l 0 --sweep 1..3 --time 1 --csv {path}".split(),
    )
    assert code == EXIT_OK
    record = json.loads(out)
    assert record["rows"] == 3 and record["csv"] == str(path)
    content = path.read_text().strip().splitlines()
    assert content[0] == "x,value,method,t,n" and len(content) == 4


def test_simulate_byte_determinism(capsys):
    argv = "simulate --n 2 --step-l 0 --event leftmost --position 1 --time 1 --runs 2000 --seed 9"
    _, out1, _ = run_cli(capsys, *argv.split())
    _, out2, _ = run_cli(capsys, *argv.split())
    assert out1 == out2
    record = json.loads(out1)
    assert record["seed"] == 9 and record["runs"] == 2000


def test_simulate_runs_validation(capsys):
    code, _, err = run_cli(
        capsys,
        *"simulate --n 2 --step-l 0 --event leftmost --position 1 --time 1 --runs 0".split(),
    )
    assert code == EXIT_USAGE
    assert "runs" in err


def test_usage_error_on_bad_initial(capsys):
    code, _, err = run_cli(
        capsys, *"exact leftmost --n 2 --initial 5,3 --position 1 --time 1".split()
    )
    assert code == EXIT_USAGE
    assert "increasing" in err


def test_usage_error_on_missing_position(capsys):
    code, _, _ = run_cli(capsys, *"exact leftmost --n 2 --step-l 0 --time 1".split())
    assert code == EXIT_USAGE


def test_usage_error_on_unknown_flag(capsys):
    code, _, _ = run_cli(capsys, *"exact leftmost --bogus 3".split())
    assert code == EXIT_USAGE


def test_usage_error_on_negative_time(capsys):
    code, _, err = run_cli(
        capsys, *"exact leftmost --n 2 --step-l 0 --position 1 --time -1".split()
    )
    assert code == EXIT_USAGE
    assert "nonnegative" in err


def test_determinant_requires_step(capsys):
    code, _, err = run_cli(
        capsys,
        *"exact leftmost --n 2 --initial 1,3 --position 1 --time 1 --method determinant".split(),
    )
    assert code == EXIT_USAGE
    assert "step" in err


def test_compare_agreement(capsys):
    argv = (
        "compare --n 2 --step-l 0 --event leftmost --position 1 "
        "--time 1 --runs 20000 --seed 3"
    )
    code, out, _ = run_cli(capsys, *argv.split())
    assert code == EXIT_OK
    record = json.loads(out)
    assert record["agree"] and abs(record["z"]) < 4
    assert record["exact"] == pytest.approx(math.exp(-1), abs=1e-12)


def test_compare_time_zero_exact_indicator(capsys):
    argv = "compare --n 2 --step-l 0 --event transition --final 1,2 --time 0 --runs 50 --seed 1"
    code, out, _ = run_cli(capsys, *argv.split())
    assert code == EXIT_OK
    record = json.loads(out)
    assert record["exact"] == record["estimate"] == 1.0 and record["z"] == 0.0


def test_compare_flags_disagreement(capsys):
    # sigma 0 turns any sampling noise into a flagged disagreement
    argv = (
        "compare --n 2 --step-l 0 --event leftmost --position 1 "
        "--time 1 --runs 500 --seed 3 --sigma 0"
    )
    code, out, _ = run_cli(capsys, *argv.split())
    assert code == EXIT_ACCURACY
    assert json.loads(out)["agree"] is False


def test_verify_pass_and_output(capsys):
    code, out, _ = run_cli(capsys, *"verify --identity main --n-range 2..3 --points 3".split())
    assert code == EXIT_OK
    records = [json.loads(line) for line in out.strip().splitlines()]
    assert [r["n"] for r in records] == [2, 3]
    assert all(r["passed"] and r["points"] == 3 for r in records)


def test_verify_all_small(capsys):
    code, out, _ = run_cli(capsys, *"verify --identity all --n-range 2..2 --points 2".split())
    assert code == EXIT_OK
    identities = {json.loads(line)["identity"] for line in out.strip().splitlines()}
    assert {"main", "equiv_a", "equiv_b", "tasep_a", "braid"} <= identities


def test_verify_failure_exit_code(capsys, monkeypatch):
    def failing_suite(**kwargs):
        return [{"identity": "main", "n": 2, "points": 1, "passed": False, "degree_bound": 16}]

    monkeypatch.setattr(identities, "run_identity_suite", failing_suite)
    code, out, _ = run_cli(capsys, *"verify --identity main --n-range 2..2 --points 1".split())
    assert code == EXIT_VERIFY
    assert json.loads(out)["passed"] is False


def test_verify_bad_range(capsys):
    code, _, _ = run_cli(capsys, *"verify --identity main --n-range 1..2".split())
    assert code == EXIT_USAGE
    code, _, _ = run_cli(capsys, *"verify --identity main --n-range nope".split())
    assert code == EXIT_USAGE


def test_records_are_json_roundtrip_stable(capsys):
    argv = "exact leftmost --n 2 --step-l 0 --position 2 --time 0.5".split()
    _, out1, _ = run_cli(capsys, *argv)
    _, out2, _ = run_cli(capsys, *argv)
    assert out1 == out2
    record = json.loads(out1)
    assert json.loads(json.dumps(record)) == record
