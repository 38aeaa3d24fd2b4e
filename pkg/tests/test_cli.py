import json
import subprocess
import sys

import pytest

from clusterbounds import cli
from clusterbounds.model import Model, dump_model


@pytest.fixture
def large_mass_file(tmp_path):
    path = tmp_path / "large_mass.json"
    dump_model(Model.nearest_neighbor(1, 1e4, 0.5, 1.0), path)
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_combinatorics_passes(capsys):
    code, out, _ = run(capsys, "verify", "combinatorics")
    assert code == 0
    assert "FAIL=0" in out.splitlines()[-1]


def test_structured_output_and_sidecar(capsys, tmp_path):
    side = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "bkar", "--format", "structured", "--sidecar", str(side))
    doc = json.loads(out)
    assert code == 0 and doc["schema_version"] == 1
    assert doc["summary"]["FAIL"] == 0 and doc["checks"]
    assert side.read_text() == out


def test_reports_are_byte_identical(capsys):
    first = run(capsys, "verify", "gaussian", "--samples", "20000", "--format", "structured")[1]
    second = run(capsys, "verify", "gaussian", "--samples", "20000", "--format", "structured")[1]
    assert first == second
    assert "runtime\": null" in first


def test_timings_flag(capsys):
    _, out, _ = run(capsys, "verify", "single-site", "--timings", "--format", "structured")
    assert all(c["runtime"] is not None for c in json.loads(out)["checks"])


def test_jobs_do_not_change_results(capsys):
    a = run(capsys, "verify", "combinatorics", "--format", "structured")[1]
    b = run(capsys, "verify", "combinatorics", "--format", "structured", "--jobs", "3")[1]
    assert a == b


def test_unknown_suite_exit_2(capsys):
    code, _, err = run(capsys, "verify", "nonsense")
    assert code == 2 and "UNKNOWN_SUITE" in err


def test_bounds_requires_model(capsys):
    code, _, err = run(capsys, "bounds", "large-mass")
    assert code == 2 and "CONFIG_ERROR" in err


def test_bounds_odd_n_exit_2(capsys, large_mass_file):
    code, _, err = run(capsys, "bounds", "large-mass", "--model", large_mass_file, "--n", "3")
    assert code == 2 and "INVALID_N" in err


def test_bounds_large_mass_certified(capsys, large_mass_file):
    code, out, _ = run(capsys, "bounds", "large-mass", "--model", large_mass_file, "--n", "4",
                       "--format", "structured")
    doc = json.loads(out)
    assert code == 0
    assert all(c["status"] == "PASS" for c in doc["checks"])


def test_bounds_not_certified_is_not_failure(capsys, tmp_path):
    path = tmp_path / "m.json"
    dump_model(Model.nearest_neighbor(1, 2.0, 0.5, 1.0), path)
    code, out, _ = run(capsys, "bounds", "large-lambda", "--model", str(path))
    assert code == 0 and "NOT_CERTIFIED" in out


def test_bounds_small_lambda_ledger(capsys, tmp_path):
    path = tmp_path / "m.json"
    dump_model(Model.nearest_neighbor(1, 1.0, 0.5 * 2.0611536224385579e-09, 1e-53), path)
    code, out, _ = run(capsys, "bounds", "small-lambda", "--model", str(path), "--n", "4",
                       "--format", "structured")
    doc = json.loads(out)
    assert code == 0 and "ledger" in doc
    assert doc["checks"][0]["status"] == "PASS"


def test_invalid_model_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dimension": 1, "couplings": [[[0], [1.0, 0.0]], [[1], [2.0, 0.0]]],
                                "lambda": 1.0}))
    code, _, err = run(capsys, "bounds", "large-mass", "--model", str(path))
    assert code == 2


def test_missing_model_file(capsys, tmp_path):
    code, _, err = run(capsys, "bounds", "large-mass", "--model", str(tmp_path / "absent.json"))
    assert code == 2


def test_oracle_command(capsys, large_mass_file):
    code, out, _ = run(capsys, "oracle", "--model", large_mass_file, "--volume", "2", "--n", "2",
                       "--format", "structured")
    doc = json.loads(out)
    assert code == 0
    by_id = {c["id"]: c for c in doc["checks"]}
    assert by_id["bound.large_mass"]["status"] == "PASS"


def test_failed_check_exit_1(capsys, monkeypatch):
    monkeypatch.setitem(cli.SUITES, "bkar", lambda ctx: [("x", lambda: [cli.Check("x.fail", cli.FAIL)])])
    code, out, _ = run(capsys, "verify", "bkar")
    assert code == 1 and "FAIL=1" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "clusterbounds", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
