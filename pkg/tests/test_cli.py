import json
import subprocess
import sys

import pytest

from heavenly.abstract_eds import corpus_text
from heavenly.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, run
from heavenly.report import JSON_FIELDS


def run_json(capsys, *argv):
    code = run(["--format", "json", *argv])
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["verify"],
    ["verify", "nonsense"],
    ["verify", "compatibility", "--no-such-flag"],
    ["verify", "theorem", "--branch", "3"],
    ["solve", "--equation", "xi1"],
    ["--jet-order", "0", "verify", "compatibility"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_missing_parse_file_is_a_usage_error(tmp_path, capsys):
    assert run(["parse", str(tmp_path / "absent.eds")]) == EXIT_USAGE


def test_compatibility_passes_at_cov_order_3(capsys):
    code, reports = run_json(capsys, "verify", "compatibility", "--jet-order", "6", "--cov-order", "3")
    assert code == EXIT_OK
    ids = [r["check_id"] for r in reports]
    assert "covering.compatibility" in ids
    assert "covering.compatibility.cofactors" in ids
    assert all(r["status"] == "PASS" for r in reports)


def test_json_schema(capsys):
    _, reports = run_json(capsys, "verify", "theorem", "--branch", "1", "--cov-order", "3")
    assert reports
    for r in reports:
        assert tuple(r) == JSON_FIELDS
        assert isinstance(r["elapsed_ms"], int)
        assert r["config"]["jet_order"] == 6 and r["config"]["cov_order"] == 3
        if r["status"] == "PASS":
            assert r["residual"] == ""


def test_theorem_branch_passes(capsys):
    code, reports = run_json(capsys, "verify", "theorem", "--branch", "1", "--cov-order", "3")
    assert code == EXIT_OK
    assert [r["status"] for r in reports] == ["PASS"]


def test_flags_accepted_after_the_subcommand(capsys):
    code = run(["verify", "compatibility", "--cov-order", "3", "--format", "json"])
    assert code == EXIT_OK
    json.loads(capsys.readouterr().out)


def test_appendix_determined_set(capsys):
    code, reports = run_json(capsys, "verify", "appendix", "--set", "determined")
    assert len(reports) == 24
    statuses = {r["status"] for r in reports}
    assert statuses <= {"PASS", "FAIL", "INFO"}
    # the printed corpus is not fully d^2-consistent
    assert code == (EXIT_FAIL if "FAIL" in statuses else EXIT_OK)
    by_id = {r["check_id"]: r for r in reports}
    assert by_id["appendix.d2.xi1"]["status"] == "PASS"
    assert by_id["appendix.d2.theta0"]["status"] == "FAIL"
    assert by_id["appendix.d2.theta0"]["residual"]


def test_reports_are_sorted(capsys):
    _, reports = run_json(capsys, "verify", "appendix", "--set", "partial")
    ids = [r["check_id"] for r in reports]
    assert ids == sorted(ids)


def test_parse_bundled_corpus(tmp_path, capsys):
    f = tmp_path / "corpus.eds"
    f.write_text(corpus_text())
    code, reports = run_json(capsys, "parse", str(f))
    assert code == EXIT_OK
    assert reports[0]["config"]["rules"] == 40
    assert reports[0]["config"]["unknown"] == 20


def test_parse_reports_position_of_a_bad_file(tmp_path, capsys):
    f = tmp_path / "bad.eds"
    f.write_text("gen a b\nd a = b ^ c\n")
    code = run(["parse", str(f)])
    out = capsys.readouterr().out
    assert code == EXIT_FAIL
    assert "line 2" in out and "'c'" in out


def test_alternate_corpus_is_used(tmp_path, capsys):
    f = tmp_path / "so3.eds"
    f.write_text("gen e1 e2 e3\nd e1 = e2 ^ e3\nd e2 = e3 ^ e1\nd e3 = e1 ^ e2\n")
    code, reports = run_json(capsys, "--corpus", str(f), "verify", "appendix")
    assert code == EXIT_OK
    assert [r["check_id"] for r in reports] == ["appendix.d2.e1", "appendix.d2.e2", "appendix.d2.e3"]


def test_solve_xi1(capsys):
    code, reports = run_json(capsys, "solve", "--equation", "xi1", "--unknowns", "eta2", "--modulo", "xi4")
    assert code == EXIT_OK
    assert [r["status"] for r in reports] == ["PASS", "INFO"]
    assert reports[1]["residual"]


def test_solve_rejects_unlisted_terms(capsys):
    assert run(["solve", "--equation", "xi2", "--unknowns", "eta6", "--modulo", "xi1"]) == EXIT_USAGE


def test_console_script_and_module_entry_points():
    for cmd in (["heavenly"], [sys.executable, "-m", "heavenly"]):
        p = subprocess.run(cmd + ["verify", "theorem", "--branch", "2", "--cov-order", "3"],
                           capture_output=True, text=True, timeout=300)
        assert p.returncode == 0, p.stderr
        assert p.stdout.startswith("PASS theorem.branch2")
