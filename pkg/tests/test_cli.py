"""Command line front end: worked examples, exit codes, verify and config output"""

import io
import json

import pytest

import main_interface
from calc_config import CalcConfig
from main_interface import (
    EXIT_EVALUATION_ERROR, EXIT_OK, EXIT_SCRIPT_ERROR, EXIT_VERIFICATION_FAILED,
    TorsionCalculator, main,
)
from verify import CHECKS, CheckReport

WORKED_EXAMPLES = ["spheres", "hatcher", "disks_and_handles", "parity", "morse_and_uniqueness"]


@pytest.mark.parametrize("name", WORKED_EXAMPLES)
def test_worked_examples_match_golden_output(worked_examples, capsys, name):
    code = main(["run", str(worked_examples / f"{name}.tors")])
    assert code == EXIT_OK
    assert capsys.readouterr().out == (worked_examples / f"{name}.out").read_text()


def test_eval_prints_one_line_per_query(capsys):
    code = main(["eval", "-e", "root x; theory F = fr(1); query tau(F, sphere(line(x), n=1))"])
    assert code == EXIT_OK
    assert capsys.readouterr().out == "1/2*z3*x^2\n"


def test_script_errors_exit_with_one(capsys, tmp_path):
    assert main(["eval", "-e", "query tau(fr(1), E)"]) == EXIT_SCRIPT_ERROR
    assert "SemanticError" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.tors")]) == EXIT_SCRIPT_ERROR
    assert main([]) == EXIT_SCRIPT_ERROR


def test_evaluation_errors_exit_with_two(capsys):
    code = main(["eval", "-e", "query decompose(custom(1, z5, 1))"])
    assert code == EXIT_EVALUATION_ERROR
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "decompose" in captured.err


def test_verify_records(capsys):
    code = main(["verify", "--samples", "5", "--depth", "2", "--theories", "1", "--records"])
    assert code == EXIT_OK
    records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert len(records) == len(CHECKS)
    assert all(record["status"] == "pass" for record in records)


def test_verify_failure_exits_with_three(monkeypatch):
    failing = CheckReport("additivity_axiom", "tau(E1 u E2) = tau(E1) + tau(E2) - tau(dE)", 3, "fail",
                          "fr(1)", "query tau(fr(1), E)", "x^2", "0")
    monkeypatch.setattr(main_interface, "run_suite", lambda *args, **kwargs: [failing])
    out = io.StringIO()
    calculator = TorsionCalculator(CalcConfig(), out=out, err=io.StringIO())
    assert calculator.run_command("verify", {"samples": 3}) == EXIT_VERIFICATION_FAILED
    text = out.getvalue()
    assert text.startswith("FAIL additivity_axiom (3 samples)")
    assert "    lhs: x^2" in text
    assert "0/1 checks passed" in text


def test_config_shows_effective_values(capsys, monkeypatch):
    monkeypatch.setenv("TORSCALC_SAMPLES", "50")
    assert main(["config"]) == EXIT_OK
    shown = json.loads(capsys.readouterr().out)
    assert shown["samples"] == 50
    assert shown["k"] == [1]


def test_invalid_config_is_reported(capsys, monkeypatch):
    monkeypatch.setenv("TORSCALC_DEPTH", "0")
    assert main(["config"]) == EXIT_SCRIPT_ERROR
    assert "depth" in capsys.readouterr().err


def test_unknown_command():
    err = io.StringIO()
    calculator = TorsionCalculator(CalcConfig(), out=io.StringIO(), err=err)
    assert calculator.run_command("plot") == EXIT_SCRIPT_ERROR
    assert "plot" in err.getvalue()


@pytest.mark.parametrize("flags", [["--depth", "0"], ["--k", "0"], ["--samples", "0"], ["--theories", "-1"]])
def test_verify_rejects_bad_options(capsys, flags):
    assert main(["verify", *flags]) == EXIT_SCRIPT_ERROR
    assert "Invalid value for --" in capsys.readouterr().err


def test_verify_rejects_bad_configured_defaults(capsys, monkeypatch):
    monkeypatch.setenv("TORSCALC_DEPTH", "0")
    assert main(["verify", "--samples", "1"]) == EXIT_SCRIPT_ERROR
    assert "--depth" in capsys.readouterr().err
