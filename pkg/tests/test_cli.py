import csv
import importlib.util
import json
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent


def _load_cli():
    spec = importlib.util.spec_from_file_location("drep_cli", ROOT / "tools" / "drep_cli.py")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


cli = _load_cli()


def _run(*argv: str) -> int:
    return cli.run(["--threads", "1", *argv])


def test_check_passes_on_a_valid_file(example_path, capsys: pytest.CaptureFixture) -> None:
    assert _run("check", str(example_path("ex2d.drep"))) == cli.EXIT_OK
    assert "PASS" in capsys.readouterr().out


def test_check_fails_when_d_squared_is_nonzero(example_path) -> None:
    assert _run("check", str(example_path("bad_dsquared.drep"))) == cli.EXIT_FAILED


def test_missing_file_is_an_input_error(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    code = _run("homology", str(tmp_path / "missing.drep"), "--dim", "1")
    assert code == cli.EXIT_INPUT_ERROR
    assert "Error" in capsys.readouterr().err


def test_syntax_error_is_an_input_error(tmp_path: Path) -> None:
    broken = tmp_path / "broken.drep"
    broken.write_text("[algebra]\ngen x deg zero\n", encoding="utf-8")
    assert _run("check", str(broken)) == cli.EXIT_INPUT_ERROR


def test_build_writes_the_golden_presentation(example_path, golden_path, tmp_path: Path) -> None:
    output = tmp_path / "ex2d_d2.drep"
    assert _run("build", str(example_path("ex2d.drep")), "--dim", "2", "--output", str(output)) == cli.EXIT_OK
    assert output.read_text(encoding="utf-8") == golden_path("ex2d_d2.drep").read_text(encoding="utf-8")


def test_json_report(example_path, capsys: pytest.CaptureFixture) -> None:
    assert _run("--json", "cyclic", "k", "--nmax", "4") == cli.EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "cyclic"
    assert report["passed"] is True
    assert report["data"]["dims"] == [1, 0, 1, 0, 1]


def test_json_error_report(capsys: pytest.CaptureFixture) -> None:
    assert _run("--json", "verify", "no-such-target") == cli.EXIT_INPUT_ERROR
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is False
    assert "no-such-target" in report["error"]


def test_homology_csv_rows(example_path, tmp_path: Path) -> None:
    out = tmp_path / "table.csv"
    args = ["homology", str(example_path("kxy.drep")), "--dim", "1", "--nmax", "2", "--wmax", "3", "--csv", str(out)]
    assert _run(*args) == cli.EXIT_OK
    with open(out, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["n", "w", "dim", "valid", "slack"]
    assert len(rows) == 1 + 3 * 4
    assert rows[1 + 3] == ["0", "3", "4", "True", "0"]
    assert rows[1 + 4 + 2] == ["1", "2", "1", "True", "0"]


def test_verify_a_golden_target() -> None:
    assert _run("verify", "ex3d-d1") == cli.EXIT_OK


def test_tangent_and_norm_commands(example_path) -> None:
    rep = str(example_path("kxy_d1.rep"))
    assert _run("tangent", str(example_path("kxy.drep")), "--dim", "1", "--rep", rep) == cli.EXIT_OK
    assert _run("norm", "dual-numbers", "--nmax", "3") == cli.EXIT_OK


def test_zero_denominator_is_an_input_error(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    broken = tmp_path / "zero.drep"
    broken.write_text("[resolution]\ngen x, y deg 0\ngen t deg 1\nd t = 1/0*x*y\n", encoding="utf-8")
    assert _run("check", str(broken)) == cli.EXIT_INPUT_ERROR
    assert "zero denominator" in capsys.readouterr().err
