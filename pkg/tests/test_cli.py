"""Command-line front-end: modes, output formats, and exit codes."""

import json
from importlib import resources

import pytest

from regbel import cli

DISCRETE = str(resources.files("regbel").joinpath("theories", "wall_discrete.bel"))
CONTINUOUS = str(resources.files("regbel").joinpath("theories", "wall_continuous.bel"))


def run(*argv):
    return cli.main(list(argv))


def test_belief_query_text_output(capsys):
    code = run("--theory", DISCRETE, "--query", "h <= 5", "--after", "sonar(5)")
    out = capsys.readouterr().out
    assert code == cli.EXIT_OK
    assert "2/3" in out
    assert "0.666667" in out


def test_prior_only_query(capsys):
    code = run("--theory", DISCRETE, "--query", "h <= 5", "--after", "")
    assert code == cli.EXIT_OK
    assert "2/5" in capsys.readouterr().out


def test_continuous_belief_query(capsys):
    code = run("--theory", CONTINUOUS, "--query", "h = 4",
               "--after", "fwd(4); fwd(-4)")
    out = capsys.readouterr().out
    assert code == cli.EXIT_OK
    assert "value: 0.2" in out


def test_show_regression_renders_steps(capsys):
    code = run("--theory", CONTINUOUS, "--query", "h <= 5",
               "--after", "fwd(-2); sonar(8)", "--show-regression")
    out = capsys.readouterr().out
    assert code == cli.EXIT_OK
    assert "derivation:" in out
    assert "(i)" in out
    assert "x_h <= 3" in out


def test_json_report_round_trips(tmp_path):
    out = tmp_path / "report.json"
    code = run("--theory", DISCRETE, "--query", "h <= 5", "--after", "sonar(5)",
               "--json", "--oracle", "2000", "--seed", "7", "--out", str(out))
    assert code == cli.EXIT_OK
    report = json.loads(out.read_text())
    assert report["query"] == "h <= 5"
    assert report["value"]["exact"] == "2/3"
    assert abs(report["value"]["float"] - 2 / 3) < 1e-12
    assert report["gamma"]["exact"] == "1/10"
    assert report["regressed"]["trace"]["steps"]
    assert report["oracle"]["n"] == 2000 and report["oracle"]["seed"] == 7


def test_identical_invocations_are_bit_identical(capsys):
    args = ("--theory", CONTINUOUS, "--query", "4 <= h <= 6",
            "--after", "sonar(5)", "--json", "--oracle", "5000", "--seed", "3")
    run(*args)
    first = capsys.readouterr().out
    run(*args)
    second = capsys.readouterr().out
    assert first == second


def test_projection_mode(capsys):
    code = run("--theory", DISCRETE, "--query", "h <= 5", "--after", "fwd(2)",
               "--mode", "projection")
    out = capsys.readouterr().out
    assert code == cli.EXIT_OK
    assert "regressed:" in out
    assert "h" in out.split("regressed:")[1]


def test_density_mode_single_prefix(tmp_path):
    out = tmp_path / "prior.csv"
    code = run("--theory", CONTINUOUS, "--mode", "density", "--fluent", "h",
               "--grid", "2:12:11", "--out", str(out))
    assert code == cli.EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "value,density"
    assert len(lines) == 12
    assert all(abs(float(line.split(",")[1]) - 0.1) <= 1e-9 for line in lines[1:])


def test_density_mode_single_point_grid(capsys):
    code = run("--theory", CONTINUOUS, "--mode", "density", "--fluent", "h",
               "--grid", "7:7:1")
    out = capsys.readouterr().out
    assert code == cli.EXIT_OK
    assert out.strip().splitlines() == ["value,density", "7.0,0.1"]


def test_density_mode_multiple_prefixes(tmp_path):
    out = tmp_path / "fig.csv"
    code = run("--theory", CONTINUOUS, "--mode", "density", "--fluent", "h",
               "--grid", "2:12:21", "--prefixes", "|sonar(5)|sonar(5); sonar(5)",
               "--out", str(out))
    assert code == cli.EXIT_OK
    for i in range(3):
        path = tmp_path / f"fig_{i}.csv"
        assert path.exists()
        assert len(path.read_text().strip().splitlines()) == 22


def test_exit_invalid_on_missing_theory(capsys):
    code = run("--theory", "/nonexistent/theory.bel", "--query", "true")
    assert code == cli.EXIT_INVALID
    assert "error:" in capsys.readouterr().err


def test_exit_invalid_on_bad_query(capsys):
    code = run("--theory", DISCRETE, "--query", "h <=")
    assert code == cli.EXIT_INVALID


def test_exit_invalid_on_undeclared_action(capsys):
    code = run("--theory", DISCRETE, "--query", "h <= 5", "--after", "jump(3)")
    assert code == cli.EXIT_INVALID


def test_exit_invalid_on_bad_grid(capsys):
    code = run("--theory", CONTINUOUS, "--mode", "density", "--fluent", "h",
               "--grid", "oops")
    assert code == cli.EXIT_INVALID


def test_exit_undefined_on_zero_gamma(capsys):
    code = run("--theory", DISCRETE, "--query", "h <= 5", "--after", "sonar(20)")
    assert code == cli.EXIT_UNDEFINED
    assert "error:" in capsys.readouterr().err


def test_exit_invalid_on_invalid_theory(tmp_path, capsys):
    bad = tmp_path / "bad.bel"
    bad.write_text("fluent h : int in [0, 5]\nprior { 0 - 1 }\n")
    code = run("--theory", str(bad), "--query", "true")
    assert code == cli.EXIT_INVALID
    assert "negative" in capsys.readouterr().err
