"""Command-line verbs, exit codes, and artifact round-trips."""

import csv
import json

import pytest

from roeguidance.cli import (
    CONTROLS_HEADER,
    DISTANCES_HEADER,
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_UNCERTIFIED,
    EXIT_USAGE,
    TRAJECTORY_HEADER,
    main,
)
from roeguidance.program import parse_program
from roeguidance.scenarios import coplanar_to_pco_scenario, save_scenario


@pytest.fixture(scope="module")
def r3_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("r3") / "run"
    code = main(["solve", "--scenario", "reconfig-3", "--out", str(out)])
    assert code == EXIT_OK
    return out


def test_solve_writes_artifacts(r3_run, capsys):
    for name in ("trajectory.csv", "controls.csv", "distances.csv", "summary.json"):
        assert (r3_run / name).exists()
    summary = json.loads((r3_run / "summary.json").read_text())
    assert summary["scenario"] == "reconfig-3"
    assert summary["kind"] == "lp-scaled"
    assert summary["certified_collision_free"] is True
    assert summary["exit_code"] == 0
    assert summary["dv_total_mps"] == pytest.approx(1.345283, abs=1e-4)
    assert summary["grid"]["n_burns"] == 13
    # certified at the zeroth (keep-out-free) iterate, so the reported
    # size is the program actually solved: no collision rows
    assert summary["scp_iterations"] == 0
    assert summary["n_variables"] == 1012
    assert summary["n_constraints"] == 1664
    assert all(v["pass"] for v in summary["validation"].values())
    with (r3_run / "trajectory.csv").open(newline="") as fh:
        header = next(csv.reader(fh))
    assert tuple(header) == TRAJECTORY_HEADER
    with (r3_run / "controls.csv").open(newline="") as fh:
        header = next(csv.reader(fh))
    assert tuple(header) == CONTROLS_HEADER
    with (r3_run / "distances.csv").open(newline="") as fh:
        header = next(csv.reader(fh))
    assert tuple(header) == DISTANCES_HEADER


def test_solve_artifacts_are_deterministic(r3_run, tmp_path):
    again = tmp_path / "again"
    assert main(["solve", "--scenario", "reconfig-3", "--out", str(again)]) == EXIT_OK
    for name in ("trajectory.csv", "controls.csv", "distances.csv"):
        assert (again / name).read_bytes() == (r3_run / name).read_bytes()


def test_check_passes_on_honest_artifacts(r3_run, capsys):
    code = main(
        ["check", "--scenario", "reconfig-3", "--run-dir", str(r3_run), "--dense", "3"]
    )
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "verdict: PASS" in out
    assert "advisory" in out


def test_check_flags_tampered_controls(r3_run, tmp_path, capsys):
    tampered = tmp_path / "tampered"
    tampered.mkdir()
    for name in ("trajectory.csv", "controls.csv", "distances.csv", "summary.json"):
        (tampered / name).write_bytes((r3_run / name).read_bytes())
    with (tampered / "controls.csv").open(newline="") as fh:
        rows = list(csv.reader(fh))
    for row in rows[1:]:
        if float(row[5]) > 0.0:  # first thrusting arc
            for col in (2, 3, 4, 5):
                row[col] = repr(3.0 * float(row[col]))
            break
    with (tampered / "controls.csv").open("w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    code = main(["check", "--scenario", "reconfig-3", "--run-dir", str(tampered)])
    out = capsys.readouterr().out
    assert code == EXIT_UNCERTIFIED
    assert "verdict: FAIL" in out


def test_solve_infeasible_exit_code(tmp_path, capsys):
    # two orbits are not enough horizon under the thrust cap
    short = coplanar_to_pco_scenario(2, duration_orbits=2.0)
    path = tmp_path / "short.yaml"
    save_scenario(short, path)
    out = tmp_path / "run"
    code = main(["solve", "--scenario", str(path), "--out", str(out)])
    assert code == EXIT_INFEASIBLE
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "infeasible"
    assert summary["exit_code"] == EXIT_INFEASIBLE
    assert not (out / "trajectory.csv").exists()


def test_export_roundtrip_and_collision_reference(tmp_path):
    free = tmp_path / "free.prog"
    linz = tmp_path / "lin.prog"
    assert (
        main(
            ["export", "--scenario", "reconfig-3", "--kind", "socp", "--out", str(free)]
        )
        == EXIT_OK
    )
    assert (
        main(
            [
                "export",
                "--scenario",
                "reconfig-3",
                "--kind",
                "socp",
                "--collision-reference",
                "uncontrolled",
                "--out",
                str(linz),
            ]
        )
        == EXIT_OK
    )
    prog_free = parse_program(free.read_text())
    prog_lin = parse_program(linz.read_text())
    assert prog_free.kind.value == "socp"
    assert prog_free.n_variables == prog_lin.n_variables
    # 4 deputies: 6 deputy pairs plus 4 chief rows, at 27 epochs
    assert prog_lin.a_ub.shape[0] - prog_free.a_ub.shape[0] == 10 * 27


def test_export_facet_override(tmp_path):
    base = tmp_path / "base.prog"
    wide = tmp_path / "wide.prog"
    assert (
        main(["export", "--scenario", "reconfig-3", "--kind", "lp", "--out", str(base)])
        == EXIT_OK
    )
    assert (
        main(
            [
                "export",
                "--scenario",
                "reconfig-3",
                "--kind",
                "lp",
                "--ndir",
                "24",
                "--out",
                str(wide),
            ]
        )
        == EXIT_OK
    )
    rows_base = parse_program(base.read_text()).a_ub.shape[0]
    rows_wide = parse_program(wide.read_text()).a_ub.shape[0]
    # 12 extra facets per burn per deputy
    assert rows_wide - rows_base == 12 * 4 * 13


def test_grid_verb(capsys):
    assert main(["grid", "--scenario", "case-study"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "case-study: 22 burns, 44 arcs, 45 epochs" in out
    assert "forced" in out
    assert "natural" in out


def test_bench_verb(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    code = main(
        [
            "bench",
            "--scenario",
            "reconfig-3",
            "--kind",
            "lp-scaled",
            "--backend",
            "ipm",
            "--out",
            str(out),
        ]
    )
    assert code == EXIT_OK
    with out.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    row = rows[0]
    assert row["scenario"] == "reconfig-3"
    assert row["status"] == "optimal"
    assert int(row["n_variables"]) == 1012
    assert int(row["n_constraints"]) == 1664
    assert float(row["dv_total_mps"]) == pytest.approx(1.345283, abs=1e-4)


def test_sweep_verb(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = main(["sweep-n", "--n-min", "1", "--n-max", "2", "--out", str(out)])
    assert code == EXIT_OK
    with out.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["n_deputies"]) for r in rows] == [1, 2]
    for row in rows:
        assert row["status"] == "optimal"
        assert float(row["mean_solve_time_s"]) > 0.0
        assert float(row["dv_total_mps"]) > 0.0


def test_sweep_rejects_bad_range(capsys):
    assert main(["sweep-n", "--n-min", "0", "--n-max", "2"]) == EXIT_USAGE


def test_unknown_scenario_is_usage_error(capsys):
    assert main(["solve", "--scenario", "not-a-scenario"]) == EXIT_USAGE
    assert "neither a bundled scenario" in capsys.readouterr().err


def test_missing_scenario_file_is_usage_error(tmp_path, capsys):
    missing = tmp_path / "missing.yaml"
    assert main(["solve", "--scenario", str(missing)]) == EXIT_USAGE
