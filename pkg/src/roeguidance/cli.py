"""Command-line surface for planning and auditing reconfigurations.

Verbs: solve (one scenario end to end, with CSV/JSON artifacts), bench
(formulation-by-scenario table), sweep-n (fleet-size scaling study),
export (standard-form program dump), check (replay audit of a solve
artifact directory), and grid (burn/coast schedule preview).

Exit codes: 0 solved and certified collision-free, 1 bad input, 2
solved without certification, 3 infeasible, 4 backend failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import arc_models, propagate
from .formulation import build_program, report_counts
from .oracle import replay_trajectory
from .polyhedron import compute_scale_factor
from .program import FormulationKind, export_program
from .scenarios import (
    BUNDLED_NAMES,
    Scenario,
    ScenarioFormatError,
    coplanar_to_pco_scenario,
    resolve_scenario,
)
from .scp import (
    InitialGuess,
    ScpBackendError,
    ScpConfig,
    ScpError,
    ScpInfeasibleError,
    ScpTrace,
    initial_reference,
    run_scp,
)
from .solution import GuidanceSolution, compute_dv, rtn_trajectory
from .solver import SolveStatus, SolverOptions, get_backend

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNCERTIFIED = 2
EXIT_INFEASIBLE = 3
EXIT_BACKEND = 4

TRAJECTORY_HEADER = (
    "epoch",
    "time_s",
    "deputy",
    "da_m",
    "dlambda_m",
    "dex_m",
    "dey_m",
    "dix_m",
    "diy_m",
    "rtn_r_m",
    "rtn_t_m",
    "rtn_n_m",
)
CONTROLS_HEADER = (
    "arc",
    "deputy",
    "u_r_mps2",
    "u_t_mps2",
    "u_n_mps2",
    "u_norm_mps2",
    "gamma_mps2",
)
DISTANCES_HEADER = ("epoch", "time_s", "pair", "separation_m")
BENCH_HEADER = (
    "scenario",
    "kind",
    "backend",
    "status",
    "repeats",
    "mean_solve_time_s",
    "dv_total_mps",
    "scp_iterations",
    "n_variables",
    "n_constraints",
)
SWEEP_HEADER = (
    "n_deputies",
    "status",
    "repeats",
    "mean_solve_time_s",
    "dv_total_mps",
    "scp_iterations",
    "n_variables",
    "n_constraints",
)


@dataclass(frozen=True)
class RunConfig:
    """One solve request as parsed from the command line."""

    scenario: str
    kind: FormulationKind
    backend: str
    epsilon: float
    max_iterations: int
    stop_on_collision_free: bool
    n_dir: int | None
    scale_c: float | None
    auto_scale: bool
    out_dir: Path
    time_limit: float
    seed: int | None = None


def _labels(scenario: Scenario) -> list[str]:
    return [
        dep.label or str(i) for i, dep in enumerate(scenario.deputies)
    ]


def _apply_poly_overrides(
    scenario: Scenario,
    n_dir: int | None,
    scale_c: float | None,
    auto_scale: bool,
) -> Scenario:
    """Apply --ndir / --scale-c / --auto-scale to the thrust polyhedron.

    Overriding the facet count without giving an explicit scale factor
    recomputes the factor from the new geometry, since the stored one
    belongs to the stored facet count.
    """
    poly = scenario.poly
    if n_dir is not None and n_dir != poly.n_dir:
        poly = dataclasses.replace(poly, n_dir=n_dir)
        if scale_c is None:
            auto_scale = True
    if auto_scale:
        poly = dataclasses.replace(
            poly, scale_c=compute_scale_factor(poly.n_dir)
        )
    elif scale_c is not None:
        poly = dataclasses.replace(poly, scale_c=scale_c)
    if poly is scenario.poly:
        return scenario
    return dataclasses.replace(scenario, poly=poly)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _total_solve_time(trace: ScpTrace) -> float:
    return float(sum(rec.solve_time for rec in trace.records))


def _reported_counts(
    scenario: Scenario, grid, kind: FormulationKind, scp_iterations: int
) -> tuple[int, int]:
    with_collision = scp_iterations >= 1 and scenario.r_ca > 0
    return report_counts(scenario, grid, kind, with_collision=with_collision)


def _write_trajectory_csv(
    path: Path, scenario: Scenario, grid, solution: GuidanceSolution
) -> None:
    labels = _labels(scenario)
    pos = rtn_trajectory(solution.states, scenario.chief, grid)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_HEADER)
        for i, label in enumerate(labels):
            for k in range(grid.n_epochs):
                writer.writerow(
                    [k, float(grid.epochs[k]), label]
                    + [float(v) for v in solution.states[i, k]]
                    + [float(v) for v in pos[i, k]]
                )


def _write_controls_csv(
    path: Path, scenario: Scenario, grid, solution: GuidanceSolution
) -> None:
    labels = _labels(scenario)
    u_phys = solution.physical_controls(scenario.chief)
    burn_of_arc = {k: b for b, k in enumerate(grid.forced_indices)}
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CONTROLS_HEADER)
        for i, label in enumerate(labels):
            for k in range(grid.n_intervals):
                u = u_phys[i, k]
                gamma = ""
                if solution.gammas is not None and k in burn_of_arc:
                    gamma = float(
                        solution.gammas[i, burn_of_arc[k]] / scenario.chief.a
                    )
                writer.writerow(
                    [k, label]
                    + [float(v) for v in u]
                    + [float(np.linalg.norm(u)), gamma]
                )


def _write_distances_csv(
    path: Path, scenario: Scenario, grid, solution: GuidanceSolution
) -> None:
    labels = _labels(scenario)
    pos = rtn_trajectory(solution.states, scenario.chief, grid)
    times = [float(t) for t in grid.epochs]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DISTANCES_HEADER)
        for i, label in enumerate(labels):
            dists = np.linalg.norm(pos[i], axis=1)
            for k, t in enumerate(times):
                writer.writerow([k, t, f"chief-{label}", float(dists[k])])
        for i in range(len(labels)):
            for j in range(i + 1, len(labels)):
                dists = np.linalg.norm(pos[i] - pos[j], axis=1)
                pair = f"{labels[i]}-{labels[j]}"
                for k, t in enumerate(times):
                    writer.writerow([k, t, pair, float(dists[k])])


def _summary_payload(
    run: RunConfig,
    scenario: Scenario,
    grid,
    solution: GuidanceSolution,
    trace: ScpTrace,
    exit_code: int,
) -> dict:
    labels = _labels(scenario)
    n_var, n_con = _reported_counts(
        scenario, grid, solution.kind, solution.scp_iterations
    )
    report = replay_trajectory(solution, scenario, grid)
    validation = {
        name: {
            "pass": ok,
            "measured": _json_safe(measured),
            "threshold": _json_safe(threshold),
        }
        for name, (ok, measured, threshold) in report.families().items()
    }
    return {
        "scenario": scenario.name,
        "kind": solution.kind.value,
        "backend": run.backend,
        "status": solution.solver_status.value,
        "certified_collision_free": solution.certified_collision_free,
        "scp_iterations": solution.scp_iterations,
        "terminated_by": trace.terminated_by,
        "objective": _json_safe(solution.objective),
        "dv_total_mps": solution.dv_total,
        "dv_per_deputy_mps": {
            label: float(dv)
            for label, dv in zip(labels, solution.dv_per_deputy)
        },
        "solve_time_s": _total_solve_time(trace),
        "n_variables": n_var,
        "n_constraints": n_con,
        "grid": {
            "n_burns": grid.n_burns,
            "n_intervals": grid.n_intervals,
            "n_epochs": grid.n_epochs,
            "duration_s": grid.total_duration,
        },
        "trace": [
            {
                "iteration": rec.index,
                "objective": _json_safe(rec.objective),
                "dv_total_mps": _json_safe(rec.dv_total),
                "max_displacement_m": _json_safe(rec.max_displacement),
                "collision_free": rec.collision_free,
                "solve_time_s": rec.solve_time,
                "status": rec.status.value if rec.status else None,
            }
            for rec in trace.records
        ],
        "validation": validation,
        "seed": run.seed,
        "exit_code": exit_code,
    }


def _write_failure(
    out_dir: Path, run: RunConfig, scenario_name: str, status: str, message: str, code: int
) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "scenario": scenario_name,
        "kind": run.kind.value,
        "backend": run.backend,
        "status": status,
        "error": message,
        "exit_code": code,
    }
    (out_dir / "summary.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(json.dumps(payload))
    return code


def cmd_solve(run: RunConfig) -> int:
    scenario = resolve_scenario(run.scenario)
    scenario = _apply_poly_overrides(
        scenario, run.n_dir, run.scale_c, run.auto_scale
    )
    grid = scenario.build_grid()
    backend = get_backend(run.backend)
    options = SolverOptions(time_limit=run.time_limit)
    config = ScpConfig(
        epsilon=run.epsilon,
        max_iterations=run.max_iterations,
        stop_on_collision_free=run.stop_on_collision_free,
    )
    try:
        solution, trace = run_scp(
            scenario, grid, run.kind, config, backend=backend, options=options
        )
    except ScpInfeasibleError as exc:
        return _write_failure(
            run.out_dir, run, scenario.name, "infeasible", str(exc), EXIT_INFEASIBLE
        )
    except ScpBackendError as exc:
        return _write_failure(
            run.out_dir, run, scenario.name, "backend-error", str(exc), EXIT_BACKEND
        )

    exit_code = (
        EXIT_OK if solution.certified_collision_free else EXIT_UNCERTIFIED
    )
    run.out_dir.mkdir(parents=True, exist_ok=True)
    _write_trajectory_csv(run.out_dir / "trajectory.csv", scenario, grid, solution)
    _write_controls_csv(run.out_dir / "controls.csv", scenario, grid, solution)
    _write_distances_csv(run.out_dir / "distances.csv", scenario, grid, solution)
    payload = _summary_payload(run, scenario, grid, solution, trace, exit_code)
    (run.out_dir / "summary.json").write_text(
        json.dumps(payload, indent=2) + "\n"
    )
    certified = "certified" if solution.certified_collision_free else "UNCERTIFIED"
    print(
        f"{scenario.name} {run.kind.value}: dv_total={solution.dv_total:.4f} m/s "
        f"({certified} collision-free, {solution.scp_iterations} SCP iterations, "
        f"{payload['solve_time_s']:.2f} s solver time) -> {run.out_dir}"
    )
    return exit_code


def _bench_cell(
    scenario: Scenario,
    kind: FormulationKind,
    backend_name: str,
    repeats: int,
    config: ScpConfig,
    options: SolverOptions,
) -> dict:
    grid = scenario.build_grid()
    backend = get_backend(backend_name)
    times = []
    solution = None
    status = "optimal"
    try:
        for _ in range(repeats):
            solution, trace = run_scp(
                scenario, grid, kind, config, backend=backend, options=options
            )
            times.append(_total_solve_time(trace))
    except ScpInfeasibleError:
        status = "infeasible"
    except (ScpBackendError, ScpError):
        status = "backend-error"
    if solution is None:
        n_var, n_con = report_counts(scenario, grid, kind, with_collision=True)
        return {
            "scenario": scenario.name,
            "kind": kind.value,
            "backend": backend_name,
            "status": status,
            "repeats": repeats,
            "mean_solve_time_s": "",
            "dv_total_mps": "",
            "scp_iterations": "",
            "n_variables": n_var,
            "n_constraints": n_con,
        }
    n_var, n_con = _reported_counts(
        scenario, grid, kind, solution.scp_iterations
    )
    return {
        "scenario": scenario.name,
        "kind": kind.value,
        "backend": backend_name,
        "status": solution.solver_status.value,
        "repeats": repeats,
        "mean_solve_time_s": statistics.mean(times),
        "dv_total_mps": solution.dv_total,
        "scp_iterations": solution.scp_iterations,
        "n_variables": n_var,
        "n_constraints": n_con,
    }


def cmd_bench(args: argparse.Namespace) -> int:
    config = ScpConfig(
        epsilon=args.eps,
        max_iterations=args.max_iter,
        stop_on_collision_free=args.stop_on_collision_free,
    )
    options = SolverOptions(time_limit=args.time_limit)
    rows = []
    for ref in args.scenario:
        scenario = resolve_scenario(ref)
        for kind_name in args.kind:
            kind = FormulationKind(kind_name)
            for backend_name in args.backend:
                cell = _bench_cell(
                    scenario, kind, backend_name, args.repeats, config, options
                )
                rows.append(cell)
                print(
                    f"{cell['scenario']:12s} {cell['kind']:10s} "
                    f"{cell['backend']:8s} {cell['status']:13s} "
                    f"dv={cell['dv_total_mps'] if cell['dv_total_mps'] != '' else 'n/a'}"
                )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_HEADER)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_sweep_n(args: argparse.Namespace) -> int:
    if not 1 <= args.n_min <= args.n_max <= 20:
        print("sweep range must satisfy 1 <= n-min <= n-max <= 20", file=sys.stderr)
        return EXIT_USAGE
    config = ScpConfig(
        epsilon=args.eps,
        max_iterations=args.max_iter,
        stop_on_collision_free=args.stop_on_collision_free,
    )
    options = SolverOptions(time_limit=args.time_limit)
    kind = FormulationKind(args.kind)
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        scenario = coplanar_to_pco_scenario(
            n,
            spacing=args.spacing,
            pco_radius=args.pco_radius,
            duration_orbits=args.duration_orbits,
        )
        cell = _bench_cell(
            scenario, kind, args.backend, args.repeats, config, options
        )
        rows.append(
            {
                "n_deputies": n,
                "status": cell["status"],
                "repeats": cell["repeats"],
                "mean_solve_time_s": cell["mean_solve_time_s"],
                "dv_total_mps": cell["dv_total_mps"],
                "scp_iterations": cell["scp_iterations"],
                "n_variables": cell["n_variables"],
                "n_constraints": cell["n_constraints"],
            }
        )
        print(
            f"N={n:2d} status={cell['status']:13s} "
            f"time={cell['mean_solve_time_s']} dv={cell['dv_total_mps']}"
        )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_HEADER)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args.scenario)
    scenario = _apply_poly_overrides(
        scenario, args.ndir, args.scale_c, args.auto_scale
    )
    grid = scenario.build_grid()
    kind = FormulationKind(args.kind)
    arcs = arc_models(scenario.chief, grid)
    if args.collision_reference == "uncontrolled":
        reference, _, _ = initial_reference(
            scenario, grid, InitialGuess.UNCONTROLLED_PROPAGATION, arcs=arcs
        )
        program = build_program(
            scenario, grid, kind, reference=reference, collision=True, arcs=arcs
        )
    else:
        program = build_program(
            scenario, grid, kind, collision=False, arcs=arcs
        )
    out = Path(args.out or f"{scenario.name}-{kind.value}.prog")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(export_program(program))
    print(f"wrote {out}")
    return EXIT_OK


def _read_artifact_arrays(
    run_dir: Path, scenario: Scenario, grid
) -> tuple[np.ndarray, np.ndarray]:
    """States (N, m+2, 6) and physical controls (N, m+1, 3) from CSVs."""
    labels = _labels(scenario)
    index = {label: i for i, label in enumerate(labels)}
    states = np.zeros((len(labels), grid.n_epochs, 6))
    with (run_dir / "trajectory.csv").open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            i = index[row["deputy"]]
            k = int(row["epoch"])
            states[i, k] = [
                float(row[name]) for name in TRAJECTORY_HEADER[3:9]
            ]
    controls = np.zeros((len(labels), grid.n_intervals, 3))
    with (run_dir / "controls.csv").open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            i = index[row["deputy"]]
            k = int(row["arc"])
            controls[i, k] = [
                float(row[name]) for name in CONTROLS_HEADER[2:5]
            ]
    return states, controls


def cmd_check(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args.scenario)
    run_dir = Path(args.run_dir)
    summary = json.loads((run_dir / "summary.json").read_text())
    grid = scenario.build_grid()
    states_csv, u_phys = _read_artifact_arrays(run_dir, scenario, grid)
    controls = u_phys * scenario.chief.a
    arcs = arc_models(scenario.chief, grid)
    states = np.array(
        [
            propagate(dep.y0.as_array(), arcs, controls[i])
            for i, dep in enumerate(scenario.deputies)
        ]
    )
    dv_map = summary.get("dv_per_deputy_mps", {})
    labels = _labels(scenario)
    if dv_map and all(label in dv_map for label in labels):
        dv_per_deputy = np.array([float(dv_map[label]) for label in labels])
    else:
        dv_per_deputy = compute_dv(controls, grid, scenario.chief)
    solution = GuidanceSolution(
        kind=FormulationKind(summary["kind"]),
        states=states,
        controls=controls,
        gammas=None,
        objective=float(summary.get("objective") or math.nan),
        solver_status=SolveStatus(summary.get("status", "optimal")),
        dv_per_deputy=dv_per_deputy,
        dv_total=float(summary.get("dv_total_mps", dv_per_deputy.sum())),
        certified_collision_free=bool(
            summary.get("certified_collision_free", False)
        ),
        scp_iterations=int(summary.get("scp_iterations", 0)),
    )
    report = replay_trajectory(
        solution, scenario, grid, dense_subsamples=args.dense
    )
    csv_gap = float(
        np.max(np.linalg.norm(states - states_csv, axis=2), initial=0.0)
    )
    ok = report.passed and csv_gap <= 1e-6
    print(f"run directory: {run_dir}")
    print(f"trajectory file vs replay: {csv_gap:.3e} m")
    for name, (fam_ok, measured, threshold) in report.families().items():
        verdict = "PASS" if fam_ok else "FAIL"
        print(
            f"  {name:15s} {verdict}  measured={measured:.6e} "
            f"threshold={threshold:.6e}"
        )
    if args.dense:
        print(
            f"  dense minima ({args.dense}/arc): chief "
            f"{report.dense_min_chief:.1f} m, pairs "
            f"{report.dense_min_deputy:.1f} m (advisory)"
        )
    print("verdict:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_UNCERTIFIED


def cmd_grid(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args.scenario)
    grid = scenario.build_grid()
    print(
        f"{scenario.name}: {grid.n_burns} burns, {grid.n_intervals} arcs, "
        f"{grid.n_epochs} epochs, {grid.total_duration:.3f} s total"
    )
    print(f"{'arc':>4s} {'kind':8s} {'t_start_s':>14s} {'duration_s':>14s}")
    for k in range(grid.n_intervals):
        print(
            f"{k:4d} {grid.arc_kind(k).value:8s} {float(grid.epochs[k]):14.3f} "
            f"{grid.dt(k):14.3f}"
        )
    return EXIT_OK


def _add_scp_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--eps",
        type=float,
        default=1.0,
        help="SCP reference-displacement stop tolerance in meters",
    )
    parser.add_argument(
        "--max-iter",
        type=int,
        default=10,
        help="maximum SCP iterations after the seeding solve",
    )
    parser.add_argument(
        "--stop-on-collision-free",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="stop at the first exactly collision-free iterate",
    )
    parser.add_argument(
        "--time-limit",
        type=float,
        default=30.0,
        help="per-subproblem solver time limit in seconds",
    )


def _add_poly_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--ndir",
        type=int,
        default=None,
        help="override the transversal-normal facet count",
    )
    group = parser.add_mutually_exclusive_group()
    group.add_argument(
        "--scale-c",
        type=float,
        default=None,
        help="override the polyhedron scale factor",
    )
    group.add_argument(
        "--auto-scale",
        action="store_true",
        help="recompute the scale factor from the facet geometry",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roeguidance",
        description=(
            "Fuel-optimal, collision-free reconfiguration planning for "
            "satellite formations in relative orbital elements"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="plan one scenario and write artifacts")
    p_solve.add_argument(
        "--scenario",
        required=True,
        help=f"bundled name ({', '.join(BUNDLED_NAMES)}) or a scenario file path",
    )
    p_solve.add_argument(
        "--kind",
        choices=[k.value for k in FormulationKind],
        default=FormulationKind.LP_SCALED.value,
    )
    p_solve.add_argument("--backend", default="ipm")
    _add_scp_flags(p_solve)
    _add_poly_flags(p_solve)
    p_solve.add_argument("--out", default=None, help="artifact directory")
    p_solve.add_argument(
        "--seed",
        type=int,
        default=None,
        help="recorded in the summary for reproducibility bookkeeping",
    )
    p_solve.set_defaults(func=_dispatch_solve)

    p_bench = sub.add_parser(
        "bench", help="formulation-by-scenario benchmark table"
    )
    p_bench.add_argument(
        "--scenario",
        nargs="+",
        default=["reconfig-1", "reconfig-2", "reconfig-3", "reconfig-4"],
    )
    p_bench.add_argument(
        "--kind",
        nargs="+",
        choices=[k.value for k in FormulationKind],
        default=[
            FormulationKind.QCQP.value,
            FormulationKind.SOCP.value,
            FormulationKind.LP.value,
        ],
    )
    p_bench.add_argument("--backend", nargs="+", default=["ipm"])
    p_bench.add_argument("--repeats", type=int, default=1)
    _add_scp_flags(p_bench)
    p_bench.add_argument("--out", default="bench.csv")
    p_bench.set_defaults(func=cmd_bench)

    p_sweep = sub.add_parser(
        "sweep-n", help="solve-time scaling against fleet size"
    )
    p_sweep.add_argument("--n-min", type=int, default=1)
    p_sweep.add_argument("--n-max", type=int, default=12)
    p_sweep.add_argument("--spacing", type=float, default=200.0)
    p_sweep.add_argument("--pco-radius", type=float, default=500.0)
    p_sweep.add_argument("--duration-orbits", type=float, default=10.0)
    p_sweep.add_argument(
        "--kind",
        choices=[k.value for k in FormulationKind],
        default=FormulationKind.LP_SCALED.value,
    )
    p_sweep.add_argument("--backend", default="ipm")
    p_sweep.add_argument("--repeats", type=int, default=1)
    _add_scp_flags(p_sweep)
    p_sweep.add_argument("--out", default="sweep.csv")
    p_sweep.set_defaults(func=cmd_sweep_n)

    p_export = sub.add_parser(
        "export", help="write the standard-form program dump"
    )
    p_export.add_argument("--scenario", required=True)
    p_export.add_argument(
        "--kind",
        choices=[k.value for k in FormulationKind],
        default=FormulationKind.LP_SCALED.value,
    )
    _add_poly_flags(p_export)
    p_export.add_argument(
        "--collision-reference",
        choices=["none", "uncontrolled"],
        default="none",
        help=(
            "none drops collision rows; uncontrolled linearizes them "
            "about the coasting trajectory"
        ),
    )
    p_export.add_argument("--out", default=None)
    p_export.set_defaults(func=cmd_export)

    p_check = sub.add_parser(
        "check", help="replay-audit a solve artifact directory"
    )
    p_check.add_argument("--scenario", required=True)
    p_check.add_argument("--run-dir", required=True)
    p_check.add_argument(
        "--dense",
        type=int,
        default=0,
        help="advisory clearance subsamples per arc (0 disables)",
    )
    p_check.set_defaults(func=cmd_check)

    p_grid = sub.add_parser("grid", help="print the burn/coast schedule")
    p_grid.add_argument("--scenario", required=True)
    p_grid.set_defaults(func=cmd_grid)

    return parser


def _dispatch_solve(args: argparse.Namespace) -> int:
    kind = FormulationKind(args.kind)
    out_dir = Path(
        args.out
        if args.out is not None
        else f"run-{Path(args.scenario).stem}-{kind.value}"
    )
    run = RunConfig(
        scenario=args.scenario,
        kind=kind,
        backend=args.backend,
        epsilon=args.eps,
        max_iterations=args.max_iter,
        stop_on_collision_free=args.stop_on_collision_free,
        n_dir=args.ndir,
        scale_c=args.scale_c,
        auto_scale=args.auto_scale,
        out_dir=out_dir,
        time_limit=args.time_limit,
        seed=args.seed,
    )
    return cmd_solve(run)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioFormatError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyError as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
