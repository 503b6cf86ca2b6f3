"""Command line entry point: run the shipped examples or a scenario file and write traces.

Exit codes: 0 success, 1 usage / input error, 2 a sweep or the coupled loop did not converge.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core_types import Box, Interval, Scenario, ValidationError, make_uniform_grid
from .costs import PenaltySchedule
from .equivalence import EquivalenceReport, check_theorem2_pointwise, check_theorem3_conditions
from .fixtures import abs_effort_spec, benchmark_scenario, unbounded_quadratic_scenario
from .hamiltonian import (
    HamiltonianSpec, brute_force_argmin, hamiltonian_u_subdifferential, minimize_hamiltonian,
)
from .pmp import (
    CoupledRun, CoupledRunError, PmpSolution, SweepDivergenceError, SweepSettings,
    closed_loop_coupled_run, solve_p1,
)
from .scenario_file import ScenarioParseError, load_scenario

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2

TRACE_COLUMNS = ("t", "u_plant", "u_model", "u_uncon_plant", "u_uncon_model", "x_plant",
                 "x_model", "lambda_plant", "lambda_model", "d", "grad_match_residual")


def bundled_scenario_path(name: str = "paper_sec5") -> Path:
    return Path(resources.files("twinpmp") / "scenarios" / f"{name}.toml")


# --- experiment ---------------------------------------------------------------------

@dataclass
class ExperimentResult:
    scenario: Scenario
    settings: SweepSettings
    sol_p1: PmpSolution | None
    run: CoupledRun | None
    report: EquivalenceReport | None
    converged: bool
    error: str = ""


def run_experiment(scenario: Scenario, settings: SweepSettings | None = None,
                   tol: float = 1e-9) -> ExperimentResult:
    """P1 sweep, coupled P2 loop and the equivalence report. Never raises on non-convergence."""
    settings = settings or SweepSettings()
    try:
        sol_p1 = solve_p1(scenario, settings)
    except SweepDivergenceError as exc:
        return ExperimentResult(scenario, settings, None, None, None, False, f"plant sweep: {exc}")
    error = ""
    try:
        run = closed_loop_coupled_run(scenario, settings)
    except SweepDivergenceError as exc:
        return ExperimentResult(scenario, settings, sol_p1, None, None, False, f"model sweep: {exc}")
    except CoupledRunError as exc:
        run, error = exc.last_run, f"coupled loop: {exc}"
    report = check_theorem3_conditions(scenario, sol_p1, run.solution, tol)
    converged = not error and sol_p1.converged and run.solution.converged
    if not error and not converged:
        error = "sweep reached max_iterations before the control settled"
    return ExperimentResult(scenario, settings, sol_p1, run, report, converged, error)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _expand(name, arr):
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1 or arr.shape[1] == 1:
        return {name: arr.reshape(len(arr))}
    return {f"{name}[{i}]": arr[:, i] for i in range(arr.shape[1])}


def trace_table(result: ExperimentResult) -> dict:
    """Column name -> node values. Vector quantities expand to ``name[i]`` columns."""
    p1, p2 = result.sol_p1, result.run.solution
    cols = {"t": result.scenario.grid.nodes}
    for name, arr in (("u_plant", p1.control.values), ("u_model", p2.control.values),
                      ("u_uncon_plant", p1.unconstrained_control.values),
                      ("u_uncon_model", p2.unconstrained_control.values),
                      ("x_plant", p1.state.values), ("x_model", p2.state.values),
                      ("lambda_plant", p1.costate.values), ("lambda_model", p2.costate.values),
                      ("d", p1.excitation),
                      ("grad_match_residual", result.report.gradient_match_residual.values)):
        cols.update(_expand(name, arr))
    return cols


def write_trace_csv(result: ExperimentResult, path) -> Path:
    cols = trace_table(result)
    names = list(cols)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*(cols[n] for n in names)):
            w.writerow([repr(float(v)) for v in row])
    return Path(path)


def report_rows(result: ExperimentResult) -> list:
    rows = [("converged", result.converged),
            ("error", result.error)]
    if result.sol_p1 is not None:
        p1 = result.sol_p1
        rows += [("converged_plant", p1.converged), ("iterations_plant", p1.iterations),
                 ("total_cost_plant", p1.total_cost)]
    if result.run is not None:
        p2 = result.run.solution
        rows += [("converged_model", p2.converged), ("iterations_model", p2.iterations),
                 ("outer_iterations", result.run.outer_iterations),
                 ("total_cost_model", p2.total_cost)]
    if result.report is not None:
        rows += list(result.report.summary().items())
    else:
        rows.append(("verdict", "unavailable"))
    return rows


def write_report_csv(result: ExperimentResult, path) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["field", "value"])
        for k, v in report_rows(result):
            w.writerow([k, _fmt(v)])
    return Path(path)


def write_artifacts(result: ExperimentResult, out_dir, plots: bool = True) -> list:
    from . import plots as _plots

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [write_report_csv(result, out / "report.csv")]
    if result.report is None:
        return written
    written.append(write_trace_csv(result, out / "trace.csv"))
    if plots:
        # plots show the first component of vector quantities
        first = {k.split("[")[0]: v for k, v in reversed(list(trace_table(result).items()))}
        U = result.scenario.control_set
        bounds = (float(U.lo[0]), float(U.hi[0])) if isinstance(U, Box) else None
        written += [
            _plots.plot_controls(first, out / "controls.svg"),
            _plots.plot_unconstrained(first, bounds, out / "unconstrained_minimizers.svg"),
            _plots.plot_states(first, out / "states.svg"),
        ]
    return written


# --- overrides ----------------------------------------------------------------------

def apply_overrides(scenario: Scenario, settings: SweepSettings, args) -> tuple:
    changes = {}
    if getattr(args, "beta", None) is not None:
        changes["penalty"] = PenaltySchedule.constant(args.beta)
    if getattr(args, "grid_n", None) is not None:
        tabulated_penalty = scenario.penalty.kind == "tabulated" and "penalty" not in changes
        if tabulated_penalty or scenario.excitation.kind == "tabulated":
            raise ValidationError("--grid-n cannot resample tabulated signals")
        changes["grid"] = make_uniform_grid(scenario.grid.horizon_T, args.grid_n)
    lo, hi = getattr(args, "u_lo", None), getattr(args, "u_hi", None)
    if lo is not None or hi is not None:
        U = scenario.control_set
        if not isinstance(U, Box):
            raise ValidationError("--u-lo/--u-hi apply to interval or box control sets only")
        new_lo = U.lo if lo is None else np.full(U.dimension, lo)
        new_hi = U.hi if hi is None else np.full(U.dimension, hi)
        changes["control_set"] = (Interval(new_lo[0], new_hi[0]) if isinstance(U, Interval)
                                  else Box(new_lo, new_hi))
    if changes:
        scenario = scenario.replace(**changes)
    sweep = {}
    for flag, attr in (("max_iterations", "max_iterations"), ("damping", "damping"),
                       ("sweep_tol", "convergence_tol"), ("anderson", "anderson_memory")):
        if getattr(args, flag, None) is not None:
            sweep[attr] = getattr(args, flag)
    if sweep:
        from dataclasses import replace
        settings = replace(settings, **sweep)
    U = scenario.control_set
    if isinstance(U, Box) and U.degenerate:
        print("warning: control set has lo == hi in some component; the control is fixed there",
              file=sys.stderr)
    return scenario, settings


# --- subcommands --------------------------------------------------------------------

def _print_result(result: ExperimentResult, out_dir):
    for k, v in report_rows(result):
        if k == "error" and not v:
            continue
        print(f"{k}: {_fmt(v)}")
    if out_dir is not None:
        print(f"artifacts: {Path(out_dir)}")


def _experiment(scenario, settings, args, plots=True):
    scenario, settings = apply_overrides(scenario, settings, args)
    result = run_experiment(scenario, settings, args.tol)
    if args.out_dir is not None:
        write_artifacts(result, args.out_dir, plots=plots)
    _print_result(result, args.out_dir)
    if not result.converged:
        print(f"not converged: {result.error}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _example1(args) -> int:
    a = args.a
    a_hat = a if args.a_hat is None else args.a_hat
    model = abs_effort_spec(a, beta=1.0)
    plant = abs_effort_spec(a_hat)
    x, lam = np.zeros(1), np.ones(1)
    match, cone = check_theorem2_pointwise(plant, model, 0.0, x, lam, x, lam, np.zeros(1))
    g_plant = hamiltonian_u_subdifferential(plant, 0.0, x, np.zeros(1), lam)
    g_model = hamiltonian_u_subdifferential(model, 0.0, x, np.zeros(1), lam)
    pts_p, _ = brute_force_argmin(plant, 0.0, x, None, lam, args.grid_points)
    pts_m, _ = brute_force_argmin(model, 0.0, x, x, lam, args.grid_points)
    closed_p = minimize_hamiltonian(plant, 0.0, x, None, lam).minimizer[0]
    closed_m = minimize_hamiltonian(model, 0.0, x, x, lam).minimizer[0]
    rows = [
        ("a_model", a), ("a_plant", a_hat),
        ("subdifferential_plant_at_0", f"[{_fmt(g_plant.lo[0])}, {_fmt(g_plant.hi[0])}]"),
        ("subdifferential_model_at_0", f"[{_fmt(g_model.lo[0])}, {_fmt(g_model.hi[0])}]"),
        ("subgradients_match", match), ("normal_cone_condition", cone),
        ("stationary_at_zero", match and cone),
        ("argmin_plant", float(closed_p)), ("argmin_model", float(closed_m)),
        ("brute_force_argmin_plant", " ".join(_fmt(v) for v in pts_p[:, 0])),
        ("brute_force_argmin_model", " ".join(_fmt(v) for v in pts_m[:, 0])),
    ]
    _emit_rows(rows, args, "example1.csv")
    return EXIT_OK


def _example2(args) -> int:
    rows = []
    code = EXIT_OK
    for label, matched in (("matched", True), ("mismatched", False)):
        scenario = unbounded_quadratic_scenario(matched=matched)
        scenario, settings = apply_overrides(scenario, SweepSettings(), args)
        result = run_experiment(scenario, settings, args.tol)
        if args.out_dir is not None:
            write_artifacts(result, Path(args.out_dir) / label)
        if not result.converged:
            code = EXIT_NOT_CONVERGED
        rows.append((f"{label}.converged", result.converged))
        if result.report is not None:
            rep = result.report
            rows += [(f"{label}.verdict", rep.verdict.value),
                     (f"{label}.control_sup_distance", rep.control_sup_distance),
                     (f"{label}.costate_sup_distance", rep.costate_sup_distance),
                     (f"{label}.sufficient_conditions_hold", rep.theorem3_sufficient_holds)]
    _emit_rows(rows, args, "example2.csv")
    return code


def _emit_rows(rows, args, filename):
    for k, v in rows:
        print(f"{k}: {_fmt(v)}")
    if args.out_dir is not None:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / filename, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["field", "value"])
            w.writerows((k, _fmt(v)) for k, v in rows)


def _oracle(args) -> int:
    scenario, settings = load_scenario(args.scenario)
    scenario, settings = apply_overrides(scenario, settings, args)
    grid = scenario.grid
    if not 0 <= args.node < len(grid):
        raise ValidationError(f"--node must lie in [0, {len(grid) - 1}], got {args.node}")
    if not scenario.control_set.bounded:
        raise ValidationError("the brute-force oracle needs a bounded control set")
    result = run_experiment(scenario, settings, args.tol)
    if result.run is None:
        print(f"not converged: {result.error}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    k = args.node
    t = float(grid.nodes[k])
    d = float(result.sol_p1.excitation[k])
    p1, p2 = result.sol_p1, result.run.solution
    x_hat = result.run.plant_state.values[k]
    plant = HamiltonianSpec(scenario.plant, scenario.cost, scenario.excitation, scenario.control_set)
    model = HamiltonianSpec(scenario.model, scenario.cost, scenario.excitation,
                            scenario.control_set, scenario.penalty)
    pts_p, val_p = brute_force_argmin(plant, t, p1.state.values[k], None, p1.costate.values[k],
                                      args.grid_points, d=d)
    pts_m, val_m = brute_force_argmin(model, t, p2.state.values[k], x_hat, p2.costate.values[k],
                                      args.grid_points, d=d)
    rows = [("node", k), ("t", t), ("d", d),
            ("u_plant", " ".join(_fmt(v) for v in p1.control.values[k])),
            ("u_model", " ".join(_fmt(v) for v in p2.control.values[k])),
            ("brute_force_plant_min", val_p),
            ("brute_force_plant_argmin", ";".join(" ".join(_fmt(v) for v in p) for p in pts_p)),
            ("brute_force_model_min", val_m),
            ("brute_force_model_argmin", ";".join(" ".join(_fmt(v) for v in p) for p in pts_m))]
    _emit_rows(rows, args, f"oracle_node{k}.csv")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


# --- parser -------------------------------------------------------------------------

def _common(p, out_default=None):
    help_ = "directory for CSV/SVG artifacts"
    if out_default:
        help_ += f" (default {out_default})"
    p.add_argument("--out-dir", default=out_default, help=help_)
    p.add_argument("--beta", type=float, help="constant penalty weight override")
    p.add_argument("--grid-n", type=int, help="number of grid steps override")
    p.add_argument("--u-lo", type=float, help="lower control bound override")
    p.add_argument("--u-hi", type=float, help="upper control bound override")
    p.add_argument("--tol", type=float, default=1e-9, help="equivalence tolerance (default 1e-9)")
    p.add_argument("--max-iterations", type=int, help="sweep iteration cap")
    p.add_argument("--damping", type=float, help="sweep damping theta in (0, 1]")
    p.add_argument("--sweep-tol", type=float, help="sweep convergence tolerance")
    p.add_argument("--anderson", type=int, metavar="M",
                   help="Anderson mixing memory for the sweep (0 = plain damping)")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 is reserved here for non-convergence."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="twinpmp",
        description="Plant-optimal vs model-based control via Pontryagin sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-example", help="run a shipped example")
    p.add_argument("example", choices=["paper-sec5", "example1", "example2"])
    _common(p)
    p.add_argument("--a", type=float, default=0.5, help="example1: model coefficient a")
    p.add_argument("--a-hat", type=float, help="example1: plant coefficient (default: equal to a)")
    p.add_argument("--grid-points", type=int, default=2001, help="brute-force grid size")

    p = sub.add_parser("solve", help="solve a scenario file and write traces, report and plots")
    p.add_argument("scenario")
    _common(p, "twinpmp-out")

    p = sub.add_parser("check-equivalence", help="print the equivalence report for a scenario file")
    p.add_argument("scenario")
    _common(p)

    p = sub.add_parser("oracle", help="brute-force Hamiltonian argmin at one grid node")
    p.add_argument("scenario")
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--grid-points", type=int, default=2001)
    _common(p)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run-example":
            if args.example == "example1":
                return _example1(args)
            if args.example == "example2":
                return _example2(args)
            if args.out_dir is None:
                args.out_dir = "twinpmp-out"
            return _experiment(benchmark_scenario(), SweepSettings(), args)
        if args.command == "solve":
            scenario, settings = load_scenario(args.scenario)
            return _experiment(scenario, settings, args)
        if args.command == "check-equivalence":
            scenario, settings = load_scenario(args.scenario)
            return _experiment(scenario, settings, args, plots=False)
        if args.command == "oracle":
            return _oracle(args)
    except (OSError, ScenarioParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
