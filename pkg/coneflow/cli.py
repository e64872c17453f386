"""Command-line entry points: ``coneflow solve|classify|verify|example``."""
import argparse
import logging
import os
import sys
from typing import List, Optional

import numpy as np

from coneflow.cases import CASES, write_example
from coneflow.classify import (
    DEFAULT_SONIC_TOL,
    CharacteristicType,
    labels_from_margin,
    region_components,
    region_map,
    region_table,
)
from coneflow.config import FIELD_FORMATS, RunConfig, load_config
from coneflow.exceptions import (
    ChartDegeneracyError,
    ConeFlowError,
    ConfigError,
    DivergenceError,
    InvalidGeometryError,
    InvalidStateError,
    NoAttachedSolutionError,
    SolverFailureError,
)
from coneflow.field_io import (
    FieldFormatError,
    output_path,
    read_field,
    write_field,
    write_manifest,
    write_residual_history,
)
from coneflow.solver import Mesh, Solution, build_mesh, run_to_steady
from coneflow.utils import THREADS_ENV_VAR, resolve_threads
from coneflow.validate import compare_surface_pressure, run_verification, taylor_maccoll
from coneflow.validate.report import SUITES
from coneflow.validate.surface import surface_pressure_coefficient
from coneflow.visualizer import Visualizer

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MAX_ITERATIONS = 2
EXIT_DIVERGED = 3
EXIT_CHECKS_FAILED = 4

FIELD_SUFFIX = {"text": "txt", "binary": "bin"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _label_counts(labels: np.ndarray) -> dict:
    return {t.name.lower(): int(np.sum(labels == int(t))) for t in CharacteristicType}


def _region_summary(labels: np.ndarray, periodic: bool) -> dict:
    summary = {"cells": _label_counts(labels)}
    for kind in (CharacteristicType.HYPERBOLIC, CharacteristicType.ELLIPTIC):
        _, n = region_components(labels, kind, periodic=periodic)
        summary[f"{kind.name.lower()}_regions"] = n
    return summary


def _surface_reference(cfg: RunConfig, sol: Solution, mesh: Mesh, directory: str, plots: bool):
    """Surface pressure against the circular-cone reference, for axisymmetric runs only."""
    geo, fs = cfg.geometry, cfg.freestream
    axisymmetric = (
        geo.chart == "body_conforming"
        and (geo.body or {}).get("shape") == "circle"
        and fs.velocity is None
        and fs.alpha_deg == 0.0
        and fs.sideslip_deg == 0.0
    )
    if not axisymmetric or not sol.converged or cfg.solver.inner_boundary != "wall":
        return None
    try:
        tm = taylor_maccoll(fs.mach, np.radians(geo.body["half_angle_deg"]), cfg.gas.gamma)
    except NoAttachedSolutionError as e:
        logger.warning(f"No reference cone flow: {e}")
        return None
    gas, freestream = cfg.build_gas(), cfg.build_freestream()
    comparison = compare_surface_pressure(sol, mesh, gas, freestream, tm)
    if plots:
        theta, cp = surface_pressure_coefficient(sol, mesh, gas, freestream)
        fig = Visualizer().plot_surface_pressure(theta, cp, tm.surface_cp)
        fig.savefig(output_path(directory, "surface_cp.png"))
    return {**comparison.to_dict(), "shock_angle_deg": float(np.degrees(tm.shock_angle))}


def _write_outputs(
    p: np.ndarray, mesh: Mesh, cfg: RunConfig, sol: Solution, directory: str, formats: List[str]
) -> dict:
    gas = cfg.build_gas()
    written = []
    for fmt in formats:
        written.append(write_field(output_path(directory, f"field.{FIELD_SUFFIX[fmt]}"), p, mesh, gas, fmt))
    if len(sol.history):
        written.append(write_residual_history(output_path(directory, "residuals.csv"), sol.history))

    xi1, xi2 = mesh.centers()
    regions = region_map(p, mesh.cell_metric, gas, xi1, xi2)
    written.append(output_path(directory, "region_map.csv"))
    regions.to_csv(written[-1], index=False, float_format="%.17g")
    labels = regions["label"].map({t.name.lower(): int(t) for t in CharacteristicType})
    summary = _region_summary(labels.values.reshape(mesh.n1, mesh.n2), mesh.periodic)

    if cfg.output.plots:
        vis = Visualizer()
        vis.plot_region_map(regions).savefig(output_path(directory, "region_map.png"))
        if len(sol.history):
            vis.plot_residual_history(sol.history).savefig(output_path(directory, "residuals.png"))
    return {"files": [os.path.basename(f) for f in written], "regions": summary}


def _initial_from_field(path: str, mesh: Mesh) -> np.ndarray:
    field = read_field(path)
    if (field.n1, field.n2) != (mesh.n1, mesh.n2):
        raise FieldFormatError(
            f"{path}: field is {field.n1}x{field.n2} but the mesh is {mesh.n1}x{mesh.n2}"
        )
    return field.primitive


def cmd_solve(args) -> int:
    try:
        cfg = load_config(args.config)
        threads = resolve_threads(args.threads)
    except (ConfigError, ValueError) as e:
        return _fail(str(e))

    directory = args.output or cfg.output.directory
    formats = [args.format] if args.format else list(cfg.output.formats)
    gas, fs = cfg.build_gas(), cfg.build_freestream()
    try:
        mesh = build_mesh(cfg.build_chart(), cfg.mesh.n1, cfg.mesh.n2)
    except (ChartDegeneracyError, InvalidGeometryError) as e:
        return _fail(f"{args.config}: bad geometry: {e}")
    logger.info(f"Mesh {mesh.n1}x{mesh.n2}, freestream M = {fs.mach(gas):.4g}, {threads} thread(s)")

    initial = None
    if args.init_from:
        try:
            initial = _initial_from_field(args.init_from, mesh)
        except (OSError, FieldFormatError) as e:
            return _fail(str(e))

    def snapshot(iteration, U):
        p = Solution(conserved=U).primitive(mesh, gas)
        write_field(output_path(directory, f"snapshot_{iteration:06d}.txt"), p, mesh, gas)

    summary = {"threads": threads}
    try:
        sol = run_to_steady(
            cfg.solver,
            mesh,
            gas,
            fs,
            initial=initial,
            threads=threads,
            callback=snapshot,
            snapshot_every=cfg.output.snapshot_every,
        )
    except SolverFailureError as e:
        logger.error(str(e))
        status = "diverged" if isinstance(e, DivergenceError) else "failed"
        summary.update({"status": status, "error": str(e), "cell": e.cell})
        if e.solution is not None:
            try:
                p = e.solution.primitive(mesh, gas)
                summary.update(_write_outputs(p, mesh, cfg, e.solution, directory, formats))
            except InvalidStateError as dump_error:
                logger.warning(f"Last field is not writable: {dump_error}")
        write_manifest(output_path(directory, "manifest.json"), cfg.to_dict(), summary, cfg.hash)
        print(f"{status}: {e}", file=sys.stderr)
        return EXIT_DIVERGED

    p = sol.primitive(mesh, gas)
    summary.update(
        {
            "status": sol.status,
            "converged": sol.converged,
            "iterations": sol.iterations,
            "final_residual": float(sol.history["residual"].iloc[-1]),
        }
    )
    summary.update(_write_outputs(p, mesh, cfg, sol, directory, formats))
    surface = _surface_reference(cfg, sol, mesh, directory, cfg.output.plots)
    if surface is not None:
        summary["surface"] = surface
    write_manifest(output_path(directory, "manifest.json"), cfg.to_dict(), summary, cfg.hash)

    print(
        f"{sol.status} after {sol.iterations} iterations, "
        f"relative residual {summary['final_residual']:.3e}; outputs in {directory}"
    )
    return EXIT_OK if sol.converged else EXIT_MAX_ITERATIONS


def cmd_classify(args) -> int:
    try:
        field = read_field(args.field)
    except (OSError, FieldFormatError) as e:
        return _fail(str(e))

    margin, c = field.column("margin"), field.column("c")
    labels = labels_from_margin(margin, c, args.tol)
    regions = region_table(labels, margin, c, field.column("xi1"), field.column("xi2"))
    directory = args.output or os.path.dirname(os.path.abspath(args.field))
    path = output_path(directory, "region_map.csv")
    regions.to_csv(path, index=False, float_format="%.17g")

    total = labels.size
    for name, n in _label_counts(labels).items():
        print(f"{name:>10}: {n:8d} cells ({100.0 * n / total:6.2f}%)")
    print(f"region map written to {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    suites = [s.strip() for s in args.suites.split(",") if s.strip()]
    if not suites:
        return _fail(f"--suites selects nothing; choose from {', '.join(SUITES)}")
    try:
        threads = resolve_threads(args.threads)
        report = run_verification(suites, seed=args.seed, threads=threads)
    except ValueError as e:
        return _fail(str(e))
    except ConeFlowError as e:
        print(f"verification aborted: {e}", file=sys.stderr)
        return EXIT_CHECKS_FAILED

    print(report.to_text())
    if args.output:
        report.to_csv(output_path(args.output, "verification.csv"))
    print("all checks passed" if report.passed else "some checks FAILED")
    return EXIT_OK if report.passed else EXIT_CHECKS_FAILED


def cmd_example(args) -> int:
    path = write_example(args.name, output_path(args.output or ".", f"{args.name}.json"))
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coneflow", description="Conical Euler solver")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="March a configured case to a steady state")
    solve.add_argument("--config", required=True, help="JSON run configuration")
    solve.add_argument("--output", help="output directory; overrides output.directory")
    solve.add_argument("--threads", type=int, help=f"worker threads; default ${THREADS_ENV_VAR} or 1")
    solve.add_argument("--format", choices=FIELD_FORMATS, help="field format; overrides output.formats")
    solve.add_argument("--init-from", help="field file to start from instead of the freestream")
    solve.set_defaults(func=cmd_solve)

    classify = sub.add_parser("classify", help="Label every cell of a field hyperbolic, sonic or elliptic")
    classify.add_argument("field", help="field file written by solve (text or binary)")
    classify.add_argument("--output", help="directory for region_map.csv; default: next to the field")
    classify.add_argument("--tol", type=float, default=DEFAULT_SONIC_TOL, help="sonic band, relative to c")
    classify.set_defaults(func=cmd_classify)

    verify = sub.add_parser("verify", help="Run the verification suites and print a pass/fail table")
    verify.add_argument(
        "--suites", default=",".join(SUITES), help="comma-separated subset of " + ", ".join(SUITES)
    )
    verify.add_argument("--output", help="directory for verification.csv")
    verify.add_argument("--threads", type=int)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(func=cmd_verify)

    example = sub.add_parser("example", help="Write a bundled example configuration")
    example.add_argument("name", choices=sorted(CASES))
    example.add_argument("--output", help="directory to write <name>.json into")
    example.set_defaults(func=cmd_example)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
