"""Method of manufactured solutions: observed order of the discretization.

In "truncation" mode the discrete residual of the sampled exact field is compared with
the analytic residual injected as forcing, which isolates the truncation error. In
"solution" mode the forced problem is marched to steady state and the converged field
is compared with the exact one.
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from coneflow.config import SolverConfig
from coneflow.exceptions import VerificationFailure
from coneflow.gas import GasModel, IdealGas
from coneflow.geometry import Chart, spherical_chart
from coneflow.state import EQUATION_NAMES
from coneflow.solver.boundary import BoundaryConditions, GhostFiller
from coneflow.solver.marching import run_to_steady
from coneflow.solver.mesh import build_mesh
from coneflow.solver.residual import semidiscrete_residual
from coneflow.utils import resolve_threads
from coneflow.validate.manufactured import DEFAULT_PATCH, ManufacturedField, general_residual

logger = logging.getLogger(__name__)

MMS_MODES = ("truncation", "solution")


@dataclass
class MMSResult:
    """Errors per mesh and equation, and the observed orders between consecutive meshes."""

    errors: pd.DataFrame
    orders: pd.DataFrame
    limiter: str
    mode: str

    @property
    def final_orders(self) -> pd.Series:
        return self.orders.iloc[-1]


def default_mms_chart() -> Chart:
    (p0, p1), theta = DEFAULT_PATCH
    return spherical_chart(p0, p1, theta_bounds=theta)


def mms_error(
    field: ManufacturedField,
    chart: Chart,
    n: int,
    gas: GasModel,
    limiter: str = "first-order",
    mode: str = "truncation",
    solver_cfg: Optional[SolverConfig] = None,
) -> np.ndarray:
    """RMS error per equation on an n x n mesh of the chart."""
    assert mode in MMS_MODES, f"Unknown MMS mode {mode!r}; valid values are {MMS_MODES}"
    mesh = build_mesh(chart, n, n)
    xi1, xi2 = mesh.centers()
    forcing = general_residual(field, chart, xi1, xi2, gas)
    bcs = BoundaryConditions.dirichlet(field.primitive, periodic=mesh.periodic)
    exact = field.primitive(xi1, xi2)
    if mode == "truncation":
        R = semidiscrete_residual(exact, mesh, gas, GhostFiller(mesh, bcs), limiter, forcing)
        err = R
    else:
        cfg = replace(solver_cfg or SolverConfig(), limiter=limiter)
        sol = run_to_steady(cfg, mesh, gas, bcs=bcs, initial=exact, forcing=forcing, threads=1)
        err = sol.primitive(mesh, gas) - exact
    return np.sqrt(np.mean(err * err, axis=(0, 1)))


def mms_convergence(
    field: Optional[ManufacturedField] = None,
    meshes: Sequence[int] = (32, 64, 128),
    chart: Optional[Chart] = None,
    gas: Optional[GasModel] = None,
    limiter: str = "first-order",
    mode: str = "truncation",
    solver_cfg: Optional[SolverConfig] = None,
    threads: Optional[int] = None,
    floor: float = 1e-12,
) -> MMSResult:
    """Observed order per equation, log2 of consecutive error ratios on doubled meshes.

    Args:
        field (ManufacturedField): defaults to the smooth patch field
        meshes (Sequence[int]): cells per direction, each double the previous
        chart (Chart): defaults to the spherical patch the default field is built for
        gas (GasModel): defaults to IdealGas()
        limiter (str): reconstruction under test
        mode (str): "truncation" or "solution"
        solver_cfg (SolverConfig): marching settings for solution mode
        threads (int): meshes are evaluated concurrently
        floor (float): errors below this are treated as round-off and skip the monotonicity test

    Returns:
        MMSResult

    Raises:
        VerificationFailure: if an error grows under refinement
    """
    assert len(meshes) >= 3, "MMS needs at least 3 meshes"
    assert all(b == 2 * a for a, b in zip(meshes[:-1], meshes[1:])), "Meshes must double"
    field = ManufacturedField.smooth_patch_field() if field is None else field
    chart = default_mms_chart() if chart is None else chart
    gas = IdealGas() if gas is None else gas
    field.check_positive(chart)

    n_jobs = resolve_threads(threads)
    errors = Parallel(n_jobs=n_jobs, backend="threading")(
        delayed(mms_error)(field, chart, n, gas, limiter, mode, solver_cfg) for n in meshes
    )
    errors = pd.DataFrame(errors, columns=list(EQUATION_NAMES), index=pd.Index(meshes, name="n"))
    logger.info(f"MMS errors ({limiter}, {mode}):\n{errors}")

    for eq in EQUATION_NAMES:
        e = errors[eq].values
        resolved = e[:-1] > floor
        if np.any(resolved & (e[1:] >= e[:-1])):
            raise VerificationFailure(
                f"MMS error for {eq} does not decrease under refinement: {list(e)}"
            )
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = errors.values[:-1] / errors.values[1:]
        orders = np.where(errors.values[:-1] > floor, np.log2(ratios), np.nan)
    orders = pd.DataFrame(orders, columns=list(EQUATION_NAMES), index=pd.Index(meshes[1:], name="n"))
    return MMSResult(errors=errors, orders=orders, limiter=limiter, mode=mode)
