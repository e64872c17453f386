"""Pseudo-time marching of the conserved field to a steady state.

Pseudo-time is a relaxation device only: U_t = -R(U), integrated with forward Euler
or a two-stage strong-stability-preserving Runge-Kutta scheme until the residual
falls below the configured threshold.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import pandas as pd

from coneflow.classify import max_wave_speed
from coneflow.config import SolverConfig
from coneflow.exceptions import DivergenceError, InvalidStateError, SolverFailureError
from coneflow.gas import GasModel
from coneflow.state import (
    EQUATION_NAMES,
    FreestreamSpec,
    conserved_to_primitive,
    primitive_to_conserved,
    project_freestream,
)
from coneflow.solver.boundary import BoundaryConditions, GhostFiller
from coneflow.solver.mesh import Mesh
from coneflow.solver.residual import semidiscrete_residual
from coneflow.utils import resolve_threads

logger = logging.getLogger(__name__)

RESIDUAL_COLUMNS = ["r_" + name for name in EQUATION_NAMES]


@dataclass
class Solution:
    """Per-cell conserved field plus the convergence record of the run that produced it.

    Attributes:
        conserved (np.ndarray): U of shape (n1, n2, 5)
        iterations (int): residual evaluations performed
        history (pd.DataFrame): iteration, per-equation L2 residual and total, relative to iteration 1
        converged (bool): threshold reached (or the initial residual was exactly zero)
        status (str): "converged", "max-iterations" or "diverged"
    """

    conserved: np.ndarray
    iterations: int = 0
    history: pd.DataFrame = field(
        default_factory=lambda: pd.DataFrame(columns=["iteration"] + RESIDUAL_COLUMNS + ["residual"])
    )
    converged: bool = False
    status: str = "not-started"

    def primitive(self, mesh: Mesh, gas: Optional[GasModel] = None) -> np.ndarray:
        return conserved_to_primitive(self.conserved, mesh.cell_metric, gas)


@dataclass
class SolverContext:
    """Everything a step needs besides the field; built once per run."""

    mesh: Mesh
    gas: GasModel
    ghosts: GhostFiller
    cfg: SolverConfig
    forcing: Optional[np.ndarray] = None
    threads: int = 1

    def residual(self, U: np.ndarray) -> np.ndarray:
        p = conserved_to_primitive(U, self.mesh.cell_metric, self.gas)
        return semidiscrete_residual(
            p,
            self.mesh,
            self.gas,
            self.ghosts,
            self.cfg.limiter,
            self.forcing,
            self.threads,
            self.cfg.wall_flux,
        )


def compute_time_step(p: np.ndarray, mesh: Mesh, gas: GasModel, cfl: float, local: bool = False):
    """CFL / (lambda1 / d1 + lambda2 / d2), the global minimum unless local stepping is on."""
    lam1 = max_wave_speed(p, mesh.cell_metric, gas, 1)
    lam2 = max_wave_speed(p, mesh.cell_metric, gas, 2)
    dt = cfl / (lam1 / mesh.d1 + lam2 / mesh.d2)
    if local:
        return dt
    return float(np.min(dt))


def _advance(ctx: SolverContext, U: np.ndarray, R: np.ndarray, dt) -> np.ndarray:
    dt = dt[..., None] if np.ndim(dt) else dt
    U1 = U - dt * R
    if ctx.cfg.integrator == "euler":
        conserved_to_primitive(U1, ctx.mesh.cell_metric)
        return U1
    R1 = ctx.residual(U1)
    U2 = 0.5 * U + 0.5 * (U1 - dt * R1)
    conserved_to_primitive(U2, ctx.mesh.cell_metric)
    return U2


def step(
    U: np.ndarray, ctx: SolverContext, R: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, float]:
    """One pseudo-time update with step-halving on invalid states.

    Args:
        U (np.ndarray): conserved field
        ctx (SolverContext): mesh, gas, boundaries and settings
        R (np.ndarray, optional): residual of U if already known

    Returns:
        (updated field, the step size actually used; the minimum for local stepping)

    Raises:
        SolverFailureError: if the state stays invalid after max_retries halvings
    """
    cfg = ctx.cfg
    if R is None:
        R = ctx.residual(U)
    p = conserved_to_primitive(U, ctx.mesh.cell_metric, ctx.gas)
    dt = compute_time_step(p, ctx.mesh, ctx.gas, cfg.cfl, cfg.local_time_stepping)
    last_error = None
    for attempt in range(cfg.max_retries + 1):
        try:
            return _advance(ctx, U, R, dt), float(np.min(dt))
        except InvalidStateError as e:
            last_error = e
            dt = dt * 0.5
            logger.warning(f"Invalid state at cells {e.cells[:3]}; retrying with dt halved ({attempt + 1})")
    cell = last_error.cells[0] if last_error is not None and last_error.cells else None
    raise SolverFailureError(
        f"State stayed invalid after {cfg.max_retries} step halvings (first bad cell {cell})",
        cell=cell,
        solution=Solution(conserved=U),
    )


def _norms(R: np.ndarray) -> np.ndarray:
    return np.sqrt(np.mean(R * R, axis=(0, 1)))


def initial_field(mesh: Mesh, fs: FreestreamSpec) -> np.ndarray:
    """Uniform freestream projected onto every cell center, as primitives."""
    return project_freestream(fs, mesh.chart, *mesh.centers())


def run_to_steady(
    cfg: SolverConfig,
    mesh: Mesh,
    gas: GasModel,
    fs: Optional[FreestreamSpec] = None,
    bcs: Optional[BoundaryConditions] = None,
    initial: Optional[np.ndarray] = None,
    forcing: Optional[np.ndarray] = None,
    threads: Optional[int] = None,
    callback: Optional[Callable[[int, np.ndarray], None]] = None,
    snapshot_every: int = 0,
) -> Solution:
    """March from the initial primitives (freestream by default) until steady.

    The relative residual is the total L2 norm over the iteration-1 norm. The run stops
    when it drops below cfg.threshold or after cfg.max_iterations residual evaluations.
    A run that stops at iteration 1 is only marked converged if the initial residual is
    exactly zero.

    Raises:
        DivergenceError: if the relative residual exceeds cfg.divergence_factor
        SolverFailureError: if step halving cannot keep the state valid
    """
    threads = resolve_threads(threads)
    if bcs is None:
        assert fs is not None, "Either boundary conditions or a freestream must be given"
        bcs = BoundaryConditions.cone(fs, cfg.inner_boundary, cfg.outer_boundary)
        if not mesh.periodic:
            raise ValueError("Cone boundary conditions need a chart periodic in xi^2")
    if initial is None:
        assert fs is not None, "A freestream is needed to initialize the field"
        initial = initial_field(mesh, fs)
    ctx = SolverContext(
        mesh=mesh, gas=gas, ghosts=GhostFiller(mesh, bcs), cfg=cfg, forcing=forcing, threads=threads
    )
    U = primitive_to_conserved(initial, mesh.cell_metric)
    rows = []
    reference = None
    status, converged = "max-iterations", False

    def solution(**kwargs):
        history = pd.DataFrame(rows, columns=["iteration"] + RESIDUAL_COLUMNS + ["residual"])
        return Solution(conserved=U, iterations=len(rows), history=history, **kwargs)

    for it in range(1, cfg.max_iterations + 1):
        R = ctx.residual(U)
        norms = _norms(R)
        total = float(np.sqrt(np.sum(norms * norms)))
        if reference is None:
            reference = total
        scale = reference if reference > 0 else 1.0
        rel = total / scale
        rows.append([it] + list(norms / scale) + [rel])

        if not np.isfinite(rel) or rel > cfg.divergence_factor:
            logger.warning(f"Residual diverged at iteration {it}: relative residual {rel:.3e}")
            raise DivergenceError(
                f"Relative residual {rel:.3e} exceeded {cfg.divergence_factor:g} at iteration {it}",
                solution=solution(converged=False, status="diverged"),
            )
        if reference == 0.0 or rel < cfg.threshold:
            converged = it > 1 or reference == 0.0
            status = "converged" if converged else "max-iterations"
            break
        if cfg.log_every and it % cfg.log_every == 0:
            logger.info(f"iteration {it}: relative residual {rel:.3e}")
        if it == cfg.max_iterations:
            break
        U, dt = step(U, ctx, R)
        if callback is not None and snapshot_every and it % snapshot_every == 0:
            callback(it, U)

    logger.info(f"Stopped after {len(rows)} iterations ({status}), relative residual {rows[-1][-1]:.3e}")
    return solution(converged=converged, status=status)

