"""Finite-volume residual of the conical system on a structured mesh.

R_cell = (F1_{i+1/2} - F1_{i-1/2}) / d1 + (F2_{j+1/2} - F2_{j-1/2}) / d2 + S(cell) - forcing,
so that a steady state satisfies R = 0 with the same sign convention as the
continuous system d_b F^b + S = 0.
"""
import logging
from typing import Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from coneflow import flux
from coneflow.classify import max_wave_speed
from coneflow.gas import GasModel
from coneflow.geometry import MetricData
from coneflow.state import primitive_to_conserved
from coneflow.solver.boundary import GhostFiller, tangential_wall_velocity
from coneflow.solver.mesh import N_GHOST, Mesh
from coneflow.solver.reconstruction import reconstruct
from coneflow.utils import row_blocks

logger = logging.getLogger(__name__)

WALL_FLUXES = ("pressure", "llf")


def llf_flux(pL: np.ndarray, pR: np.ndarray, metric: MetricData, gas: GasModel, alpha: int) -> np.ndarray:
    """Local Lax-Friedrichs face flux, 1/2 (F_L + F_R) - 1/2 lambda (U_R - U_L).

    lambda is the larger of |v^a| + c sqrt(g^aa) on the two sides, the pseudo-time
    wave speed along the face normal.
    """
    FL = flux.physical_flux(pL, metric, alpha, gas)
    FR = flux.physical_flux(pR, metric, alpha, gas)
    UL = primitive_to_conserved(pL, metric)
    UR = primitive_to_conserved(pR, metric)
    lam = np.maximum(max_wave_speed(pL, metric, gas, alpha), max_wave_speed(pR, metric, gas, alpha))
    return 0.5 * (FL + FR) - 0.5 * lam[..., None] * (UR - UL)


def wall_flux(p: np.ndarray, metric: MetricData, gas: GasModel) -> np.ndarray:
    """Slip-wall flux through an xi^1 face, sqrt(g) (0, g^{11} P, g^{21} P, 0, 0).

    P is taken from the reconstructed state on the fluid side of the face.
    """
    return flux.physical_flux(tangential_wall_velocity(p, metric.g_up), metric, 1, gas)


def _xi1_fluxes(
    pL: np.ndarray,
    pR: np.ndarray,
    metric: MetricData,
    gas: GasModel,
    walls: Tuple[bool, bool] = (False, False),
) -> np.ndarray:
    """LLF fluxes on a run of xi^1 faces; walls flags the first and last face as a slip wall."""
    F1 = llf_flux(pL, pR, metric, gas, 1)
    if walls[0]:
        F1[0] = wall_flux(pR[0], metric[0], gas)
    if walls[1]:
        F1[-1] = wall_flux(pL[-1], metric[-1], gas)
    return F1


def _wall_faces(ghosts: GhostFiller, wall_flux_kind: str) -> Tuple[bool, bool]:
    assert wall_flux_kind in WALL_FLUXES, f"Unknown wall flux {wall_flux_kind!r}; valid: {WALL_FLUXES}"
    if wall_flux_kind == "llf":
        return False, False
    return ghosts.walls


def face_fluxes(
    P: np.ndarray,
    mesh: Mesh,
    gas: GasModel,
    limiter: str = "first-order",
    walls: Tuple[bool, bool] = (False, False),
):
    """Numerical fluxes on all faces from a padded primitive array.

    Returns:
        (F1 of shape (n1 + 1, n2, 5), F2 of shape (n1, n2 + 1, 5))
    """
    pL, pR = reconstruct(P, 0, limiter)
    F1 = _xi1_fluxes(pL, pR, mesh.face1_metric, gas, walls)
    pL, pR = reconstruct(P, 1, limiter)
    F2 = llf_flux(pL, pR, mesh.face2_metric, gas, 2)
    return F1, F2


def _block_residual(P, mesh: Mesh, gas: GasModel, limiter: str, walls: Tuple[bool, bool], i0: int, i1: int):
    g = N_GHOST
    # rows i0..i1-1 need padded rows i0..i1+2g-1
    sub = P[i0 : i1 + 2 * g]
    pL, pR = reconstruct(sub, 0, limiter)
    block_walls = (walls[0] and i0 == 0, walls[1] and i1 == mesh.n1)
    F1 = _xi1_fluxes(pL, pR, mesh.face1_metric[i0 : i1 + 1], gas, block_walls)
    pL, pR = reconstruct(sub, 1, limiter)
    F2 = llf_flux(pL, pR, mesh.face2_metric[i0:i1], gas, 2)
    p_cells = sub[g:-g, g:-g]
    S = flux.geometric_source(p_cells, mesh.cell_metric[i0:i1], gas)
    return (F1[1:] - F1[:-1]) / mesh.d1 + (F2[:, 1:] - F2[:, :-1]) / mesh.d2 + S


def semidiscrete_residual(
    p: np.ndarray,
    mesh: Mesh,
    gas: GasModel,
    ghosts: GhostFiller,
    limiter: str = "first-order",
    forcing: Optional[np.ndarray] = None,
    threads: int = 1,
    wall_flux_kind: str = "pressure",
) -> np.ndarray:
    """Residual of every cell for interior primitives p of shape (n1, n2, 5).

    Args:
        p (np.ndarray): interior primitive field
        mesh (Mesh): mesh with cached metric tables
        gas (GasModel): equation of state
        ghosts (GhostFiller): boundary conditions bound to the mesh
        limiter (str): reconstruction, "first-order" or "minmod"
        forcing (np.ndarray, optional): per-cell source subtracted from R
        threads (int): worker threads; rows are split into fixed blocks
        wall_flux_kind (str): "pressure" for the exact slip-wall flux on wall faces,
            "llf" to treat them like any other face against the mirrored ghost

    Returns:
        np.ndarray: R of shape (n1, n2, 5)
    """
    walls = _wall_faces(ghosts, wall_flux_kind)
    P = ghosts.pad(p)
    blocks = row_blocks(mesh.n1, threads)
    if threads > 1 and len(blocks) > 1:
        parts = Parallel(n_jobs=threads, backend="threading")(
            delayed(_block_residual)(P, mesh, gas, limiter, walls, i0, i1) for i0, i1 in blocks
        )
    else:
        parts = [_block_residual(P, mesh, gas, limiter, walls, i0, i1) for i0, i1 in blocks]
    R = np.concatenate(parts, axis=0)
    if forcing is not None:
        R = R - forcing
    return R


def divergence_and_source(
    p: np.ndarray,
    mesh: Mesh,
    gas: GasModel,
    ghosts: GhostFiller,
    limiter: str = "first-order",
    wall_flux_kind: str = "pressure",
):
    """The two parts of the residual separately, plus the face fluxes they came from."""
    P = ghosts.pad(p)
    F1, F2 = face_fluxes(P, mesh, gas, limiter, _wall_faces(ghosts, wall_flux_kind))
    div = (F1[1:] - F1[:-1]) / mesh.d1 + (F2[:, 1:] - F2[:, :-1]) / mesh.d2
    S = flux.geometric_source(p, mesh.cell_metric, gas)
    return div, S, F1, F2
