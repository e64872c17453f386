"""Ghost-cell boundary conditions on the four sides of the chart rectangle.

Primitive fields are padded with N_GHOST layers; ghost layer k (1-based, counted
outward from the boundary) is filled from interior cell k - 1 for walls, from the
projected freestream for far-field sides, and from a callable for Dirichlet data.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from coneflow.state import V1, V3, FreestreamSpec, project_freestream
from coneflow.solver.mesh import N_GHOST, Mesh

logger = logging.getLogger(__name__)

SIDES = ("xi1_lo", "xi1_hi", "xi2_lo", "xi2_hi")
SIDE_KINDS = ("wall", "freestream", "dirichlet", "periodic")


@dataclass(frozen=True)
class BoundarySpec:
    kind: str
    fun: Optional[Callable] = None

    def __post_init__(self):
        assert self.kind in SIDE_KINDS, f"Unknown boundary kind {self.kind!r}"
        if self.kind == "dirichlet":
            assert callable(self.fun), "Dirichlet boundaries need a callable (xi1, xi2) -> primitives"


@dataclass(frozen=True)
class BoundaryConditions:
    xi1_lo: BoundarySpec
    xi1_hi: BoundarySpec
    xi2_lo: BoundarySpec = BoundarySpec("periodic")
    xi2_hi: BoundarySpec = BoundarySpec("periodic")
    freestream: Optional[FreestreamSpec] = None

    def __post_init__(self):
        for side in ("xi2_lo", "xi2_hi"):
            assert getattr(self, side).kind != "wall", "Walls are only supported on xi^1 sides"
        assert (self.xi2_lo.kind == "periodic") == (self.xi2_hi.kind == "periodic"), (
            "Periodicity must be set on both xi^2 sides"
        )
        if any(getattr(self, s).kind == "freestream" for s in SIDES):
            assert self.freestream is not None, "Freestream boundaries need a FreestreamSpec"

    @classmethod
    def cone(
        cls, freestream: FreestreamSpec, inner: str = "wall", outer: str = "freestream"
    ) -> "BoundaryConditions":
        return cls(xi1_lo=BoundarySpec(inner), xi1_hi=BoundarySpec(outer), freestream=freestream)

    @classmethod
    def dirichlet(cls, fun: Callable, periodic: bool = False) -> "BoundaryConditions":
        spec = BoundarySpec("dirichlet", fun)
        side2 = BoundarySpec("periodic") if periodic else spec
        return cls(xi1_lo=spec, xi1_hi=spec, xi2_lo=side2, xi2_hi=side2)


def _remove_normal_velocity(p: np.ndarray, g_up: np.ndarray, times: float) -> np.ndarray:
    out = np.array(p, dtype=float, copy=True)
    v1 = p[..., V1]
    g11 = g_up[..., 0, 0]
    out[..., V1:V3] = p[..., V1:V3] - times * (v1 / g11)[..., None] * g_up[..., :, 0]
    return out


def reflect_wall_velocity(p: np.ndarray, g_up: np.ndarray) -> np.ndarray:
    """Mirror the xi^1-normal part of the crossflow: v'^a = v^a - 2 v^1 g^{a1} / g^{11}.

    The tangential part, V3, rho and e are kept.
    """
    return _remove_normal_velocity(p, g_up, 2.0)


def tangential_wall_velocity(p: np.ndarray, g_up: np.ndarray) -> np.ndarray:
    """Drop the xi^1-normal part of the crossflow, leaving v'^1 = 0."""
    return _remove_normal_velocity(p, g_up, 1.0)


class GhostFiller:
    """Fills the ghost layers of padded primitive arrays for one mesh.

    Static ghost data (freestream, Dirichlet) is evaluated once at construction.
    """

    def __init__(self, mesh: Mesh, bcs: BoundaryConditions):
        assert mesh.periodic == (bcs.xi2_lo.kind == "periodic"), (
            "xi^2 periodicity of the boundary conditions must match the chart"
        )
        self.mesh = mesh
        self.bcs = bcs
        self.static: Dict[str, np.ndarray] = {}
        X1, X2 = mesh.padded_centers()
        g = N_GHOST
        index = {
            "xi1_lo": (slice(0, g), slice(None)),
            "xi1_hi": (slice(g + mesh.n1, None), slice(None)),
            "xi2_lo": (slice(None), slice(0, g)),
            "xi2_hi": (slice(None), slice(g + mesh.n2, None)),
        }
        self.index = index
        for side in SIDES:
            spec = getattr(bcs, side)
            x1, x2 = X1[index[side]], X2[index[side]]
            if spec.kind == "freestream":
                self.static[side] = project_freestream(bcs.freestream, mesh.chart, x1, x2)
            elif spec.kind == "dirichlet":
                self.static[side] = np.asarray(spec.fun(x1, x2), dtype=float)

    @property
    def walls(self) -> Tuple[bool, bool]:
        """Whether the xi1_lo and xi1_hi sides are slip walls."""
        return self.bcs.xi1_lo.kind == "wall", self.bcs.xi1_hi.kind == "wall"

    def pad(self, p: np.ndarray) -> np.ndarray:
        """Interior primitives (n1, n2, 5) -> padded array (n1 + 4, n2 + 4, 5)."""
        mesh, g = self.mesh, N_GHOST
        assert p.shape == (mesh.n1, mesh.n2, 5), f"Expected {(mesh.n1, mesh.n2, 5)}, got {p.shape}"
        P = np.empty((mesh.n1 + 2 * g, mesh.n2 + 2 * g, 5))
        P[g:-g, g:-g] = p
        self._fill_xi1(P)
        self._fill_xi2(P)
        return P

    def _fill_xi1(self, P: np.ndarray) -> None:
        mesh, g = self.mesh, N_GHOST
        interior = slice(g, g + mesh.n2)
        for side, face in (("xi1_lo", 0), ("xi1_hi", mesh.n1)):
            spec = getattr(self.bcs, side)
            if spec.kind == "wall":
                g_up = mesh.face1_metric.g_up[face]
                for k in range(1, g + 1):
                    if side == "xi1_lo":
                        P[g - k, interior] = reflect_wall_velocity(P[g + k - 1, interior], g_up)
                    else:
                        P[g + mesh.n1 + k - 1, interior] = reflect_wall_velocity(
                            P[g + mesh.n1 - k, interior], g_up
                        )
            elif spec.kind in ("freestream", "dirichlet"):
                rows = self.index[side][0]
                P[rows, interior] = self.static[side][:, interior]
            else:
                raise ValueError(f"Boundary kind {spec.kind!r} is not valid on {side}")

    def _fill_xi2(self, P: np.ndarray) -> None:
        mesh, g = self.mesh, N_GHOST
        if self.bcs.xi2_lo.kind == "periodic":
            P[:, :g] = P[:, mesh.n2 : mesh.n2 + g]
            P[:, g + mesh.n2 :] = P[:, g : 2 * g]
            return
        for side in ("xi2_lo", "xi2_hi"):
            cols = self.index[side][1]
            P[:, cols] = self.static[side]


def apply_boundary_conditions(p: np.ndarray, mesh: Mesh, bcs: BoundaryConditions) -> np.ndarray:
    """Pad interior primitives with ghost layers; see GhostFiller for repeated use."""
    return GhostFiller(mesh, bcs).pad(p)
