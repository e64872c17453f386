import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from coneflow.exceptions import UnconvergedSolutionError
from coneflow.gas import GasModel
from coneflow.state import FreestreamSpec, pressure_field
from coneflow.solver.marching import Solution
from coneflow.solver.mesh import Mesh
from coneflow.validate.taylor_maccoll import TaylorMaccollSolution

logger = logging.getLogger(__name__)


def freestream_dynamic_pressure(fs: FreestreamSpec) -> float:
    return 0.5 * fs.rho_inf * fs.speed**2


def surface_pressure(sol: Solution, mesh: Mesh, gas: GasModel) -> Tuple[np.ndarray, np.ndarray]:
    """Body pressure per azimuth, linearly extrapolated from the two wall-adjacent cells.

    Returns:
        (xi2 centers, pressure on the xi1 = lower face)
    """
    P = pressure_field(sol.primitive(mesh, gas), gas)
    return mesh.xi2_centers, 1.5 * P[0] - 0.5 * P[1]


def surface_pressure_coefficient(
    sol: Solution, mesh: Mesh, gas: GasModel, fs: FreestreamSpec
) -> Tuple[np.ndarray, np.ndarray]:
    theta, p_wall = surface_pressure(sol, mesh, gas)
    p_inf = float(gas.pressure(fs.rho_inf, fs.e_inf)[0])
    return theta, (p_wall - p_inf) / freestream_dynamic_pressure(fs)


@dataclass(frozen=True)
class SurfaceComparison:
    cp_mean: float
    cp_std: float
    cp_reference: float
    relative_error: float
    pressure_ratio_mean: float
    pressure_ratio_reference: float

    @property
    def std_over_mean(self) -> float:
        return abs(self.cp_std / self.cp_mean) if self.cp_mean else float("inf")

    def to_dict(self) -> dict:
        return {
            "cp_mean": self.cp_mean,
            "cp_std": self.cp_std,
            "cp_reference": self.cp_reference,
            "relative_error": self.relative_error,
            "pressure_ratio_mean": self.pressure_ratio_mean,
            "pressure_ratio_reference": self.pressure_ratio_reference,
            "std_over_mean": self.std_over_mean,
        }


def compare_surface_pressure(
    sol: Solution, mesh: Mesh, gas: GasModel, fs: FreestreamSpec, tm: TaylorMaccollSolution
) -> SurfaceComparison:
    """Azimuthal mean and spread of the body pressure coefficient against the reference cone flow.

    Raises:
        UnconvergedSolutionError: if the solution did not reach its residual threshold
    """
    if not sol.converged:
        raise UnconvergedSolutionError(
            f"Refusing to compare an unconverged solution (status {sol.status}, {sol.iterations} iterations)"
        )
    _, cp = surface_pressure_coefficient(sol, mesh, gas, fs)
    _, p_wall = surface_pressure(sol, mesh, gas)
    p_inf = float(gas.pressure(fs.rho_inf, fs.e_inf)[0])
    cp_mean = float(np.mean(cp))
    result = SurfaceComparison(
        cp_mean=cp_mean,
        cp_std=float(np.std(cp)),
        cp_reference=tm.surface_cp,
        relative_error=abs(cp_mean - tm.surface_cp) / abs(tm.surface_cp),
        pressure_ratio_mean=float(np.mean(p_wall)) / p_inf,
        pressure_ratio_reference=tm.surface_pressure_ratio,
    )
    logger.info(
        f"Surface cp {result.cp_mean:.5f} vs reference {result.cp_reference:.5f} "
        f"({100 * result.relative_error:.2f}% off)"
    )
    return result
