"""Taylor-Maccoll reference solution for a circular cone at zero incidence.

Shooting method: guess the shock angle, apply the oblique-shock jump, integrate the
conical velocity ODE inward until the normal velocity vanishes, and adjust the shock
angle until that happens on the cone surface. Velocities are scaled by the maximum
(vacuum-expansion) speed, V' = V / V_max.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from coneflow.exceptions import NoAttachedSolutionError

logger = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True)
class ObliqueShock:
    deflection: float
    mach2: float
    pressure_ratio: float
    density_ratio: float
    total_pressure_ratio: float


def oblique_shock(mach: float, shock_angle: float, gamma: float = 1.4) -> ObliqueShock:
    """Downstream state of an oblique shock of given angle.

    Args:
        mach (float): upstream Mach number
        shock_angle (float): shock angle in radians, between the Mach angle and pi/2
        gamma (float): ratio of specific heats

    Returns:
        ObliqueShock
    """
    mn2 = (mach * np.sin(shock_angle)) ** 2
    if mn2 <= 1.0:
        raise ValueError(f"Shock angle {shock_angle} is below the Mach angle for M = {mach}")
    tan_d = 2.0 / np.tan(shock_angle) * (mn2 - 1.0) / (mach**2 * (gamma + np.cos(2 * shock_angle)) + 2.0)
    deflection = float(np.arctan(tan_d))
    pressure_ratio = 1.0 + 2.0 * gamma / (gamma + 1.0) * (mn2 - 1.0)
    density_ratio = (gamma + 1.0) * mn2 / ((gamma - 1.0) * mn2 + 2.0)
    mn2_down = ((gamma - 1.0) * mn2 + 2.0) / (2.0 * gamma * mn2 - (gamma - 1.0))
    mach2 = float(np.sqrt(mn2_down) / np.sin(shock_angle - deflection))
    total_pressure_ratio = density_ratio ** (gamma / (gamma - 1.0)) * (
        (gamma + 1.0) / (2.0 * gamma * mn2 - (gamma - 1.0))
    ) ** (1.0 / (gamma - 1.0))
    return ObliqueShock(
        deflection, mach2, float(pressure_ratio), float(density_ratio), float(total_pressure_ratio)
    )


def _scaled_speed(mach, gamma):
    return 1.0 / np.sqrt(2.0 / ((gamma - 1.0) * mach**2) + 1.0)


def _mach_from_scaled(v, gamma):
    return np.sqrt(2.0 * v**2 / ((1.0 - v**2) * (gamma - 1.0)))


def _tm_rhs(theta, y, gamma):
    vr, vt = y
    a = 0.5 * (gamma - 1.0) * (1.0 - vr * vr - vt * vt)
    d_vt = (vt * vt * vr - a * (2.0 * vr + vt / np.tan(theta))) / (a - vt * vt)
    return [vt, d_vt]


def _normal_velocity_vanishes(theta, y, gamma):
    return y[1]


_normal_velocity_vanishes.terminal = True


def _post_shock_velocity(mach, shock_angle, gamma) -> Tuple[float, float]:
    shock = oblique_shock(mach, shock_angle, gamma)
    v = _scaled_speed(shock.mach2, gamma)
    turn = shock_angle - shock.deflection
    return v * np.cos(turn), -v * np.sin(turn)


def _integrate(mach, shock_angle, gamma, dense=False):
    y0 = _post_shock_velocity(mach, shock_angle, gamma)
    return solve_ivp(
        _tm_rhs,
        [shock_angle, 1e-6],
        y0,
        method="DOP853",
        args=(gamma,),
        events=[_normal_velocity_vanishes],
        dense_output=dense,
        rtol=RTOL,
        atol=ATOL,
    )


def cone_angle_for_shock(mach: float, shock_angle: float, gamma: float = 1.4) -> float:
    """Half-angle of the cone that supports a conical shock of the given angle."""
    sol = _integrate(mach, shock_angle, gamma)
    if len(sol.t_events[0]) == 0:
        return 0.0
    return float(sol.t_events[0][0])


def max_cone_angle(mach: float, gamma: float = 1.4) -> Tuple[float, float]:
    """Largest cone half-angle with an attached shock, and the shock angle that achieves it."""
    mu = float(np.arcsin(1.0 / mach))
    res = minimize_scalar(
        lambda b: -cone_angle_for_shock(mach, b, gamma),
        bounds=(mu * (1.0 + 1e-6), 0.5 * np.pi - 1e-6),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return -float(res.fun), float(res.x)


@dataclass(frozen=True)
class TaylorMaccollSolution:
    """Conical flow between the shock and a circular cone, normalized by the freestream.

    Attributes:
        mach (float): freestream Mach number
        cone_angle (float): cone half-angle (rad)
        gamma (float): ratio of specific heats
        shock_angle (float): shock angle (rad)
        surface_pressure_ratio (float): p_surface / p_inf
        surface_density_ratio (float): rho_surface / rho_inf
        surface_speed_ratio (float): |V_surface| / |V_inf|
        surface_mach (float): Mach number on the surface
        surface_normal_velocity (float): V_theta on the surface over |V_inf|, zero up to round-off
        profile (pd.DataFrame): theta, V_r, V_theta, mach, p_ratio, rho_ratio from surface to shock
    """

    mach: float
    cone_angle: float
    gamma: float
    shock_angle: float
    surface_pressure_ratio: float
    surface_density_ratio: float
    surface_speed_ratio: float
    surface_mach: float
    surface_normal_velocity: float
    profile: pd.DataFrame

    @property
    def surface_cp(self) -> float:
        return pressure_ratio_to_cp(self.mach, self.surface_pressure_ratio, self.gamma)


def pressure_ratio_to_cp(mach: float, pratio, gamma: float = 1.4):
    """cp = (p / p_inf - 1) / (gamma M^2 / 2)"""
    return (pratio - 1.0) / (0.5 * gamma * mach**2)


def taylor_maccoll(
    mach: float, cone_angle: float, gamma: float = 1.4, n_profile: int = 100
) -> TaylorMaccollSolution:
    """Attached-shock conical flow past a circular cone.

    Args:
        mach (float): freestream Mach number, > 1
        cone_angle (float): cone half-angle in radians
        gamma (float): ratio of specific heats
        n_profile (int): samples in the returned profile

    Returns:
        TaylorMaccollSolution

    Raises:
        NoAttachedSolutionError: if the cone is too blunt for an attached shock at this Mach number
    """
    if not mach > 1.0:
        raise NoAttachedSolutionError(f"Conical shocks need a supersonic freestream, got M = {mach}")
    mu = float(np.arcsin(1.0 / mach))
    if cone_angle <= 0.0:
        raise ValueError(f"Cone half-angle must be positive, got {cone_angle}")
    theta_max, beta_max = max_cone_angle(mach, gamma)
    if cone_angle >= theta_max:
        raise NoAttachedSolutionError(
            f"No attached shock for M = {mach} and cone half-angle {np.degrees(cone_angle):.3f} deg "
            f"(maximum {np.degrees(theta_max):.3f} deg)"
        )
    lo = mu * (1.0 + 1e-9)
    shock_angle = brentq(
        lambda b: cone_angle_for_shock(mach, b, gamma) - cone_angle, lo, beta_max, xtol=1e-14
    )
    logger.debug(f"Taylor-Maccoll shock angle {np.degrees(shock_angle):.6f} deg")

    sol = _integrate(mach, shock_angle, gamma, dense=True)
    theta = np.linspace(cone_angle, shock_angle, n_profile)
    vr, vt = sol.sol(theta)
    v = np.hypot(vr, vt)
    mach_profile = _mach_from_scaled(v, gamma)
    shock = oblique_shock(mach, shock_angle, gamma)
    stagnation = 1.0 + 0.5 * (gamma - 1.0) * mach**2
    local = 1.0 + 0.5 * (gamma - 1.0) * mach_profile**2
    p_ratio = shock.total_pressure_ratio * (stagnation / local) ** (gamma / (gamma - 1.0))
    rho_ratio = shock.total_pressure_ratio * (stagnation / local) ** (1.0 / (gamma - 1.0))
    v_inf = _scaled_speed(mach, gamma)
    profile = pd.DataFrame(
        {
            "theta": theta,
            "V_r": vr,
            "V_theta": vt,
            "mach": mach_profile,
            "p_ratio": p_ratio,
            "rho_ratio": rho_ratio,
        }
    )
    return TaylorMaccollSolution(
        mach=float(mach),
        cone_angle=float(cone_angle),
        gamma=float(gamma),
        shock_angle=float(shock_angle),
        surface_pressure_ratio=float(p_ratio[0]),
        surface_density_ratio=float(rho_ratio[0]),
        surface_speed_ratio=float(v[0] / v_inf),
        surface_mach=float(mach_profile[0]),
        surface_normal_velocity=float(vt[0] / v_inf),
        profile=profile,
    )
