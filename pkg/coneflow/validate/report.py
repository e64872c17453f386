"""Verification suites and the pass/fail report they produce."""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from coneflow import flux
from coneflow.classify import (
    potential_eigenvalues,
    potential_system_matrices,
    steady_eigenvalues,
    unsteady_wave_speeds,
)
from coneflow.exceptions import VerificationFailure
from coneflow.gas import GasModel, IdealGas
from coneflow.geometry import MetricData, spherical_chart
from coneflow.state import V1, V3, crossflow_speed_squared
from coneflow.utils import generate_spd_metric
from coneflow.validate.manufactured import (
    ManufacturedField,
    oracle_discrepancy,
    random_primitive_states,
    spherical_residual_oracle,
)
from coneflow.validate.mms import mms_convergence
from coneflow.validate.taylor_maccoll import taylor_maccoll

logger = logging.getLogger(__name__)

SUITES = ("oracle", "eigen", "mms", "taylor-maccoll")
REPORT_COLUMNS = ["suite", "key", "value", "tolerance", "passed"]


@dataclass
class VerificationReport:
    results: pd.DataFrame

    @property
    def passed(self) -> bool:
        return bool(self.results["passed"].all())

    def to_text(self) -> str:
        return self.results.to_string(index=False)

    def to_csv(self, path: str) -> None:
        out = self.results.assign(key=self.results["suite"] + "." + self.results["key"])
        out[["key", "value", "passed", "tolerance"]].to_csv(path, index=False, float_format="%.6e")


def _check(suite: str, key: str, value: float, tolerance: str, passed: bool) -> dict:
    return {"suite": suite, "key": key, "value": float(value), "tolerance": tolerance, "passed": bool(passed)}


def _row(suite: str, key: str, value: float, tolerance: float) -> dict:
    return _check(suite, key, value, f"<= {tolerance:g}", value <= tolerance)


def _range_row(suite: str, key: str, value: float, lo: float, hi: float) -> dict:
    return _check(suite, key, value, f"[{lo:g}, {hi:g}]", np.isfinite(value) and lo <= value <= hi)


def flux_jacobian_fd(
    p: np.ndarray, metric: MetricData, gas: GasModel, alpha: int, rel_step: float = 1e-6
) -> np.ndarray:
    """Central finite-difference d F^alpha / d primitives, shape (..., 5, 5)."""
    cols = []
    for k in range(5):
        h = rel_step * np.maximum(1.0, np.abs(p[..., k]))
        dp = np.zeros_like(p)
        dp[..., k] = h
        fp = flux.physical_flux(p + dp, metric, alpha, gas)
        fm = flux.physical_flux(p - dp, metric, alpha, gas)
        cols.append((fp - fm) / (2.0 * h[..., None]))
    return np.stack(cols, axis=-1)


def _random_metric(rng, n) -> MetricData:
    return MetricData.from_lower(generate_spd_metric(n, rng))


def _match_spectrum(closed: np.ndarray, numeric: np.ndarray) -> float:
    """Largest relative distance from each closed-form value to the nearest numeric eigenvalue."""
    dist = np.abs(closed[..., :, None] - numeric[..., None, :]).min(axis=-1)
    return float(np.max(dist / np.maximum(1.0, np.abs(closed))))


def oracle_suite(rng: np.random.Generator, gas: GasModel, n_fields: int = 20) -> List[dict]:
    chart = spherical_chart(0.2, np.pi - 0.2)
    worst = 0.0
    for _ in range(n_fields):
        field = ManufacturedField.random(rng)
        phi = rng.uniform(0.3, np.pi - 0.3, 50)
        theta = rng.uniform(0.0, 2 * np.pi, 50)
        worst = max(worst, oracle_discrepancy(field, chart, phi, theta, gas))
    phi = rng.uniform(0.3, np.pi - 0.3, 50)
    theta = rng.uniform(0.0, 2 * np.pi, 50)
    axial = np.abs(spherical_residual_oracle(ManufacturedField.axial_freestream(2.0), phi, theta, gas)).max()
    return [
        _row("oracle", "spherical_equivalence", worst, 1e-10),
        _row("oracle", "axial_freestream_residual", axial, 1e-12),
    ]


def jacobian_error(rng, gas: GasModel, n: int = 200) -> float:
    metric = _random_metric(rng, n)
    p = random_primitive_states(rng, metric.g_lo, gas)
    worst = 0.0
    for alpha in (1, 2):
        A = flux.jacobian_A(p, metric, gas, alpha)
        fd = flux_jacobian_fd(p, metric, gas, alpha)
        err = np.abs(A - fd).max(axis=(-1, -2)) / np.abs(A).max(axis=(-1, -2))
        worst = max(worst, float(err.max()))
    return worst


def hyperbolic_states(rng, gas: GasModel, n: int):
    """Supersonic-crossflow states with a usable time-like xi^1."""
    metric = _random_metric(rng, 2 * n)
    p = random_primitive_states(rng, metric.g_lo, gas, mach_range=(1.1, 3.0))
    c = gas.sound_speed(p[:, 0], p[:, 4])
    g11 = metric.g_up[:, 0, 0]
    timelike = np.abs(p[:, V1]) > 0.1 * c * np.sqrt(g11)
    keep = timelike & (np.abs(p[:, V1] ** 2 - g11 * c * c) > 0.1 * g11 * c * c)
    idx = np.flatnonzero(keep)[:n]
    return p[idx], metric[idx]


def steady_spectrum_error(rng, gas: GasModel, n: int = 1000):
    p, metric = hyperbolic_states(rng, gas, n)
    closed = steady_eigenvalues(p, metric, gas)
    A1 = flux.jacobian_A(p, metric, gas, 1)
    A2 = flux.jacobian_A(p, metric, gas, 2)
    numeric = np.linalg.eigvals(np.linalg.solve(A1, A2))
    acoustic = _match_spectrum(closed[:, 3:], numeric)
    # multiplicity: three numeric eigenvalues sit on v2/v1
    convective = closed[:, :1]
    dist = np.sort(np.abs(numeric - convective) / np.maximum(1.0, np.abs(convective)), axis=-1)[:, :3]
    return acoustic, float(dist.max())


def unsteady_spectrum_error(rng, gas: GasModel, n: int = 500) -> float:
    metric = _random_metric(rng, n)
    p = random_primitive_states(rng, metric.g_lo, gas, mach_range=(0.0, 3.0))
    u = rng.normal(size=(n, 2))
    w = u / np.sqrt(np.einsum("nab,na,nb->n", metric.g_up, u, u))[:, None]
    closed = unsteady_wave_speeds(p, metric, gas, w)
    A = w[:, 0, None, None] * flux.jacobian_A(p, metric, gas, 1)
    A = A + w[:, 1, None, None] * flux.jacobian_A(p, metric, gas, 2)
    numeric = np.linalg.eigvals(np.linalg.solve(flux.jacobian_A0(p, metric), A))
    imag = float(np.abs(numeric.imag).max())
    real = np.sort(numeric.real, axis=-1)
    scale = np.maximum(1.0, np.abs(closed).max(axis=-1, keepdims=True))
    diff = np.abs(real - np.sort(closed, axis=-1)) / scale
    return max(imag, float(diff.max()))


def potential_errors(rng, gas: GasModel, n: int = 500):
    p, metric = hyperbolic_states(rng, gas, n)
    pair = potential_eigenvalues(p, metric, gas)
    full = steady_eigenvalues(p, metric, gas)
    same = float(np.abs(pair - full[:, 3:]).max())
    L, M = potential_system_matrices(p, metric, gas)
    numeric = np.linalg.eigvals(np.linalg.solve(L, M))
    return same, _match_spectrum(pair, numeric)


def sonic_bisection_error(gas: GasModel, tol: float = 1e-12) -> float:
    """Distance between the bisected real-to-complex flip of the acoustic pair and q_c = c."""
    metric = MetricData.from_lower(np.array([[1.3, 0.2], [0.2, 0.8]]))
    base = np.array([1.0, 0.9, 0.3, 0.5, 2.0])
    c = float(gas.sound_speed(base[0], base[4]))
    q = float(np.sqrt(crossflow_speed_squared(base, metric)))

    def is_real(s):
        p = base.copy()
        p[V1:V3] *= s
        return abs(potential_eigenvalues(p, metric, gas)[1].imag) == 0.0

    lo, hi = 0.5 * c / q, 2.0 * c / q
    assert not is_real(lo) and is_real(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_real(mid):
            hi = mid
        else:
            lo = mid
    return abs(0.5 * (lo + hi) - c / q)


def eigen_suite(rng: np.random.Generator, gas: GasModel) -> List[dict]:
    acoustic, triple = steady_spectrum_error(rng, gas)
    same, potential_numeric = potential_errors(rng, gas)
    return [
        _row("eigen", "jacobian_fd", jacobian_error(rng, gas), 1e-6),
        _row("eigen", "steady_acoustic_pair", acoustic, 1e-8),
        _row("eigen", "steady_triple_root", triple, 1e-7),
        _row("eigen", "unsteady_speeds", unsteady_spectrum_error(rng, gas), 1e-8),
        _row("eigen", "potential_vs_full", same, 1e-12),
        _row("eigen", "potential_numeric", potential_numeric, 1e-8),
        _row("eigen", "sonic_flip_location", sonic_bisection_error(gas), 1e-10),
    ]


def mms_suite(
    rng: np.random.Generator,
    gas: GasModel,
    threads: Optional[int] = None,
    meshes: Sequence[int] = (32, 64, 128),
) -> List[dict]:
    rows = []
    for limiter, lo, hi in (("first-order", 0.8, 1.3), ("minmod", 1.7, 2.3)):
        try:
            result = mms_convergence(meshes=meshes, gas=gas, limiter=limiter, threads=threads)
        except VerificationFailure as e:
            logger.warning(str(e))
            rows.append(_check("mms", f"{limiter}.monotone", np.nan, "decreasing", False))
            continue
        for eq, order in result.final_orders.items():
            rows.append(_range_row("mms", f"{limiter}.{eq}", order, lo, hi))
    return rows


def taylor_maccoll_suite(rng: np.random.Generator, gas: GasModel) -> List[dict]:
    gamma = getattr(gas, "gamma", 1.4)
    tm = taylor_maccoll(2.0, np.radians(10.0), gamma)
    return [
        _row("taylor-maccoll", "surface_normal_velocity", abs(tm.surface_normal_velocity), 1e-10),
        _check(
            "taylor-maccoll",
            "shock_angle_deg",
            np.degrees(tm.shock_angle),
            "> cone angle",
            tm.shock_angle > tm.cone_angle,
        ),
        _check(
            "taylor-maccoll",
            "surface_pressure_ratio",
            tm.surface_pressure_ratio,
            "> 1",
            tm.surface_pressure_ratio > 1.0,
        ),
    ]


SUITE_RUNNERS: Dict[str, Callable] = {
    "oracle": oracle_suite,
    "eigen": eigen_suite,
    "mms": mms_suite,
    "taylor-maccoll": taylor_maccoll_suite,
}


def run_verification(
    suites: Sequence[str] = SUITES,
    gas: Optional[GasModel] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> VerificationReport:
    """Run the selected suites and collect one row per check.

    Args:
        suites (Sequence[str]): any of "oracle", "eigen", "mms", "taylor-maccoll"
        gas (GasModel): defaults to IdealGas()
        seed (int): seed for the random states and fields
        threads (int): worker threads for the MMS meshes

    Returns:
        VerificationReport
    """
    if not suites:
        raise ValueError("No verification suites selected")
    unknown = [s for s in suites if s not in SUITE_RUNNERS]
    if unknown:
        raise ValueError(f"Unknown suite(s) {unknown}; valid values are {list(SUITES)}")
    gas = IdealGas() if gas is None else gas
    rng = np.random.default_rng(seed)
    rows = []
    for name in suites:
        logger.info(f"Running verification suite {name}")
        if name == "mms":
            rows.extend(mms_suite(rng, gas, threads))
        else:
            rows.extend(SUITE_RUNNERS[name](rng, gas))
    return VerificationReport(pd.DataFrame(rows, columns=REPORT_COLUMNS))
