"""Fluxes, geometric sources and Jacobians of the conical Euler system.

The steady system reads d/dxi^b F^b(U) + S(U) = 0 with U the conserved vector
sqrt(g) (rho, rho v1, rho v2, rho V3, rho E). All functions take primitive arrays of
shape (..., 5) and MetricData with matching leading shape; directions are 1-based
(alpha in {1, 2}) to keep the component names readable.
"""
import numpy as np

from coneflow.exceptions import InvalidStateError
from coneflow.gas import GasModel
from coneflow.geometry import MetricData, MetricDerivatives
from coneflow.state import RHO, V1, V2, V3, E, as_array, crossflow_speed_squared, total_energy
from coneflow.utils import lower_index


def _check_direction(alpha: int) -> int:
    assert alpha in (1, 2), f"Direction must be 1 or 2, got {alpha}"
    return alpha - 1


def physical_flux(p, metric: MetricData, alpha: int, gas: GasModel) -> np.ndarray:
    """F^alpha = sqrt(g) (rho v^a, rho v^1 v^a + g^{1a} P, rho v^2 v^a + g^{2a} P,
    rho V3 v^a, (rho E + P) v^a)
    """
    a = _check_direction(alpha)
    p = as_array(p)
    rho, v, w3 = p[..., RHO], p[..., V1:V3], p[..., V3]
    P = gas.pressure(rho, p[..., E])[0]
    Et = total_energy(p, metric)
    sg = metric.sqrt_g
    va = v[..., a]
    F = np.empty(np.broadcast_shapes(p.shape, sg.shape + (5,)))
    F[..., 0] = sg * rho * va
    F[..., 1] = sg * (rho * v[..., 0] * va + metric.g_up[..., 0, a] * P)
    F[..., 2] = sg * (rho * v[..., 1] * va + metric.g_up[..., 1, a] * P)
    F[..., 3] = sg * rho * w3 * va
    F[..., 4] = sg * (rho * Et + P) * va
    return F


def physical_fluxes(p, metric: MetricData, gas: GasModel) -> np.ndarray:
    """Both directions stacked on axis -2: result[..., a - 1, :] = F^a."""
    return np.stack([physical_flux(p, metric, a, gas) for a in (1, 2)], axis=-2)


def geometric_source(p, metric: MetricData, gas: GasModel) -> np.ndarray:
    """S = (2 rho sqrt(g) V3,
    Gamma_c^k_n sqrt(g) (rho v^c v^n + g^{cn} P) + 3 rho sqrt(g) v^k V3,
    2 rho sqrt(g) V3^2 - rho sqrt(g) q_c^2,
    2 sqrt(g) (rho E + P) V3)
    """
    p = as_array(p)
    rho, v, w3 = p[..., RHO], p[..., V1:V3], p[..., V3]
    P = gas.pressure(rho, p[..., E])[0]
    sg = metric.sqrt_g
    stress = rho[..., None, None] * v[..., :, None] * v[..., None, :] + metric.g_up * P[..., None, None]
    S = np.empty(np.broadcast_shapes(p.shape, sg.shape + (5,)))
    S[..., 0] = 2.0 * rho * sg * w3
    S[..., 1:3] = sg[..., None] * (
        np.einsum("...kcn,...cn->...k", metric.gamma, stress)
        + 3.0 * rho[..., None] * v * w3[..., None]
    )
    S[..., 3] = rho * sg * (2.0 * w3 * w3 - crossflow_speed_squared(p, metric))
    S[..., 4] = 2.0 * sg * (rho * total_energy(p, metric) + P) * w3
    return S


def jacobian_A(p, metric: MetricData, gas: GasModel, alpha: int) -> np.ndarray:
    """dF^alpha / d(rho, v1, v2, V3, e), shape (..., 5, 5)."""
    a = _check_direction(alpha)
    p = as_array(p)
    rho, v, w3, e = p[..., RHO], p[..., V1:V3], p[..., V3], p[..., E]
    P, P_rho, P_e = gas.pressure(rho, e)
    Et = total_energy(p, metric)
    v_lo = lower_index(metric.g_lo, v)
    va = v[..., a]
    delta = np.eye(2)[a]

    A = np.zeros(np.broadcast_shapes(p.shape, metric.sqrt_g.shape + (5,)) + (5,))
    A[..., 0, 0] = va
    A[..., 0, 1] = rho * delta[0]
    A[..., 0, 2] = rho * delta[1]
    for k in (0, 1):
        row = k + 1
        A[..., row, 0] = v[..., k] * va + metric.g_up[..., k, a] * P_rho
        for b in (0, 1):
            A[..., row, b + 1] = rho * ((k == b) * va + v[..., k] * delta[b])
        A[..., row, 4] = metric.g_up[..., k, a] * P_e
    A[..., 3, 0] = w3 * va
    A[..., 3, 1] = rho * w3 * delta[0]
    A[..., 3, 2] = rho * w3 * delta[1]
    A[..., 3, 3] = rho * va
    A[..., 4, 0] = va * (Et + P_rho)
    for b in (0, 1):
        A[..., 4, b + 1] = rho * v_lo[..., b] * va + (rho * Et + P) * delta[b]
    A[..., 4, 3] = rho * w3 * va
    A[..., 4, 4] = va * (rho + P_e)
    return metric.sqrt_g[..., None, None] * A


def jacobian_A0(p, metric: MetricData) -> np.ndarray:
    """dU / d(rho, v1, v2, V3, e); lower triangular with det = g^(5/2) rho^4."""
    p = as_array(p)
    rho, v, w3 = p[..., RHO], p[..., V1:V3], p[..., V3]
    if np.any(rho <= 0) or np.any(metric.sqrt_g <= 0):
        raise InvalidStateError("A0 is singular for non-positive density or sqrt(g)")
    v_lo = lower_index(metric.g_lo, v)
    A0 = np.zeros(np.broadcast_shapes(p.shape, metric.sqrt_g.shape + (5,)) + (5,))
    A0[..., 0, 0] = 1.0
    A0[..., 1, 0] = v[..., 0]
    A0[..., 1, 1] = rho
    A0[..., 2, 0] = v[..., 1]
    A0[..., 2, 2] = rho
    A0[..., 3, 0] = w3
    A0[..., 3, 3] = rho
    A0[..., 4, 0] = total_energy(p, metric)
    A0[..., 4, 1] = rho * v_lo[..., 0]
    A0[..., 4, 2] = rho * v_lo[..., 1]
    A0[..., 4, 3] = rho * w3
    A0[..., 4, 4] = rho
    return metric.sqrt_g[..., None, None] * A0


def flux_divergence(
    p, dp: np.ndarray, metric: MetricData, dmetric: MetricDerivatives, gas: GasModel
) -> np.ndarray:
    """Analytic d/dxi^b F^b from primitive gradients and metric derivatives.

    Args:
        p: primitive state, shape (..., 5)
        dp (np.ndarray): gradients, dp[..., b, :] = d p / d xi^(b+1)
        metric (MetricData): metric at the same points
        dmetric (MetricDerivatives): metric derivatives at the same points
        gas (GasModel): equation of state

    Returns:
        np.ndarray: divergence, shape (..., 5)
    """
    p = as_array(p)
    rho, v, w3 = p[..., RHO], p[..., V1:V3], p[..., V3]
    P = gas.pressure(rho, p[..., E])[0]
    Et = total_energy(p, metric)
    sg = metric.sqrt_g

    div = sum(
        np.einsum("...ij,...j->...i", jacobian_A(p, metric, gas, b + 1), dp[..., b, :])
        for b in (0, 1)
    )
    # derivatives of the metric factors at fixed primitives
    dsg_v = np.einsum("...b,...b->...", dmetric.d_sqrt_g, v)
    explicit = np.zeros_like(div)
    explicit[..., 0] = dsg_v * rho
    for k in (0, 1):
        explicit[..., k + 1] = (
            rho * v[..., k] * dsg_v
            + np.einsum("...b,...b->...", dmetric.d_sqrt_g, metric.g_up[..., k, :]) * P
            + sg * np.einsum("...bb->...", dmetric.d_g_up[..., :, k, :]) * P
        )
    explicit[..., 3] = dsg_v * rho * w3
    dE = 0.5 * np.einsum("...bcd,...c,...d->...b", dmetric.d_g_lo, v, v)
    explicit[..., 4] = dsg_v * (rho * Et + P) + sg * rho * np.einsum("...b,...b->...", v, dE)
    return div + explicit


def radial_momentum_nonconservative(p, dV3: np.ndarray, metric: MetricData) -> np.ndarray:
    """Residual of the nonconservative radial equation, v^a dV3/dxi^a - q_c^2."""
    p = as_array(p)
    return np.einsum("...a,...a->...", p[..., V1:V3], dV3) - crossflow_speed_squared(p, metric)
