"""Smooth analytic fields with exact derivatives, and the analytic residuals they induce."""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from coneflow import flux
from coneflow.gas import GasModel
from coneflow.geometry import Chart, MetricData
from coneflow.state import E, RHO, V1, V2, V3

DEFAULT_PATCH = ((0.6, 1.0), (0.2, 0.7))


@dataclass(frozen=True)
class TrigComponent:
    """c0 + a sin(k1 xi1 + k2 xi2 + phase)"""

    c0: float
    a: float
    k1: float
    k2: float
    phase: float = 0.0

    def value(self, xi1, xi2) -> np.ndarray:
        return self.c0 + self.a * np.sin(self.k1 * xi1 + self.k2 * xi2 + self.phase)

    def gradient(self, xi1, xi2) -> np.ndarray:
        c = self.a * np.cos(self.k1 * xi1 + self.k2 * xi2 + self.phase)
        return np.stack(np.broadcast_arrays(self.k1 * c, self.k2 * c), axis=-1)


@dataclass(frozen=True)
class ManufacturedField:
    """Analytic primitive field (rho, v1, v2, V3, e) over chart coordinates."""

    components: Tuple[TrigComponent, TrigComponent, TrigComponent, TrigComponent, TrigComponent]

    def __post_init__(self):
        assert len(self.components) == 5, "A manufactured field needs five components"

    def primitive(self, xi1, xi2) -> np.ndarray:
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return np.stack([c.value(xi1, xi2) for c in self.components], axis=-1)

    def gradient(self, xi1, xi2) -> np.ndarray:
        """d p / d xi^b stored as [..., b, component]."""
        xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
        return np.stack([c.gradient(xi1, xi2) for c in self.components], axis=-1)

    def check_positive(self, chart: Chart, n: int = 32) -> None:
        p = self.primitive(*chart.sample(n, interior=False))
        assert np.all(p[..., RHO] > 0) and np.all(p[..., E] > 0), (
            "Manufactured density and internal energy must stay positive on the chart"
        )

    @classmethod
    def axial_freestream(cls, speed: float, rho: float = 1.0, e: float = 1.0 / 0.56) -> "ManufacturedField":
        """Uniform stream along +z on the spherical chart: v^phi = -V sin(phi), V3 = V cos(phi)."""
        return cls(
            (
                TrigComponent(rho, 0.0, 0.0, 0.0),
                TrigComponent(0.0, -speed, 1.0, 0.0),
                TrigComponent(0.0, 0.0, 0.0, 0.0),
                TrigComponent(0.0, speed, 1.0, 0.0, np.pi / 2),
                TrigComponent(e, 0.0, 0.0, 0.0),
            )
        )

    @classmethod
    def smooth_patch_field(cls) -> "ManufacturedField":
        """Supersonic-crossflow field for the default spherical patch.

        Every sine argument stays inside (0.1, 1.4) on the patch, so each component is
        monotone and concave there and limited reconstructions keep their design order.
        """
        return cls(
            (
                TrigComponent(1.0, 0.2, 1.0, 0.8, -0.4),
                TrigComponent(1.5, 0.3, 0.8, 1.0, -0.3),
                TrigComponent(1.2, 0.25, 1.2, 0.5, -0.5),
                TrigComponent(2.0, 0.2, 0.9, 0.9, -0.5),
                TrigComponent(1.8, 0.3, 1.1, 0.7, -0.5),
            )
        )

    @classmethod
    def random(cls, rng: Optional[np.random.Generator] = None, amplitude: float = 0.3) -> "ManufacturedField":
        """Random smooth field with rho and e bounded away from zero."""
        rng = np.random.default_rng() if rng is None else rng
        base = (1.0 + rng.uniform(0, 1), *rng.uniform(-1, 1, 3), 1.5 + rng.uniform(0, 1))
        comps = []
        for c0 in base:
            comps.append(
                TrigComponent(
                    c0=float(c0),
                    a=float(amplitude * rng.uniform(-1, 1)),
                    k1=float(rng.uniform(-2, 2)),
                    k2=float(rng.integers(-2, 3)),
                    phase=float(rng.uniform(0, 2 * np.pi)),
                )
            )
        return cls(tuple(comps))


def general_residual(field: ManufacturedField, chart: Chart, xi1, xi2, gas: GasModel) -> np.ndarray:
    """d_b F^b + S of the conical system for an analytic field, shape (..., 5)."""
    xi1, xi2 = np.broadcast_arrays(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))
    p = field.primitive(xi1, xi2)
    dp = field.gradient(xi1, xi2)
    metric = chart.metric(xi1, xi2)
    dmetric = chart.metric_derivatives(xi1, xi2)
    return flux.flux_divergence(p, dp, metric, dmetric, gas) + flux.geometric_source(p, metric, gas)


def transform_to_spherical_form(R: np.ndarray, p: np.ndarray, metric: MetricData) -> np.ndarray:
    """Turn general conservative residuals into the nonconservative spherical-form residuals.

    Subtract v^k (resp. V3) times the mass residual from each momentum residual, then divide
    the xi^1 and radial ones by rho sqrt(g) and the xi^2 one by rho. Returns (..., 4):
    mass, xi^1-momentum, xi^2-momentum, radial momentum.
    """
    rho = p[..., RHO]
    sg = metric.sqrt_g
    mass = R[..., 0]
    out = np.empty(R.shape[:-1] + (4,))
    out[..., 0] = mass
    out[..., 1] = (R[..., 1] - p[..., V1] * mass) / (rho * sg)
    out[..., 2] = (R[..., 2] - p[..., V2] * mass) / rho
    out[..., 3] = (R[..., 3] - p[..., V3] * mass) / (rho * sg)
    return out


def spherical_residual_oracle(field: ManufacturedField, phi, theta, gas: GasModel) -> np.ndarray:
    """Left-hand sides of the conical equations written directly in spherical coordinates.

    The field is read with xi1 = phi and xi2 = theta. Returns (..., 4): mass,
    phi-momentum, theta-momentum and radial momentum.
    """
    phi, theta = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(theta, dtype=float))
    p = field.primitive(phi, theta)
    dp = field.gradient(phi, theta)
    rho, vp, vt, vr, e = (p[..., k] for k in range(5))
    d_phi, d_theta = dp[..., 0, :], dp[..., 1, :]
    _, P_rho, P_e = gas.pressure(rho, e)
    dP_phi = P_rho * d_phi[..., RHO] + P_e * d_phi[..., E]
    dP_theta = P_rho * d_theta[..., RHO] + P_e * d_theta[..., E]
    s, c = np.sin(phi), np.cos(phi)

    out = np.empty(phi.shape + (4,))
    out[..., 0] = (
        (d_phi[..., RHO] * vp + rho * d_phi[..., V1]) * s
        + rho * vp * c
        + (d_theta[..., RHO] * vt + rho * d_theta[..., V2]) * s
        + 2.0 * rho * vr * s
    )
    out[..., 1] = (
        vp * d_phi[..., V1]
        + vt * d_theta[..., V1]
        + dP_phi / rho
        + vp * vr
        - vt * vt * s * c
    )
    out[..., 2] = (
        vp * (d_phi[..., V2] * s + vt * c)
        + vt * s * d_theta[..., V2]
        + dP_theta / (rho * s)
        + vt * vr * s
        + vt * vp * c
    )
    out[..., 3] = vp * d_phi[..., V3] + vt * d_theta[..., V3] - vp * vp - vt * vt * s * s
    return out


def oracle_discrepancy(
    field: ManufacturedField, chart: Chart, phi: Sequence[float], theta: Sequence[float], gas: GasModel
) -> float:
    """Max |transformed general residual - spherical oracle| at the given points."""
    R = general_residual(field, chart, phi, theta, gas)
    p = field.primitive(phi, theta)
    transformed = transform_to_spherical_form(R, p, chart.metric(phi, theta))
    return float(np.max(np.abs(transformed - spherical_residual_oracle(field, phi, theta, gas))))


def random_primitive_states(
    rng: np.random.Generator,
    g_lo: np.ndarray,
    gas: GasModel,
    mach_range: Tuple[float, float] = (0.2, 3.0),
) -> np.ndarray:
    """Random valid states, one per metric in g_lo (n, 2, 2), with q_c / c drawn from mach_range."""
    n = g_lo.shape[0]
    p = np.empty((n, 5))
    p[:, RHO] = rng.uniform(0.5, 2.0, n)
    p[:, E] = rng.uniform(0.5, 3.0, n)
    c = gas.sound_speed(p[:, RHO], p[:, E])
    u = rng.normal(size=(n, 2))
    norm = np.sqrt(np.einsum("nab,na,nb->n", g_lo, u, u))
    m = rng.uniform(*mach_range, n)
    p[:, V1:V3] = (m * c / norm)[:, None] * u
    p[:, V3] = rng.uniform(-1.0, 2.0, n)
    return p
