"""Coordinate charts on the unit sphere and the metric quantities they induce.

Every chart exposes its unit-radius embedding (xi1, xi2) -> x in R^3 with |x| = 1.
The surface metric g_ab, its inverse, sqrt(g) and the Christoffel symbols
Gamma_c^a_n are evaluated in closed form for the spherical chart and by
finite differences of the embedding for anything else.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from coneflow.exceptions import (
    ChartDegeneracyError,
    ChartDomainError,
    InvalidGeometryError,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
DEFAULT_POLE_MARGIN = 1e-3
DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class MetricData:
    """Metric tensor data at one or many points (leading axes are point axes).

    Attributes:
        g_lo (np.ndarray): g_{ab}, shape (..., 2, 2)
        g_up (np.ndarray): g^{ab}, shape (..., 2, 2)
        sqrt_g (np.ndarray): sqrt(det g_{ab}), shape (...)
        gamma (np.ndarray): Christoffel symbols, gamma[..., a, c, n] = Gamma_c^a_n,
            symmetric in (c, n), shape (..., 2, 2, 2)
    """

    g_lo: np.ndarray
    g_up: np.ndarray
    sqrt_g: np.ndarray
    gamma: np.ndarray

    @property
    def gamma1(self) -> np.ndarray:
        return self.gamma[..., 0, :, :]

    @property
    def gamma2(self) -> np.ndarray:
        return self.gamma[..., 1, :, :]

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.sqrt_g.shape

    def __getitem__(self, idx) -> "MetricData":
        return MetricData(
            g_lo=self.g_lo[idx],
            g_up=self.g_up[idx],
            sqrt_g=self.sqrt_g[idx],
            gamma=self.gamma[idx],
        )

    @classmethod
    def from_lower(cls, g_lo: np.ndarray, gamma: Optional[np.ndarray] = None) -> "MetricData":
        g_lo = np.asarray(g_lo, dtype=float)
        det = g_lo[..., 0, 0] * g_lo[..., 1, 1] - g_lo[..., 0, 1] * g_lo[..., 1, 0]
        if np.any(g_lo[..., 0, 0] <= 0.0) or np.any(det <= 0.0):
            raise ChartDegeneracyError(
                "Metric is not positive definite (folded or degenerate chart)"
            )
        g_up = np.empty_like(g_lo)
        g_up[..., 0, 0] = g_lo[..., 1, 1] / det
        g_up[..., 1, 1] = g_lo[..., 0, 0] / det
        g_up[..., 0, 1] = -g_lo[..., 0, 1] / det
        g_up[..., 1, 0] = -g_lo[..., 1, 0] / det
        if gamma is None:
            gamma = np.zeros(g_lo.shape[:-2] + (2, 2, 2))
        return cls(g_lo=g_lo, g_up=g_up, sqrt_g=np.sqrt(det), gamma=gamma)

    def check(self, atol: float = 1e-10) -> None:
        """Raises if the stored arrays violate the metric invariants."""
        if not np.allclose(self.g_lo, np.swapaxes(self.g_lo, -1, -2), atol=atol, rtol=0):
            raise ChartDegeneracyError("g_lo is not symmetric")
        det = np.linalg.det(self.g_lo)
        if np.any(self.g_lo[..., 0, 0] <= 0) or np.any(det <= 0):
            raise ChartDegeneracyError("g_lo is not positive definite")
        ident = np.einsum("...ij,...jk->...ik", self.g_up, self.g_lo)
        if not np.allclose(ident, np.eye(2), atol=atol, rtol=0):
            raise ChartDegeneracyError("g_up is not the inverse of g_lo")
        if not np.allclose(self.sqrt_g, np.sqrt(det), rtol=1e-12, atol=0):
            raise ChartDegeneracyError("sqrt_g does not match det(g_lo)")
        if not np.allclose(self.gamma, np.swapaxes(self.gamma, -1, -2), atol=atol, rtol=0):
            raise ChartDegeneracyError("Christoffel symbols are not symmetric in the lower pair")


@dataclass(frozen=True)
class MetricDerivatives:
    """First derivatives of the metric quantities; axis -3 / -1 is the derivative index nu.

    Attributes:
        d_sqrt_g (np.ndarray): d sqrt(g) / d xi^nu, shape (..., 2)
        d_g_lo (np.ndarray): d g_{ab} / d xi^nu stored as [..., nu, a, b]
        d_g_up (np.ndarray): d g^{ab} / d xi^nu stored as [..., nu, a, b]
    """

    d_sqrt_g: np.ndarray
    d_g_lo: np.ndarray
    d_g_up: np.ndarray

    @classmethod
    def from_lower(cls, metric: MetricData, d_g_lo: np.ndarray) -> "MetricDerivatives":
        d_g_up = -np.einsum("...ab,...kbc,...cd->...kad", metric.g_up, d_g_lo, metric.g_up)
        d_sqrt_g = 0.5 * metric.sqrt_g[..., None] * np.einsum(
            "...ab,...kab->...k", metric.g_up, d_g_lo
        )
        return cls(d_sqrt_g=d_sqrt_g, d_g_lo=d_g_lo, d_g_up=d_g_up)


def christoffel_from_derivatives(g_up: np.ndarray, d_g_lo: np.ndarray) -> np.ndarray:
    """Gamma_c^a_n = g^{ab}/2 [d_n g_{bc} + d_c g_{bn} - d_b g_{cn}], as gamma[..., a, c, n]."""
    # d_g_lo[..., k, i, j] = d_k g_ij
    first_kind = 0.5 * (
        np.einsum("...nbc->...bcn", d_g_lo)
        + np.einsum("...cbn->...bcn", d_g_lo)
        - np.einsum("...bcn->...bcn", d_g_lo)
    )
    return np.einsum("...ab,...bcn->...acn", g_up, first_kind)


def spherical_point(phi, theta) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    s = np.sin(phi)
    return np.stack(np.broadcast_arrays(s * np.cos(theta), s * np.sin(theta), np.cos(phi)), axis=-1)


def _check_off_pole(phi: np.ndarray, margin: float = 0.0) -> np.ndarray:
    s = np.sin(phi)
    if np.any(np.abs(s) < 1e-14) or np.any(phi <= margin) or np.any(phi >= np.pi - margin):
        raise ChartDomainError(
            "Spherical chart evaluated at (or too close to) a pole; "
            f"need {margin} < phi < pi - {margin}"
        )
    return s


def spherical_metric(phi, theta=0.0) -> MetricData:
    """Closed-form metric data of the spherical chart (phi ~ index 1, theta ~ index 2).

    Args:
        phi: zenith angle(s), 0 < phi < pi
        theta: azimuth(s); the metric does not depend on it

    Returns:
        MetricData: g = diag(1, sin^2 phi), Gamma^phi_theta,theta = -sin phi cos phi,
        Gamma^theta_phi,theta = cot phi
    """
    phi, _ = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(theta, dtype=float))
    s = _check_off_pole(phi)
    c = np.cos(phi)
    shape = phi.shape
    g_lo = np.zeros(shape + (2, 2))
    g_lo[..., 0, 0] = 1.0
    g_lo[..., 1, 1] = s * s
    g_up = np.zeros(shape + (2, 2))
    g_up[..., 0, 0] = 1.0
    g_up[..., 1, 1] = 1.0 / (s * s)
    gamma = np.zeros(shape + (2, 2, 2))
    gamma[..., 0, 1, 1] = -s * c
    gamma[..., 1, 0, 1] = c / s
    gamma[..., 1, 1, 0] = c / s
    return MetricData(g_lo=g_lo, g_up=g_up, sqrt_g=np.abs(s), gamma=gamma)


def spherical_metric_derivatives(phi, theta=0.0) -> MetricDerivatives:
    phi, _ = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(theta, dtype=float))
    s = _check_off_pole(phi)
    c = np.cos(phi)
    shape = phi.shape
    d_g_lo = np.zeros(shape + (2, 2, 2))
    d_g_lo[..., 0, 1, 1] = 2.0 * s * c
    d_g_up = np.zeros(shape + (2, 2, 2))
    d_g_up[..., 0, 1, 1] = -2.0 * c / s**3
    d_sqrt_g = np.zeros(shape + (2,))
    d_sqrt_g[..., 0] = c
    return MetricDerivatives(d_sqrt_g=d_sqrt_g, d_g_lo=d_g_lo, d_g_up=d_g_up)


def _spherical_tangents(phi, theta) -> np.ndarray:
    phi, theta = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(theta, dtype=float))
    s, c = np.sin(phi), np.cos(phi)
    st, ct = np.sin(theta), np.cos(theta)
    b_phi = np.stack([c * ct, c * st, -s], axis=-1)
    b_theta = np.stack([-s * st, s * ct, np.zeros_like(s)], axis=-1)
    return np.stack([b_phi, b_theta], axis=-2)


@dataclass
class Chart:
    """A coordinate patch on the unit sphere.

    Attributes:
        embedding (Callable): (xi1, xi2) -> unit vectors, shape (..., 3)
        bounds: ((lo1, hi1), (lo2, hi2)) chart rectangle
        kind (str): "analytic-spherical" or "numerical-embedding"
        periodic: per-axis periodicity flags
        description (dict): JSON-able description, used as a cache key
        cacheable (bool): whether description alone pins the chart down; build_mesh skips its
            cache otherwise
        fd_step (float): finite-difference step for numerical metrics
        pole_margin (float): minimum angular distance kept from the poles
    """

    embedding: Callable[[np.ndarray, np.ndarray], np.ndarray]
    bounds: Tuple[Tuple[float, float], Tuple[float, float]]
    kind: str = "numerical-embedding"
    periodic: Tuple[bool, bool] = (False, True)
    description: dict = field(default_factory=dict)
    fd_step: float = DEFAULT_FD_STEP
    pole_margin: float = DEFAULT_POLE_MARGIN
    cacheable: bool = True

    def __post_init__(self):
        assert self.kind in ("analytic-spherical", "numerical-embedding"), self.kind
        if not self.description:
            self.cacheable = False

    def point(self, xi1, xi2) -> np.ndarray:
        return self.embedding(np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float))

    def tangents(self, xi1, xi2, h: Optional[float] = None) -> np.ndarray:
        """Projection factors B^i_a = dx^i/dxi^a, shape (..., 2, 3)."""
        if self.kind == "analytic-spherical":
            return _spherical_tangents(xi1, xi2)
        return _numerical_tangents(self, xi1, xi2, self.fd_step if h is None else h)

    def metric(self, xi1, xi2, h: Optional[float] = None) -> MetricData:
        if self.kind == "analytic-spherical":
            return spherical_metric(xi1, xi2)
        return numerical_metric(self, (xi1, xi2), self.fd_step if h is None else h)

    def metric_derivatives(self, xi1, xi2, h: Optional[float] = None) -> MetricDerivatives:
        if self.kind == "analytic-spherical":
            return spherical_metric_derivatives(xi1, xi2)
        return numerical_metric_derivatives(self, (xi1, xi2), self.fd_step if h is None else h)

    def sample(self, n: int = 64, interior: bool = True) -> Tuple[np.ndarray, np.ndarray]:
        (lo1, hi1), (lo2, hi2) = self.bounds
        if interior:
            x1 = lo1 + (np.arange(n) + 0.5) * (hi1 - lo1) / n
        else:
            x1 = np.linspace(lo1, hi1, n)
        if self.periodic[1]:
            x2 = lo2 + np.arange(n) * (hi2 - lo2) / n
        else:
            x2 = lo2 + (np.arange(n) + 0.5) * (hi2 - lo2) / n
        return np.meshgrid(x1, x2, indexing="ij")

    def check_unit_norm(self, n: int = 64, atol: float = 1e-12) -> float:
        xi1, xi2 = self.sample(n, interior=False)
        err = float(np.max(np.abs(np.linalg.norm(self.point(xi1, xi2), axis=-1) - 1.0)))
        if err > atol:
            raise InvalidGeometryError(f"Chart embedding leaves the unit sphere by {err:.3e}")
        return err

    def check_injective(self, n: int = 96) -> bool:
        """Sampled self-overlap test: constant orientation and no coincident samples."""
        xi1, xi2 = self.sample(n)
        x = self.point(xi1, xi2)
        b = self.tangents(xi1, xi2)
        orientation = np.einsum("...i,...i->...", x, np.cross(b[..., 0, :], b[..., 1, :]))
        if not (np.all(orientation > 0) or np.all(orientation < 0)):
            return False
        pairs = cKDTree(x.reshape(-1, 3)).query_pairs(r=1e-9)
        return len(pairs) == 0


def spherical_chart(
    phi_min: float,
    phi_max: float,
    theta_bounds: Tuple[float, float] = (0.0, TWO_PI),
    pole_margin: float = DEFAULT_POLE_MARGIN,
) -> Chart:
    """Analytic spherical chart restricted to phi_min <= phi <= phi_max (an annulus or patch)."""
    if not (pole_margin <= phi_min < phi_max <= np.pi - pole_margin):
        raise ChartDomainError(
            f"Spherical chart bounds [{phi_min}, {phi_max}] must stay {pole_margin} rad from the poles"
        )
    periodic = bool(np.isclose(theta_bounds[1] - theta_bounds[0], TWO_PI))
    return Chart(
        embedding=spherical_point,
        bounds=((float(phi_min), float(phi_max)), (float(theta_bounds[0]), float(theta_bounds[1]))),
        kind="analytic-spherical",
        periodic=(False, periodic),
        description={
            "chart": "spherical",
            "phi": [float(phi_min), float(phi_max)],
            "theta": [float(theta_bounds[0]), float(theta_bounds[1])],
        },
        pole_margin=pole_margin,
    )


def _expand_mask(mask: np.ndarray, like: np.ndarray) -> np.ndarray:
    return mask.reshape(mask.shape + (1,) * (like.ndim - mask.ndim))


def _fd_derivative(fun, xi1, xi2, axis: int, h: float, chart: Chart) -> np.ndarray:
    """Second-order derivative of fun along one chart axis; one-sided next to chart edges."""
    xi = [np.asarray(xi1, dtype=float), np.asarray(xi2, dtype=float)]
    xi = list(np.broadcast_arrays(*xi))

    def shifted(k):
        y = list(xi)
        y[axis] = xi[axis] + k * h
        return fun(*y)

    f_plus, f_minus = shifted(1), shifted(-1)
    out = (f_plus - f_minus) / (2.0 * h)
    if chart.periodic[axis]:
        return out

    lo, hi = chart.bounds[axis]
    eps = 1e-12 * (hi - lo)
    at_lo = xi[axis] - h < lo - eps
    at_hi = xi[axis] + h > hi + eps
    if np.any(at_lo | at_hi):
        f_0 = fun(*xi)
        if np.any(at_lo):
            forward = (-3.0 * f_0 + 4.0 * f_plus - shifted(2)) / (2.0 * h)
            out = np.where(_expand_mask(at_lo, out), forward, out)
        if np.any(at_hi):
            backward = (3.0 * f_0 - 4.0 * f_minus + shifted(-2)) / (2.0 * h)
            out = np.where(_expand_mask(at_hi & ~at_lo, out), backward, out)
    return out


def _numerical_tangents(chart: Chart, xi1, xi2, h: float) -> np.ndarray:
    x = chart.point(xi1, xi2)
    b = np.stack(
        [_fd_derivative(chart.point, xi1, xi2, axis, h, chart) for axis in (0, 1)], axis=-2
    )
    # drop the radial part left by truncation error; exact tangents have none
    b = b - np.einsum("...ai,...i->...a", b, x)[..., None] * x[..., None, :]
    return b


def _numerical_g_lo(chart: Chart, xi1, xi2, h: float) -> np.ndarray:
    b = _numerical_tangents(chart, xi1, xi2, h)
    return np.einsum("...ai,...bi->...ab", b, b)


def _numerical_d_g_lo(chart: Chart, xi1, xi2, h: float) -> np.ndarray:
    def g_field(a, b):
        return _numerical_g_lo(chart, a, b, h)

    return np.stack([_fd_derivative(g_field, xi1, xi2, axis, h, chart) for axis in (0, 1)], axis=-3)


def numerical_metric(chart: Chart, xi: Sequence, h: float = DEFAULT_FD_STEP) -> MetricData:
    """Metric data from central differences of the unit-radius embedding.

    g_ab = dx/dxi^a . dx/dxi^b; the Christoffel symbols come from differencing the
    metric field with the same step h.

    Args:
        chart (Chart): chart providing the embedding
        xi: pair (xi1, xi2) of scalars or equally shaped arrays
        h (float): finite-difference step

    Returns:
        MetricData
    """
    xi1, xi2 = np.broadcast_arrays(np.asarray(xi[0], dtype=float), np.asarray(xi[1], dtype=float))
    g_lo = _numerical_g_lo(chart, xi1, xi2, h)
    g_lo = 0.5 * (g_lo + np.swapaxes(g_lo, -1, -2))
    metric = MetricData.from_lower(g_lo)
    d_g_lo = _numerical_d_g_lo(chart, xi1, xi2, h)
    gamma = christoffel_from_derivatives(metric.g_up, d_g_lo)
    gamma = 0.5 * (gamma + np.swapaxes(gamma, -1, -2))
    return MetricData(g_lo=metric.g_lo, g_up=metric.g_up, sqrt_g=metric.sqrt_g, gamma=gamma)


def numerical_metric_derivatives(
    chart: Chart, xi: Sequence, h: float = DEFAULT_FD_STEP
) -> MetricDerivatives:
    xi1, xi2 = np.broadcast_arrays(np.asarray(xi[0], dtype=float), np.asarray(xi[1], dtype=float))
    metric = MetricData.from_lower(_numerical_g_lo(chart, xi1, xi2, h))
    return MetricDerivatives.from_lower(metric, _numerical_d_g_lo(chart, xi1, xi2, h))


class ConeCurve(ABC):
    """A 2pi-periodic curve phi(theta) on the sphere; all angles in radians."""

    # False when description does not pin the curve down
    parametric = True

    @abstractmethod
    def __call__(self, theta) -> np.ndarray:
        pass

    @property
    @abstractmethod
    def description(self) -> dict:
        pass


class CircleCurve(ConeCurve):
    def __init__(self, half_angle: float):
        self.half_angle = float(half_angle)

    def __call__(self, theta) -> np.ndarray:
        return np.full_like(np.asarray(theta, dtype=float), self.half_angle)

    @property
    def description(self) -> dict:
        return {"shape": "circle", "half_angle": self.half_angle}


class EllipseCurve(ConeCurve):
    """Cross section of the elliptic cone x^2/tan(a)^2 + y^2/tan(b)^2 = z^2.

    a is the half-angle in the x-z plane (theta = 0), b in the y-z plane.
    """

    def __init__(self, half_angle_x: float, half_angle_y: float):
        self.half_angle_x = float(half_angle_x)
        self.half_angle_y = float(half_angle_y)

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        ta, tb = np.tan(self.half_angle_x), np.tan(self.half_angle_y)
        rho = ta * tb / np.sqrt((tb * np.cos(theta)) ** 2 + (ta * np.sin(theta)) ** 2)
        return np.arctan(rho)

    @property
    def description(self) -> dict:
        return {"shape": "ellipse", "half_angle_x": self.half_angle_x, "half_angle_y": self.half_angle_y}


class CosineCurve(ConeCurve):
    """phi(theta) = mean + amplitude * cos(wavenumber * theta)"""

    def __init__(self, mean: float, amplitude: float, wavenumber: int = 2):
        self.mean = float(mean)
        self.amplitude = float(amplitude)
        self.wavenumber = int(wavenumber)

    def __call__(self, theta) -> np.ndarray:
        return self.mean + self.amplitude * np.cos(self.wavenumber * np.asarray(theta, dtype=float))

    @property
    def description(self) -> dict:
        return {
            "shape": "cosine",
            "mean": self.mean,
            "amplitude": self.amplitude,
            "wavenumber": self.wavenumber,
        }


class SplineCurve(ConeCurve):
    """Periodic cubic spline through sampled (theta, phi) points."""

    def __init__(self, theta: Sequence[float], phi: Sequence[float]):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        order = np.argsort(np.mod(theta, TWO_PI))
        theta = np.mod(theta, TWO_PI)[order]
        phi = phi[order]
        if len(theta) < 4:
            raise InvalidGeometryError("A spline curve needs at least 4 points")
        if np.any(np.diff(theta) <= 0):
            raise InvalidGeometryError("Spline curve azimuths must be distinct")
        self.theta_points = theta
        self.phi_points = phi
        self._spline = CubicSpline(
            np.append(theta, theta[0] + TWO_PI), np.append(phi, phi[0]), bc_type="periodic"
        )

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        t0 = self.theta_points[0]
        return self._spline(t0 + np.mod(theta - t0, TWO_PI))

    @property
    def description(self) -> dict:
        return {
            "shape": "spline",
            "theta": self.theta_points.tolist(),
            "phi": self.phi_points.tolist(),
        }


class FunctionCurve(ConeCurve):
    """Wraps an arbitrary vectorized callable; not serializable beyond its name."""

    parametric = False

    def __init__(self, fun: Callable, name: str = "function"):
        self.fun = fun
        self.name = name

    def __call__(self, theta) -> np.ndarray:
        return np.asarray(self.fun(np.asarray(theta, dtype=float)), dtype=float)

    @property
    def description(self) -> dict:
        return {"shape": "function", "name": self.name}


def curve_from_config(cfg: dict) -> ConeCurve:
    """Build a curve from a config block; angles are given in degrees.

    Examples:
        {"shape": "circle", "half_angle_deg": 10}
        {"shape": "ellipse", "half_angle_x_deg": 12, "half_angle_y_deg": 6}
        {"shape": "cosine", "mean_deg": 10, "amplitude_deg": 3, "wavenumber": 2}
        {"shape": "spline", "theta_deg": [...], "phi_deg": [...]}
    """
    shape = cfg.get("shape")
    if shape == "circle":
        return CircleCurve(np.radians(cfg["half_angle_deg"]))
    elif shape == "ellipse":
        return EllipseCurve(np.radians(cfg["half_angle_x_deg"]), np.radians(cfg["half_angle_y_deg"]))
    elif shape == "cosine":
        return CosineCurve(
            np.radians(cfg["mean_deg"]), np.radians(cfg["amplitude_deg"]), int(cfg.get("wavenumber", 2))
        )
    elif shape == "spline":
        return SplineCurve(np.radians(cfg["theta_deg"]), np.radians(cfg["phi_deg"]))
    else:
        raise ValueError(
            f'Unknown curve shape {shape!r}; valid values are "circle", "ellipse", "cosine", "spline"'
        )


def body_conforming_chart(
    body_curve: ConeCurve,
    outer_curve: ConeCurve,
    pole_margin: float = DEFAULT_POLE_MARGIN,
    fd_step: float = DEFAULT_FD_STEP,
    n_check: int = 720,
) -> Chart:
    """Chart blending from the body curve (xi1 = 0) to the outer curve (xi1 = 1).

    phi(xi1, xi2) = phi_b(xi2) + xi1 * (phi_o(xi2) - phi_b(xi2)), theta = xi2 in [0, 2pi).

    Args:
        body_curve (ConeCurve): body cross section phi_b(theta)
        outer_curve (ConeCurve): outer boundary phi_o(theta)
        pole_margin (float): minimum distance of both curves from the poles
        fd_step (float): step for the numerical metric
        n_check (int): number of azimuths sampled for validation

    Returns:
        Chart
    """
    theta = np.linspace(0.0, TWO_PI, n_check, endpoint=False)
    phi_b = body_curve(theta)
    phi_o = outer_curve(theta)
    if np.any(~np.isfinite(phi_b)) or np.any(~np.isfinite(phi_o)):
        raise InvalidGeometryError("Boundary curves must be finite everywhere")
    if np.any(phi_b >= phi_o):
        worst = float(np.degrees(theta[np.argmin(phi_o - phi_b)]))
        raise InvalidGeometryError(
            f"Body curve meets or crosses the outer curve (first near theta = {worst:.2f} deg)"
        )
    if np.any(phi_b <= pole_margin) or np.any(phi_o >= np.pi - pole_margin):
        raise InvalidGeometryError(f"Boundary curves must stay {pole_margin} rad away from the poles")

    def embedding(xi1, xi2):
        pb = body_curve(xi2)
        po = outer_curve(xi2)
        return spherical_point(pb + xi1 * (po - pb), xi2)

    chart = Chart(
        embedding=embedding,
        bounds=((0.0, 1.0), (0.0, TWO_PI)),
        kind="numerical-embedding",
        periodic=(False, True),
        description={
            "chart": "body_conforming",
            "body": body_curve.description,
            "outer": outer_curve.description,
            "fd_step": fd_step,
        },
        fd_step=fd_step,
        pole_margin=pole_margin,
        cacheable=body_curve.parametric and outer_curve.parametric,
    )
    if not chart.check_injective():
        raise InvalidGeometryError("Body-conforming chart overlaps itself")
    return chart


def reparametrized_chart(chart: Chart, scale: Tuple[float, float] = (1.0, 1.0)) -> Chart:
    """Same surface patch with xi'^a = scale_a * xi^a; used for invariance checks."""
    s1, s2 = float(scale[0]), float(scale[1])

    def embedding(xi1, xi2):
        return chart.embedding(np.asarray(xi1) / s1, np.asarray(xi2) / s2)

    (lo1, hi1), (lo2, hi2) = chart.bounds
    return Chart(
        embedding=embedding,
        bounds=((lo1 * s1, hi1 * s1), (lo2 * s2, hi2 * s2)),
        kind="numerical-embedding",
        periodic=chart.periodic,
        description={**chart.description, "scale": [s1, s2]},
        fd_step=chart.fd_step,
        pole_margin=chart.pole_margin,
        cacheable=chart.cacheable,
    )
