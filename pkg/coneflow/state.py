"""Primitive and conserved states of the conical system.

States are stored as float arrays with a trailing axis of length 5:
primitive (rho, v1, v2, V3, e) and conserved sqrt(g) (rho, rho v1, rho v2, rho V3, rho E),
where v1, v2 are the r-independent contravariant crossflow components and V3 is the
radial velocity. Leading axes are cell axes.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from coneflow.exceptions import InvalidStateError
from coneflow.gas import GasModel, IdealGas
from coneflow.geometry import Chart, MetricData
from coneflow.utils import quadratic_form

RHO, V1, V2, V3, E = range(5)
PRIMITIVE_NAMES = ("rho", "v1", "v2", "V3", "e")
EQUATION_NAMES = ("mass", "mom1", "mom2", "mom_r", "energy")


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    v1: float
    v2: float
    V3: float
    e: float

    def __post_init__(self):
        if not (self.rho > 0 and self.e > 0):
            raise InvalidStateError(f"Invalid primitive state rho={self.rho}, e={self.e}")

    def to_array(self) -> np.ndarray:
        return np.array([self.rho, self.v1, self.v2, self.V3, self.e], dtype=float)

    @classmethod
    def from_array(cls, p) -> "PrimitiveState":
        p = np.asarray(p, dtype=float)
        assert p.shape == (5,), f"Expected a single state of length 5, got shape {p.shape}"
        return cls(*(float(x) for x in p))


@dataclass(frozen=True)
class ConservedState:
    u0: float
    u1: float
    u2: float
    u3: float
    u4: float

    def to_array(self) -> np.ndarray:
        return np.array([self.u0, self.u1, self.u2, self.u3, self.u4], dtype=float)

    @classmethod
    def from_array(cls, u) -> "ConservedState":
        u = np.asarray(u, dtype=float)
        assert u.shape == (5,), f"Expected a single state of length 5, got shape {u.shape}"
        return cls(*(float(x) for x in u))


def as_array(p) -> np.ndarray:
    if isinstance(p, (PrimitiveState, ConservedState)):
        return p.to_array()
    return np.asarray(p, dtype=float)


def crossflow_speed(v1, v2, metric: MetricData) -> np.ndarray:
    """q_c = sqrt(g_ab v^a v^b)"""
    v = np.stack(np.broadcast_arrays(np.asarray(v1, dtype=float), np.asarray(v2, dtype=float)), axis=-1)
    return np.sqrt(np.maximum(quadratic_form(metric.g_lo, v), 0.0))


def crossflow_speed_squared(p: np.ndarray, metric: MetricData) -> np.ndarray:
    p = as_array(p)
    return quadratic_form(metric.g_lo, p[..., V1:V3])


def total_energy(p, metric: MetricData) -> np.ndarray:
    """E = e + (q_c^2 + V3^2) / 2"""
    p = as_array(p)
    return p[..., E] + 0.5 * (crossflow_speed_squared(p, metric) + p[..., V3] ** 2)


def primitive_to_conserved(p, metric: MetricData) -> np.ndarray:
    p = as_array(p)
    rho = p[..., RHO]
    sg = metric.sqrt_g
    u = np.empty(np.broadcast_shapes(p.shape, sg.shape + (5,)))
    u[..., 0] = sg * rho
    u[..., 1] = sg * rho * p[..., V1]
    u[..., 2] = sg * rho * p[..., V2]
    u[..., 3] = sg * rho * p[..., V3]
    u[..., 4] = sg * rho * total_energy(p, metric)
    return u


def conserved_to_primitive(u, metric: MetricData, gas: Optional[GasModel] = None) -> np.ndarray:
    """Inverse of primitive_to_conserved.

    Raises:
        InvalidStateError: if the density or the recovered internal energy is not positive;
            the offending cell indices are attached to the error.
    """
    u = as_array(u)
    sg = metric.sqrt_g
    rho = u[..., 0] / sg
    bad = ~(rho > 0)
    if np.any(bad):
        raise InvalidStateError(
            "Non-positive density in conserved state", cells=_cells(bad)
        )
    p = np.empty(np.broadcast_shapes(u.shape, sg.shape + (5,)))
    p[..., RHO] = rho
    p[..., V1] = u[..., 1] / u[..., 0]
    p[..., V2] = u[..., 2] / u[..., 0]
    p[..., V3] = u[..., 3] / u[..., 0]
    kinetic = 0.5 * (crossflow_speed_squared(p, metric) + p[..., V3] ** 2)
    p[..., E] = u[..., 4] / u[..., 0] - kinetic
    bad = ~(p[..., E] > 0)
    if np.any(bad):
        raise InvalidStateError(
            "Non-positive internal energy recovered from conserved state", cells=_cells(bad)
        )
    return p


def _cells(mask: np.ndarray, limit: int = 10):
    return [tuple(int(i) for i in idx) for idx in np.argwhere(np.atleast_1d(mask))[:limit]]


def pressure_field(p, gas: GasModel) -> np.ndarray:
    p = as_array(p)
    return gas.pressure(p[..., RHO], p[..., E])[0]


@dataclass(frozen=True)
class FreestreamSpec:
    """Uniform freestream: Cartesian velocity (cone axis along +z), density and internal energy."""

    V_inf: tuple
    rho_inf: float = 1.0
    e_inf: float = 1.0 / (1.4 * 0.4)

    def __post_init__(self):
        assert len(self.V_inf) == 3, "V_inf must be a Cartesian 3-vector"
        if not (self.rho_inf > 0 and self.e_inf > 0):
            raise InvalidStateError("Freestream density and internal energy must be positive")

    @property
    def velocity(self) -> np.ndarray:
        return np.asarray(self.V_inf, dtype=float)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))

    def mach(self, gas: GasModel) -> float:
        return self.speed / float(gas.sound_speed(self.rho_inf, self.e_inf))

    def check_supersonic(self, gas: GasModel) -> None:
        m = self.mach(gas)
        if not m > 1.0:
            raise ValueError(f"Freestream must be supersonic, got Mach {m:.4f}")

    @classmethod
    def from_mach(
        cls, mach: float, alpha: float = 0.0, gamma: float = 1.4, sideslip: float = 0.0
    ) -> "FreestreamSpec":
        """Freestream nondimensionalized by rho_inf = 1 and c_inf = 1.

        Args:
            mach (float): freestream Mach number
            alpha (float): angle of attack in radians, rotating the stream toward +x
            gamma (float): ratio of specific heats
            sideslip (float): sideslip angle in radians, rotating the stream toward +y

        Returns:
            FreestreamSpec
        """
        direction = (
            np.sin(alpha) * np.cos(sideslip),
            np.sin(sideslip),
            np.cos(alpha) * np.cos(sideslip),
        )
        return cls(
            V_inf=tuple(float(mach * d) for d in direction),
            rho_inf=1.0,
            e_inf=IdealGas(gamma).internal_energy(1.0, 1.0 / gamma).item(),
        )

    def to_dict(self) -> dict:
        return {"V_inf": list(self.velocity), "rho_inf": self.rho_inf, "e_inf": self.e_inf}


def project_freestream(fs: FreestreamSpec, chart: Chart, xi1, xi2) -> np.ndarray:
    """Primitive state of the uniform freestream at chart points.

    V3 = V . x and v^a = g^{ab} (B_b . V), with B the tangent-plane projection factors,
    so that g_ab v^a v^b + V3^2 = |V_inf|^2.
    """
    V = fs.velocity
    x = chart.point(xi1, xi2)
    b = chart.tangents(xi1, xi2)
    metric = chart.metric(xi1, xi2)
    v_lo = np.einsum("...ai,i->...a", b, V)
    v_up = np.einsum("...ab,...b->...a", metric.g_up, v_lo)
    p = np.empty(x.shape[:-1] + (5,))
    p[..., RHO] = fs.rho_inf
    p[..., V1] = v_up[..., 0]
    p[..., V2] = v_up[..., 1]
    p[..., V3] = x @ V
    p[..., E] = fs.e_inf
    return p
