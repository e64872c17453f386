"""Run configuration: a JSON document parsed into dataclass blocks.

All quantities are nondimensional (freestream density, freestream sound speed,
unit sphere radius); angles in the file are in degrees.
"""
import json
import logging
import math
import re
import warnings
from dataclasses import asdict, dataclass, field, fields
from typing import List, Optional

import numpy as np

from coneflow.exceptions import ConfigError, InvalidGeometryError, ChartDomainError
from coneflow.gas import GasModel, IdealGas
from coneflow.geometry import (
    DEFAULT_FD_STEP,
    DEFAULT_POLE_MARGIN,
    Chart,
    body_conforming_chart,
    curve_from_config,
    spherical_chart,
)
from coneflow.memoizer import get_hash
from coneflow.state import FreestreamSpec

logger = logging.getLogger(__name__)

FLUX_KINDS = ("llf",)
LIMITER_KINDS = ("first-order", "minmod")
INTEGRATOR_KINDS = ("euler", "ssp-rk2")
WALL_FLUX_KINDS = ("pressure", "llf")
BOUNDARY_KINDS = ("wall", "freestream")
FIELD_FORMATS = ("text", "binary")
REQUIRED_BLOCKS = ("geometry", "mesh", "gas", "freestream")


@dataclass
class GeometryConfig:
    chart: str = "body_conforming"
    body: Optional[dict] = None
    outer: Optional[dict] = None
    phi_range_deg: Optional[List[float]] = None
    pole_margin: float = DEFAULT_POLE_MARGIN
    fd_step: float = DEFAULT_FD_STEP


@dataclass
class MeshConfig:
    n1: int = 64
    n2: int = 64


@dataclass
class GasConfig:
    kind: str = "ideal-gas"
    gamma: float = 1.4


@dataclass
class FreestreamConfig:
    mach: Optional[float] = None
    alpha_deg: float = 0.0
    sideslip_deg: float = 0.0
    velocity: Optional[List[float]] = None
    rho: float = 1.0
    e: Optional[float] = None


@dataclass
class SolverConfig:
    cfl: float = 0.5
    max_iterations: int = 20000
    threshold: float = 1e-4
    flux: str = "llf"
    limiter: str = "first-order"
    integrator: str = "euler"
    wall_flux: str = "pressure"
    local_time_stepping: bool = False
    divergence_factor: float = 1e3
    max_retries: int = 10
    inner_boundary: str = "wall"
    outer_boundary: str = "freestream"
    log_every: int = 100


@dataclass
class OutputConfig:
    directory: str = "output"
    formats: List[str] = field(default_factory=lambda: ["text"])
    snapshot_every: int = 0
    plots: bool = False


@dataclass
class RunConfig:
    geometry: GeometryConfig
    mesh: MeshConfig
    gas: GasConfig
    freestream: FreestreamConfig
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def hash(self) -> str:
        return get_hash(self.to_dict())

    def build_gas(self) -> GasModel:
        return IdealGas(gamma=self.gas.gamma)

    def build_freestream(self) -> FreestreamSpec:
        fs = self.freestream
        gas = self.build_gas()
        if fs.velocity is not None:
            e = fs.e if fs.e is not None else 1.0 / (gas.gamma * (gas.gamma - 1.0))
            return FreestreamSpec(V_inf=tuple(float(x) for x in fs.velocity), rho_inf=fs.rho, e_inf=e)
        return FreestreamSpec.from_mach(
            fs.mach, np.radians(fs.alpha_deg), gas.gamma, np.radians(fs.sideslip_deg)
        )

    def build_chart(self) -> Chart:
        geo = self.geometry
        if geo.chart == "spherical":
            lo, hi = np.radians(geo.phi_range_deg)
            return spherical_chart(lo, hi, pole_margin=geo.pole_margin)
        return body_conforming_chart(
            curve_from_config(geo.body),
            curve_from_config(geo.outer),
            pole_margin=geo.pole_margin,
            fd_step=geo.fd_step,
        )


def _line_of(text: Optional[str], key: str) -> Optional[int]:
    if not text:
        return None
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    if m is None:
        return None
    return text.count("\n", 0, m.start()) + 1


def _build_block(cls, raw, name: str, path, text):
    if not isinstance(raw, dict):
        raise ConfigError(f'Block "{name}" must be an object', path, _line_of(text, name))
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(
            f'Unknown key(s) {unknown} in block "{name}"; valid keys are {sorted(known)}',
            path,
            _line_of(text, unknown[0]),
        )
    return cls(**raw)


def config_from_dict(raw: dict, path: Optional[str] = None, text: Optional[str] = None) -> RunConfig:
    """Parse and validate a config tree.

    Args:
        raw (dict): parsed JSON document
        path (str, optional): file the document came from, used in error messages
        text (str, optional): raw file text, used to anchor errors to a line

    Returns:
        RunConfig

    Raises:
        ConfigError: on missing blocks, unknown keys or failed cross-field checks
    """
    if not isinstance(raw, dict):
        raise ConfigError("Config root must be an object", path, 1)
    for name in REQUIRED_BLOCKS:
        if name not in raw:
            raise ConfigError(f'Missing required block "{name}"', path)
    unknown = sorted(set(raw) - set(REQUIRED_BLOCKS) - {"solver", "output"})
    if unknown:
        raise ConfigError(f"Unknown block(s) {unknown}", path, _line_of(text, unknown[0]))

    cfg = RunConfig(
        geometry=_build_block(GeometryConfig, raw["geometry"], "geometry", path, text),
        mesh=_build_block(MeshConfig, raw["mesh"], "mesh", path, text),
        gas=_build_block(GasConfig, raw["gas"], "gas", path, text),
        freestream=_build_block(FreestreamConfig, raw["freestream"], "freestream", path, text),
        solver=_build_block(SolverConfig, raw.get("solver", {}), "solver", path, text),
        output=_build_block(OutputConfig, raw.get("output", {}), "output", path, text),
    )
    validate_config(cfg, path, text)
    return cfg


def validate_config(cfg: RunConfig, path: Optional[str] = None, text: Optional[str] = None) -> None:
    def fail(message, key):
        raise ConfigError(message, path, _line_of(text, key))

    if cfg.gas.kind != "ideal-gas":
        fail(f'Unknown gas kind {cfg.gas.kind!r}; the only valid value is "ideal-gas"', "kind")
    if not cfg.gas.gamma > 1.0:
        fail(f"gamma must exceed 1, got {cfg.gas.gamma}", "gamma")
    if cfg.mesh.n1 < 3 or cfg.mesh.n2 < 3:
        fail(f"Mesh needs at least 3 cells per direction, got {cfg.mesh.n1}x{cfg.mesh.n2}", "mesh")

    s = cfg.solver
    if not 0.0 < s.cfl <= 1.0:
        fail(f"cfl must lie in (0, 1], got {s.cfl}", "cfl")
    if not s.threshold > 0.0:
        fail(f"threshold must be positive, got {s.threshold}", "threshold")
    if s.max_iterations < 1:
        fail(f"max_iterations must be at least 1, got {s.max_iterations}", "max_iterations")
    for key, value, valid in (
        ("flux", s.flux, FLUX_KINDS),
        ("limiter", s.limiter, LIMITER_KINDS),
        ("integrator", s.integrator, INTEGRATOR_KINDS),
        ("wall_flux", s.wall_flux, WALL_FLUX_KINDS),
        ("inner_boundary", s.inner_boundary, BOUNDARY_KINDS),
        ("outer_boundary", s.outer_boundary, BOUNDARY_KINDS),
    ):
        if value not in valid:
            fail(f"Invalid {key} {value!r}; valid values are {list(valid)}", key)
    for fmt in cfg.output.formats:
        if fmt not in FIELD_FORMATS:
            fail(f"Invalid output format {fmt!r}; valid values are {list(FIELD_FORMATS)}", "formats")

    fs = cfg.freestream
    if fs.velocity is None and fs.mach is None:
        fail('Freestream needs either "mach" or "velocity"', "freestream")
    if fs.velocity is not None and len(fs.velocity) != 3:
        fail("Freestream velocity must be a 3-vector", "velocity")
    try:
        freestream = cfg.build_freestream()
        freestream.check_supersonic(cfg.build_gas())
    except ValueError as e:
        fail(str(e), "mach" if fs.mach is not None else "velocity")

    geo = cfg.geometry
    if geo.chart == "spherical":
        if geo.phi_range_deg is None or len(geo.phi_range_deg) != 2:
            fail('A spherical chart needs "phi_range_deg": [lo, hi]', "chart")
    elif geo.chart == "body_conforming":
        if geo.body is None or geo.outer is None:
            fail('A body-conforming chart needs "body" and "outer" curves', "chart")
    else:
        fail(f'Invalid chart {geo.chart!r}; valid values are "body_conforming", "spherical"', "chart")
    try:
        chart = cfg.build_chart()
    except (InvalidGeometryError, ChartDomainError, KeyError, ValueError) as e:
        fail(f"Invalid geometry: {e}", "geometry")

    # the bow shock lies outside the freestream Mach cone; an outer boundary inside it cuts the shock
    mach = freestream.mach(cfg.build_gas())
    theta = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    outer_phi = chart.point(np.ones_like(theta) * chart.bounds[0][1], theta)[..., 2]
    if np.min(np.arccos(np.clip(outer_phi, -1, 1))) <= math.asin(1.0 / mach):
        warnings.warn(
            "Outer boundary lies inside the freestream Mach cone; the bow shock may leave the domain"
        )


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"Cannot read config: {e.strerror}", str(path))
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON: {e.msg}", str(path), e.lineno)
    try:
        return config_from_dict(raw, str(path), text)
    except TypeError as e:
        raise ConfigError(f"Invalid config value: {e}", str(path))


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w") as f:
        json.dump(cfg.to_dict(), f, indent=2)
        f.write("\n")
