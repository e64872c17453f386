from coneflow.config import RunConfig, load_config
from coneflow.gas import IdealGas
from coneflow.geometry import body_conforming_chart, spherical_chart
from coneflow.solver import build_mesh, run_to_steady
from coneflow.state import FreestreamSpec
from coneflow.visualizer import Visualizer

__all__ = [
    "RunConfig",
    "load_config",
    "IdealGas",
    "body_conforming_chart",
    "spherical_chart",
    "build_mesh",
    "run_to_steady",
    "FreestreamSpec",
    "Visualizer",
]
