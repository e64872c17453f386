"""Bundled run configurations, returned as plain config trees (see config.config_from_dict)."""
import json
from typing import Callable, Dict


def circular_cone(
    mach: float = 2.0,
    half_angle_deg: float = 10.0,
    outer_deg: float = 40.0,
    n1: int = 64,
    n2: int = 64,
    max_iterations: int = 20000,
) -> dict:
    """Circular cone at zero incidence; the Taylor-Maccoll solution is its reference."""
    return {
        "geometry": {
            "chart": "body_conforming",
            "body": {"shape": "circle", "half_angle_deg": half_angle_deg},
            "outer": {"shape": "circle", "half_angle_deg": outer_deg},
        },
        "mesh": {"n1": n1, "n2": n2},
        "gas": {"kind": "ideal-gas", "gamma": 1.4},
        "freestream": {"mach": mach, "alpha_deg": 0.0},
        "solver": {
            "cfl": 0.5,
            "max_iterations": max_iterations,
            "threshold": 1e-4,
            "limiter": "first-order",
            "integrator": "euler",
        },
        "output": {"directory": "output", "formats": ["text"]},
    }


def elliptic_cone(
    mach: float = 3.0,
    alpha_deg: float = 5.0,
    half_angle_x_deg: float = 12.0,
    half_angle_y_deg: float = 6.0,
    n1: int = 64,
    n2: int = 96,
    max_iterations: int = 30000,
) -> dict:
    """Elliptic cross section at incidence in its symmetry plane; develops a mixed-type field."""
    return {
        "geometry": {
            "chart": "body_conforming",
            "body": {
                "shape": "ellipse",
                "half_angle_x_deg": half_angle_x_deg,
                "half_angle_y_deg": half_angle_y_deg,
            },
            "outer": {"shape": "circle", "half_angle_deg": 45.0},
        },
        "mesh": {"n1": n1, "n2": n2},
        "gas": {"kind": "ideal-gas", "gamma": 1.4},
        "freestream": {"mach": mach, "alpha_deg": alpha_deg},
        "solver": {
            "cfl": 0.4,
            "max_iterations": max_iterations,
            "threshold": 1e-4,
            "limiter": "first-order",
        },
        "output": {"directory": "output", "formats": ["text"]},
    }


def freestream_annulus(
    mach: float = 2.0, phi_range_deg=(35.0, 70.0), n1: int = 32, n2: int = 32, alpha_deg: float = 0.0
) -> dict:
    """Body-free band of the sphere with freestream on both sides; the exact solution is uniform."""
    return {
        "geometry": {"chart": "spherical", "phi_range_deg": list(phi_range_deg)},
        "mesh": {"n1": n1, "n2": n2},
        "gas": {"kind": "ideal-gas", "gamma": 1.4},
        "freestream": {"mach": mach, "alpha_deg": alpha_deg},
        "solver": {
            "cfl": 0.5,
            "max_iterations": 5000,
            "threshold": 1e-6,
            "inner_boundary": "freestream",
            "outer_boundary": "freestream",
        },
        "output": {"directory": "output", "formats": ["text"]},
    }


CASES: Dict[str, Callable[..., dict]] = {
    "circular-cone": circular_cone,
    "elliptic-cone": elliptic_cone,
    "freestream-annulus": freestream_annulus,
}


def write_example(name: str, path: str) -> str:
    if name not in CASES:
        raise ValueError(f"Unknown example {name!r}; valid values are {sorted(CASES)}")
    with open(path, "w") as f:
        json.dump(CASES[name](), f, indent=2)
        f.write("\n")
    return path
