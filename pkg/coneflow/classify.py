"""Characteristic analysis of the conical system.

The steady system is hyperbolic in xi^1 wherever the crossflow is supersonic
(q_c > c) and elliptic where it is subsonic; the pseudo-time system is hyperbolic
everywhere.
"""
import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple

import numpy as np
import pandas as pd
from scipy import ndimage, sparse
from scipy.sparse.csgraph import connected_components

from coneflow.exceptions import ContractViolationError, DegenerateDirectionError
from coneflow.gas import GasModel
from coneflow.geometry import MetricData
from coneflow.state import RHO, V1, V2, V3, E, as_array, crossflow_speed_squared

logger = logging.getLogger(__name__)

DEFAULT_SONIC_TOL = 1e-8


class CharacteristicType(IntEnum):
    HYPERBOLIC = 1
    SONIC = 0
    ELLIPTIC = -1


@dataclass(frozen=True)
class TypeLabel:
    kind: CharacteristicType
    margin: float

    @property
    def name(self) -> str:
        return self.kind.name.lower()


def _sound_speed(p: np.ndarray, gas: GasModel) -> np.ndarray:
    return gas.sound_speed(p[..., RHO], p[..., E])


def _acoustic_pair(p, metric: MetricData, c: np.ndarray, degeneracy_tol: float):
    v1, v2 = p[..., V1], p[..., V2]
    g11, g12 = metric.g_up[..., 0, 0], metric.g_up[..., 0, 1]
    denom = v1 * v1 - g11 * c * c
    if np.any(np.abs(denom) <= degeneracy_tol * g11 * c * c):
        raise DegenerateDirectionError(
            "xi^1 is characteristic here ((v^1)^2 = g^11 c^2); use unsteady wave speeds instead"
        )
    radicand = (crossflow_speed_squared(p, metric) - c * c).astype(complex)
    root = c / metric.sqrt_g * np.sqrt(radicand)
    numer = v1 * v2 - c * c * g12
    return (numer - root) / denom, (numer + root) / denom


def steady_eigenvalues(
    p, metric: MetricData, gas: GasModel, degeneracy_tol: float = 1e-12
) -> np.ndarray:
    """Eigenvalues of (A^1)^-1 A^2, the characteristic slopes d xi^2 / d xi^1.

    Args:
        p: primitive state(s), shape (..., 5)
        metric (MetricData): metric at the same points
        gas (GasModel): equation of state
        degeneracy_tol (float): relative tolerance for the time-like degeneracy test

    Returns:
        np.ndarray: complex array (..., 5); three copies of v^2/v^1, then the acoustic pair
        (v^1 v^2 - c^2 g^12 -/+ (c / sqrt(g)) sqrt(q_c^2 - c^2)) / ((v^1)^2 - g^11 c^2)

    Raises:
        DegenerateDirectionError: if v^1 vanishes or (v^1)^2 = g^11 c^2
    """
    p = as_array(p)
    c = _sound_speed(p, gas)
    v1, v2 = p[..., V1], p[..., V2]
    if np.any(np.abs(v1) <= degeneracy_tol * c):
        raise DegenerateDirectionError("v^1 vanishes; xi^1 cannot be used as the time-like direction")
    minus, plus = _acoustic_pair(p, metric, c, degeneracy_tol)
    convective = (v2 / v1).astype(complex)
    return np.stack([convective, convective, convective, minus, plus], axis=-1)


def potential_eigenvalues(
    p, metric: MetricData, gas: GasModel, degeneracy_tol: float = 1e-12
) -> np.ndarray:
    """The two characteristic slopes of the conical potential equation, shape (..., 2)."""
    p = as_array(p)
    c = _sound_speed(p, gas)
    return np.stack(_acoustic_pair(p, metric, c, degeneracy_tol), axis=-1)


def potential_system_matrices(p, metric: MetricData, gas: GasModel) -> Tuple[np.ndarray, np.ndarray]:
    """First-order form L u_1 + M u_2 = 0 of the potential equation for u = grad(phi).

    With a^{ij} = g^{ij} - v^i v^j / c^2 the rows are the potential equation
    a^11 u1_1 + a^12 (u2_1 + u1_2) + a^22 u2_2 = 0 and the compatibility u2_1 - u1_2 = 0.
    The eigenvalues of L^-1 M are the potential characteristic slopes.
    """
    p = as_array(p)
    c = _sound_speed(p, gas)
    v = p[..., V1:V3]
    a = metric.g_up - v[..., :, None] * v[..., None, :] / (c * c)[..., None, None]
    shape = a.shape[:-2]
    L = np.zeros(shape + (2, 2))
    M = np.zeros(shape + (2, 2))
    L[..., 0, 0] = a[..., 0, 0]
    L[..., 0, 1] = a[..., 0, 1]
    L[..., 1, 1] = 1.0
    M[..., 0, 0] = a[..., 0, 1]
    M[..., 0, 1] = a[..., 1, 1]
    M[..., 1, 0] = -1.0
    return L, M


def characteristic_types(
    p, metric: MetricData, gas: GasModel, tol: float = DEFAULT_SONIC_TOL
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized type labels: returns (labels as int array of CharacteristicType, q_c - c)."""
    p = as_array(p)
    c = _sound_speed(p, gas)
    margin = np.sqrt(np.maximum(crossflow_speed_squared(p, metric), 0.0)) - c
    return labels_from_margin(margin, c, tol), margin


def labels_from_margin(margin, c, tol: float = DEFAULT_SONIC_TOL) -> np.ndarray:
    margin = np.asarray(margin, dtype=float)
    c = np.asarray(c, dtype=float)
    labels = np.full(margin.shape, int(CharacteristicType.SONIC), dtype=int)
    labels[margin > tol * c] = int(CharacteristicType.HYPERBOLIC)
    labels[margin < -tol * c] = int(CharacteristicType.ELLIPTIC)
    return labels


def classify(p, metric: MetricData, gas: GasModel, tol: float = DEFAULT_SONIC_TOL) -> TypeLabel:
    """Type of the steady system at a single state: hyperbolic if q_c - c > tol c,
    elliptic if q_c - c < -tol c, sonic otherwise."""
    labels, margin = characteristic_types(p, metric, gas, tol)
    assert np.ndim(labels) == 0, "classify takes a single state; use characteristic_types for fields"
    return TypeLabel(kind=CharacteristicType(int(labels)), margin=float(margin))


def unsteady_wave_speeds(
    p, metric: MetricData, gas: GasModel, w, normalization_tol: float = 1e-10
) -> np.ndarray:
    """Pseudo-time wave speeds along a unit covariant direction w.

    Returns (v.w, v.w, v.w, v.w - c, v.w + c) with v.w = v^a w_a.

    Raises:
        ContractViolationError: if g^{ab} w_a w_b differs from 1 by more than normalization_tol
    """
    p = as_array(p)
    w = np.asarray(w, dtype=float)
    norm2 = np.einsum("...ab,...a,...b->...", metric.g_up, w, w)
    if np.any(np.abs(norm2 - 1.0) > normalization_tol):
        raise ContractViolationError(
            f"Direction must satisfy g^ab w_a w_b = 1; got {float(np.max(np.abs(norm2 - 1.0))):.3e} off"
        )
    c = _sound_speed(p, gas)
    vw = np.einsum("...a,...a->...", p[..., V1:V3], w)
    return np.stack(np.broadcast_arrays(vw, vw, vw, vw - c, vw + c), axis=-1)


def max_wave_speed(p, metric: MetricData, gas: GasModel, alpha: int) -> np.ndarray:
    """Largest |lambda| along the coordinate normal of face direction alpha, scaled by |n|.

    Equal to |v^a| + c sqrt(g^aa): unsteady_wave_speeds with w = n / |n| times |n|, n = e_alpha.
    """
    a = alpha - 1
    p = as_array(p)
    c = _sound_speed(p, gas)
    return np.abs(p[..., V1 + a]) + c * np.sqrt(metric.g_up[..., a, a])


def region_table(labels: np.ndarray, margin: np.ndarray, c: np.ndarray, xi1, xi2) -> pd.DataFrame:
    """Per-cell classification table from (N1, N2) label, margin and sound-speed grids."""
    n1, n2 = labels.shape
    ii, jj = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    names = {int(t): t.name.lower() for t in CharacteristicType}
    return pd.DataFrame(
        {
            "cell": (ii * n2 + jj).ravel(),
            "i": ii.ravel(),
            "j": jj.ravel(),
            "xi1": np.broadcast_to(xi1, labels.shape).ravel(),
            "xi2": np.broadcast_to(xi2, labels.shape).ravel(),
            "q_c": (margin + c).ravel(),
            "c": c.ravel(),
            "margin": margin.ravel(),
            "label": [names[x] for x in labels.ravel()],
        }
    )


def region_map(
    p, metric: MetricData, gas: GasModel, xi1: np.ndarray, xi2: np.ndarray, tol: float = DEFAULT_SONIC_TOL
) -> pd.DataFrame:
    """Per-cell classification table for a structured field of shape (N1, N2, 5)."""
    p = as_array(p)
    assert p.ndim == 3, f"Expected a (N1, N2, 5) field, got shape {p.shape}"
    labels, margin = characteristic_types(p, metric, gas, tol)
    return region_table(labels, margin, _sound_speed(p, gas), xi1, xi2)


def region_components(
    labels: np.ndarray, kind: CharacteristicType, periodic: bool = True
) -> Tuple[np.ndarray, int]:
    """Connected regions of one type on an (N1, N2) label grid.

    Components touching across the xi^2 seam are merged when periodic is set.

    Returns:
        (component ids, 0 where the cell is of another type; number of components)
    """
    mask = np.asarray(labels) == int(kind)
    comp, n = ndimage.label(mask)
    if periodic and n > 1:
        a, b = comp[:, 0], comp[:, -1]
        touching = (a > 0) & (b > 0)
        seam = sparse.coo_matrix(
            (np.ones(int(touching.sum())), (a[touching] - 1, b[touching] - 1)), shape=(n, n)
        )
        n, merged = connected_components(seam, directed=False)
        comp = np.concatenate([[0], merged + 1])[comp]
    return comp, int(n)
