"""Face-state reconstruction from padded primitive arrays."""
from typing import Tuple

import numpy as np

from coneflow.state import E, RHO
from coneflow.solver.mesh import N_GHOST

LIMITERS = ("first-order", "minmod")


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minmod slope limiter using numpy vectorization"""
    result = np.zeros(np.broadcast_shapes(np.shape(a), np.shape(b)))
    a, b = np.broadcast_arrays(a, b)
    positive_mask = (a * b) > 0
    result[positive_mask] = np.sign(a[positive_mask]) * np.minimum(
        np.abs(a[positive_mask]), np.abs(b[positive_mask])
    )
    return result


def reconstruct(P: np.ndarray, axis: int, limiter: str = "first-order") -> Tuple[np.ndarray, np.ndarray]:
    """Left and right primitive states on the faces normal to one chart axis.

    Args:
        P (np.ndarray): padded primitives, shape (n1 + 4, n2 + 4, 5)
        axis (int): 0 for xi^1-faces, 1 for xi^2-faces
        limiter (str): "first-order" (piecewise constant) or "minmod" (MUSCL)

    Returns:
        (pL, pR), each of shape (n1 + 1, n2, 5) for axis 0 or (n1, n2 + 1, 5) for axis 1.
        Faces where the limited states lose positivity fall back to first order.
    """
    assert limiter in LIMITERS, f"Unknown limiter {limiter!r}; valid values are {LIMITERS}"
    g = N_GHOST
    # move the reconstruction axis first, keep only interior cells across it
    Q = np.moveaxis(P, axis, 0)[:, g:-g]
    n = Q.shape[0] - 2 * g
    left = Q[g - 1 : g + n]
    right = Q[g : g + n + 1]
    if limiter == "first-order":
        pL, pR = left.copy(), right.copy()
    else:
        slope = minmod(Q[1:-1] - Q[:-2], Q[2:] - Q[1:-1])
        # slope[k] belongs to Q[k + 1]
        pL = left + 0.5 * slope[g - 2 : g + n - 1]
        pR = right - 0.5 * slope[g - 1 : g + n]
        bad = (pL[..., RHO] <= 0) | (pL[..., E] <= 0) | (pR[..., RHO] <= 0) | (pR[..., E] <= 0)
        if np.any(bad):
            pL[bad] = left[bad]
            pR[bad] = right[bad]
    return np.moveaxis(pL, 0, axis), np.moveaxis(pR, 0, axis)
