import os
from typing import List, Optional, Tuple

import numpy as np

THREADS_ENV_VAR = "CONEFLOW_THREADS"


def resolve_threads(threads: Optional[int] = None) -> int:
    """Worker count: explicit argument first, then the environment, then 1."""
    if threads is not None:
        if threads < 1:
            raise ValueError(f"Thread count must be positive, got {threads}")
        return int(threads)
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR}={env!r} is not an integer")
        return max(value, 1)
    return 1


def row_blocks(n_rows: int, n_blocks: int) -> List[Tuple[int, int]]:
    """Split range(n_rows) into at most n_blocks contiguous [start, stop) pieces.

    The partition depends only on (n_rows, n_blocks), so work assigned to each
    block is reproducible from run to run.
    """
    n_blocks = max(1, min(n_blocks, n_rows))
    edges = np.linspace(0, n_rows, n_blocks + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def quadratic_form(g: np.ndarray, a: np.ndarray, b: Optional[np.ndarray] = None):
    """g_{ab} a^a b^b over trailing axes; g has shape (..., 2, 2), a and b (..., 2)."""
    if b is None:
        b = a
    return np.einsum("...ij,...i,...j->...", g, a, b)


def lower_index(g_lo: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", g_lo, v)


def generate_spd_metric(
    n_points: int = 1, rng: Optional[np.random.Generator] = None, spread: float = 0.5
) -> np.ndarray:
    """generates random symmetric, positive definite 2x2 metrics

    Args:
        n_points (int, optional): number of metrics. Defaults to 1.
        rng (np.random.Generator, optional): random generator. Defaults to a fresh default_rng().
        spread (float, optional): size of the random perturbation of the identity.

    Returns:
        np.ndarray: array of shape (n_points, 2, 2)
    """
    rng = np.random.default_rng() if rng is None else rng
    A = np.eye(2) + spread * rng.uniform(-1.0, 1.0, size=(n_points, 2, 2))
    return A @ np.swapaxes(A, -1, -2) + 0.05 * np.eye(2)
