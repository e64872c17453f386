import logging
from dataclasses import dataclass

import numpy as np

from coneflow.geometry import Chart, MetricData
from coneflow.memoizer import memoizer

logger = logging.getLogger(__name__)

N_GHOST = 2


@dataclass(frozen=True)
class Mesh:
    """Uniform structured grid of n1 x n2 cells over a chart rectangle.

    Metric tables are built once and shared read-only: cell centers (n1, n2),
    xi^1-faces (n1 + 1, n2) and xi^2-faces (n1, n2 + 1). With a periodic xi^2 the
    last xi^2-face coincides with the first.
    """

    chart: Chart
    n1: int
    n2: int
    xi1_edges: np.ndarray
    xi2_edges: np.ndarray
    cell_metric: MetricData
    face1_metric: MetricData
    face2_metric: MetricData

    @property
    def d1(self) -> float:
        return float(self.xi1_edges[1] - self.xi1_edges[0])

    @property
    def d2(self) -> float:
        return float(self.xi2_edges[1] - self.xi2_edges[0])

    @property
    def periodic(self) -> bool:
        return bool(self.chart.periodic[1])

    @property
    def shape(self):
        return (self.n1, self.n2)

    @property
    def xi1_centers(self) -> np.ndarray:
        return 0.5 * (self.xi1_edges[1:] + self.xi1_edges[:-1])

    @property
    def xi2_centers(self) -> np.ndarray:
        return 0.5 * (self.xi2_edges[1:] + self.xi2_edges[:-1])

    def centers(self):
        """Cell-center coordinates as two (n1, n2) arrays."""
        return np.meshgrid(self.xi1_centers, self.xi2_centers, indexing="ij")

    def padded_centers(self, n_ghost: int = N_GHOST):
        """Centers of the cell array extended by n_ghost layers on every side."""
        k = np.arange(-n_ghost, self.n1 + n_ghost)
        m = np.arange(-n_ghost, self.n2 + n_ghost)
        x1 = self.xi1_edges[0] + (k + 0.5) * self.d1
        x2 = self.xi2_edges[0] + (m + 0.5) * self.d2
        return np.meshgrid(x1, x2, indexing="ij")


def _build_metric_tables(chart: Chart, n1: int, n2: int):
    (lo1, hi1), (lo2, hi2) = chart.bounds
    e1 = np.linspace(lo1, hi1, n1 + 1)
    e2 = np.linspace(lo2, hi2, n2 + 1)
    c1 = 0.5 * (e1[1:] + e1[:-1])
    c2 = 0.5 * (e2[1:] + e2[:-1])
    cell = chart.metric(*np.meshgrid(c1, c2, indexing="ij"))
    face1 = chart.metric(*np.meshgrid(e1, c2, indexing="ij"))
    face2 = chart.metric(*np.meshgrid(c1, e2, indexing="ij"))
    for name, metric in (("cell", cell), ("xi1-face", face1), ("xi2-face", face2)):
        metric.check()
        logger.debug(f"{name} metric table {metric.shape} built")
    return e1, e2, cell, face1, face2


def build_mesh(chart: Chart, n1: int, n2: int, cache: bool = True) -> Mesh:
    """Build the mesh and its metric tables, reusing tables built earlier for the same chart.

    Args:
        chart (Chart): coordinate chart spanning the domain
        n1 (int): cells along xi^1 (body to outer boundary)
        n2 (int): cells along xi^2 (azimuth)
        cache (bool): look up and store metric tables in the module memoizer; ignored for charts
            that are not cacheable

    Returns:
        Mesh
    """
    assert n1 >= 2 and n2 >= 2, f"Mesh needs at least 2x2 cells, got {n1}x{n2}"
    if cache and chart.cacheable:
        tables = memoizer(
            _build_metric_tables,
            {"chart": chart.description, "n1": n1, "n2": n2},
            chart=chart,
            n1=n1,
            n2=n2,
        )
    else:
        tables = _build_metric_tables(chart, n1, n2)
    e1, e2, cell, face1, face2 = tables
    return Mesh(
        chart=chart,
        n1=n1,
        n2=n2,
        xi1_edges=e1,
        xi2_edges=e2,
        cell_metric=cell,
        face1_metric=face1,
        face2_metric=face2,
    )
