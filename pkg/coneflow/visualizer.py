from typing import Optional, Tuple

import numpy as np
import pandas as pd
from matplotlib.colors import ListedColormap
from matplotlib.figure import Figure

from coneflow.classify import CharacteristicType


class Visualizer:
    """Static diagnostic plots of a run; every method returns a matplotlib Figure."""

    def __init__(self, figsize: Tuple[int, int] = (7, 5)) -> None:
        self.figsize = figsize

    def plot_region_map(self, region_df: pd.DataFrame, figtitle: str = "") -> Figure:
        """Type of the steady system per cell over (xi2, xi1).

        Args:
            region_df (pandas.DataFrame): output of classify.region_map
            figtitle (str): plot title

        Returns:
            Figure
        """
        assert {"i", "j", "label"} <= set(region_df.columns), "Expected a region map table"
        n1, n2 = region_df["i"].max() + 1, region_df["j"].max() + 1
        codes = {t.name.lower(): int(t) for t in CharacteristicType}
        grid = np.full((n1, n2), np.nan)
        grid[region_df["i"].values, region_df["j"].values] = region_df["label"].map(codes).values
        xi1 = region_df["xi1"].values.reshape(n1, n2)
        xi2 = region_df["xi2"].values.reshape(n1, n2)

        fig = Figure(figsize=self.figsize)
        ax = fig.add_subplot(111, projection="polar")
        cmap = ListedColormap(["tab:orange", "lightgrey", "tab:blue"])
        ax.pcolormesh(xi2, xi1, grid, cmap=cmap, vmin=-1.5, vmax=1.5, shading="nearest")
        ax.set_title(figtitle or "elliptic (orange) / hyperbolic (blue)")
        return fig

    def plot_residual_history(self, history: pd.DataFrame, figtitle: str = "") -> Figure:
        fig = Figure(figsize=self.figsize)
        ax = fig.add_subplot(111)
        for col in [c for c in history.columns if c.startswith("r_")]:
            ax.semilogy(history["iteration"], history[col], label=col[2:])
        ax.set_xlabel("iteration")
        ax.set_ylabel("relative L2 residual")
        ax.legend()
        ax.set_title(figtitle)
        return fig

    def plot_surface_pressure(
        self,
        theta: np.ndarray,
        cp: np.ndarray,
        cp_reference: Optional[float] = None,
        figtitle: str = "",
    ) -> Figure:
        fig = Figure(figsize=self.figsize)
        ax = fig.add_subplot(111)
        ax.plot(np.degrees(theta), cp, "o-", markersize=3, label="solver")
        if cp_reference is not None:
            ax.axhline(cp_reference, color="k", linestyle="--", label="circular-cone reference")
        ax.set_xlabel("azimuth (deg)")
        ax.set_ylabel("surface cp")
        ax.legend()
        ax.set_title(figtitle)
        return fig
