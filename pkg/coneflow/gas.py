from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from coneflow.exceptions import InvalidStateError


def _check_positive(rho, e):
    rho = np.asarray(rho, dtype=float)
    e = np.asarray(e, dtype=float)
    bad = (rho <= 0) | (e <= 0) | ~np.isfinite(rho) | ~np.isfinite(e)
    if np.any(bad):
        cells = [tuple(int(i) for i in idx) for idx in np.argwhere(np.atleast_1d(bad))[:10]]
        raise InvalidStateError(
            "Non-positive density or internal energy passed to the equation of state", cells=cells
        )
    return rho, e


class GasModel(ABC):
    """Equation of state P(rho, e).

    Subclasses provide the pressure and its partial derivatives; the sound speed
    follows from them for any law.
    """

    kind: str = "abstract"

    @abstractmethod
    def pressure(self, rho, e) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Returns (P, dP/drho at fixed e, dP/de at fixed rho)."""

    def sound_speed(self, rho, e) -> np.ndarray:
        """c = sqrt(P P_e + rho^2 P_rho) / rho"""
        rho, e = _check_positive(rho, e)
        P, P_rho, P_e = self.pressure(rho, e)
        radicand = P * P_e + rho * rho * P_rho
        if np.any(radicand <= 0):
            raise InvalidStateError("Negative c^2 from the equation of state")
        return np.sqrt(radicand) / rho

    def to_dict(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class IdealGas(GasModel):
    """Calorically perfect gas, P = (gamma - 1) rho e."""

    gamma: float = 1.4
    kind: str = "ideal-gas"

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")

    def pressure(self, rho, e):
        rho, e = _check_positive(rho, e)
        gm1 = self.gamma - 1.0
        return gm1 * rho * e, gm1 * e, gm1 * rho * np.ones_like(e)

    def sound_speed_ideal(self, rho, e) -> np.ndarray:
        """sqrt(gamma P / rho), the ideal-gas shortcut of sound_speed."""
        rho, e = _check_positive(rho, e)
        return np.sqrt(self.gamma * (self.gamma - 1.0) * e)

    def internal_energy(self, rho, P) -> np.ndarray:
        return np.asarray(P, dtype=float) / ((self.gamma - 1.0) * np.asarray(rho, dtype=float))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma}


def gas_from_config(cfg: dict) -> GasModel:
    kind = cfg.get("kind", "ideal-gas")
    if kind != "ideal-gas":
        raise ValueError(f'Unknown gas kind {kind!r}; the only valid value is "ideal-gas"')
    return IdealGas(gamma=float(cfg.get("gamma", 1.4)))
