from dataclasses import dataclass

import numpy as np
import pytest

from coneflow.exceptions import InvalidStateError
from coneflow.gas import GasModel, IdealGas, gas_from_config


@dataclass(frozen=True)
class StiffenedGas(GasModel):
    """P = (gamma - 1) rho e - gamma P_inf; exercises the general sound-speed formula."""

    gamma: float = 4.4
    p_inf: float = 0.5
    kind: str = "stiffened-gas"

    def pressure(self, rho, e):
        rho, e = np.asarray(rho, dtype=float), np.asarray(e, dtype=float)
        gm1 = self.gamma - 1.0
        return gm1 * rho * e - self.gamma * self.p_inf, gm1 * e, gm1 * rho


class TestIdealGas:
    def test_pressure_and_derivatives(self):
        gas = IdealGas(1.4)
        P, P_rho, P_e = gas.pressure(2.0, 3.0)
        assert P == pytest.approx(0.4 * 6.0)
        assert P_rho == pytest.approx(0.4 * 3.0)
        assert P_e == pytest.approx(0.4 * 2.0)

    def test_general_sound_speed_matches_shortcut(self):
        gas = IdealGas(1.3)
        rho = np.linspace(0.2, 3.0, 11)
        e = np.linspace(0.5, 4.0, 11)
        np.testing.assert_allclose(gas.sound_speed(rho, e), gas.sound_speed_ideal(rho, e), rtol=1e-13)

    def test_unit_freestream_sound_speed(self):
        gas = IdealGas()
        e = gas.internal_energy(1.0, 1.0 / 1.4)
        assert gas.sound_speed(1.0, e) == pytest.approx(1.0)

    def test_invalid_states(self):
        gas = IdealGas()
        with pytest.raises(InvalidStateError):
            gas.pressure(0.0, 1.0)
        with pytest.raises(InvalidStateError) as info:
            gas.sound_speed(np.array([1.0, 1.0, 1.0]), np.array([1.0, -1.0, 1.0]))
        assert info.value.cells == [(1,)]

    def test_gamma_must_exceed_one(self):
        with pytest.raises(ValueError):
            IdealGas(1.0)

    def test_from_config(self):
        assert gas_from_config({"kind": "ideal-gas", "gamma": 1.3}) == IdealGas(1.3)
        with pytest.raises(ValueError):
            gas_from_config({"kind": "van-der-waals"})


class TestGeneralEquationOfState:
    def test_stiffened_gas_sound_speed(self):
        gas = StiffenedGas()
        rho, e = 1.5, 2.0
        P = gas.pressure(rho, e)[0]
        expected = np.sqrt(gas.gamma * (P + gas.p_inf) / rho)
        assert gas.sound_speed(rho, e) == pytest.approx(expected, rel=1e-13)


if __name__ == "__main__":
    pytest.main([__file__])
