import numpy as np
import pytest

from coneflow.exceptions import InvalidStateError
from coneflow.gas import IdealGas
from coneflow.geometry import CircleCurve, EllipseCurve, MetricData, body_conforming_chart, spherical_chart
from coneflow.state import (
    E,
    RHO,
    V1,
    V2,
    V3,
    FreestreamSpec,
    PrimitiveState,
    conserved_to_primitive,
    crossflow_speed,
    crossflow_speed_squared,
    primitive_to_conserved,
    project_freestream,
    total_energy,
)
from coneflow.utils import generate_spd_metric


class TestStates:
    def test_crossflow_speed_euclidean(self):
        metric = MetricData.from_lower(np.eye(2))
        assert crossflow_speed(3.0, 4.0, metric) == pytest.approx(5.0)

    def test_total_energy(self):
        metric = MetricData.from_lower(np.diag([1.0, 4.0]))
        p = PrimitiveState(rho=1.0, v1=1.0, v2=0.5, V3=2.0, e=3.0)
        # q_c^2 = 1 + 4 * 0.25 = 2
        assert total_energy(p, metric) == pytest.approx(3.0 + 0.5 * (2.0 + 4.0))

    def test_conversion_inverts(self):
        rng = np.random.default_rng(1)
        metric = MetricData.from_lower(generate_spd_metric(40, rng))
        p = np.column_stack(
            [rng.uniform(0.5, 2, 40), rng.normal(size=(40, 3)), rng.uniform(1, 2, 40)]
        )
        u = primitive_to_conserved(p, metric)
        np.testing.assert_allclose(u[:, 0], metric.sqrt_g * p[:, RHO])
        np.testing.assert_allclose(conserved_to_primitive(u, metric), p, rtol=1e-12, atol=1e-12)

    def test_negative_density_reports_cells(self):
        metric = MetricData.from_lower(np.broadcast_to(np.eye(2), (3, 4, 2, 2)).copy())
        p = np.ones((3, 4, 5))
        u = primitive_to_conserved(p, metric)
        u[2, 1, 0] = -1.0
        with pytest.raises(InvalidStateError) as info:
            conserved_to_primitive(u, metric)
        assert (2, 1) in info.value.cells

    def test_negative_internal_energy_rejected(self):
        metric = MetricData.from_lower(np.eye(2))
        u = primitive_to_conserved(np.array([1.0, 1.0, 0.0, 0.0, 1.0]), metric)
        u[4] = 0.1
        with pytest.raises(InvalidStateError):
            conserved_to_primitive(u, metric)

    def test_primitive_state_validation(self):
        with pytest.raises(InvalidStateError):
            PrimitiveState(rho=-1.0, v1=0.0, v2=0.0, V3=0.0, e=1.0)
        p = PrimitiveState.from_array([1.0, 0.1, 0.2, 0.3, 2.0])
        assert p.V3 == pytest.approx(0.3)


class TestFreestream:
    def test_from_mach_is_nondimensional(self):
        gas = IdealGas()
        fs = FreestreamSpec.from_mach(2.0)
        assert fs.mach(gas) == pytest.approx(2.0)
        assert gas.pressure(fs.rho_inf, fs.e_inf)[0] == pytest.approx(1.0 / 1.4)
        np.testing.assert_allclose(fs.velocity, [0.0, 0.0, 2.0], atol=1e-15)

    def test_subsonic_rejected(self):
        with pytest.raises(ValueError):
            FreestreamSpec.from_mach(0.8).check_supersonic(IdealGas())

    def test_axial_projection_on_sphere(self):
        chart = spherical_chart(0.2, 1.2)
        phi, theta = chart.sample(6)
        p = project_freestream(FreestreamSpec.from_mach(2.0), chart, phi, theta)
        np.testing.assert_allclose(p[..., V1], -2.0 * np.sin(phi), atol=1e-14)
        np.testing.assert_allclose(p[..., V2], 0.0, atol=1e-14)
        np.testing.assert_allclose(p[..., V3], 2.0 * np.cos(phi), atol=1e-14)
        np.testing.assert_allclose(p[..., RHO], 1.0)

    def test_projection_preserves_speed_on_any_chart(self):
        chart = body_conforming_chart(EllipseCurve(0.25, 0.15), CircleCurve(0.8))
        fs = FreestreamSpec.from_mach(2.5, alpha=np.radians(7.0), sideslip=np.radians(2.0))
        xi1, xi2 = chart.sample(10)
        p = project_freestream(fs, chart, xi1, xi2)
        speed2 = crossflow_speed_squared(p, chart.metric(xi1, xi2)) + p[..., V3] ** 2
        np.testing.assert_allclose(speed2, fs.speed**2, rtol=1e-8)
        np.testing.assert_allclose(p[..., E], fs.e_inf)


if __name__ == "__main__":
    pytest.main([__file__])
