import numpy as np
import pandas as pd
import pytest

from coneflow import flux
from coneflow.exceptions import NoAttachedSolutionError, UnconvergedSolutionError, VerificationFailure
from coneflow.gas import IdealGas
from coneflow.geometry import CircleCurve, MetricData, body_conforming_chart, spherical_chart
from coneflow.solver import Solution, build_mesh
from coneflow.state import FreestreamSpec, crossflow_speed_squared, primitive_to_conserved
from coneflow.utils import generate_spd_metric
from coneflow.validate import mms
from coneflow.validate.manufactured import (
    ManufacturedField,
    general_residual,
    oracle_discrepancy,
    random_primitive_states,
    spherical_residual_oracle,
)
from coneflow.validate.mms import default_mms_chart, mms_convergence
from coneflow.validate.report import run_verification
from coneflow.validate.surface import compare_surface_pressure, surface_pressure
from coneflow.validate.taylor_maccoll import (
    max_cone_angle,
    oblique_shock,
    pressure_ratio_to_cp,
    taylor_maccoll,
)

GAS = IdealGas()
SPHERE = spherical_chart(0.2, np.pi - 0.2)


def random_points(rng, n=50):
    return rng.uniform(0.3, np.pi - 0.3, n), rng.uniform(0.0, 2 * np.pi, n)


class TestOracleEquivalence:
    def test_random_fields_match_spherical_equations(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            field = ManufacturedField.random(rng)
            phi, theta = random_points(rng)
            assert oracle_discrepancy(field, SPHERE, phi, theta, GAS) < 1e-10

    def test_axial_freestream_is_an_exact_solution(self):
        phi, theta = random_points(np.random.default_rng(1))
        field = ManufacturedField.axial_freestream(2.0)
        np.testing.assert_allclose(general_residual(field, SPHERE, phi, theta, GAS), 0.0, atol=1e-12)
        np.testing.assert_allclose(spherical_residual_oracle(field, phi, theta, GAS), 0.0, atol=1e-12)

    def test_flipped_source_sign_is_detected(self, monkeypatch):
        original = flux.geometric_source
        monkeypatch.setattr(flux, "geometric_source", lambda p, metric, gas: -original(p, metric, gas))
        rng = np.random.default_rng(2)
        phi, theta = random_points(rng)
        assert oracle_discrepancy(ManufacturedField.random(rng), SPHERE, phi, theta, GAS) > 1e-3
        report = run_verification(["oracle"])
        assert not report.passed

    def test_random_states_respect_mach_range(self):
        rng = np.random.default_rng(3)
        metric = MetricData.from_lower(generate_spd_metric(100, rng))
        p = random_primitive_states(rng, metric.g_lo, GAS, mach_range=(1.1, 3.0))
        ratio = np.sqrt(crossflow_speed_squared(p, metric)) / GAS.sound_speed(p[:, 0], p[:, 4])
        assert ratio.min() >= 1.1 - 1e-12 and ratio.max() <= 3.0 + 1e-12


class TestTaylorMaccoll:
    def test_normal_shock_limit(self):
        shock = oblique_shock(2.0, np.pi / 2)
        assert shock.pressure_ratio == pytest.approx(4.5)
        assert shock.density_ratio == pytest.approx(8.0 / 3.0)
        assert shock.mach2 == pytest.approx(0.57735, abs=1e-5)
        assert shock.deflection == pytest.approx(0.0, abs=1e-12)

    def test_shock_below_mach_angle_rejected(self):
        with pytest.raises(ValueError):
            oblique_shock(2.0, np.radians(25.0))

    def test_ten_degree_cone_at_mach_two(self):
        tm = taylor_maccoll(2.0, np.radians(10.0))
        assert 30.5 < np.degrees(tm.shock_angle) < 32.0
        assert abs(tm.surface_normal_velocity) < 1e-10
        assert 0.09 < tm.surface_cp < 0.12
        assert tm.surface_cp == pytest.approx(pressure_ratio_to_cp(2.0, tm.surface_pressure_ratio))
        assert tm.surface_mach < 2.0
        profile = tm.profile
        assert profile["theta"].iloc[0] == pytest.approx(np.radians(10.0))
        assert np.all(np.diff(profile["p_ratio"].values) < 0)

    def test_detached_cone(self):
        theta_max, beta_max = max_cone_angle(2.0)
        assert 39.0 < np.degrees(theta_max) < 42.0
        assert beta_max > theta_max
        with pytest.raises(NoAttachedSolutionError):
            taylor_maccoll(2.0, np.radians(45.0))

    def test_subsonic_freestream(self):
        with pytest.raises(NoAttachedSolutionError):
            taylor_maccoll(0.9, np.radians(5.0))


class TestManufacturedSolutions:
    def test_default_field_is_supersonic_on_the_patch(self):
        chart = default_mms_chart()
        xi1, xi2 = chart.sample(16, interior=False)
        field = ManufacturedField.smooth_patch_field()
        field.check_positive(chart)
        p = field.primitive(xi1, xi2)
        q2 = crossflow_speed_squared(p, chart.metric(xi1, xi2))
        assert np.all(q2 > GAS.sound_speed(p[..., 0], p[..., 4]) ** 2)

    def test_first_order_truncation(self):
        result = mms_convergence(meshes=(16, 32, 64), limiter="first-order")
        assert list(result.errors.index) == [16, 32, 64]
        orders = result.final_orders
        assert orders.between(0.8, 1.3).all(), orders

    def test_minmod_truncation(self):
        orders = mms_convergence(meshes=(16, 32, 64), limiter="minmod").final_orders
        assert orders.between(1.7, 2.3).all(), orders

    @pytest.mark.slow
    @pytest.mark.parametrize("limiter, lo, hi", [("first-order", 0.8, 1.3), ("minmod", 1.7, 2.3)])
    def test_orders_up_to_128(self, limiter, lo, hi):
        result = mms_convergence(limiter=limiter, threads=3)
        assert list(result.errors.index) == [32, 64, 128]
        assert result.orders.loc[128].between(lo, hi).all(), result.orders

    def test_growing_error_is_a_failure(self, monkeypatch):
        errors = iter([np.full(5, 1e-3), np.full(5, 2e-3), np.full(5, 1e-4)])
        monkeypatch.setattr(mms, "mms_error", lambda *args, **kwargs: next(errors))
        with pytest.raises(VerificationFailure):
            mms_convergence(meshes=(8, 16, 32), threads=1)

    @pytest.mark.slow
    def test_first_order_solution_mode(self):
        orders = mms_convergence(meshes=(8, 16, 32), mode="solution").final_orders
        assert orders.between(0.7, 1.5).all(), orders


class TestSurfacePressure:
    def cone_mesh(self):
        return build_mesh(body_conforming_chart(CircleCurve(0.2), CircleCurve(0.6)), 8, 12)

    def test_linear_extrapolation_to_the_wall(self):
        mesh = self.cone_mesh()
        xi1, _ = mesh.centers()
        p = np.zeros((8, 12, 5))
        p[..., 0] = 1.0
        p[..., 4] = 2.0 + 3.0 * xi1
        sol = Solution(conserved=primitive_to_conserved(p, mesh.cell_metric), converged=True)
        theta, p_wall = surface_pressure(sol, mesh, GAS)
        assert theta.shape == (12,)
        np.testing.assert_allclose(p_wall, 0.4 * 2.0, rtol=1e-10)

    def test_unconverged_solution_refused(self):
        mesh = self.cone_mesh()
        p = np.tile([1.0, 0.0, 0.0, 1.0, 2.0], (8, 12, 1))
        sol = Solution(conserved=primitive_to_conserved(p, mesh.cell_metric), converged=False)
        tm = taylor_maccoll(2.0, 0.2)
        with pytest.raises(UnconvergedSolutionError):
            compare_surface_pressure(sol, mesh, GAS, FreestreamSpec.from_mach(2.0), tm)


class TestReport:
    def test_eigen_and_oracle_suites_pass(self, tmp_path):
        report = run_verification(["oracle", "eigen"], seed=0)
        assert report.passed, report.to_text()
        path = tmp_path / "verification.csv"
        report.to_csv(str(path))
        table = pd.read_csv(path)
        assert list(table.columns) == ["key", "value", "passed", "tolerance"]
        assert "eigen.steady_acoustic_pair" in set(table["key"])

    def test_taylor_maccoll_suite(self):
        assert run_verification(["taylor-maccoll"]).passed

    @pytest.mark.slow
    def test_mms_suite(self):
        report = run_verification(["mms"], threads=3)
        assert report.passed, report.to_text()

    def test_empty_selection(self):
        with pytest.raises(ValueError):
            run_verification([])
        with pytest.raises(ValueError):
            run_verification(["nonsense"])


if __name__ == "__main__":
    pytest.main([__file__])
