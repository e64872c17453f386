from dataclasses import replace

import numpy as np
import pytest

from coneflow.config import SolverConfig
from coneflow.exceptions import DivergenceError, InvalidStateError, SolverFailureError
from coneflow.gas import IdealGas
from coneflow.geometry import CircleCurve, EllipseCurve, FunctionCurve, body_conforming_chart, spherical_chart
from coneflow.solver import (
    N_GHOST,
    BoundaryConditions,
    GhostFiller,
    SolverContext,
    apply_boundary_conditions,
    build_mesh,
    compute_time_step,
    divergence_and_source,
    initial_field,
    minmod,
    reconstruct,
    reflect_wall_velocity,
    run_to_steady,
    semidiscrete_residual,
    step,
    tangential_wall_velocity,
    wall_flux,
)
from coneflow.solver import marching
from coneflow.state import RHO, V1, V2, V3, E, FreestreamSpec, conserved_to_primitive, primitive_to_conserved
from coneflow.utils import quadratic_form

GAS = IdealGas()
FS = FreestreamSpec.from_mach(2.0)


def annulus_mesh(n=16):
    return build_mesh(spherical_chart(np.radians(35.0), np.radians(70.0)), n, n)


def annulus_cfg(**kwargs):
    cfg = SolverConfig(inner_boundary="freestream", outer_boundary="freestream", log_every=0)
    return replace(cfg, **kwargs)


def annulus_ghosts(mesh):
    return GhostFiller(mesh, BoundaryConditions.cone(FS, "freestream", "freestream"))


class TestMesh:
    def test_table_shapes(self):
        mesh = build_mesh(spherical_chart(0.4, 1.0), 6, 8, cache=False)
        assert mesh.cell_metric.shape == (6, 8)
        assert mesh.face1_metric.shape == (7, 8)
        assert mesh.face2_metric.shape == (6, 9)
        assert mesh.d1 == pytest.approx(0.1)
        assert mesh.periodic

    def test_tables_are_cached(self):
        chart = spherical_chart(0.4, 1.0)
        assert build_mesh(chart, 5, 7).cell_metric is build_mesh(chart, 5, 7).cell_metric

    def test_function_curve_charts_bypass_the_cache(self):
        outer = CircleCurve(0.7)
        near = body_conforming_chart(FunctionCurve(lambda t: 0.2 + 0 * t), outer)
        far = body_conforming_chart(FunctionCurve(lambda t: 0.3 + 0 * t), outer)
        a, b = build_mesh(near, 4, 6), build_mesh(far, 4, 6)
        assert a.cell_metric is not build_mesh(near, 4, 6).cell_metric
        assert not np.allclose(a.cell_metric.g_lo, b.cell_metric.g_lo)

    def test_padded_centers(self):
        mesh = annulus_mesh(8)
        X1, X2 = mesh.padded_centers()
        assert X1.shape == (8 + 2 * N_GHOST, 8 + 2 * N_GHOST)
        np.testing.assert_allclose(X1[N_GHOST:-N_GHOST, N_GHOST:-N_GHOST], mesh.centers()[0])


class TestReconstruction:
    def test_minmod(self):
        slopes = minmod(np.array([1.0, -2.0, 1.0]), np.array([3.0, -1.0, -1.0]))
        np.testing.assert_allclose(slopes, [1.0, -1.0, 0.0])

    def test_first_order_takes_neighbour_cells(self):
        P = np.random.default_rng(0).uniform(1, 2, size=(6 + 2 * N_GHOST, 5 + 2 * N_GHOST, 5))
        pL, pR = reconstruct(P, 0)
        assert pL.shape == (7, 5, 5)
        g = N_GHOST
        np.testing.assert_array_equal(pL, P[g - 1 : -g, g:-g])
        np.testing.assert_array_equal(pR, P[g : -g + 1, g:-g])

    def test_minmod_is_exact_for_linear_data(self):
        n, g = 6, N_GHOST
        x = np.arange(-g, n + g) + 0.5
        P = np.ones((n + 2 * g, 3 + 2 * g, 5)) + 0.1 * x[:, None, None]
        pL, pR = reconstruct(P, 0, "minmod")
        faces = 1.0 + 0.1 * np.arange(n + 1)
        np.testing.assert_allclose(pL[:, 0, 0], faces)
        np.testing.assert_allclose(pR[:, 0, 0], faces)

    def test_minmod_flattens_extrema(self):
        n, g = 4, N_GHOST
        P = np.ones((n + 2 * g, 1 + 2 * g, 5))
        P[:, :, 0] = np.array([1.0, 1.0, 2.0, 3.0, 2.0, 1.0, 1.0, 1.0])[:, None]
        pL, pR = reconstruct(P, 0, "minmod")
        assert pL[2, 0, 0] == 3.0
        assert pR[1, 0, 0] == 3.0


class TestBoundaries:
    def test_wall_reflection_is_an_isometry(self):
        chart = body_conforming_chart(EllipseCurve(0.25, 0.15), CircleCurve(0.7))
        metric = chart.metric(0.0, np.linspace(0, 6, 7))
        p = np.tile([1.0, 0.3, -0.2, 1.5, 2.0], (7, 1))
        q = reflect_wall_velocity(p, metric.g_up)
        np.testing.assert_allclose(q[:, V1], -p[:, V1])
        np.testing.assert_allclose(
            quadratic_form(metric.g_lo, q[:, V1:V3]), quadratic_form(metric.g_lo, p[:, V1:V3])
        )
        np.testing.assert_array_equal(q[:, V3], p[:, V3])

    def test_tangential_part_is_half_the_reflection(self):
        chart = body_conforming_chart(EllipseCurve(0.25, 0.15), CircleCurve(0.7))
        metric = chart.metric(0.0, np.linspace(0, 6, 7))
        p = np.tile([1.0, 0.3, -0.2, 1.5, 2.0], (7, 1))
        t = tangential_wall_velocity(p, metric.g_up)
        np.testing.assert_allclose(t[:, V1], 0.0, atol=1e-15)
        np.testing.assert_allclose(t, 0.5 * (p + reflect_wall_velocity(p, metric.g_up)))

    def test_wall_ghosts_mirror_interior(self):
        mesh = build_mesh(spherical_chart(0.3, 0.9), 5, 6)
        p = initial_field(mesh, FS)
        P = apply_boundary_conditions(p, mesh, BoundaryConditions.cone(FS, "wall", "freestream"))
        g = N_GHOST
        assert P.shape == (5 + 2 * g, 6 + 2 * g, 5)
        for k in (1, 2):
            ghost, cell = P[g - k, g:-g], P[g + k - 1, g:-g]
            np.testing.assert_allclose(ghost[:, V1], -cell[:, V1])
            np.testing.assert_allclose(ghost[:, V2], cell[:, V2])
            np.testing.assert_allclose(ghost[:, V3], cell[:, V3])

    def test_periodic_wrap(self):
        mesh = annulus_mesh(6)
        p = np.random.default_rng(2).uniform(1, 2, size=(6, 6, 5))
        P = annulus_ghosts(mesh).pad(p)
        g = N_GHOST
        np.testing.assert_array_equal(P[g:-g, :g], p[:, -g:])
        np.testing.assert_array_equal(P[g:-g, -g:], p[:, :g])

    def test_periodicity_must_match_chart(self):
        mesh = build_mesh(spherical_chart(0.3, 0.9, theta_bounds=(0.1, 0.5)), 4, 4)
        with pytest.raises(AssertionError):
            GhostFiller(mesh, BoundaryConditions.cone(FS))


class TestResidual:
    def test_threads_do_not_change_the_residual(self):
        mesh = annulus_mesh(12)
        ghosts = annulus_ghosts(mesh)
        p = initial_field(mesh, FS) * np.random.default_rng(3).uniform(0.95, 1.05, size=(12, 12, 5))
        serial = semidiscrete_residual(p, mesh, GAS, ghosts, "minmod", threads=1)
        threaded = semidiscrete_residual(p, mesh, GAS, ghosts, "minmod", threads=3)
        again = semidiscrete_residual(p, mesh, GAS, ghosts, "minmod", threads=3)
        np.testing.assert_allclose(serial, threaded, rtol=1e-13, atol=1e-13)
        np.testing.assert_array_equal(threaded, again)

    def test_parts_sum_to_residual(self):
        mesh = annulus_mesh(8)
        ghosts = annulus_ghosts(mesh)
        p = initial_field(mesh, FS)
        div, S, F1, F2 = divergence_and_source(p, mesh, GAS, ghosts)
        assert F1.shape == (9, 8, 5) and F2.shape == (8, 9, 5)
        R = semidiscrete_residual(p, mesh, GAS, ghosts)
        np.testing.assert_allclose(div + S, R, rtol=1e-12, atol=1e-12)

    def test_freestream_residual_shrinks_under_refinement(self):
        norms = []
        for n in (16, 32):
            mesh = annulus_mesh(n)
            R = semidiscrete_residual(initial_field(mesh, FS), mesh, GAS, annulus_ghosts(mesh))
            norms.append(np.abs(R).max())
        assert norms[1] < 0.7 * norms[0]

    def test_wall_face_carries_only_pressure(self):
        mesh = build_mesh(spherical_chart(0.3, 0.9), 6, 8)
        ghosts = GhostFiller(mesh, BoundaryConditions.cone(FS, "wall", "freestream"))
        p = initial_field(mesh, FS)
        _, _, F1, _ = divergence_and_source(p, mesh, GAS, ghosts)
        wall = mesh.face1_metric[0]
        P = GAS.pressure(p[0, :, RHO], p[0, :, E])[0]
        np.testing.assert_allclose(F1[0, :, [0, 3, 4]], 0.0, atol=1e-14)
        np.testing.assert_allclose(F1[0, :, 1], wall.sqrt_g * wall.g_up[:, 0, 0] * P, rtol=1e-12)
        np.testing.assert_allclose(F1[0], wall_flux(p[0], wall, GAS))

    def test_wall_flux_kinds_agree_for_tangent_flow(self):
        mesh = build_mesh(spherical_chart(0.3, 0.9), 6, 8)
        ghosts = GhostFiller(mesh, BoundaryConditions.cone(FS, "wall", "freestream"))
        p = initial_field(mesh, FS)
        pressure = semidiscrete_residual(p, mesh, GAS, ghosts, wall_flux_kind="pressure")
        llf = semidiscrete_residual(p, mesh, GAS, ghosts, wall_flux_kind="llf")
        np.testing.assert_array_equal(pressure[1:], llf[1:])
        assert np.abs(pressure[0] - llf[0]).max() > 1e-6

        p[0, :, V1] = 0.0
        pressure = semidiscrete_residual(p, mesh, GAS, ghosts, wall_flux_kind="pressure")
        llf = semidiscrete_residual(p, mesh, GAS, ghosts, wall_flux_kind="llf")
        np.testing.assert_allclose(pressure, llf, rtol=1e-12, atol=1e-12)

    def test_time_step(self):
        mesh = annulus_mesh(8)
        p = initial_field(mesh, FS)
        local = compute_time_step(p, mesh, GAS, 0.5, local=True)
        assert local.shape == (8, 8)
        assert compute_time_step(p, mesh, GAS, 0.5) == pytest.approx(local.min())


class TestMarching:
    def test_single_iteration_is_not_converged(self):
        mesh = annulus_mesh(8)
        sol = run_to_steady(annulus_cfg(max_iterations=1), mesh, GAS, FS)
        assert sol.status == "max-iterations"
        assert not sol.converged
        assert sol.iterations == 1
        assert sol.history["residual"].iloc[0] == pytest.approx(1.0)
        assert list(sol.history.columns) == [
            "iteration",
            "r_mass",
            "r_mom1",
            "r_mom2",
            "r_mom_r",
            "r_energy",
            "residual",
        ]

    def test_zero_initial_residual_converges_at_once(self):
        mesh = annulus_mesh(8)
        bcs = BoundaryConditions.cone(FS, "freestream", "freestream")
        # the marcher starts from the primitives recovered from the conserved freestream
        U = primitive_to_conserved(initial_field(mesh, FS), mesh.cell_metric)
        p = conserved_to_primitive(U, mesh.cell_metric, GAS)
        forcing = semidiscrete_residual(p, mesh, GAS, GhostFiller(mesh, bcs), threads=1)
        sol = run_to_steady(annulus_cfg(max_iterations=5), mesh, GAS, FS, forcing=forcing, threads=1)
        assert sol.converged
        assert sol.status == "converged"
        assert sol.iterations == 1

    def test_residual_decreases(self):
        mesh = annulus_mesh(8)
        sol = run_to_steady(annulus_cfg(max_iterations=200, threshold=1e-12), mesh, GAS, FS)
        assert sol.iterations <= 200
        assert sol.history["residual"].iloc[-1] < 0.5

    @pytest.mark.parametrize(
        "options", [{"integrator": "ssp-rk2"}, {"local_time_stepping": True}, {"limiter": "minmod"}]
    )
    def test_marching_variants(self, options):
        mesh = annulus_mesh(8)
        sol = run_to_steady(annulus_cfg(max_iterations=200, threshold=1e-12, **options), mesh, GAS, FS)
        assert np.all(np.isfinite(sol.conserved))
        assert sol.history["residual"].iloc[-1] < 1.0

    def test_divergence_raises_with_solution(self):
        mesh = annulus_mesh(8)
        with pytest.raises(DivergenceError) as info:
            run_to_steady(annulus_cfg(divergence_factor=0.5), mesh, GAS, FS)
        assert info.value.solution.status == "diverged"
        assert len(info.value.solution.history) == 1

    def test_snapshot_callback(self):
        mesh = annulus_mesh(8)
        seen = []
        run_to_steady(
            annulus_cfg(max_iterations=7, threshold=1e-12),
            mesh,
            GAS,
            FS,
            callback=lambda it, U: seen.append(it),
            snapshot_every=3,
        )
        assert seen == [3, 6]

    def test_step_gives_up_after_retries(self, monkeypatch):
        mesh = annulus_mesh(8)
        bcs = BoundaryConditions.cone(FS, "freestream", "freestream")
        ctx = SolverContext(mesh=mesh, gas=GAS, ghosts=GhostFiller(mesh, bcs), cfg=annulus_cfg(max_retries=2))
        calls = []

        def always_invalid(ctx, U, R, dt):
            calls.append(dt)
            raise InvalidStateError("negative density", cells=[(3, 4)])

        monkeypatch.setattr(marching, "_advance", always_invalid)
        U = primitive_to_conserved(initial_field(mesh, FS), mesh.cell_metric)
        with pytest.raises(SolverFailureError) as info:
            step(U, ctx)
        assert info.value.cell == (3, 4)
        assert len(calls) == 3
        assert calls[1] == pytest.approx(0.5 * calls[0])


if __name__ == "__main__":
    pytest.main([__file__])
