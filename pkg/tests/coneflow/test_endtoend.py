import json
from functools import lru_cache

import numpy as np
import pandas as pd
import pytest

from coneflow.cases import circular_cone, elliptic_cone, freestream_annulus
from coneflow.classify import CharacteristicType, characteristic_types, region_components
from coneflow.cli import EXIT_MAX_ITERATIONS, EXIT_OK, main
from coneflow.config import config_from_dict
from coneflow.solver import build_mesh, initial_field, run_to_steady
from coneflow.validate import compare_surface_pressure, taylor_maccoll


def annulus_error(n: int) -> float:
    cfg = config_from_dict(freestream_annulus(n1=n, n2=n))
    cfg.solver.max_iterations = 8000
    cfg.solver.threshold = 1e-8
    cfg.solver.log_every = 0
    gas, fs = cfg.build_gas(), cfg.build_freestream()
    mesh = build_mesh(cfg.build_chart(), n, n)
    sol = run_to_steady(cfg.solver, mesh, gas, fs, threads=2)
    return float(np.abs(sol.primitive(mesh, gas) - initial_field(mesh, fs)).max())


@lru_cache(maxsize=None)
def cone_surface(n: int):
    cfg = config_from_dict(circular_cone(n1=n, n2=n, max_iterations=40000))
    cfg.solver.log_every = 0
    gas, fs = cfg.build_gas(), cfg.build_freestream()
    mesh = build_mesh(cfg.build_chart(), n, n)
    sol = run_to_steady(cfg.solver, mesh, gas, fs, threads=4)
    assert sol.converged, sol.status
    tm = taylor_maccoll(2.0, np.radians(10.0), 1.4)
    return compare_surface_pressure(sol, mesh, gas, fs, tm)


class TestFreestreamAnnulus:
    @pytest.mark.slow
    def test_discrete_freestream_error_is_first_order(self):
        coarse, fine = annulus_error(16), annulus_error(32)
        assert fine < coarse
        assert np.log2(coarse / fine) >= 0.8, (coarse, fine)


class TestDeterminism:
    def run(self, threads):
        cfg = config_from_dict(circular_cone(n1=12, n2=16, max_iterations=20))
        cfg.solver.log_every = 0
        gas, fs = cfg.build_gas(), cfg.build_freestream()
        mesh = build_mesh(cfg.build_chart(), 12, 16)
        return run_to_steady(cfg.solver, mesh, gas, fs, threads=threads)

    def test_repeat_runs_are_identical(self):
        first, second = self.run(3), self.run(3)
        pd.testing.assert_frame_equal(first.history, second.history, check_exact=True)
        np.testing.assert_array_equal(first.conserved, second.conserved)

    def test_thread_count_does_not_change_the_field(self):
        np.testing.assert_allclose(self.run(1).conserved, self.run(4).conserved, rtol=0, atol=1e-12)


class TestCircularCone:
    def test_mixed_type_field(self, tmp_path):
        raw = circular_cone(n1=24, n2=24, max_iterations=50)
        raw["solver"]["log_every"] = 0
        path = tmp_path / "cone.json"
        path.write_text(json.dumps(raw))
        out = tmp_path / "out"
        code = main(["solve", "--config", str(path), "--output", str(out)])
        assert code in (EXIT_OK, EXIT_MAX_ITERATIONS)

        assert main(["classify", str(out / "field.txt"), "--output", str(tmp_path / "classified")]) == EXIT_OK
        labels = set(pd.read_csv(tmp_path / "classified" / "region_map.csv")["label"])
        assert {"hyperbolic", "elliptic"} <= labels

        with open(out / "manifest.json") as f:
            regions = json.load(f)["summary"]["regions"]
        assert regions["hyperbolic_regions"] >= 1
        assert regions["elliptic_regions"] >= 1

    @pytest.mark.slow
    def test_surface_pressure_at_64(self):
        surface = cone_surface(64)
        assert surface.relative_error <= 0.05, surface.to_dict()
        assert surface.std_over_mean <= 1e-5

    @pytest.mark.slow
    def test_surface_pressure_at_128(self):
        surface = cone_surface(128)
        assert surface.relative_error <= 0.02, surface.to_dict()
        assert surface.relative_error < cone_surface(64).relative_error
        assert surface.std_over_mean <= 1e-5

    @pytest.mark.slow
    def test_surface_pressure_through_the_cli(self, tmp_path):
        raw = circular_cone(n1=64, n2=16, max_iterations=40000)
        raw["solver"]["log_every"] = 0
        path = tmp_path / "cone.json"
        path.write_text(json.dumps(raw))
        out = tmp_path / "out"
        assert main(["solve", "--config", str(path), "--output", str(out), "--threads", "2"]) == EXIT_OK
        with open(out / "manifest.json") as f:
            surface = json.load(f)["summary"]["surface"]
        assert surface["relative_error"] <= 0.05
        assert surface["std_over_mean"] <= 1e-5


class TestEllipticCone:
    @pytest.mark.slow
    def test_one_hyperbolic_and_one_elliptic_region(self):
        cfg = config_from_dict(elliptic_cone(n1=48, n2=64, max_iterations=40000))
        cfg.solver.log_every = 0
        gas, fs = cfg.build_gas(), cfg.build_freestream()
        mesh = build_mesh(cfg.build_chart(), 48, 64)
        sol = run_to_steady(cfg.solver, mesh, gas, fs, threads=4)
        assert sol.converged, sol.status

        labels, _ = characteristic_types(sol.primitive(mesh, gas), mesh.cell_metric, gas)
        hyperbolic, n_hyperbolic = region_components(labels, CharacteristicType.HYPERBOLIC)
        elliptic, n_elliptic = region_components(labels, CharacteristicType.ELLIPTIC)
        assert n_hyperbolic == 1
        assert n_elliptic == 1
        # freestream at the outer circle, shock layer against the body
        assert np.all(hyperbolic[-1] == 1)
        assert np.any(elliptic[0] == 1)


if __name__ == "__main__":
    pytest.main([__file__])
