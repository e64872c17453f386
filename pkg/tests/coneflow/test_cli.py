import json

import pandas as pd
import pytest

from coneflow.cases import circular_cone, freestream_annulus
from coneflow.cli import EXIT_CHECKS_FAILED, EXIT_DIVERGED, EXIT_MAX_ITERATIONS, EXIT_OK, EXIT_USAGE, main
from coneflow.exceptions import ChartDegeneracyError, InvalidGeometryError
from coneflow.utils import THREADS_ENV_VAR


def annulus_config(tmp_path, **solver):
    raw = freestream_annulus(n1=8, n2=8)
    raw["solver"].update({"log_every": 0, **solver})
    path = tmp_path / "annulus.json"
    path.write_text(json.dumps(raw, indent=2))
    return str(path)


class TestExample:
    def test_writes_loadable_config(self, tmp_path, capsys):
        assert main(["example", "circular-cone", "--output", str(tmp_path)]) == EXIT_OK
        with open(tmp_path / "circular-cone.json") as f:
            assert json.load(f) == circular_cone()
        assert "circular-cone.json" in capsys.readouterr().out

    def test_unknown_example_is_a_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["example", "sphere"])
        assert info.value.code == EXIT_USAGE


class TestSolve:
    def test_max_iterations(self, tmp_path):
        out = tmp_path / "out"
        code = main(["solve", "--config", annulus_config(tmp_path, max_iterations=1), "--output", str(out)])
        assert code == EXIT_MAX_ITERATIONS
        for name in ("field.txt", "residuals.csv", "region_map.csv", "manifest.json"):
            assert (out / name).exists(), name
        with open(out / "manifest.json") as f:
            manifest = json.load(f)
        assert manifest["summary"]["status"] == "max-iterations"
        assert manifest["summary"]["iterations"] == 1
        assert manifest["config"]["mesh"] == {"n1": 8, "n2": 8}
        regions = pd.read_csv(out / "region_map.csv")
        assert len(regions) == 64
        assert set(regions["label"]) == {"hyperbolic"}

    def test_binary_output_and_restart(self, tmp_path):
        out = tmp_path / "out"
        config = annulus_config(tmp_path, max_iterations=2)
        args = ["solve", "--config", config, "--output", str(out), "--format", "binary"]
        assert main(args) == EXIT_MAX_ITERATIONS
        assert (out / "field.bin").exists()
        restart = tmp_path / "restart"
        args = ["solve", "--config", config, "--output", str(restart), "--init-from", str(out / "field.bin")]
        assert main(args) == EXIT_MAX_ITERATIONS

    def test_restart_from_wrong_mesh(self, tmp_path):
        out = tmp_path / "out"
        main(["solve", "--config", annulus_config(tmp_path, max_iterations=1), "--output", str(out)])
        raw = freestream_annulus(n1=6, n2=6)
        other = tmp_path / "other.json"
        other.write_text(json.dumps(raw))
        args = ["solve", "--config", str(other), "--output", str(tmp_path / "x")]
        args += ["--init-from", str(out / "field.txt")]
        assert main(args) == EXIT_USAGE

    def test_missing_gas_block(self, tmp_path, capsys):
        raw = freestream_annulus()
        del raw["gas"]
        path = tmp_path / "nogas.json"
        path.write_text(json.dumps(raw))
        assert main(["solve", "--config", str(path)]) == EXIT_USAGE
        assert '"gas"' in capsys.readouterr().err

    def test_bad_thread_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "many")
        assert main(["solve", "--config", annulus_config(tmp_path, max_iterations=1)]) == EXIT_USAGE

    def test_divergence(self, tmp_path):
        out = tmp_path / "out"
        config = annulus_config(tmp_path, divergence_factor=0.5)
        code = main(["solve", "--config", config, "--output", str(out)])
        assert code == EXIT_DIVERGED
        with open(out / "manifest.json") as f:
            assert json.load(f)["summary"]["status"] == "diverged"
        assert (out / "field.txt").exists()

    def test_snapshots(self, tmp_path):
        raw = freestream_annulus(n1=8, n2=8)
        raw["solver"].update({"max_iterations": 5, "threshold": 1e-14, "log_every": 0})
        raw["output"]["snapshot_every"] = 2
        path = tmp_path / "snap.json"
        path.write_text(json.dumps(raw))
        out = tmp_path / "out"
        main(["solve", "--config", str(path), "--output", str(out)])
        snapshots = sorted(p.name for p in out.glob("snapshot_*.txt"))
        assert snapshots == ["snapshot_000002.txt", "snapshot_000004.txt"]

    def test_plots(self, tmp_path):
        raw = freestream_annulus(n1=8, n2=8)
        raw["solver"].update({"max_iterations": 3, "log_every": 0})
        raw["output"]["plots"] = True
        path = tmp_path / "plots.json"
        path.write_text(json.dumps(raw))
        out = tmp_path / "out"
        assert main(["solve", "--config", str(path), "--output", str(out)]) == EXIT_MAX_ITERATIONS
        assert (out / "region_map.png").stat().st_size > 0
        assert (out / "residuals.png").stat().st_size > 0

    @pytest.mark.parametrize("error", [ChartDegeneracyError, InvalidGeometryError])
    def test_degenerate_geometry_is_a_usage_error(self, tmp_path, monkeypatch, capsys, error):
        from coneflow import cli

        def degenerate(chart, n1, n2):
            raise error("g_lo is not positive definite")

        monkeypatch.setattr(cli, "build_mesh", degenerate)
        out = tmp_path / "out"
        assert main(["solve", "--config", annulus_config(tmp_path), "--output", str(out)]) == EXIT_USAGE
        assert "bad geometry" in capsys.readouterr().err
        assert not out.exists()

    def test_missing_config_argument(self):
        with pytest.raises(SystemExit) as info:
            main(["solve"])
        assert info.value.code == EXIT_USAGE


class TestClassify:
    def test_field_from_solve(self, tmp_path, capsys):
        out = tmp_path / "out"
        main(["solve", "--config", annulus_config(tmp_path, max_iterations=1), "--output", str(out)])
        (out / "region_map.csv").unlink()
        assert main(["classify", str(out / "field.txt")]) == EXIT_OK
        regions = pd.read_csv(out / "region_map.csv")
        assert list(regions.columns) == ["cell", "i", "j", "xi1", "xi2", "q_c", "c", "margin", "label"]
        assert "hyperbolic" in capsys.readouterr().out

    def test_huge_sonic_band(self, tmp_path):
        out = tmp_path / "out"
        main(["solve", "--config", annulus_config(tmp_path, max_iterations=1), "--output", str(out)])
        args = ["classify", str(out / "field.txt"), "--tol", "100", "--output", str(tmp_path / "c")]
        assert main(args) == EXIT_OK
        assert set(pd.read_csv(tmp_path / "c" / "region_map.csv")["label"]) == {"sonic"}

    def test_malformed_field(self, tmp_path):
        path = tmp_path / "field.txt"
        path.write_text("not a field\n")
        assert main(["classify", str(path)]) == EXIT_USAGE

    def test_missing_field(self, tmp_path):
        assert main(["classify", str(tmp_path / "absent.txt")]) == EXIT_USAGE


class TestVerify:
    def test_empty_suite_list(self):
        assert main(["verify", "--suites", ""]) == EXIT_USAGE

    def test_unknown_suite(self):
        assert main(["verify", "--suites", "oracle,bogus"]) == EXIT_USAGE

    def test_eigen_suite(self, tmp_path, capsys):
        assert main(["verify", "--suites", "eigen", "--output", str(tmp_path)]) == EXIT_OK
        assert "all checks passed" in capsys.readouterr().out
        assert (tmp_path / "verification.csv").exists()

    def test_failed_check_exit_code(self, monkeypatch):
        from coneflow import flux

        original = flux.geometric_source
        monkeypatch.setattr(flux, "geometric_source", lambda p, metric, gas: 2.0 * original(p, metric, gas))
        assert main(["verify", "--suites", "oracle"]) == EXIT_CHECKS_FAILED


if __name__ == "__main__":
    pytest.main([__file__])
