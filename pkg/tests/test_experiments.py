"""Experiments module: spec validation, schemas, determinism, CLI wiring."""
from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pinchloc import ChannelParams, NetworkConfig
from pinchloc.cli import build_parser, spec_from_args
from pinchloc.experiments import (
    CSV_COLUMNS,
    SCHEMA_VERSION,
    ExperimentSpec,
    SweepSpec,
    default_paper_config,
    default_spec,
    run_experiment,
    write_outputs,
)


class TestDefaultConfig:
    def test_reference_values(self):
        cfg, params = default_paper_config()
        assert cfg.lambda_l * math.pi == pytest.approx(0.1, rel=1e-12)
        assert cfg.lambda_s == 0.1
        assert cfg.R_a == 30.0
        assert params.alpha == 2.1
        assert params.P_t == 1.0


class TestSpecValidation:
    def test_bad_figure(self):
        cfg, params = default_paper_config()
        with pytest.raises(ValueError, match="figure"):
            ExperimentSpec("nope", cfg, params, SweepSpec("x", 0, 1, 5))

    def test_bad_sweep_lists_field(self):
        with pytest.raises(ValueError, match="sweep"):
            SweepSpec("tau_db", 5.0, -5.0, 10)
        with pytest.raises(ValueError, match="sweep"):
            SweepSpec("tau_db", 0.0, float("inf"), 10)
        with pytest.raises(ValueError, match="scale"):
            SweepSpec("tau_db", 0.0, 1.0, 10, scale="cubic")

    def test_bad_runs(self):
        cfg, params = default_paper_config()
        with pytest.raises(ValueError, match="n_runs"):
            default_spec("crlb_cdf", cfg, params, n_runs=0)

    def test_log_sweep_grid(self):
        grid = SweepSpec("s_m2", 0.1, 10.0, 5, scale="log").grid()
        assert grid[0] == pytest.approx(0.1)
        assert grid[-1] == pytest.approx(10.0)
        assert np.allclose(np.diff(np.log(grid)), np.log(grid[1] / grid[0]))


@pytest.fixture(scope="module")
def quick_cfg():
    cfg, params = default_paper_config(seed=11)
    return cfg, params


class TestRunners:
    def test_localizability_schema_and_wilson(self, quick_cfg):
        cfg, params = quick_cfg
        spec = default_spec("localizability", cfg, params, n_runs=2000,
                            k_values=(3, 5),
                            sweep=SweepSpec("tau_db", -40.0, -10.0, 4))
        table = run_experiment(spec)
        assert table.columns == CSV_COLUMNS["localizability"]
        assert len(table.rows) == 8
        for row in table.rows:
            assert 0.0 <= row["mc_prob"] <= 1.0
            assert 0.0 < row["mc_halfwidth"] < 0.05
            assert 0.0 <= row["analytic_prob"] <= 1.0
        # rows ordered by K then sweep variable
        taus = [r["tau_db"] for r in table.rows if r["K"] == 3]
        assert taus == sorted(taus)

    def test_crlb_cdf_monotone_columns(self, quick_cfg):
        cfg, params = quick_cfg
        spec = default_spec("crlb_cdf", cfg, params, n_runs=5000, sinr_runs=20_000)
        table = run_experiment(spec)
        an = [r["analytic_cdf"] for r in table.rows]
        emp = [r["empirical_cdf"] for r in table.rows]
        assert all(b >= a - 1e-12 for a, b in zip(an, an[1:]))
        assert all(b >= a - 1e-12 for a, b in zip(emp, emp[1:]))

    def test_crlb_vs_sinr_scaling(self, quick_cfg):
        # every bound column scales inversely with the linear SINR
        cfg, params = quick_cfg
        spec = default_spec("crlb_vs_sinr", cfg, params, n_runs=2000,
                            sweep=SweepSpec("sinr_db", -10.0, 10.0, 3))
        table = run_experiment(spec)
        r0, r1 = table.rows[0], table.rows[-1]
        factor = 10.0 ** ((r1["sinr_db"] - r0["sinr_db"]) / 10.0)
        for col in ("crlb_exact_m2", "crlb_approx_m2", "crlb_ula_m2"):
            assert r0[col] / r1[col] == pytest.approx(factor, rel=1e-9)
        assert r0["crlb_ula_m2"] > r0["crlb_exact_m2"]

    def test_mse_vs_k_schema(self, quick_cfg):
        cfg, params = quick_cfg
        spec = default_spec("mse_vs_k", cfg, params, n_runs=20, sinr_runs=10_000,
                            sweep=SweepSpec("K", 3, 4, 2))
        table = run_experiment(spec)
        assert [r["K"] for r in table.rows] == [3, 4]
        assert all(r["mse_m2"] > 0 for r in table.rows)


class TestOutputs:
    def test_csv_and_sidecar_written(self, tmp_path, quick_cfg):
        cfg, params = quick_cfg
        out = tmp_path / "loc.csv"
        spec = default_spec("localizability", cfg, params, n_runs=500,
                            k_values=(3,), output_path=str(out),
                            sweep=SweepSpec("tau_db", -40.0, -20.0, 3))
        run_experiment(spec)
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS["localizability"])
        assert len(lines) == 4
        sidecar = json.loads(out.with_suffix(".json").read_text())
        assert sidecar["schema_version"] == SCHEMA_VERSION
        assert sidecar["figure"] == "localizability"
        assert sidecar["seed"] == cfg.seed
        assert sidecar["config"]["lambda_s"] == cfg.lambda_s
        assert sidecar["sweep"]["points"] == 3

    def test_rerun_bit_identical(self, tmp_path, quick_cfg):
        cfg, params = quick_cfg
        blobs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            spec = default_spec("crlb_cdf", cfg, params, n_runs=2000,
                                sinr_runs=5000, output_path=str(out))
            run_experiment(spec)
            blobs.append((out.read_bytes(), out.with_suffix(".json").read_bytes()))
        assert blobs[0][0] == blobs[1][0]
        # sidecars differ only in the embedded output path, which we did not set
        assert blobs[0][1] == blobs[1][1]

    def test_write_outputs_creates_parents(self, tmp_path, quick_cfg):
        cfg, params = quick_cfg
        out = tmp_path / "deep" / "nested" / "t.csv"
        spec = default_spec("crlb_vs_sinr", cfg, params, n_runs=200,
                            output_path=str(out),
                            sweep=SweepSpec("sinr_db", 0.0, 5.0, 2))
        table = run_experiment(spec)
        assert out.exists()
        write_outputs(spec, table)
        assert out.with_suffix(".json").exists()


class TestCli:
    def test_parser_subcommands(self):
        parser = build_parser()
        args = parser.parse_args(["localizability", "--out", "x.csv", "--quick"])
        assert args.figure == "localizability"
        assert args.quick

    def test_spec_from_args_quick_mode(self, tmp_path):
        parser = build_parser()
        args = parser.parse_args([
            "crlb-cdf", "--out", str(tmp_path / "o.csv"), "--quick", "--seed", "3",
        ])
        spec = spec_from_args(args)
        assert spec.n_runs == 1000
        assert spec.config.seed == 3

    def test_config_overrides(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"lambda_s": 0.25, "alpha": 2.3, "K": 4}))
        parser = build_parser()
        args = parser.parse_args([
            "crlb-cdf", "--out", str(tmp_path / "o.csv"), "--config", str(cfg_file),
        ])
        spec = spec_from_args(args)
        assert spec.config.lambda_s == 0.25
        assert spec.config.K == 4
        assert spec.params.alpha == 2.3

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"lambda_q": 1.0}))
        parser = build_parser()
        args = parser.parse_args(["crlb-cdf", "--out", "o.csv",
                                  "--config", str(cfg_file)])
        with pytest.raises(SystemExit):
            spec_from_args(args)

    def test_end_to_end_quick_run(self, tmp_path):
        out = tmp_path / "cdf.csv"
        res = subprocess.run(
            [sys.executable, "-m", "pinchloc.cli", "crlb-cdf", "--quick",
             "--seed", "5", "--out", str(out)],
            capture_output=True, text=True, timeout=600,
        )
        assert res.returncode == 0, res.stderr
        assert out.exists()
        header = out.read_text().splitlines()[0]
        assert header == ",".join(CSV_COLUMNS["crlb_cdf"])
