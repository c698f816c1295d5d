import csv
import json
import os

import pytest

from kpflow import cli, reports
from kpflow.cli import ConfigError, validate_config


def write_cfg(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


SIM_CFG = {
    "mode": "simulate",
    "grid": {"Lx": 50.0, "Ly": 50.0, "Nx": 32, "Ny": 32},
    "physics": {"gamma": -1.0, "beta": 1.0},
    "solver": {"dt": 0.01, "T": 0.05},
    "initial_data": {"preset": "gaussian", "amplitude": 0.1},
}


class TestValidation:
    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown key: bogus"):
            validate_config({"mode": "simulate", "grid": {}, "bogus": 1})

    def test_unknown_nested_key_path(self):
        with pytest.raises(ConfigError, match="unknown key: grid.Nq"):
            validate_config({"mode": "simulate", "grid": {"Nq": 3}})
        with pytest.raises(ConfigError, match="unknown key: verify.battery.Nz"):
            validate_config({"mode": "verify", "verify": {"battery": {"Nz": 2}}})
        with pytest.raises(ConfigError, match="counterexample.resolution.n_q"):
            validate_config(
                {
                    "mode": "counterexample",
                    "counterexample": {"N": [16, 32, 64, 128], "eps": [0.0],
                                       "resolution": {"n_q": 1}},
                }
            )

    def test_bad_mode(self):
        with pytest.raises(ConfigError, match="mode"):
            validate_config({"mode": "fly"})

    def test_numeric_ranges(self):
        with pytest.raises(ConfigError, match="grid.Nx"):
            validate_config({"mode": "simulate", "grid": {"Nx": 31}})
        with pytest.raises(ConfigError, match="solver.dt"):
            validate_config(
                {"mode": "simulate", "grid": {}, "solver": {"dt": -0.1}}
            )

    def test_missing_required_block(self):
        with pytest.raises(ConfigError, match="requires"):
            validate_config({"mode": "counterexample"})


class TestRun:
    def test_simulate_writes_reports(self, tmp_path):
        cfg_path = write_cfg(tmp_path, SIM_CFG)
        out = tmp_path / "out"
        assert cli.run(cfg_path, output_dir=str(out)) == 0
        files = sorted(os.listdir(out))
        assert files == ["diagnostics.csv", "diagnostics.gp", "diagnostics.png"]
        with open(out / "diagnostics.csv") as fh:
            rows = [r for r in csv.reader(fh) if not r[0].startswith("#")]
        assert rows[0] == ["t", "l2", "hamiltonian", "energy_norm"]
        assert float(rows[1][0]) == 0.0  # first row at t = 0

    def test_config_error_exit_code(self, tmp_path):
        cfg_path = write_cfg(tmp_path, {"mode": "simulate", "grid": {"Nq": 1}})
        assert cli.run(cfg_path) == 2

    def test_invalid_json_exit_code(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        assert cli.run(str(p)) == 2

    def test_blowup_exit_code(self, tmp_path):
        cfg = dict(SIM_CFG)
        cfg["solver"] = {"dt": 10.0, "T": 100.0}
        cfg["initial_data"] = {"preset": "gaussian", "amplitude": 1e3}
        cfg_path = write_cfg(tmp_path, cfg)
        assert cli.run(cfg_path, output_dir=str(tmp_path / "o")) == 3

    def test_verify_resonance_exact(self, tmp_path):
        cfg = {
            "mode": "verify",
            "verify": {"estimates": ["resonance"], "seeds": 10},
        }
        cfg_path = write_cfg(tmp_path, cfg)
        out = tmp_path / "v"
        assert cli.run(cfg_path, output_dir=str(out)) == 0
        with open(out / "estimates.csv") as fh:
            rows = [r for r in csv.reader(fh) if not r[0].startswith("#")][1:]
        data = [r for r in rows if not r[0].endswith(":summary")]
        assert len(data) == 10
        assert all(float(r[4]) <= 1e-10 for r in data)

    def test_verify_threshold_failure_exit_code(self, tmp_path):
        cfg = {
            "mode": "verify",
            "verify": {
                "estimates": ["strichartz"],
                "seeds": 2,
                "thresholds": {"max_ratio": 1e-12},  # unreachable cap
            },
        }
        cfg_path = write_cfg(tmp_path, cfg)
        assert cli.run(cfg_path, output_dir=str(tmp_path / "w")) == 4

    def test_counterexample_mode(self, tmp_path):
        cfg = {
            "mode": "counterexample",
            "counterexample": {"N": [16, 32, 64, 128], "eps": [0.0]},
        }
        cfg_path = write_cfg(tmp_path, cfg)
        out = tmp_path / "cx"
        assert cli.run(cfg_path, output_dir=str(out)) == 0
        names = sorted(os.listdir(out))
        assert "sweep.csv" in names and "fit_summary.csv" in names

    def test_counterexample_window_failure(self, tmp_path):
        cfg = {
            "mode": "counterexample",
            "counterexample": {
                "N": [16, 32, 64, 128],
                "eps": [0.0],
                "slope_windows": {"0.0": [10.0, 11.0]},
            },
        }
        cfg_path = write_cfg(tmp_path, cfg)
        assert cli.run(cfg_path, output_dir=str(tmp_path / "cw")) == 4

    def test_byte_identical_reruns(self, tmp_path):
        cfg = {
            "mode": "verify",
            "verify": {"estimates": ["strichartz", "resonance"], "seeds": 3},
        }
        cfg_path = write_cfg(tmp_path, cfg)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert cli.run(cfg_path, output_dir=str(out)) == 0
            outs.append((out / "estimates.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_seed_override_changes_samples(self, tmp_path):
        cfg = {"mode": "verify", "verify": {"estimates": ["strichartz"], "seeds": 2}}
        cfg_path = write_cfg(tmp_path, cfg)
        a, b = tmp_path / "s0", tmp_path / "s9"
        cli.run(cfg_path, output_dir=str(a))
        cli.run(cfg_path, output_dir=str(b), seed_override=99)
        assert (a / "estimates.csv").read_bytes() != (b / "estimates.csv").read_bytes()

    def test_main_entry(self, tmp_path):
        cfg_path = write_cfg(tmp_path, SIM_CFG)
        rc = cli.main(["run", cfg_path, "--output-dir", str(tmp_path / "m"), "--threads", "1"])
        assert rc == 0

    def test_kp_threads_env_fallback(self, tmp_path, monkeypatch):
        cfg = {"mode": "verify", "verify": {"estimates": ["resonance"], "seeds": 4}}
        cfg_path = write_cfg(tmp_path, cfg)
        monkeypatch.setenv("KP_THREADS", "2")
        assert cli.run(cfg_path, output_dir=str(tmp_path / "th")) == 0

    def test_other_presets(self, tmp_path):
        for preset in (
            {"preset": "single_mode", "kx": 2, "ky": 1, "amplitude": 0.05},
            {"preset": "random_band", "seed": 3, "amplitude": 0.02},
        ):
            cfg = dict(SIM_CFG)
            cfg["initial_data"] = preset
            cfg_path = write_cfg(tmp_path, cfg, name=preset["preset"] + ".json")
            out = tmp_path / preset["preset"]
            assert cli.run(cfg_path, output_dir=str(out)) == 0

    def test_unknown_preset_rejected(self, tmp_path):
        cfg = dict(SIM_CFG)
        cfg["initial_data"] = {"preset": "vortex"}
        cfg_path = write_cfg(tmp_path, cfg)
        assert cli.run(cfg_path, output_dir=str(tmp_path / "u")) == 2

    def test_norms_mode(self, tmp_path):
        cfg = {
            "mode": "norms",
            "grid": {"Lx": 50.0, "Ly": 50.0, "Nx": 32, "Ny": 32},
            "initial_data": {"preset": "gaussian"},
            "norms": {"s": 1.0, "r": 0.0},
        }
        cfg_path = write_cfg(tmp_path, cfg)
        out = tmp_path / "n"
        assert cli.run(cfg_path, output_dir=str(out)) == 0
        with open(out / "norm_report.csv") as fh:
            rows = [r for r in csv.reader(fh) if not r[0].startswith("#")]
        assert rows[0][0] == "space"
        spaces = {r[0] for r in rows[1:]}
        assert {"B21s", "P21r", "EP"} <= spaces


class TestConfigCanonicalization:
    def test_round_trip_key_order_independent(self):
        a = {"mode": "simulate", "grid": {"Nx": 32, "Lx": 1.0}}
        b = {"grid": {"Lx": 1.0, "Nx": 32}, "mode": "simulate"}
        assert reports.canonical_config(a) == reports.canonical_config(b)

    def test_stamp_in_header(self, tmp_path):
        cfg_path = write_cfg(tmp_path, SIM_CFG)
        out = tmp_path / "st"
        cli.run(cfg_path, output_dir=str(out))
        first = (out / "diagnostics.csv").read_text().splitlines()[0]
        assert first.startswith("# config: ")
        assert json.loads(first[len("# config: "):]) == json.loads(
            reports.canonical_config(SIM_CFG)
        )


class TestPlotScripts:
    def test_every_schema_produces_script(self, tmp_path):
        paths = {
            "d.csv": "t,l2,hamiltonian,energy_norm\n0,1,2,3\n",
            "e.csv": "estimate_id,seed,lhs,rhs,ratio\nx,0,1,2,0.5\n",
            "s.csv": "N,eps,lhs,x_u,x_v,y_u,y_v,ratio_indicator\n16,0,1,1,1,1,1,1\n",
            "f.csv": "eps,slope,intercept,residual\n0,0.25,0,0.01\n",
            "n.csv": "space,param_s,param_r,param_b,axis,shell,contribution,total\nB21s,1,,,xi,m0,1,1\n",
        }
        for name, content in paths.items():
            p = tmp_path / name
            p.write_text(content)
            gp = reports.emit_plot_script(p)
            assert os.path.exists(gp)
            assert "plot" in open(gp).read()

    def test_empty_report_emits_noop_script(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("t,l2,hamiltonian,energy_norm\n")
        gp = reports.emit_plot_script(p)
        text = open(gp).read()
        assert "nothing to plot" in text

    def test_unknown_schema_rejected(self, tmp_path):
        p = tmp_path / "odd.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            reports.emit_plot_script(p)
