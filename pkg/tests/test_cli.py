import json

import numpy as np
import pytest
import yaml

from rdsolve.cli import (
    EXIT_IO,
    EXIT_OK,
    EXIT_SOLVER,
    EXIT_VALIDATION,
    default_snapshot_times,
    load_config,
    main,
)
from rdsolve.grid import GridSpec, PERIODIC, load_binary


def base_config(**overrides):
    cfg = {
        "preset": "custom",
        "model": "allen-cahn",
        "bc": "periodic",
        "side_length": 0.5,
        "n_x": 32,
        "origin": [-0.25, -0.25],
        "model_params": {"a": 0.01, "b": 100.0},
        "t_final": 0.005,
        "h_t0": 0.001,
        "tau_u": 0.9,
        "tau_p": 0.9,
        "delta": 1.0e-7,
        "initial_condition": "ac-circle",
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return path


class TestLoadConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config key.*mystery"):
            load_config(base_config(mystery=1))

    def test_missing_keys_listed(self):
        with pytest.raises(ValueError, match="missing config key.*model"):
            load_config({"preset": "custom", "n_x": 8})

    def test_preset_defaults_fill_in(self):
        cfg = load_config({"preset": "schnakenberg", "n_x": 16})
        assert cfg["n_x"] == 16
        assert cfg["model"] == "schnakenberg"
        assert cfg["model_params"]["kappa"] == 100.0

    def test_unknown_preset_lists_names(self):
        with pytest.raises(ValueError, match="valid names"):
            load_config({"preset": "ac-cube"})

    def test_bad_model_params_key(self):
        cfg = base_config()
        cfg["model_params"] = {"a": 0.01, "b": 1.0, "gamma": 2.0}
        with pytest.raises(ValueError, match="unknown key.*gamma"):
            load_config(cfg)

    def test_missing_model_param(self):
        cfg = base_config()
        cfg["model_params"] = {"a": 0.01}
        with pytest.raises(ValueError, match="missing b"):
            load_config(cfg)

    def test_snapshot_times_must_be_numbers(self):
        with pytest.raises(ValueError, match="snapshot_times"):
            load_config(base_config(snapshot_times="soon"))

    def test_trace_steps_must_be_positive_ints(self):
        with pytest.raises(ValueError, match="trace_steps"):
            load_config(base_config(trace_steps=[0]))

    def test_default_cadence_has_twelve_times(self):
        times = default_snapshot_times(3.0)
        assert len(times) == 12
        assert times[0] == 0.0
        assert times[-1] == 3.0
        assert np.allclose(np.diff(times), times[1])


class TestRunCommand:
    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.yaml")]) == EXIT_IO
        assert "cannot read config" in capsys.readouterr().err

    def test_unparseable_yaml(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("model: [unclosed\n")
        assert main(["run", str(path)]) == EXIT_VALIDATION
        assert "parse error" in capsys.readouterr().err

    def test_negative_tau_names_field(self, tmp_path, capsys):
        path = write_config(tmp_path, base_config(tau_u=-1.0))
        assert main(["run", str(path)]) == EXIT_VALIDATION
        assert "tau_u" in capsys.readouterr().err

    def test_solver_failure_dumps_trace(self, tmp_path, capsys):
        # b*h_t = 5 blows the iteration up, and the schedule is not adaptive
        cfg = base_config(h_t0=0.05, t_final=0.05, max_iters=50)
        cfg["output_dir"] = str(tmp_path / "out")
        path = write_config(tmp_path, cfg)
        assert main(["run", str(path)]) == EXIT_SOLVER
        err = capsys.readouterr().err
        assert "solver failed" in err
        assert "residual norms" in err

    def test_small_run_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = base_config(output_dir=str(out), trace_steps=[2])
        path = write_config(tmp_path, cfg)
        assert main(["run", str(path)]) == EXIT_OK
        assert "5 steps" in capsys.readouterr().out

        trace_lines = (out / "trace.csv").read_text().splitlines()
        assert trace_lines[0] == "step,time,h_t,pdhg_iters,final_residual"
        assert len(trace_lines) == 6

        data = np.loadtxt(out / "trace.csv", delimiter=",", skiprows=1)
        summary = json.loads((out / "summary.json").read_text())
        assert summary["total_steps"] == 5
        assert summary["total_pdhg_iterations"] == int(np.sum(data[:, 3]))
        assert summary["final_time"] == data[-1, 1]
        assert summary["seed"] is None
        assert np.all(data[:, 4] <= cfg["delta"] * 5.0)

        iters = (out / "iters_step_2.csv").read_text().splitlines()
        assert iters[0] == "iteration,residual"
        assert len(iters) == int(data[1, 3]) + 2  # trace has iterations+1 rows
        first = float(iters[1].split(",")[1])
        last = float(iters[-1].split(",")[1])
        assert last < first

    def test_snapshot_cadence_and_index(self, tmp_path):
        out = tmp_path / "out"
        cfg = base_config(t_final=0.012, output_dir=str(out))
        path = write_config(tmp_path, cfg)
        assert main(["run", str(path)]) == EXIT_OK
        index = (out / "snapshots_index.csv").read_text().splitlines()
        assert index[0] == "index,time"
        assert len(index) == 13  # t=0, t=T, ten between
        assert float(index[1].split(",")[1]) == 0.0
        assert float(index[-1].split(",")[1]) == pytest.approx(0.012)
        assert len(list(out.glob("snap_*_c0.csv"))) == 12

    def test_explicit_snapshot_times(self, tmp_path):
        out = tmp_path / "out"
        cfg = base_config(snapshot_times=[0.0, 0.0025], output_dir=str(out))
        path = write_config(tmp_path, cfg)
        assert main(["run", str(path)]) == EXIT_OK
        index = (out / "snapshots_index.csv").read_text().splitlines()
        times = [float(line.split(",")[1]) for line in index[1:]]
        assert times == [0.0, pytest.approx(0.003)]

    def test_binary_snapshots(self, tmp_path):
        out = tmp_path / "out"
        cfg = base_config(snapshot_format="binary", output_dir=str(out))
        path = write_config(tmp_path, cfg)
        assert main(["run", str(path)]) == EXIT_OK
        bins = sorted(out.glob("snap_*.bin"))
        assert bins and not list(out.glob("snap_*_c0.csv"))
        spec = GridSpec(0.5, 32, PERIODIC, origin=(-0.25, -0.25))
        system = load_binary(bins[0], spec)
        assert system.n_components == 1
        assert set(np.unique(system.components[0].data)) == {-1.0, 1.0}

    def test_determinism_byte_identical(self, tmp_path):
        outs = []
        for tag in ("one", "two"):
            out = tmp_path / tag
            cfg = {
                "preset": "ch-random",
                "n_x": 16,
                "t_final": 5e-5,
                "output_dir": str(out),
            }
            path = write_config(tmp_path, cfg, name=f"{tag}.yaml")
            assert main(["run", str(path)]) == EXIT_OK
            outs.append(out)
        first, second = outs
        names = sorted(p.name for p in first.glob("*.csv"))
        assert names == sorted(p.name for p in second.glob("*.csv"))
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_seed_recorded_in_summary(self, tmp_path):
        out = tmp_path / "out"
        cfg = {
            "preset": "ch-random",
            "n_x": 16,
            "t_final": 2e-5,
            "seed": 7,
            "output_dir": str(out),
        }
        path = write_config(tmp_path, cfg)
        assert main(["run", str(path)]) == EXIT_OK
        assert json.loads((out / "summary.json").read_text())["seed"] == 7


class TestTheoryCommand:
    def test_table_values(self, capsys):
        assert main(["theory", "1", "100"]) == EXIT_OK
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0].split() == ["kappa", "eta_star", "gamma_star", "tau_product_opt"]
        row_one = lines[1].split()
        assert float(row_one[2]) == 0.0
        row_hundred = lines[2].split()
        asymptotic = np.sqrt(1.0 - 4.0 / (3.0 * 100.0**2))
        assert abs(float(row_hundred[2]) - asymptotic) < 1e-6

    def test_empty_is_usage_error(self, capsys):
        assert main(["theory"]) == EXIT_VALIDATION
        assert "usage" in capsys.readouterr().err

    def test_non_numeric(self, capsys):
        assert main(["theory", "abc"]) == EXIT_VALIDATION
        assert "not a number" in capsys.readouterr().err

    def test_kappa_below_one(self, capsys):
        assert main(["theory", "0.5"]) == EXIT_VALIDATION
        assert "invalid kappa" in capsys.readouterr().err


class TestPresetsCommand:
    def test_lists_all_with_parameters(self, capsys):
        assert main(["presets"]) == EXIT_OK
        out = capsys.readouterr().out
        docs = list(yaml.safe_load_all(out))
        assert [d["preset"] for d in docs] == [
            "ac-circle",
            "ac-two-disks",
            "ch-seven-circles",
            "ch-sinusoidal",
            "ch-random",
            "sixth-order",
            "schnakenberg",
            "wolf-deer",
        ]
        by_name = {d["preset"]: d for d in docs}
        assert by_name["schnakenberg"]["model_params"]["kappa"] == 100.0
        assert by_name["schnakenberg"]["model_params"]["a"] == 0.1305
        assert by_name["wolf-deer"]["model_params"] == {
            "d": 0.5,
            "a": 5.0,
            "b": 35.0,
            "c": 2.5,
        }

    def test_output_round_trips_as_configs(self, tmp_path, capsys):
        assert main(["presets"]) == EXIT_OK
        docs = list(yaml.safe_load_all(capsys.readouterr().out))
        for doc in docs:
            # shrink to one cheap step; the schema itself is untouched
            doc["n_x"] = 16
            doc["t_final"] = doc["h_t0"]
            doc["output_dir"] = str(tmp_path / doc["preset"])
            path = write_config(tmp_path, doc, name=f"{doc['preset']}.yaml")
            assert main(["run", str(path)]) == EXIT_OK, doc["preset"]
            trace = (tmp_path / doc["preset"] / "trace.csv").read_text().splitlines()
            assert len(trace) >= 2


class TestUsage:
    def test_no_subcommand(self, capsys):
        assert main([]) == EXIT_VALIDATION

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == EXIT_VALIDATION
        assert "usage error" in capsys.readouterr().err
