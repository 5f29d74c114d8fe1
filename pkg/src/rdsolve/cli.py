"""Command-line entry point: batch runs, rate tables, preset listing.

Exit codes: 0 success, 1 bad usage or config, 2 solver failure, 3 I/O
failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from .grid import NEUMANN, PERIODIC, save_binary, save_csv, total_mass
from .pdhg import PdhgParams
from .presets import (
    MODELS,
    build_model,
    get_preset,
    grid_spec_for,
    initial_condition,
    initial_condition_names,
    preset_names,
)
from .stepper import StepFailure, TimeSchedule, run
from .theory import predict_rate

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_IO = 3

_CONFIG_KEYS = {
    "preset",
    "model",
    "bc",
    "side_length",
    "n_x",
    "origin",
    "model_params",
    "t_final",
    "h_t0",
    "adaptive",
    "eta",
    "n_star_hi",
    "n_star_lo",
    "tau_u",
    "tau_p",
    "delta",
    "omega",
    "max_iters",
    "initial_condition",
    "seed",
    "snapshot_times",
    "output_dir",
    "snapshot_format",
    "trace_steps",
}

_CUSTOM_DEFAULTS = {
    "origin": [0.0, 0.0],
    "adaptive": False,
    "eta": 0.75,
    "n_star_hi": 100,
    "n_star_lo": 20,
    "omega": 1.0,
    "max_iters": 5000,
    "seed": None,
    "snapshot_times": None,
    "output_dir": "out",
    "snapshot_format": "csv",
    "trace_steps": [],
}


class ConfigError(ValueError):
    pass


def load_config(raw: dict) -> dict:
    """Merge a parsed config file over its preset's defaults and validate."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of keys to values")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    name = raw.get("preset", "custom")
    if name == "custom":
        config = dict(_CUSTOM_DEFAULTS)
        config["preset"] = "custom"
    else:
        try:
            config = get_preset(name)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    config.update({k: v for k, v in raw.items() if k != "preset"})

    missing = sorted(_CONFIG_KEYS - set(config))
    if missing:
        raise ConfigError(f"missing config key(s): {', '.join(missing)}")
    if config["model"] not in MODELS:
        known = ", ".join(MODELS)
        raise ConfigError(f"model must be one of: {known}; got {config['model']!r}")
    if config["bc"] not in (PERIODIC, NEUMANN):
        raise ConfigError(f"bc must be '{PERIODIC}' or '{NEUMANN}'; got {config['bc']!r}")

    wanted = MODELS[config["model"]][1]
    params = config["model_params"]
    if not isinstance(params, dict):
        raise ConfigError("model_params must be a mapping")
    bad = sorted(set(params) - set(wanted))
    if bad:
        raise ConfigError(f"model_params has unknown key(s) for {config['model']}: {', '.join(bad)}")
    short = sorted(set(wanted) - set(params))
    if short:
        raise ConfigError(f"model_params is missing {', '.join(short)} for {config['model']}")

    if config["initial_condition"] not in initial_condition_names():
        known = ", ".join(initial_condition_names())
        raise ConfigError(f"initial_condition must be one of: {known}")
    if config["snapshot_format"] not in ("csv", "binary", "both"):
        raise ConfigError("snapshot_format must be 'csv', 'binary', or 'both'")
    if config["snapshot_times"] is not None:
        times = config["snapshot_times"]
        if not isinstance(times, (list, tuple)) or not all(
            isinstance(t, (int, float)) for t in times
        ):
            raise ConfigError("snapshot_times must be a list of numbers")
    steps = config["trace_steps"]
    if not isinstance(steps, (list, tuple)) or not all(
        isinstance(s, int) and s >= 1 for s in steps
    ):
        raise ConfigError("trace_steps must be a list of step numbers (1-based)")
    return config


def _build_pieces(config):
    """Constructors do the numeric validation; their messages name fields."""
    spec = grid_spec_for(config)
    model = build_model(config)
    schedule = TimeSchedule(
        t_final=float(config["t_final"]),
        h_t0=float(config["h_t0"]),
        adaptive=bool(config["adaptive"]),
        eta=float(config["eta"]),
        n_star_hi=int(config["n_star_hi"]),
        n_star_lo=int(config["n_star_lo"]),
    )
    params = PdhgParams(
        tau_u=float(config["tau_u"]),
        tau_p=float(config["tau_p"]),
        delta=float(config["delta"]),
        omega=float(config["omega"]),
        max_iters=int(config["max_iters"]),
    )
    u0 = initial_condition(
        config["initial_condition"], spec, config["model_params"], config["seed"]
    )
    return model, schedule, params, u0


def default_snapshot_times(t_final):
    """t=0, t=T, and 10 evenly spaced times in between."""
    return list(np.linspace(0.0, t_final, 12))


def _write_outputs(out_dir, config, report, u0):
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = np.column_stack(
        [
            np.arange(1, report.total_steps + 1, dtype=float),
            report.times,
            report.ht_history,
            report.pdhg_iters.astype(float),
            report.final_residuals,
        ]
    )
    np.savetxt(
        out_dir / "trace.csv",
        rows,
        delimiter=",",
        header="step,time,h_t,pdhg_iters,final_residual",
        comments="",
        fmt="%.17g",
    )

    index_lines = ["index,time"]
    fmt = config["snapshot_format"]
    for k, (t, system) in enumerate(report.snapshots):
        index_lines.append(f"{k},{t:.17g}")
        if fmt in ("csv", "both"):
            for c, component in enumerate(system.components):
                save_csv(out_dir / f"snap_{k:03d}_c{c}.csv", component)
        if fmt in ("binary", "both"):
            save_binary(out_dir / f"snap_{k:03d}.bin", system)
    (out_dir / "snapshots_index.csv").write_text("\n".join(index_lines) + "\n")

    for step, trace in sorted(report.step_traces.items()):
        lines = ["iteration,residual"]
        for i, r in enumerate(trace.residual_norms):
            lines.append(f"{i},{r:.17g}")
        (out_dir / f"iters_step_{step}.csv").write_text("\n".join(lines) + "\n")

    drift = sum(
        total_mass(after) - total_mass(before)
        for before, after in zip(u0.components, report.final_state.components)
    )
    summary = {
        "final_time": report.times[-1] if report.total_steps else 0.0,
        "total_steps": report.total_steps,
        "total_pdhg_iterations": report.total_pdhg_iterations,
        "mass_drift": drift,
        "wall_time_s": report.wall_time,
        "seed": config["seed"],
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return summary


def run_command(config_path) -> int:
    try:
        with open(config_path) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        print(f"config parse error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        config = load_config(raw)
        model, schedule, params, u0 = _build_pieces(config)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    snapshot_times = config["snapshot_times"]
    if snapshot_times is None:
        snapshot_times = default_snapshot_times(schedule.t_final)

    try:
        report = run(
            model,
            u0,
            schedule,
            params,
            snapshot_times=snapshot_times,
            trace_steps=config["trace_steps"],
        )
    except StepFailure as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        print("residual norms of the failing step:", file=sys.stderr)
        for i, r in enumerate(exc.trace.residual_norms):
            print(f"  {i},{r:.17g}", file=sys.stderr)
        return EXIT_SOLVER

    try:
        summary = _write_outputs(Path(config["output_dir"]), config, report, u0)
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO

    print(
        f"{config['preset']}: {summary['total_steps']} steps to t={summary['final_time']:g}, "
        f"{summary['total_pdhg_iterations']} PDHG iterations, "
        f"wall time {summary['wall_time_s']:.2f}s"
    )
    return EXIT_OK


def theory_command(kappa_args) -> int:
    if not kappa_args:
        print("usage: rdsolve theory KAPPA [KAPPA ...]", file=sys.stderr)
        return EXIT_VALIDATION
    kappas = []
    for arg in kappa_args:
        try:
            kappas.append(float(arg))
        except ValueError:
            print(f"not a number: {arg!r}", file=sys.stderr)
            return EXIT_VALIDATION
    try:
        predictions = [predict_rate(k) for k in kappas]
    except ValueError as exc:
        print(f"invalid kappa: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"{'kappa':>12} {'eta_star':>20} {'gamma_star':>20} {'tau_product_opt':>20}")
    for p in predictions:
        print(f"{p.kappa:>12g} {p.eta_star:>20.12f} {p.gamma_star:>20.12f} {p.tau_product_opt:>20.12f}")
    return EXIT_OK


def presets_command() -> int:
    configs = [get_preset(name) for name in preset_names()]
    sys.stdout.write(yaml.safe_dump_all(configs, sort_keys=False))
    return EXIT_OK


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def main(argv=None) -> int:
    parser = _ArgumentParser(prog="rdsolve", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    p_run = sub.add_parser("run", help="execute a run configuration file")
    p_run.add_argument("config", help="YAML run configuration")
    p_theory = sub.add_parser("theory", help="print convergence-rate predictions")
    p_theory.add_argument("kappa", nargs="*", help="condition numbers (each >= 1)")
    sub.add_parser("presets", help="list built-in setups as run configs")

    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "run":
        return run_command(args.config)
    if args.command == "theory":
        return theory_command(args.kappa)
    if args.command == "presets":
        return presets_command()
    parser.print_usage(sys.stderr)
    return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
