"""Catalog of the eight built-in experiment setups and their initial data.

Each entry is a complete flat run configuration (the same schema the CLI
reads from YAML), so dumping a preset and feeding it back as a config file
reproduces the run exactly.
"""

import numpy as np

from .grid import NEUMANN, PERIODIC, Field, GridSpec, SystemField, coords
from .models import AllenCahn, CahnHilliard, Schnakenberg, SixthOrder, WolfDeer

MODELS = {
    "allen-cahn": (AllenCahn, ("a", "b")),
    "cahn-hilliard": (CahnHilliard, ("a", "b")),
    "sixth-order": (SixthOrder, ("epsilon",)),
    "schnakenberg": (Schnakenberg, ("kappa", "a", "b", "d1", "d2")),
    "wolf-deer": (WolfDeer, ("d", "a", "b", "c")),
}


def _entry(
    model,
    bc,
    side_length,
    n_x,
    model_params,
    t_final,
    h_t0,
    tau,
    delta,
    origin=(0.0, 0.0),
    adaptive=False,
    seed=None,
):
    return {
        "preset": None,  # filled below
        "model": model,
        "bc": bc,
        "side_length": side_length,
        "n_x": n_x,
        "origin": list(origin),
        "model_params": dict(model_params),
        "t_final": t_final,
        "h_t0": h_t0,
        "adaptive": adaptive,
        "eta": 0.75,
        "n_star_hi": 100,
        "n_star_lo": 20,
        "tau_u": tau,
        "tau_p": tau,
        "delta": delta,
        "omega": 1.0,
        "max_iters": 5000,
        "initial_condition": None,  # filled below
        "seed": seed,
        "snapshot_times": None,
        "output_dir": "out",
        "snapshot_format": "csv",
        "trace_steps": [],
    }


PRESETS = {
    "ac-circle": _entry(
        "allen-cahn",
        PERIODIC,
        0.5,
        100,
        {"a": 0.01, "b": 100.0},
        t_final=3.0,
        h_t0=1e-3,
        tau=0.5,
        delta=1e-7,
        origin=(-0.25, -0.25),
    ),
    "ac-two-disks": _entry(
        "allen-cahn",
        PERIODIC,
        0.5,
        100,
        {"a": 0.01, "b": 100.0},
        t_final=0.5,
        h_t0=1e-3,
        tau=0.5,
        delta=1e-7,
    ),
    "ch-seven-circles": _entry(
        "cahn-hilliard",
        PERIODIC,
        2.0 * np.pi,
        128,
        {"a": 0.01, "b": 1.0},
        t_final=30.0,
        h_t0=1.0 / 200.0,
        tau=0.5,
        delta=1e-7,
    ),
    "ch-sinusoidal": _entry(
        "cahn-hilliard",
        PERIODIC,
        2.0 * np.pi,
        256,
        {"a": np.pi**2 / 25000.0, "b": 1.0},
        t_final=8.0,
        h_t0=1.0 / 3000.0,
        tau=0.5,
        delta=1e-7,
    ),
    "ch-random": _entry(
        "cahn-hilliard",
        PERIODIC,
        1.0,
        128,
        {"a": 0.01, "b": 1.0},
        t_final=1.0,
        h_t0=1e-5,
        tau=0.75,
        delta=1e-7,
        seed=0,
    ),
    "sixth-order": _entry(
        "sixth-order",
        PERIODIC,
        2.0 * np.pi,
        128,
        {"epsilon": 0.18},
        t_final=20.0,
        h_t0=1e-3,
        tau=0.58,
        delta=5e-6,
    ),
    "schnakenberg": _entry(
        "schnakenberg",
        NEUMANN,
        1.0,
        128,
        {"kappa": 100.0, "a": 0.1305, "b": 0.7695, "d1": 0.05, "d2": 1.0},
        t_final=2.0,
        h_t0=1.0 / 5000.0,
        tau=0.9,
        delta=1e-7,
    ),
    "wolf-deer": _entry(
        "wolf-deer",
        NEUMANN,
        6.0,
        128,
        {"d": 0.5, "a": 5.0, "b": 35.0, "c": 2.5},
        t_final=1.0,
        h_t0=1.0 / 500.0,
        tau=0.95,
        delta=5e-6,
        origin=(-3.0, -3.0),
        adaptive=True,
    ),
}

for _name, _cfg in PRESETS.items():
    _cfg["preset"] = _name
    _cfg["initial_condition"] = _name


def preset_names():
    return list(PRESETS)


def get_preset(name):
    """Copy of the named preset's config; error lists the valid names."""
    if name not in PRESETS:
        known = ", ".join(preset_names())
        raise KeyError(f"unknown preset {name!r}; valid names: {known}")
    cfg = dict(PRESETS[name])
    cfg["origin"] = list(cfg["origin"])
    cfg["model_params"] = dict(cfg["model_params"])
    cfg["trace_steps"] = list(cfg["trace_steps"])
    return cfg


def grid_spec_for(config) -> GridSpec:
    return GridSpec(
        side_length=float(config["side_length"]),
        n_x=int(config["n_x"]),
        bc=config["bc"],
        origin=tuple(float(v) for v in config["origin"]),
    )


def build_model(config):
    cls, param_names = MODELS[config["model"]]
    params = {k: float(config["model_params"][k]) for k in param_names}
    return cls(grid_spec_for(config), **params)


def _scalar(spec: GridSpec, values) -> SystemField:
    return SystemField([Field(np.asarray(values, dtype=float).ravel(), spec)])


def _ic_ac_circle(spec, params, seed):
    x, y = coords(spec)
    return _scalar(spec, np.where(x**2 + y**2 < 0.04, 1.0, -1.0))


def _ic_ac_two_disks(spec, params, seed):
    x, y = coords(spec)
    in1 = (x - 0.2) ** 2 + (y - 0.25) ** 2 < 0.01
    in2 = (x - 0.3) ** 2 + (y - 0.25) ** 2 < 0.01
    return _scalar(spec, np.where(in1 ^ in2, 1.0, -1.0))


_SEVEN_X = np.array([np.pi / 2, np.pi / 4, np.pi / 2, np.pi, 3 * np.pi / 2, np.pi, 3 * np.pi / 2])
_SEVEN_Y = np.array([np.pi / 2, 3 * np.pi / 4, 5 * np.pi / 4, np.pi / 4, np.pi / 4, np.pi, 3 * np.pi / 2])
_SEVEN_R = np.array([np.pi / 5, 2 * np.pi / 15, np.pi / 15, np.pi / 10, np.pi / 10, np.pi / 4, np.pi / 4])


def _mollifier(s):
    # 2*exp(-0.01/s^2) for s < 0, zero otherwise; guard the s=0 division
    out = np.zeros_like(s)
    neg = s < 0
    out[neg] = 2.0 * np.exp(-0.01 / s[neg] ** 2)
    return out


def _ic_seven_circles(spec, params, seed):
    x, y = coords(spec)
    u = -np.ones_like(x)
    for cx, cy, r in zip(_SEVEN_X, _SEVEN_Y, _SEVEN_R):
        u = u + _mollifier(np.hypot(x - cx, y - cy) - r)
    return _scalar(spec, u)


def _ic_sinusoidal(spec, params, seed):
    x, y = coords(spec)
    u = 0.05 * (
        np.cos(3 * x) * np.cos(4 * y)
        + (np.cos(4 * x) * np.cos(3 * y)) ** 2
        + np.cos(x - 5 * y) * np.cos(2 * x - y)
    )
    return _scalar(spec, u)


def _ic_uniform_random(spec, params, seed):
    if seed is None:
        raise ValueError("the random initial condition needs an explicit seed")
    rng = np.random.default_rng(int(seed))
    return _scalar(spec, rng.uniform(-0.05, 0.05, (spec.n_x, spec.n_x)))


def _ic_sixth_order(spec, params, seed):
    x, y = coords(spec)
    s = np.sin(x) + np.sin(y)
    return _scalar(spec, 2.0 * np.exp(s - 2.0) + 2.2 * np.exp(-s - 2.0) - 1.0)


def _ic_schnakenberg(spec, params, seed):
    a = float(params["a"])
    b = float(params["b"])
    x, y = coords(spec)
    u = a + b + 1e-3 * np.exp(-100.0 * ((x - 1.0 / 3.0) ** 2 + (y - 0.5) ** 2))
    v = np.full_like(x, b / (a + b) ** 2)
    return SystemField([Field(u.ravel(), spec), Field(v.ravel(), spec)])


def _bump(x, y, mu):
    r_sq = (x - mu[0]) ** 2 + (y - mu[1]) ** 2
    return (np.pi / 2 + np.arctan((1.0 - r_sq) / 0.1)) / np.pi


def _ic_wolf_deer(spec, params, seed):
    x, y = coords(spec)
    rho1 = _bump(x, y, (1.5, 1.5))
    rho2 = _bump(x, y, (-1.5, -1.5))
    return SystemField([Field(rho1.ravel(), spec), Field(rho2.ravel(), spec)])


_IC_BUILDERS = {
    "ac-circle": _ic_ac_circle,
    "ac-two-disks": _ic_ac_two_disks,
    "ch-seven-circles": _ic_seven_circles,
    "ch-sinusoidal": _ic_sinusoidal,
    "ch-random": _ic_uniform_random,
    "sixth-order": _ic_sixth_order,
    "schnakenberg": _ic_schnakenberg,
    "wolf-deer": _ic_wolf_deer,
}


def initial_condition_names():
    return list(_IC_BUILDERS)


def initial_condition(name, spec: GridSpec, model_params=None, seed=None) -> SystemField:
    """Build the named initial field on an arbitrary grid."""
    if name not in _IC_BUILDERS:
        known = ", ".join(initial_condition_names())
        raise KeyError(f"unknown initial condition {name!r}; valid names: {known}")
    return _IC_BUILDERS[name](spec, model_params or {}, seed)


def reference_initial_condition(preset_name, seed=None) -> SystemField:
    """The named preset's initial field on its own grid."""
    cfg = get_preset(preset_name)
    if seed is None:
        seed = cfg["seed"]
    return initial_condition(
        cfg["initial_condition"], grid_spec_for(cfg), cfg["model_params"], seed
    )
