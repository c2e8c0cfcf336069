"""INI-style configuration: strict schema, typed parsing, full echo.

Unknown sections or keys are rejected (exit code 2 from the CLI), and
every run embeds the fully resolved configuration (defaults filled) into
its report so artifacts are reproducible from the echo alone.
"""

from __future__ import annotations

import configparser

from .errors import PreconditionError
from .grid import Grid, make_grid
from .kernels import Kernel, KernelProfile, build_kernel
from .nonlinearity import extend, make_bistable
from .obstacles import Obstacle, PsiSpec, build_obstacle
from .operators import Problem

__all__ = ["load_config", "resolve", "build_problem", "build_pieces"]


def _floats(s: str):
    return tuple(float(v) for v in s.split(",") if v.strip() != "")


def _vertices(s: str):
    out = []
    for part in s.split(";"):
        xy = _floats(part)
        if len(xy) != 2:
            raise PreconditionError(f"vertex {part!r} is not an x,y pair")
        out.append(xy)
    return tuple(out)


def _float_or_auto(s: str):
    return None if s.strip() == "auto" else float(s)


_SCHEMA: dict = {
    "grid": {
        "lo": (_floats, "-8,-8"),
        "hi": (_floats, "8,8"),
        "h": (float, "0.0625"),
    },
    "kernel": {
        "profile": (str, "quartic"),
        "radius": (float, "0.5"),
        "inner_radius": (float, "0.25"),
    },
    "f": {
        "theta": (float, "0.3"),
        "amplitude": (float, "1.0"),
        "extension": (str, "zero-left"),
    },
    "obstacle": {
        "family": (str, "ball"),
        "center": (_floats, "0,0"),
        "radius": (float, "1.0"),
        "a": (float, "2.0"),
        "b": (float, "0.8"),
        "vertices": (_vertices, "-1,-1;1,-1;1,1;-1,1"),
        "r1": (float, "1.0"),
        "r2": (float, "2.0"),
        "r0": (float, "1.0"),
        "ramp": (float, "0.4"),
        "points": (int, "5"),
        "epsilon": (float, "0.1"),
        "psi": (str, "cos_clipped"),
        "psi_k": (int, "6"),
        "psi_amp": (float, "1.0"),
        "margin": (float, "1.5"),
    },
    "problem": {
        "far_field": (float, "1.0"),
        "clamp_width": (_float_or_auto, "auto"),
    },
    "solver": {
        "dt": (_float_or_auto, "auto"),
        "tol": (float, "1e-8"),
        "max_steps": (int, "200000"),
        "log_every": (int, "1000"),
        "u0": (str, "hostile"),
    },
    "ball": {
        "center": (_floats, "0,0"),
        "radius": (float, "15.0"),
        "tol": (float, "1e-10"),
    },
    "subsolution": {
        "delta": (_float_or_auto, "auto"),
    },
    "front": {
        "line_length": (_float_or_auto, "auto"),
        "tol": (float, "1e-12"),
    },
    "experiment": {
        "alphas": (_floats, "0.5,1.0"),
        "epsilons": (_floats, "1,0.5,0.2,0.1,0.05"),
        "pass_eps": (float, "0.1"),
        "trials": (int, "100"),
        "probe_deltas": (_floats, "0.1,0.01"),
        "max_pairs": (int, "2000000"),
        "sweep_epsilon": (float, "0.25"),
        "sweep_ball_radius": (_float_or_auto, "auto"),
        "sweep_angles": (int, "16"),
    },
}


def load_config(path: str | None) -> dict:
    """Parse and validate an INI file against the schema; fill defaults."""
    cp = configparser.ConfigParser()
    if path is not None:
        read = cp.read(path)
        if not read:
            raise PreconditionError(f"config file {path!r} not readable")
    for section in cp.sections():
        if section not in _SCHEMA:
            raise PreconditionError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise PreconditionError(f"unknown config key [{section}] {key}")
    out: dict = {}
    for section, keys in _SCHEMA.items():
        out[section] = {}
        for key, (parse, default) in keys.items():
            raw = cp.get(section, key, fallback=default)
            try:
                out[section][key] = parse(raw)
            except PreconditionError:
                raise
            except Exception as exc:
                raise PreconditionError(f"bad value [{section}] {key} = {raw!r}: {exc}")
    return out


def resolve(cfg: dict) -> dict:
    """Deterministic string echo of the resolved configuration."""
    echo: dict = {}
    for section in sorted(cfg):
        echo[section] = {}
        for key in sorted(cfg[section]):
            v = cfg[section][key]
            if isinstance(v, tuple):
                echo[section][key] = ";".join(
                    ",".join(f"{x!r}" for x in item) if isinstance(item, tuple) else f"{item!r}"
                    for item in v
                )
            else:
                echo[section][key] = repr(v)
    return echo


def build_grid(cfg: dict) -> Grid:
    g = cfg["grid"]
    return make_grid(g["lo"], g["hi"], g["h"])


def build_kernel_cfg(cfg: dict, grid: Grid) -> Kernel:
    k = cfg["kernel"]
    prof = KernelProfile(
        kind=k["profile"], radius=k["radius"],
        inner_radius=k["inner_radius"] if k["profile"] == "ring" else 0.0,
    )
    return build_kernel(prof, grid)


def build_f(cfg: dict):
    f = make_bistable(cfg["f"]["theta"], cfg["f"]["amplitude"])
    return f, extend(f, cfg["f"]["extension"])


def build_obstacle_cfg(cfg: dict, grid: Grid) -> Obstacle:
    o = cfg["obstacle"]
    fam = o["family"]
    params: dict = {}
    if fam == "ball":
        params = {"center": o["center"], "radius": o["radius"]}
    elif fam == "ellipse":
        params = {"center": o["center"], "a": o["a"], "b": o["b"]}
    elif fam == "polygon":
        params = {"vertices": o["vertices"]}
    elif fam == "annulus":
        params = {"r1": o["r1"], "r2": o["r2"]}
    elif fam == "star":
        params = {"r0": o["r0"], "r1": o["ramp"], "points": o["points"]}
    elif fam == "deformed":
        params = {
            "radius": o["radius"],
            "epsilon": o["epsilon"],
            "psi": PsiSpec(kind=o["psi"], k=o["psi_k"], amp=o["psi_amp"]),
        }
    elif fam != "none":
        raise PreconditionError(f"unknown obstacle family {fam!r}")
    return build_obstacle(fam, params, grid, margin=o["margin"])


def build_problem(cfg: dict, conv_path: str = "fast") -> Problem:
    grid = build_grid(cfg)
    kernel = build_kernel_cfg(cfg, grid)
    _, fext = build_f(cfg)
    obstacle = build_obstacle_cfg(cfg, grid)
    return Problem(
        kernel,
        obstacle,
        fext,
        far_field=cfg["problem"]["far_field"],
        clamp_width=cfg["problem"]["clamp_width"],
        conv_path=conv_path,
    )


def build_pieces(cfg: dict):
    """Grid, kernel, bistable, extension: shared prologue of most commands."""
    grid = build_grid(cfg)
    kernel = build_kernel_cfg(cfg, grid)
    f, fext = build_f(cfg)
    return grid, kernel, f, fext
