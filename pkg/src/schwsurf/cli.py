"""Command-line front end: every verification as a reproducible command.

Text outputs are CSV (comma separator, 17 significant digits, LF
endings) or JSON carrying the same numbers plus a provenance header with
the package version and the active tolerances.  Exit codes: 0 success,
2 usage or configuration error, 3 numerical failure (diagnostics on
stderr).  ``SCHW_THREADS`` caps internal parallelism (0 = one thread
per CPU; unset = single-threaded, which keeps runs reproducible).

Eigenvalues are reported in mass-squared units throughout; radius flags
(``--R``, ``--rho-max``, ``--r-max``) are raw lengths in the same units
as the mass.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys

import click
import numpy as np

from . import __version__, fd_oracle, spectral, surfaces
from .errors import NUMERICAL_ERRORS, DomainError, PreconditionError
from .geometry import (
    SchwarzschildModel,
    areal_from_distance,
    distance_from_areal,
    isotropic_from_areal,
    static_potential,
)
from .mode_odes import psi_c, singularity_radius
from .quadrature import QuadSpec

_MONO_GRID_SIZE = 40


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _emit(config, rows, header, scalars=None, payload_key="rows"):
    """Write one report: CSV rows in table mode, a keyed object in JSON.

    ``scalars`` are constant summary values; in CSV they repeat as extra
    trailing columns so the file stays rectangular.
    """
    scalars = scalars or {}
    if config["output"] == "json":
        doc = {
            "tool": "schwsurf",
            "version": __version__,
            "mass": config["mass"],
            "tolerances": {
                "ode_tol": config["ode_tol"],
                "root_tol": config["root_tol"],
                "quad_tol": config["quad_tol"],
            },
            "seed": config["seed"],
        }
        doc.update(scalars)
        if rows is not None:
            doc[payload_key] = [
                {name: row[i] for i, name in enumerate(header)} for row in rows
            ]
        text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    else:
        lines = []
        cols = list(header) + list(scalars.keys())
        lines.append(",".join(cols))
        if rows is None:
            lines.append(",".join(_fmt(v) for v in scalars.values()))
        else:
            for row in rows:
                vals = [_fmt(v) for v in row] + [_fmt(v) for v in scalars.values()]
                lines.append(",".join(vals))
        text = "\n".join(lines) + "\n"

    if config["out"] is not None:
        with open(config["out"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise click.UsageError(
                        f"config line {ln} is not key=value: {line!r}"
                    )
                key, _, val = line.partition("=")
                out[key.strip()] = val.strip()
    except OSError as exc:
        raise click.UsageError(f"cannot read config file {path}: {exc}")
    return out


_CONFIG_KEYS = {
    "mass": float,
    "ode_tol": float,
    "root_tol": float,
    "quad_tol": float,
    "output": str,
    "out": str,
    "seed": int,
}


def _resolve_config(kwargs) -> dict:
    """Merge the config file (if any) under the explicit flags."""
    ctx = click.get_current_context()
    cfg = {
        "mass": kwargs.pop("mass"),
        "ode_tol": kwargs.pop("ode_tol"),
        "root_tol": kwargs.pop("root_tol"),
        "quad_tol": kwargs.pop("quad_tol"),
        "output": kwargs.pop("output"),
        "out": kwargs.pop("out"),
        "seed": kwargs.pop("seed"),
    }
    path = kwargs.pop("config")
    if path is not None:
        file_vals = _read_config_file(path)
        for key, raw in file_vals.items():
            if key not in _CONFIG_KEYS:
                raise click.UsageError(f"unknown config key {key!r} in {path}")
            if ctx.get_parameter_source(key) == click.core.ParameterSource.DEFAULT:
                try:
                    cfg[key] = _CONFIG_KEYS[key](raw)
                except ValueError:
                    raise click.UsageError(
                        f"config value for {key!r} is not a {_CONFIG_KEYS[key].__name__}: {raw!r}"
                    )
    if cfg["mass"] < 0.0:
        raise click.UsageError(f"mass must be nonnegative, got {cfg['mass']}")
    for key in ("ode_tol", "root_tol", "quad_tol"):
        if cfg[key] <= 0.0:
            raise click.UsageError(f"{key} must be positive, got {cfg[key]}")
    return cfg


def _threads() -> int:
    raw = os.environ.get("SCHW_THREADS")
    if raw is None:
        return 1
    try:
        val = int(raw)
    except ValueError:
        raise click.UsageError(f"SCHW_THREADS must be an integer, got {raw!r}")
    if val < 0:
        raise click.UsageError(f"SCHW_THREADS must be >= 0, got {val}")
    return val if val > 0 else (os.cpu_count() or 1)


def common_options(fn):
    @click.option("--mass", type=float, default=1.0, show_default=True, help="ADM mass m.")
    @click.option("--ode-tol", type=float, default=1e-10, show_default=True, help="Shooting integrator tolerance.")
    @click.option("--root-tol", type=float, default=1e-12, show_default=True, help="Root-finding residual tolerance.")
    @click.option("--quad-tol", type=float, default=1e-8, show_default=True, help="Quadrature relative tolerance.")
    @click.option("--output", type=click.Choice(["table", "json"]), default="table", show_default=True, help="Output format.")
    @click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None, help="Write output to this file instead of stdout.")
    @click.option("--config", type=click.Path(exists=False), default=None, help="key=value file merged under the flags.")
    @click.option("--seed", type=int, default=0, show_default=True, help="Seed for randomized rotations.")
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        return fn(*args, **kwargs)

    return wrapper


def numerics_guard(fn):
    """Exit-code mapping: bad parameter values are usage errors (2),
    solver failures are numerical errors (3) with stderr diagnostics."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DomainError, PreconditionError) as exc:
            raise click.UsageError(str(exc))
        except NUMERICAL_ERRORS as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _parse_surface(model: SchwarzschildModel, spec_text: str, t_max: float, seed: int):
    """Mini-grammar: plane | plane:rotated:<seed> | cone:<theta0>.

    Returns (surface, minimal_flag)."""
    parts = spec_text.split(":")
    if parts[0] == "plane":
        if len(parts) == 1:
            return surfaces.make_plane(model, t_max), True
        if len(parts) == 3 and parts[1] == "rotated":
            try:
                rot_seed = int(parts[2])
            except ValueError:
                raise click.UsageError(f"bad rotation seed in {spec_text!r}")
            rot = surfaces.random_rotation(rot_seed)
            return surfaces.make_plane(model, t_max, rotation=rot), True
        raise click.UsageError(f"bad surface spec {spec_text!r}")
    if parts[0] == "cone" and len(parts) == 2:
        try:
            theta0 = float(parts[1])
        except ValueError:
            raise click.UsageError(f"bad colatitude in {spec_text!r}")
        if not (0.0 < theta0 < math.pi):
            raise click.UsageError(f"colatitude must be in (0, pi), got {theta0}")
        curve = surfaces.latitude_circle(theta0)
        is_great = abs(theta0 - 0.5 * math.pi) < 1e-15
        return surfaces.make_cone(model, curve, t_max), is_great
    raise click.UsageError(
        f"unknown surface spec {spec_text!r}; use plane, plane:rotated:<seed>, cone:<theta0>"
    )


@click.group()
@click.version_option(version=__version__, prog_name="schwsurf")
def main():
    """Desk-scale numerical checks for minimal surfaces outside a horizon."""


@main.command()
@common_options
@click.option("--r-max", type=float, default=1e4, show_default=True, help="Largest horizon distance in the grid.")
@click.option("--n", "n_rows", type=int, default=65, show_default=True, help="Number of grid rows.")
@numerics_guard
def geom(r_max, n_rows, **kwargs):
    """Coordinate table: isotropic radius, areal radius, distance, potential."""
    config = _resolve_config(kwargs)
    if r_max <= 0.0 or n_rows < 2:
        raise click.UsageError("need --r-max > 0 and --n >= 2")
    model = SchwarzschildModel(config["mass"])
    m = model.mass
    lo = 0.01 * m if m > 0.0 else r_max * 1e-4
    grid = np.concatenate([[0.0], np.geomspace(lo, r_max, n_rows - 1)])
    rows = []
    for r in grid:
        s = areal_from_distance(model, r, tol=config["root_tol"])
        rows.append(
            (
                isotropic_from_areal(model, s),
                s,
                r,
                s,
                static_potential(model, r, tol=config["root_tol"]),
            )
        )
    _emit(config, rows, ("rho_iso", "s", "r", "h", "f"))


@main.command("stability-radius")
@common_options
@numerics_guard
def stability_radius_cmd(**kwargs):
    """Largest radius of a stable truncated plane, with the equation residual."""
    config = _resolve_config(kwargs)
    model = SchwarzschildModel(config["mass"])
    m = model.mass
    R = spectral.stability_radius(model, tol=config["root_tol"])
    residual = 0.5 * math.log(2.0 * R / m) - (2.0 * R + m) / (2.0 * R - m)
    _emit(
        config,
        None,
        (),
        scalars={"mass": m, "R_star": R, "ratio": R / m, "residual": residual},
    )


@main.command()
@common_options
@click.option("--k", type=int, default=0, show_default=True, help="Fourier mode number.")
@click.option("--R", "radius", type=float, required=True, help="Truncation radius (isotropic).")
@click.option("--count", type=int, default=1, show_default=True, help="How many eigenvalues.")
@click.option("--method", type=click.Choice(["shooting", "fd", "both"]), default="shooting", show_default=True)
@numerics_guard
def spectrum(k, radius, count, method, **kwargs):
    """Lowest eigenvalues of one truncated mode, in mass-squared units."""
    config = _resolve_config(kwargs)
    model = SchwarzschildModel(config["mass"])
    scalars = {"R": radius, "method": method}
    if method in ("shooting", "both"):
        shoot = spectral.eigenvalues_shooting(
            model, k, radius, count, ode_tol=config["ode_tol"]
        )
    if method in ("fd", "both"):
        fd_vals = fd_oracle.richardson_lowest(model, k, radius, 1024, count)
    if method == "shooting":
        rows = [(e.k, e.n, e.lam) for e in shoot.entries]
        _emit(config, rows, ("k", "n", "lambda"), scalars, payload_key="entries")
    elif method == "fd":
        rows = [(k, i + 1, v) for i, v in enumerate(fd_vals)]
        _emit(config, rows, ("k", "n", "lambda"), scalars, payload_key="entries")
    else:
        rows = []
        for e, v in zip(shoot.entries, fd_vals):
            denom = max(abs(e.lam), abs(v), 1e-300)
            rows.append((e.k, e.n, e.lam, float(v), abs(e.lam - v) / denom))
        _emit(
            config,
            rows,
            ("k", "n", "lambda_shooting", "lambda_fd", "rel_diff"),
            scalars,
            payload_key="entries",
        )


@main.command("morse-index")
@common_options
@click.option("--R", "radius", type=float, required=True, help="Truncation radius (isotropic).")
@click.option("--kmax", type=int, default=5, show_default=True, help="Largest Fourier mode swept.")
@numerics_guard
def morse_index_cmd(radius, kmax, **kwargs):
    """Morse index of the truncated plane: per-mode counts and the sum."""
    config = _resolve_config(kwargs)
    model = SchwarzschildModel(config["mass"])
    rep = spectral.morse_index(
        model, R=radius, kmax=kmax, ode_tol=config["ode_tol"], workers=_threads()
    )
    rows = [(k, c) for k, c in rep.per_mode_negative_counts.items()]
    _emit(
        config,
        rows,
        ("k", "negative_count"),
        {"R": radius, "kmax": kmax, "morse_index": rep.morse_index},
        payload_key="per_mode",
    )


@main.command()
@common_options
@click.option("--surface", "surface_spec", type=str, default="plane", show_default=True, help="plane | plane:rotated:<seed> | cone:<theta0>.")
@click.option("--rho-max", type=float, default=None, help="Largest horizon distance [default: 100 mass].")
@numerics_guard
def monotonicity(surface_spec, rho_max, **kwargs):
    """Weighted-area ratio trace over a log-spaced grid of ball radii."""
    config = _resolve_config(kwargs)
    model = SchwarzschildModel(config["mass"])
    m = model.mass
    if rho_max is None:
        rho_max = 100.0 * m if m > 0.0 else 100.0
    if rho_max <= 0.0:
        raise click.UsageError(f"--rho-max must be > 0, got {rho_max}")
    spec = QuadSpec(rel_tol=config["quad_tol"])
    t_need = 2.0 * surfaces.clip_radius(model, rho_max)
    surface, minimal = _parse_surface(model, surface_spec, t_need, config["seed"])
    if not minimal:
        click.echo(
            f"warning: surface {surface_spec!r} is not minimal; "
            "the monotonicity identity is not expected to hold",
            err=True,
        )
    lo = 0.1 * m if m > 0.0 else rho_max * 1e-3
    grid = np.geomspace(lo, rho_max, _MONO_GRID_SIZE)
    rep = surfaces.monotonicity_report(model, surface, grid, spec)
    rows = []
    for i, rho in enumerate(rep.rhos):
        resid = float(rep.formula_residuals[i - 1]) if i > 0 else None
        rows.append((float(rho), float(rep.mu_values[i]), float(rep.ratios[i]), resid))
    _emit(
        config,
        rows,
        ("rho", "mu", "ratio", "pair_residual"),
        {
            "surface": surface_spec,
            "boundary_length": rep.boundary_length,
            "monotone": rep.monotone,
            "max_backstep": rep.max_backstep,
        },
    )


@main.command("boundary-bound")
@common_options
@click.option("--surface", "surface_spec", type=str, default="plane", show_default=True, help="plane | plane:rotated:<seed> | cone:<theta0>.")
@click.option("--rho-max", type=float, default=None, help="Truncation distance for the tail [default: 500 mass].")
@numerics_guard
def boundary_bound(surface_spec, rho_max, **kwargs):
    """Boundary length against density at infinity, with the defect split."""
    config = _resolve_config(kwargs)
    model = SchwarzschildModel(config["mass"])
    m = model.mass
    if rho_max is None:
        rho_max = 500.0 * m if m > 0.0 else 500.0
    spec = QuadSpec(rel_tol=config["quad_tol"])
    t_need = 2.0 * surfaces.clip_radius(model, rho_max)
    surface, minimal = _parse_surface(model, surface_spec, t_need, config["seed"])
    if not minimal:
        click.echo(
            f"warning: surface {surface_spec!r} is not minimal; "
            "the boundary-length bound applies to minimal surfaces",
            err=True,
        )
    rep = surfaces.boundary_bound_check(model, surface, rho_max, spec)
    blen = surfaces.boundary_length(model, surface)
    _emit(
        config,
        None,
        (),
        {
            "surface": surface_spec,
            "boundary_len": blen,
            "lhs": rep.lhs,
            "rhs": rep.rhs,
            "equality_defect": rep.equality_defect,
            "boundary_term": rep.boundary_term,
            "defect_integral": rep.defect_value,
            "defect_tail_bound": rep.defect_tail_bound,
            "bound_satisfied": rep.bound_satisfied,
        },
    )


@main.command()
@common_options
@click.option("--c", "c_value", type=float, required=True, help="Integration constant of the comparison solution.")
@click.option("--n", "n_rows", type=int, default=65, show_default=True, help="Trace rows.")
@numerics_guard
def riccati(c_value, n_rows, **kwargs):
    """Comparison-solution trace and its blow-up radius."""
    config = _resolve_config(kwargs)
    model = SchwarzschildModel(config["mass"])
    m = model.mass
    if n_rows < 2:
        raise click.UsageError("need --n >= 2")
    R_c = singularity_radius(model, c_value, tol=config["root_tol"])
    grid = np.linspace(0.5 * m, 0.98 * R_c, n_rows)
    rows = [(r, psi_c(model, c_value, r)) for r in grid]
    _emit(
        config,
        rows,
        ("r", "psi"),
        {"c": c_value, "R_c": R_c},
        payload_key="trace",
    )


if __name__ == "__main__":
    main()
