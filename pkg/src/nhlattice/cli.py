"""Command-line front end: one deterministic run per config document.

Usage:
    nhlattice --config run.json [--out DIR] [--threads N] [--format csv|json]

The config is a single JSON document (TOML is accepted and converted)
holding a "command", a "model" block, and one section named after the
command with its parameters; it is validated against CONFIG_SCHEMA and
unknown keys are rejected.  Every output file embeds the full config, all
floats carry 17 significant digits, and identical configs produce
byte-identical files.  Exit codes: 0 success, 2 config error, 3 numerical
failure (a machine-readable error JSON goes to stderr).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .analytic import (
    NonConvergenceError,
    OffBoundaryError,
    ReflectionPole,
    critical_function,
    find_exceptional_point,
    phase_classify,
    phase_indicator,
)
from .dynamics import (
    EigenConditionError,
    InvalidRunError,
    WavepacketSpec,
    delta_state,
    gaussian_wavepacket,
    measure_emission,
    measure_reflection,
    propagate,
)
from .lattice import Family, ModelSpec, build_model
from .output import complex_dict, csv_text, json_dumps, write_output
from .spectra import EigendecompositionError, classify_levels, eigendecompose
from .svgplot import render_heatmap_svg, render_line_svg

__all__ = ["main", "CONFIG_SCHEMA"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

MAX_GRID_POINTS = 10 ** 6

_COMPLEX = {
    "type": "object", "additionalProperties": False, "required": ["re", "im"],
    "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
}
_RANGE = {
    "type": "object", "additionalProperties": False, "required": ["min", "max", "n"],
    "properties": {"min": {"type": "number"}, "max": {"type": "number"},
                   "n": {"type": "integer", "minimum": 1}},
}
_METHOD = {"enum": ["auto", "eigen", "rk4"]}
_DT = {"type": "number", "exclusiveMinimum": 0, "maximum": 0.05}
_INITIAL = {
    "type": "object", "additionalProperties": False, "required": ["type"],
    "properties": {
        "type": {"enum": ["wavepacket", "delta"]},
        "k0": {"type": "number"},
        "center": {"type": "integer", "minimum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "site": {"type": "integer", "minimum": 1},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "model"],
    "properties": {
        "command": {"enum": ["spectrum", "phase-scan", "ep-find", "evolve",
                             "reflect", "emit", "currents"]},
        "model": {
            "type": "object", "additionalProperties": False,
            "required": ["family", "N"],
            "properties": {
                "family": {"enum": ["cp", "cc", "h1", "h2"]},
                "N": {"type": "integer", "minimum": 4},
                "J": {"type": "number", "exclusiveMinimum": 0},
                "theta": _COMPLEX,
                "kappa": _COMPLEX,
            },
        },
        "spectrum": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "eigenvectors": {"type": "array",
                                 "items": {"type": "integer", "minimum": 1}},
                "im_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "phase-scan": {
            "type": "object", "additionalProperties": False, "required": ["re", "im"],
            "properties": {
                "re": _RANGE,
                "im": _RANGE,
                "count_levels": {"type": "boolean"},
                "im_tol": {"type": "number", "exclusiveMinimum": 0},
                "boundary_tol": {"type": "number", "minimum": 0},
            },
        },
        "ep-find": {
            "type": "object", "additionalProperties": False,
            "required": ["start_k", "start_param"],
            "properties": {
                "start_k": {"type": "number"},
                "start_param": {"type": "number"},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "itmax": {"type": "integer", "minimum": 1},
            },
        },
        "evolve": {
            "type": "object", "additionalProperties": False,
            "required": ["t_final", "initial"],
            "properties": {
                "t_final": {"type": "number", "exclusiveMinimum": 0},
                "snapshots": {"type": "array", "minItems": 1,
                              "items": {"type": "number", "minimum": 0}},
                "method": _METHOD,
                "dt": _DT,
                "initial": _INITIAL,
            },
        },
        "reflect": {
            "type": "object", "additionalProperties": False,
            "required": ["k0", "center", "alpha"],
            "properties": {
                "k0": {"type": "number"},
                "center": {"type": "integer", "minimum": 1},
                "alpha": {"type": "number", "exclusiveMinimum": 0},
                "settle": {"type": "number", "minimum": 0},
                "method": _METHOD,
                "dt": _DT,
            },
        },
        "emit": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "t_lo": {"type": "number", "exclusiveMinimum": 0},
                "t_hi": {"type": "number", "exclusiveMinimum": 0},
                "probe_dt": {"type": "number", "exclusiveMinimum": 0},
                "method": _METHOD,
                "dt": _DT,
                "initial": _INITIAL,
            },
        },
        "currents": {
            "type": "object", "additionalProperties": False,
            "properties": {"j_probe": {"type": "integer", "minimum": 1}},
        },
    },
}

_CONFIG_ERRORS = (
    jsonschema.ValidationError,
    json.JSONDecodeError,
    tomllib.TOMLDecodeError,
    FileNotFoundError,
    ValueError,
    KeyError,
)
_NUMERICAL_ERRORS = (
    NonConvergenceError,
    EigendecompositionError,
    EigenConditionError,
    InvalidRunError,
    ReflectionPole,
    OffBoundaryError,
    np.linalg.LinAlgError,
)


def load_config(path: str) -> dict:
    p = Path(path)
    if p.suffix.lower() == ".toml":
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    return json.loads(p.read_text(encoding="utf-8"))


def _initial_state(cfg: dict, N: int):
    if cfg["type"] == "delta":
        return delta_state(N, site=int(cfg.get("site", 1)))
    for key in ("k0", "center", "alpha"):
        if key not in cfg:
            raise ValueError(f"wavepacket initial state needs '{key}'")
    wp = WavepacketSpec(k0=float(cfg["k0"]), center=int(cfg["center"]),
                        alpha=float(cfg["alpha"]))
    return gaussian_wavepacket(wp, N)


def _tabular(outdir: Path, stem: str, columns, rows, config, fmt: str) -> None:
    if fmt == "json":
        payload = {"config": config,
                   "rows": [dict(zip(columns, row)) for row in rows]}
        write_output(outdir / f"{stem}.json", json_dumps(payload))
    else:
        write_output(outdir / f"{stem}.csv", csv_text(columns, rows, config))


def _svg_metadata(config: dict) -> str:
    return "config: " + json_dumps(config, indent=0).replace("\n", " ").strip()


def _cmd_spectrum(cfg, outdir: Path, fmt: str, threads: int) -> None:
    model = ModelSpec.from_json_dict(cfg["model"])
    section = cfg.get("spectrum", {})
    es = eigendecompose(build_model(model))
    cls = classify_levels(es, im_tol=float(section.get("im_tol", 1e-8)))

    payload = {
        "config": cfg,
        "n_real": cls.n_real,
        "n_complex": cls.n_complex,
        "pairs": [[i + 1, j + 1] for i, j in cls.pairs],
        "unmatched": [i + 1 for i in cls.unmatched],
        "levels": [
            {"re": float(e.real), "im": float(e.imag), "residual": float(r)}
            for e, r in zip(es.values, es.residuals)
        ],
    }
    write_output(outdir / "spectrum.json", json_dumps(payload))

    for m in section.get("eigenvectors", []):
        if not 1 <= m <= es.dimension:
            raise ValueError(f"eigenvector index {m} outside 1..{es.dimension}")
        v = es.vectors[:, m - 1]
        rows = [(j + 1, float(v[j].real), float(v[j].imag)) for j in range(len(v))]
        write_output(outdir / f"eigvec_{m}.csv", csv_text(("j", "re", "im"), rows, cfg))


def _phase_point(args):
    family_value, re_p, im_p, J, N, count_levels, im_tol, boundary_tol = args
    family = Family(family_value)
    param = complex(re_p, im_p)
    kwargs = {"theta": param} if family.uses_theta else {"kappa": param}
    spec = ModelSpec(family=family, N=N, J=J, **kwargs)
    indicator = phase_indicator(family, param)
    region = phase_classify(spec, boundary_tol).region.value
    n_complex = None
    if count_levels:
        values = np.linalg.eigvals(build_model(spec).matrix)
        n_complex = int(np.sum(np.abs(values.imag) > im_tol))
    return (re_p, im_p, indicator, region, n_complex)


def _cmd_phase_scan(cfg, outdir: Path, fmt: str, threads: int) -> None:
    mc = cfg["model"]
    section = cfg["phase-scan"]
    family = Family(mc["family"])
    J = float(mc.get("J", 1.0))
    N = int(mc["N"])
    re_vals = np.linspace(section["re"]["min"], section["re"]["max"], section["re"]["n"])
    im_vals = np.linspace(section["im"]["min"], section["im"]["max"], section["im"]["n"])
    if len(re_vals) * len(im_vals) > MAX_GRID_POINTS:
        raise ValueError(f"grid exceeds {MAX_GRID_POINTS} points")
    count_levels = bool(section.get("count_levels", False))
    im_tol = float(section.get("im_tol", 1e-8))
    boundary_tol = float(section.get("boundary_tol", 1e-9))

    points = [
        (family.value, float(re_p), float(im_p), J, N, count_levels, im_tol, boundary_tol)
        for im_p in im_vals for re_p in re_vals
    ]
    if threads > 1:
        chunk = max(1, len(points) // (8 * threads))
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_phase_point, points, chunksize=chunk))
    else:
        rows = [_phase_point(p) for p in points]

    _tabular(outdir, "phase",
             ("re_param", "im_param", "indicator", "region", "n_complex_finite_N"),
             rows, cfg, fmt)

    # boundary polyline: linear interpolation of indicator sign changes
    grid = np.array([r[2] for r in rows]).reshape(len(im_vals), len(re_vals))
    pts = []
    for iy in range(len(im_vals)):
        for ix in range(len(re_vals) - 1):
            a, b = grid[iy, ix], grid[iy, ix + 1]
            if a == 0.0:
                pts.append((float(re_vals[ix]), float(im_vals[iy])))
            if a * b < 0:
                t = a / (a - b)
                pts.append((float(re_vals[ix] + t * (re_vals[ix + 1] - re_vals[ix])),
                            float(im_vals[iy])))
    for ix in range(len(re_vals)):
        for iy in range(len(im_vals) - 1):
            a, b = grid[iy, ix], grid[iy + 1, ix]
            if a * b < 0:
                t = a / (a - b)
                pts.append((float(re_vals[ix]),
                            float(im_vals[iy] + t * (im_vals[iy + 1] - im_vals[iy]))))
    write_output(outdir / "boundary.json", json_dumps({
        "config": cfg,
        "points": [{"re": x, "im": y} for x, y in pts],
    }))

    svg = render_heatmap_svg(re_vals, im_vals, grid, tol=boundary_tol,
                             title=f"phase diagram ({family.value})",
                             xlabel="Re(param)", ylabel="Im(param)",
                             metadata=_svg_metadata(cfg))
    write_output(outdir / "phase.svg", svg)


def _cmd_ep_find(cfg, outdir: Path, fmt: str, threads: int) -> None:
    mc = cfg["model"]
    family = Family(mc["family"])
    if family not in (Family.H1, Family.H2):
        raise ValueError("ep-find runs on the two-ended families h1/h2")
    section = cfg["ep-find"]
    N = int(mc["N"])
    k_c, param_c = find_exceptional_point(
        family, N,
        (float(section["start_k"]), float(section["start_param"])),
        tol=float(section.get("tol", 1e-10)),
        itmax=int(section.get("itmax", 200)),
    )
    f = critical_function(family, param_c, N)
    h = 1e-6
    residual = max(abs(f(k_c)), abs((f(k_c + h) - f(k_c - h)) / (2 * h)) / (N + 1))
    write_output(outdir / "ep.json", json_dumps({
        "config": cfg,
        "k_c": k_c,
        "param_c": param_c,
        "residual": residual,
    }))


def _write_trajectory(outdir: Path, states, cfg, fmt: str) -> None:
    rows = []
    for s in states:
        for j, a in enumerate(s.amplitudes, start=1):
            rows.append((float(s.time), j, float(a.real), float(a.imag),
                         float(abs(a) ** 2)))
    _tabular(outdir, "trajectory", ("t", "j", "re", "im", "abs2"), rows, cfg, fmt)


def _profile_svg(outdir: Path, states, cfg, ylabel: str = "|psi|^2") -> None:
    series = []
    for s in states:
        j = np.arange(1, s.n_sites + 1)
        series.append((j, np.abs(s.amplitudes) ** 2, f"t={s.time:g}"))
    svg = render_line_svg(series, title="wavefunction profile", xlabel="site j",
                          ylabel=ylabel, metadata=_svg_metadata(cfg))
    write_output(outdir / "profile.svg", svg)


def _summary(outdir: Path, cfg, **fields) -> None:
    base = {"reflection": None, "k_est": None, "omega_est": None,
            "phase_velocity": None, "norm_initial": None, "norm_final": None}
    base.update(fields)
    base["config"] = cfg
    write_output(outdir / "summary.json", json_dumps(base))


def _cmd_evolve(cfg, outdir: Path, fmt: str, threads: int) -> None:
    model = ModelSpec.from_json_dict(cfg["model"])
    section = cfg["evolve"]
    state0 = _initial_state(section["initial"], model.N)
    t_final = float(section["t_final"])
    snaps = section.get("snapshots", [t_final])
    states = propagate(build_model(model), state0, t_final,
                       method=section.get("method", "auto"),
                       dt=float(section.get("dt", 0.02)),
                       snapshot_times=sorted(float(t) for t in snaps))
    _write_trajectory(outdir, states, cfg, fmt)
    _profile_svg(outdir, states, cfg)
    _summary(outdir, cfg, norm_initial=state0.norm() ** 2,
             norm_final=states[-1].norm() ** 2)


def _cmd_reflect(cfg, outdir: Path, fmt: str, threads: int) -> None:
    model = ModelSpec.from_json_dict(cfg["model"])
    section = cfg["reflect"]
    wp = WavepacketSpec(k0=float(section["k0"]), center=int(section["center"]),
                        alpha=float(section["alpha"]))
    report = measure_reflection(model, wp,
                                settle=float(section.get("settle", 20.0)),
                                dt=float(section.get("dt", 0.02)),
                                method=section.get("method", "auto"))
    state0 = gaussian_wavepacket(wp, model.N)
    _write_trajectory(outdir, [state0, report.final_state], cfg, fmt)
    _profile_svg(outdir, [state0, report.final_state], cfg)
    _summary(outdir, cfg, reflection=report.reflection, k_est=report.k_out,
             norm_initial=report.norm_initial, norm_final=report.norm_final)


def _cmd_emit(cfg, outdir: Path, fmt: str, threads: int) -> None:
    model = ModelSpec.from_json_dict(cfg["model"])
    section = cfg.get("emit", {})
    initial = None
    if "initial" in section:
        initial = _initial_state(section["initial"], model.N)
    report = measure_emission(
        model, initial,
        t_window=(float(section.get("t_lo", 60.0)), float(section.get("t_hi", 80.0))),
        probe_dt=float(section.get("probe_dt", 0.5)),
        dt=float(section.get("dt", 0.02)),
        method=section.get("method", "auto"))
    states = [report.states[0], report.states[2]]
    _write_trajectory(outdir, states, cfg, fmt)

    series = []
    for s in states:
        j = np.arange(1, s.n_sites + 1)
        series.append((j, s.amplitudes.real, f"Re, t={s.time:g}"))
    svg = render_line_svg(series, title="emitted wave", xlabel="site j",
                          ylabel="Re(psi)", metadata=_svg_metadata(cfg))
    write_output(outdir / "profile.svg", svg)

    _summary(outdir, cfg, k_est=report.k_est, omega_est=report.omega_est,
             phase_velocity=report.phase_velocity,
             norm_initial=1.0, norm_final=states[-1].norm() ** 2)


def _cmd_currents(cfg, outdir: Path, fmt: str, threads: int) -> None:
    from .dynamics import eigenstate_currents

    model = ModelSpec.from_json_dict(cfg["model"])
    section = cfg.get("currents", {})
    j_probe = int(section.get("j_probe", model.N // 2))
    es = eigendecompose(build_model(model))
    pairs = eigenstate_currents(es, j_probe, model.J)
    rows = [(float(e.real), float(e.imag), float(c)) for e, c in pairs]
    _tabular(outdir, "currents", ("re_energy", "im_energy", "current"), rows, cfg, fmt)
    svg = render_line_svg(
        [(np.array([r[0] for r in rows]), np.array([r[2] for r in rows]), "J(E)")],
        title="eigenstate currents", xlabel="Re(E)", ylabel="current",
        draw="points", metadata=_svg_metadata(cfg))
    write_output(outdir / "currents.svg", svg)


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "phase-scan": _cmd_phase_scan,
    "ep-find": _cmd_ep_find,
    "evolve": _cmd_evolve,
    "reflect": _cmd_reflect,
    "emit": _cmd_emit,
    "currents": _cmd_currents,
}


def _error_json(exc: BaseException) -> str:
    return json_dumps({"error": {"type": type(exc).__name__, "message": str(exc)}})


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nhlattice", description=__doc__)
    parser.add_argument("--config", required=True, help="JSON or TOML run config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker count for sweeps (default: NH_LATTICE_THREADS or 1)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="tabular output format")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("NH_LATTICE_THREADS", "1"))
    threads = max(1, threads)

    try:
        cfg = load_config(args.config)
        jsonschema.validate(cfg, CONFIG_SCHEMA)
        needs_section = {"phase-scan", "ep-find", "evolve", "reflect"}
        if cfg["command"] in needs_section and cfg["command"] not in cfg:
            raise ValueError(f"config section '{cfg['command']}' is required")
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
    except _CONFIG_ERRORS as exc:
        sys.stderr.write(_error_json(exc))
        return EXIT_CONFIG

    try:
        _COMMANDS[cfg["command"]](cfg, outdir, args.format, threads)
    except _NUMERICAL_ERRORS as exc:
        sys.stderr.write(_error_json(exc))
        return EXIT_NUMERICAL
    except _CONFIG_ERRORS as exc:
        sys.stderr.write(_error_json(exc))
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
