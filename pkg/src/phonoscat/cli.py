"""Command-line interface: JSON configs in, CSV tables and a report out.

A run is described by a JSON file naming one scenario, the materials, the
microwave mode, the inclusions, and exactly one sweep axis.  Frequencies are
given in GHz and lengths in micrometers; conversion to SI happens here, at
the boundary, and nowhere else.  Every run writes one CSV (header row plus
one row per sweep point, shortest round-trip float formatting, deterministic
bytes) and prints a short report with fitted slopes, regime tags and
quadrature diagnostics to standard output.

Exit codes: 0 success, 2 configuration error (message names the offending
field), 3 numeric failure (quadrature that stays unconverged after the
built-in refinement cap).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .coupling import Inclusion, MicrowaveMode, default_eps_eff
from .materials import MaterialError, MaterialSpec, Orientation, default_materials, load_materials
from .mitigation import BraggStack, bragg_transmission, dual_waveguide_rate, mitigated_rate
from .radiation import (
    QuadratureSpec,
    BruteForceSpec,
    RadiationResult,
    brute_force_rate,
    derived_material_constant,
    mie_rate,
    min_phase_velocity,
    rayleigh_rate,
)
from .selftest import run_all
from .transducer import EoModel, figure_of_merit, sweep_orientation

ENV_MATERIALS = "PHONOSCAT_MATERIALS"

_UM = 1e-6
_UM3 = 1e-18

# How many times an unconverged quadrature is re-run with doubled node counts
# before the run is declared a numeric failure (exit code 3).
_MAX_REFINEMENTS = 2

_SCENARIOS = (
    "rayleigh",
    "mie",
    "dual_waveguide",
    "bragg",
    "figure_of_merit",
    "orientation",
    "oracle_check",
)

_AXES = {
    "rayleigh": ("frequency_GHz", "height_um", "thickness_um"),
    "mie": ("frequency_GHz", "height_um", "thickness_um"),
    "dual_waveguide": ("separation_um",),
    "bragg": ("n_periods",),
    "figure_of_merit": ("height_um", "frequency_GHz"),
    "orientation": ("angle_deg",),
    "oracle_check": ("frequency_GHz",),
}


class ConfigError(Exception):
    """Configuration problem; the message names the field at fault."""


class NumericFailure(Exception):
    """Quadrature failed to converge within the refinement cap."""


# ---------------------------------------------------------------------------
# config parsing


def _require_dict(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object")
    return value


def _check_keys(d: dict, allowed: set[str], path: str) -> None:
    for key in d:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown field (expected one of {sorted(allowed)})")


def _number(d: dict, key: str, path: str, default=None, positive=False, nonnegative=False):
    if key not in d:
        if default is not None or (default is None and not positive and not nonnegative):
            return default
        raise ConfigError(f"{path}.{key}: required")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    v = float(v)
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}: must be positive")
    if nonnegative and v < 0:
        raise ConfigError(f"{path}.{key}: must not be negative")
    return v


def _integer(d: dict, key: str, path: str, default=None, minimum=None):
    if key not in d:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}: required")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}: expected an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key}: must be at least {minimum}")
    return v


def _vector3(d: dict, key: str, path: str, default=None, positive=False) -> np.ndarray:
    if key not in d:
        if default is not None:
            return np.asarray(default, dtype=float)
        raise ConfigError(f"{path}.{key}: required")
    v = d[key]
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ConfigError(f"{path}.{key}: expected a 3-component list")
    try:
        arr = np.array([float(x) for x in v])
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}: expected numeric components") from None
    if positive and not np.all(arr > 0):
        raise ConfigError(f"{path}.{key}: components must be positive")
    return arr


def _string(d: dict, key: str, path: str, default=None, choices=None):
    if key not in d:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}: required")
    v = d[key]
    if not isinstance(v, str):
        raise ConfigError(f"{path}.{key}: expected a string")
    if choices is not None and v not in choices:
        raise ConfigError(f"{path}.{key}: unknown value '{v}' (expected one of {list(choices)})")
    return v


def _material(db: dict[str, MaterialSpec], name: str, path: str) -> MaterialSpec:
    if name not in db:
        raise ConfigError(f"{path}: unknown material '{name}' (database has {sorted(db)})")
    return db[name]


def _orientation(d: dict | None, path: str) -> Orientation:
    if d is None:
        return Orientation.identity()
    d = _require_dict(d, path)
    _check_keys(d, {"matrix", "axis", "angle_deg"}, path)
    try:
        if "matrix" in d:
            if "axis" in d or "angle_deg" in d:
                raise ConfigError(f"{path}: give either matrix or axis/angle_deg, not both")
            m = np.asarray(d["matrix"], dtype=float)
            if m.shape != (3, 3):
                raise ConfigError(f"{path}.matrix: expected a 3x3 matrix")
            return Orientation(m)
        if "axis" in d or "angle_deg" in d:
            axis = _vector3(d, "axis", path)
            angle = _number(d, "angle_deg", path)
            if angle is None:
                raise ConfigError(f"{path}.angle_deg: required with axis")
            return Orientation.about_axis(axis, np.deg2rad(angle))
    except MaterialError as e:
        raise ConfigError(f"{path}: {e}") from None
    raise ConfigError(f"{path}: expected matrix or axis/angle_deg")


@dataclass
class RunConfig:
    """Validated run description with everything already in SI units."""

    scenario: str
    db: dict[str, MaterialSpec]
    substrate: MaterialSpec
    mode: MicrowaveMode
    inclusions: list[Inclusion]
    axis: str
    values: np.ndarray  # in the axis' config units (GHz, um, degrees, count)
    quad: QuadratureSpec
    output: str
    dual_direction: np.ndarray
    dual_relative_sign: int
    bragg_low: MaterialSpec | None
    bragg_high: MaterialSpec | None
    bragg_center_ghz: float
    bragg_normal: np.ndarray
    eo: EoModel | None
    orientation_axis: np.ndarray


def _load_db(cfg: dict) -> dict[str, MaterialSpec]:
    path = cfg.get("materials_db")
    if path is None:
        path = os.environ.get(ENV_MATERIALS)
    if path is None:
        return default_materials()
    try:
        return load_materials(path)
    except FileNotFoundError:
        raise ConfigError(f"materials_db: no such file '{path}'") from None
    except (MaterialError, json.JSONDecodeError) as e:
        raise ConfigError(f"materials_db: {e}") from None


def _sweep_values(sweep: dict, axis: str) -> np.ndarray:
    grid = _string(sweep, "grid", "sweep", default="log", choices=("log", "linear"))
    count = _integer(sweep, "count", "sweep", minimum=1)
    start = _number(sweep, "start", "sweep")
    stop = _number(sweep, "stop", "sweep", default=start)
    if start is None:
        raise ConfigError("sweep.start: required")
    if grid == "log":
        if not (start > 0 and stop > 0):
            raise ConfigError("sweep.start: log grids need positive bounds")
        values = np.geomspace(start, stop, count)
    else:
        values = np.linspace(start, stop, count)
    if axis == "n_periods":
        rounded = np.rint(values)
        if not np.allclose(values, rounded, atol=1e-9):
            raise ConfigError("sweep: n_periods grid must contain integers")
        if np.any(rounded < 0):
            raise ConfigError("sweep: n_periods must not be negative")
        return rounded.astype(int)
    if axis in ("frequency_GHz", "height_um", "thickness_um", "separation_um"):
        if not np.all(values > 0):
            raise ConfigError(f"sweep: {axis} values must be positive")
    return values


def load_run_config(path: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such config file '{path}'") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    raw = _require_dict(raw, "config")
    _check_keys(
        raw,
        {
            "scenario",
            "materials_db",
            "substrate",
            "mode",
            "inclusions",
            "sweep",
            "quadrature",
            "dual",
            "bragg",
            "eo",
            "orientation_axis",
            "output",
        },
        "config",
    )

    scenario = _string(raw, "scenario", "config", choices=_SCENARIOS)
    db = _load_db(raw)
    substrate = _material(db, _string(raw, "substrate", "config"), "substrate")

    mode_cfg = _require_dict(raw.get("mode"), "mode")
    _check_keys(mode_cfg, {"frequency_GHz", "mode_volume_um3", "field_direction", "eps_eff"}, "mode")
    f_ghz = _number(mode_cfg, "frequency_GHz", "mode", positive=True)
    v_e = _number(mode_cfg, "mode_volume_um3", "mode", positive=True)
    e_dir = _vector3(mode_cfg, "field_direction", "mode", default=[0.0, 1.0, 0.0])
    if not np.any(e_dir):
        raise ConfigError("mode.field_direction: must be nonzero")
    eps_eff = mode_cfg.get("eps_eff")
    if eps_eff is None:
        eps_eff = default_eps_eff(substrate)
    elif isinstance(eps_eff, bool) or not isinstance(eps_eff, (int, float)) or not eps_eff > 0:
        raise ConfigError("mode.eps_eff: expected a positive number or null")
    mode = MicrowaveMode(
        omega0=2 * np.pi * f_ghz * 1e9,
        mode_volume=v_e * _UM3,
        field_direction=e_dir,
        eps_eff=float(eps_eff),
    )

    incs_cfg = raw.get("inclusions")
    if not isinstance(incs_cfg, list) or not incs_cfg:
        raise ConfigError("inclusions: expected a non-empty list")
    inclusions = []
    for i, inc_cfg in enumerate(incs_cfg):
        p = f"inclusions[{i}]"
        inc_cfg = _require_dict(inc_cfg, p)
        _check_keys(inc_cfg, {"material", "dimensions_um", "center_um", "orientation", "sign"}, p)
        mat = _material(db, _string(inc_cfg, "material", p), f"{p}.material")
        dims = _vector3(inc_cfg, "dimensions_um", p, positive=True)
        center = _vector3(inc_cfg, "center_um", p, default=[0.0, 0.0, 0.0])
        sign = _integer(inc_cfg, "sign", p, default=1)
        if sign not in (1, -1):
            raise ConfigError(f"{p}.sign: must be +1 or -1")
        ori = _orientation(inc_cfg.get("orientation"), f"{p}.orientation")
        inclusions.append(
            Inclusion(
                dimensions=dims * _UM,
                center=center * _UM,
                material=mat,
                orientation=ori,
                sign=sign,
            )
        )

    sweep = _require_dict(raw.get("sweep"), "sweep")
    _check_keys(sweep, {"axis", "grid", "start", "stop", "count"}, "sweep")
    axis = _string(sweep, "axis", "sweep")
    if axis not in _AXES[scenario]:
        raise ConfigError(
            f"sweep.axis: '{axis}' is not valid for scenario '{scenario}' "
            f"(expected one of {list(_AXES[scenario])})"
        )
    values = _sweep_values(sweep, axis)

    quad_cfg = raw.get("quadrature") or {}
    quad_cfg = _require_dict(quad_cfg, "quadrature")
    _check_keys(quad_cfg, {"n_theta", "n_phi", "tolerance", "threads"}, "quadrature")
    try:
        quad = QuadratureSpec(
            n_theta=_integer(quad_cfg, "n_theta", "quadrature", default=64, minimum=2),
            n_phi=_integer(quad_cfg, "n_phi", "quadrature", default=128, minimum=4),
            tolerance=_number(quad_cfg, "tolerance", "quadrature", default=1e-3, positive=True),
            threads=_integer(quad_cfg, "threads", "quadrature", default=1, minimum=1),
        )
    except ValueError as e:
        raise ConfigError(f"quadrature: {e}") from None

    dual_cfg = _require_dict(raw.get("dual") or {}, "dual")
    _check_keys(dual_cfg, {"direction", "relative_sign"}, "dual")
    dual_dir = _vector3(dual_cfg, "direction", "dual", default=[1.0, 0.0, 0.0])
    if not np.any(dual_dir):
        raise ConfigError("dual.direction: must be nonzero")
    dual_dir = dual_dir / np.linalg.norm(dual_dir)
    dual_sign = _integer(dual_cfg, "relative_sign", "dual", default=-1)
    if dual_sign not in (1, -1):
        raise ConfigError("dual.relative_sign: must be +1 or -1")

    bragg_cfg = _require_dict(raw.get("bragg") or {}, "bragg")
    _check_keys(bragg_cfg, {"low", "high", "center_frequency_GHz", "normal"}, "bragg")
    bragg_low = bragg_high = None
    if scenario == "bragg":
        bragg_low = _material(db, _string(bragg_cfg, "low", "bragg"), "bragg.low")
        bragg_high = _material(db, _string(bragg_cfg, "high", "bragg"), "bragg.high")
    bragg_center = _number(bragg_cfg, "center_frequency_GHz", "bragg", default=f_ghz, positive=True)
    bragg_normal = _vector3(bragg_cfg, "normal", "bragg", default=[0.0, 0.0, 1.0])
    if not np.any(bragg_normal):
        raise ConfigError("bragg.normal: must be nonzero")

    eo = None
    if raw.get("eo") is not None:
        eo_cfg = _require_dict(raw["eo"], "eo")
        _check_keys(eo_cfg, {"g0_Hz", "v_ref_um3", "overlap"}, "eo")
        overlap = _number(eo_cfg, "overlap", "eo", default=1.0)
        if not 0.0 <= overlap <= 1.0:
            raise ConfigError("eo.overlap: must lie in [0, 1]")
        eo = EoModel(
            g0=2 * np.pi * _number(eo_cfg, "g0_Hz", "eo", positive=True),
            v_ref=_number(eo_cfg, "v_ref_um3", "eo", positive=True) * _UM3,
            overlap=overlap,
        )
    elif scenario == "figure_of_merit":
        raise ConfigError("eo: required for the figure_of_merit scenario")

    ori_axis = _vector3(raw, "orientation_axis", "config", default=[0.0, 0.0, 1.0])
    if not np.any(ori_axis):
        raise ConfigError("orientation_axis: must be nonzero")

    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output: expected a string path")

    if scenario == "rayleigh":
        if not substrate.isotropic:
            raise ConfigError(
                "substrate: the rayleigh scenario needs an isotropic substrate; "
                "use scenario 'mie' for anisotropic media"
            )
        if len(inclusions) != 1:
            raise ConfigError("inclusions: the rayleigh scenario needs exactly one inclusion")
    if axis in ("height_um", "thickness_um", "separation_um", "angle_deg", "n_periods"):
        if len(inclusions) != 1:
            raise ConfigError(f"inclusions: sweep axis '{axis}' needs exactly one inclusion")

    return RunConfig(
        scenario=scenario,
        db=db,
        substrate=substrate,
        mode=mode,
        inclusions=inclusions,
        axis=axis,
        values=values,
        quad=quad,
        output=output or f"phonoscat_{scenario}.csv",
        dual_direction=dual_dir,
        dual_relative_sign=dual_sign,
        bragg_low=bragg_low,
        bragg_high=bragg_high,
        bragg_center_ghz=bragg_center,
        bragg_normal=bragg_normal,
        eo=eo,
        orientation_axis=ori_axis,
    )


# ---------------------------------------------------------------------------
# execution


@dataclass
class RunTable:
    columns: list[str]
    rows: list[tuple]
    report: list[str]


def _mie_with_retry(mode, inclusions, substrate, quad: QuadratureSpec) -> RadiationResult:
    """Evaluate the quadrature engine, doubling node counts on non-convergence.

    After _MAX_REFINEMENTS doublings an unconverged estimate is a numeric
    failure rather than a silently degraded answer.
    """
    result = mie_rate(mode, inclusions, substrate, quad)
    refinements = 0
    while not result.diagnostics.converged and refinements < _MAX_REFINEMENTS:
        quad = dataclasses.replace(quad, n_theta=2 * quad.n_theta, n_phi=2 * quad.n_phi)
        result = mie_rate(mode, inclusions, substrate, quad)
        refinements += 1
    if not result.diagnostics.converged:
        d = result.diagnostics
        raise NumericFailure(
            f"quadrature did not reach tolerance {quad.tolerance:g} after "
            f"{refinements} refinements (n_theta={d.n_theta}, n_phi={d.n_phi}, "
            f"relative error {d.rel_error:.2e})"
        )
    return result


def _point(cfg: RunConfig, mode, inclusions) -> RadiationResult:
    if cfg.scenario == "rayleigh":
        return rayleigh_rate(mode, inclusions[0], cfg.substrate)
    return _mie_with_retry(mode, inclusions, cfg.substrate, cfg.quad)


def _with_dims(inc: Inclusion, axis: str, value_um: float) -> Inclusion:
    L = inc.dimensions
    if axis == "height_um":
        dims = np.array([value_um * _UM, 2 * value_um * _UM, L[2]])
    else:  # thickness_um
        dims = np.array([L[0], L[1], value_um * _UM])
    return dataclasses.replace(inc, dimensions=dims)


def _slope_line(xs, qs, label: str) -> list[str]:
    xs = np.asarray(xs, dtype=float)
    qs = np.asarray(qs, dtype=float)
    mask = (xs > 0) & np.isfinite(qs) & (qs > 0)
    if np.sum(mask) < 3 or np.allclose(xs[mask], xs[mask][0]):
        return []
    slope = float(np.polyfit(np.log(xs[mask]), np.log(qs[mask]), 1)[0])
    return [f"fitted log-log slope of {label}: {slope:+.4f}"]


def _diag_lines(results) -> list[str]:
    diags = [r.diagnostics for r in results]
    tags = sorted({r.regime for r in results})
    lines = [f"regime tags: {', '.join(tags)}"]
    if all(d.method == "analytic" for d in diags):
        lines.append("quadrature: closed-form angular averages (no grid)")
    else:
        worst = max(d.rel_error for d in diags)
        nodes = max(d.nodes for d in diags)
        ok = all(d.converged for d in diags)
        lines.append(
            f"quadrature: up to {nodes} nodes, max relative error {worst:.2e}, "
            f"all converged: {ok}"
        )
    return lines


def _run_rate_sweep(cfg: RunConfig) -> RunTable:
    rows = []
    results = []
    points = []  # (mode, inclusions) actually evaluated, for diagnostics
    for v in cfg.values:
        if cfg.axis == "frequency_GHz":
            mode = dataclasses.replace(cfg.mode, omega0=2 * np.pi * v * 1e9)
            incs = cfg.inclusions
        else:
            mode = cfg.mode
            incs = [_with_dims(cfg.inclusions[0], cfg.axis, v)]
        r = _point(cfg, mode, incs)
        results.append(r)
        points.append((mode, incs))
        rows.append((float(v), r.total_rate, r.q_factor, r.regime))
    col0 = {"frequency_GHz": "f_GHz", "height_um": "h_um", "thickness_um": "t_um"}[cfg.axis]
    report = _slope_line(cfg.values, [r.q_factor for r in results], f"Q vs {cfg.axis}")
    report += _diag_lines(results)
    mode0, incs0 = points[0]
    if cfg.substrate.isotropic and len(incs0) == 1:
        cg = derived_material_constant(results[0], mode0, incs0[0], cfg.substrate)
        report.append(
            "derived material constant C*G per branch (slow shear, fast shear, "
            f"longitudinal): {cg[0]:.4e}, {cg[1]:.4e}, {cg[2]:.4e}"
        )
    else:
        report.append("derived material constant: skipped (needs isotropic substrate, one inclusion)")
    return RunTable([col0, "Gamma_rad_s", "Q", "regime"], rows, report)


def _run_dual(cfg: RunConfig) -> RunTable:
    rows = []
    ratios = []
    for d_um in cfg.values:
        sep = d_um * _UM * cfg.dual_direction
        try:
            r = dual_waveguide_rate(
                cfg.mode,
                cfg.inclusions[0],
                cfg.substrate,
                sep,
                relative_sign=cfg.dual_relative_sign,
                quad=cfg.quad,
            )
        except ValueError as e:
            raise ConfigError(f"sweep: separation {d_um} um: {e}") from None
        ratios.append(r.suppression_ratio)
        rows.append(
            (float(d_um), r.pair.total_rate, r.suppression_ratio, r.pair.q_factor, r.q_gain)
        )
    vmin = min_phase_velocity(cfg.substrate)
    lam = vmin / (cfg.mode.omega0 / (2 * np.pi))
    report = [
        f"relative sign {cfg.dual_relative_sign:+d}, direction "
        f"{np.array2string(cfg.dual_direction, precision=3)}",
        f"slowest wavelength at f0: {lam / _UM:.4f} um",
    ]
    report += _slope_line(cfg.values, ratios, "suppression ratio vs separation_um")
    if ratios and min(ratios) > 0:
        report.append(f"best interference Q gain: {1.0 / min(ratios):.3e}")
    return RunTable(
        ["separation_um", "Gamma_pair_rad_s", "suppression_ratio", "Q_pair", "q_gain"],
        rows,
        report,
    )


def _run_bragg(cfg: RunConfig) -> RunTable:
    base = _mie_with_retry(cfg.mode, cfg.inclusions, cfg.substrate, cfg.quad)
    fc = cfg.bragg_center_ghz * 1e9
    rows = []
    for n in cfg.values:
        stack = BraggStack.quarter_wave(
            cfg.substrate, cfg.bragg_low, cfg.bragg_high, fc, int(n), cfg.bragg_normal
        )
        refl, trans = bragg_transmission(stack, cfg.mode.omega0)
        mit = mitigated_rate(base, stack)
        rows.append(
            (int(n), refl, trans, mit.total_rate, mit.q_factor, mit.q_factor / base.q_factor)
        )
    stack1 = BraggStack.quarter_wave(cfg.substrate, cfg.bragg_low, cfg.bragg_high, fc, 1, cfg.bragg_normal)
    report = [
        "mirror model: 1D normal-incidence transfer matrix; the emitted rate is "
        "scaled by the transmittance at f0 (an approximation that collapses the "
        "angular emission pattern onto the stack normal)",
        f"mirror center frequency: {cfg.bragg_center_ghz:g} GHz; unmitigated Q: {base.q_factor:.4e}",
    ]
    for layer in stack1.period:
        report.append(
            f"layer {layer.name}: Z = {layer.impedance:.4e} Pa s/m, "
            f"v = {layer.speed:.1f} m/s, quarter-wave thickness = {layer.thickness / _UM:.4f} um"
        )
    gains = [row[5] for row in rows]
    report.append(f"max Q gain in swept range: {max(gains):.3e}")
    return RunTable(
        ["n_periods", "reflectance", "transmittance", "Gamma_rad_s", "Q", "q_gain"],
        rows,
        report,
    )


def _run_figure_of_merit(cfg: RunConfig) -> RunTable:
    rows = []
    for v in cfg.values:
        if cfg.axis == "frequency_GHz":
            mode = dataclasses.replace(cfg.mode, omega0=2 * np.pi * v * 1e9)
            incs = cfg.inclusions
        else:
            mode = cfg.mode
            incs = [_with_dims(cfg.inclusions[0], "height_um", v)]
        r = _mie_with_retry(mode, incs, cfg.substrate, cfg.quad)
        eta = figure_of_merit(cfg.eo, mode, r)
        g_hz = cfg.eo.g_mo(mode.mode_volume) / (2 * np.pi)
        rows.append((float(v), r.total_rate, r.q_factor, g_hz, eta))
    col0 = "f_GHz" if cfg.axis == "frequency_GHz" else "h_um"
    etas = np.array([row[4] for row in rows])
    best = int(np.argmax(etas))
    vmin = min_phase_velocity(cfg.substrate)
    lam_um = vmin / (cfg.mode.omega0 / (2 * np.pi)) / _UM
    report = [
        f"peak figure of merit: {etas[best]:.4e} Hz^2 at {col0} = {cfg.values[best]:g}",
        f"slowest wavelength at f0: {lam_um:.4f} um",
    ]
    return RunTable([col0, "Gamma_rad_s", "Q", "g_mo_Hz", "eta_Hz2"], rows, report)


def _run_orientation(cfg: RunConfig) -> RunTable:
    sweep = sweep_orientation(
        cfg.mode,
        cfg.inclusions[0],
        cfg.substrate,
        np.deg2rad(cfg.values),
        axis=cfg.orientation_axis,
        quad=cfg.quad,
    )
    rows = [
        (float(a), g, gamma, q)
        for a, g, gamma, q in zip(cfg.values, sweep.overlaps, sweep.gammas, sweep.q_factors)
    ]
    qs = sweep.q_factors
    report = [
        f"rotation axis: {np.array2string(cfg.orientation_axis, precision=3)}",
    ]
    if np.all(np.isfinite(qs)) and qs.min() > 0:
        report.append(f"Q max/min over the angle grid: {qs.max() / qs.min():.3f}")
    return RunTable(["angle_deg", "G", "Gamma_rad_s", "Q"], rows, report)


def _run_oracle_check(cfg: RunConfig) -> RunTable:
    rows = []
    devs = []
    for f_ghz in cfg.values:
        mode = dataclasses.replace(cfg.mode, omega0=2 * np.pi * f_ghz * 1e9)
        r = _mie_with_retry(mode, cfg.inclusions, cfg.substrate, cfg.quad)
        brute = brute_force_rate(mode, cfg.inclusions, cfg.substrate)
        dev = abs(r.total_rate - brute) / r.total_rate
        devs.append(dev)
        rows.append((float(f_ghz), r.total_rate, brute, dev))
    worst = max(devs)
    verdict = "within threshold" if worst < 0.02 else "EXCEEDS threshold"
    report = [
        f"mie vs brute-force relative deviation: max {worst:.3e} (threshold 2e-02): {verdict}"
    ]
    return RunTable(["f_GHz", "Gamma_mie_rad_s", "Gamma_brute_rad_s", "rel_deviation"], rows, report)


_RUNNERS = {
    "rayleigh": _run_rate_sweep,
    "mie": _run_rate_sweep,
    "dual_waveguide": _run_dual,
    "bragg": _run_bragg,
    "figure_of_merit": _run_figure_of_merit,
    "orientation": _run_orientation,
    "oracle_check": _run_oracle_check,
}


def execute(cfg: RunConfig) -> RunTable:
    return _RUNNERS[cfg.scenario](cfg)


# ---------------------------------------------------------------------------
# output


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(path: str, table: RunTable) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_format_cell(v) for v in row])


def _print_report(cfg: RunConfig, table: RunTable) -> None:
    print(f"scenario: {cfg.scenario}")
    print(f"substrate: {cfg.substrate.name} ({'isotropic' if cfg.substrate.isotropic else 'anisotropic'})")
    incs = ", ".join(sorted({inc.material.name for inc in cfg.inclusions}))
    print(f"inclusions: {len(cfg.inclusions)} ({incs})")
    print(f"mode: f0 = {cfg.mode.omega0 / (2 * np.pi * 1e9):g} GHz, "
          f"V_E = {cfg.mode.mode_volume / _UM3:g} um^3")
    print(f"sweep: {cfg.axis}, {cfg.values.size} points "
          f"[{cfg.values.min():g} .. {cfg.values.max():g}]")
    for line in table.report:
        print(line)
    print(f"csv: {cfg.output} ({len(table.rows)} rows)")


# ---------------------------------------------------------------------------
# entry points


def _parse_quad(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError("expected N_THETAxN_PHI, e.g. 64x128") from None


def _cmd_run(args) -> int:
    try:
        cfg = load_run_config(args.config)
        if args.out is not None:
            cfg.output = args.out
        overrides = {}
        if args.quad is not None:
            overrides["n_theta"], overrides["n_phi"] = args.quad
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads: must be at least 1")
            overrides["threads"] = args.threads
        if overrides:
            cfg.quad = dataclasses.replace(cfg.quad, **overrides)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    try:
        table = execute(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except NumericFailure as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    write_csv(cfg.output, table)
    _print_report(cfg, table)
    return 0


def _cmd_materials_validate(args) -> int:
    try:
        db = load_materials(args.db)
    except FileNotFoundError:
        print(f"config error: no such file '{args.db}'", file=sys.stderr)
        return 2
    except json.JSONDecodeError as e:
        print(f"config error: line {e.lineno}, column {e.colno}: {e.msg}", file=sys.stderr)
        return 2
    except MaterialError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    for name in sorted(db):
        m = db[name]
        flags = []
        flags.append("isotropic" if m.isotropic else "anisotropic")
        flags.append("piezoelectric" if m.piezoelectric else "non-piezoelectric")
        print(f"  {name}: rho = {m.rho:g} kg/m^3, {', '.join(flags)}")
    print(f"ok: {len(db)} material(s) validated")
    return 0


def _cmd_selftest(_args) -> int:
    results = run_all()
    for r in results:
        print(f"  {'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    failed = sum(not r.passed for r in results)
    if failed:
        print(f"selftest: {failed} of {len(results)} checks failed", file=sys.stderr)
        return 3
    print(f"selftest: all {len(results)} checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonoscat",
        description="Phonon-radiation loss rates of piezoelectric inclusions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a JSON run configuration")
    p_run.add_argument("config", help="path to the JSON config")
    p_run.add_argument("--out", help="CSV output path (overrides the config)")
    p_run.add_argument("--threads", type=int, help="quadrature worker threads")
    p_run.add_argument("--quad", type=_parse_quad, metavar="NxM",
                       help="quadrature node counts, e.g. 64x128")
    p_run.set_defaults(func=_cmd_run)

    p_mat = sub.add_parser("materials", help="material database utilities")
    mat_sub = p_mat.add_subparsers(dest="materials_command", required=True)
    p_val = mat_sub.add_parser("validate", help="validate a materials JSON database")
    p_val.add_argument("db", help="path to the materials JSON file")
    p_val.set_defaults(func=_cmd_materials_validate)

    p_self = sub.add_parser("selftest", help="run the built-in consistency checks")
    p_self.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
