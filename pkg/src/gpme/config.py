"""Strict JSON configuration: schema validation with dotted field paths,
preset merging, and builders turning a validated config into the runtime
objects (grid, time grid, problem, solver settings, exact reference).

Unknown keys are errors: a config that parses is a complete provenance
record of the run.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .presets import get_preset

__all__ = [
    "load_config",
    "load_stencil_config",
    "merge_config",
    "RunPlan",
    "build_plan",
    "build_measure",
    "dt_for",
]


def _require_dict(value, path):
    if not isinstance(value, dict):
        raise ConfigurationError(f"expected an object at {path}", field=path)
    return value


def _check_keys(block, allowed, path):
    for key in block:
        if key not in allowed:
            raise ConfigurationError(f"unknown key {path}.{key}", field=f"{path}.{key}")


def _get_number(block, key, path, required=False, default=None, positive=False,
                nonneg=False, integer=False):
    if key not in block or block[key] is None:
        if required:
            raise ConfigurationError(f"missing {path}.{key}", field=f"{path}.{key}")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"{path}.{key} must be a number", field=f"{path}.{key}")
    if integer and int(v) != v:
        raise ConfigurationError(f"{path}.{key} must be an integer", field=f"{path}.{key}")
    if positive and not (v > 0):
        raise ConfigurationError(f"{path}.{key} must be positive", field=f"{path}.{key}")
    if nonneg and not (v >= 0):
        raise ConfigurationError(f"{path}.{key} must be nonnegative", field=f"{path}.{key}")
    return int(v) if integer else float(v)


def _validate_measure(m, path):
    if m is None:
        return None
    _require_dict(m, path)
    _check_keys(m, {"kind", "alpha", "beta", "scale", "truncation", "weight_rule",
                    "tail_order", "finite_first_moment", "form", "exponent",
                    "location"}, path)
    kind = m.get("kind")
    if kind not in ("fractional", "split", "custom"):
        raise ConfigurationError(f"{path}.kind must be fractional, split, or custom",
                                 field=f"{path}.kind")
    out = {"kind": kind}
    out["alpha"] = _get_number(m, "alpha", path, required=kind in ("fractional", "split"))
    out["beta"] = _get_number(m, "beta", path, required=kind == "split")
    out["scale"] = _get_number(m, "scale", path, default=1.0, positive=True)
    out["truncation"] = _get_number(m, "truncation", path, positive=True)
    out["tail_order"] = _get_number(m, "tail_order", path, positive=True)
    ffm = m.get("finite_first_moment")
    if ffm is not None and not isinstance(ffm, bool):
        raise ConfigurationError(f"{path}.finite_first_moment must be a boolean",
                                 field=f"{path}.finite_first_moment")
    out["finite_first_moment"] = ffm
    wr = m.get("weight_rule", "cell_mass")
    if wr not in ("cell_mass", "midpoint_density"):
        raise ConfigurationError(f"{path}.weight_rule must be cell_mass or midpoint_density",
                                 field=f"{path}.weight_rule")
    out["weight_rule"] = wr
    if kind == "custom":
        form = m.get("form")
        if form not in ("inverse_power", "pole"):
            raise ConfigurationError(f"{path}.form must be inverse_power or pole for "
                                     "custom measures", field=f"{path}.form")
        out["form"] = form
        out["exponent"] = _get_number(m, "exponent", path, required=form == "inverse_power",
                                      positive=True)
        out["location"] = _get_number(m, "location", path, required=form == "pole",
                                      positive=True)
    return out


def _validate_phi(p, path):
    if p is None:
        raise ConfigurationError(f"missing {path}", field=path)
    _require_dict(p, path)
    _check_keys(p, {"kind", "exponent", "latent", "slope", "table_u", "table_phi"}, path)
    kind = p.get("kind")
    if kind not in ("power", "stefan", "linear", "table", "zero"):
        raise ConfigurationError(f"{path}.kind must be power, stefan, linear, table, or zero",
                                 field=f"{path}.kind")
    out = {"kind": kind}
    out["exponent"] = _get_number(p, "exponent", path, required=kind == "power", positive=True)
    out["latent"] = _get_number(p, "latent", path, required=kind == "stefan", positive=True)
    out["slope"] = _get_number(p, "slope", path, default=1.0, nonneg=True)
    for key in ("table_u", "table_phi"):
        v = p.get(key)
        if kind == "table" and v is None:
            raise ConfigurationError(f"missing {path}.{key}", field=f"{path}.{key}")
        if v is not None and not (isinstance(v, list) and all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)):
            raise ConfigurationError(f"{path}.{key} must be a list of numbers",
                                     field=f"{path}.{key}")
        out[key] = [float(x) for x in v] if v is not None else None
    return out


def _validate_flux(f, path):
    if f is None:
        return None
    _require_dict(f, path)
    _check_keys(f, {"kind", "u_range", "numerical", "velocity", "table_u", "table_f"}, path)
    kind = f.get("kind")
    if kind not in ("burgers", "linear", "table"):
        raise ConfigurationError(f"{path}.kind must be burgers, linear, or table",
                                 field=f"{path}.kind")
    out = {"kind": kind}
    ur = f.get("u_range")
    if not (isinstance(ur, list) and len(ur) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in ur)
            and ur[1] > ur[0]):
        raise ConfigurationError(f"{path}.u_range must be [lo, hi] with hi > lo",
                                 field=f"{path}.u_range")
    out["u_range"] = [float(ur[0]), float(ur[1])]
    num = f.get("numerical", "engquist_osher")
    if num not in ("engquist_osher", "lax_friedrichs"):
        raise ConfigurationError(f"{path}.numerical must be engquist_osher or lax_friedrichs",
                                 field=f"{path}.numerical")
    out["numerical"] = num
    vel = f.get("velocity")
    if kind == "linear":
        if not (isinstance(vel, list) and len(vel) >= 1 and all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in vel)):
            raise ConfigurationError(f"{path}.velocity must be a list of numbers",
                                     field=f"{path}.velocity")
        out["velocity"] = [float(x) for x in vel]
    else:
        out["velocity"] = None
    for key in ("table_u", "table_f"):
        v = f.get(key)
        if kind == "table" and v is None:
            raise ConfigurationError(f"missing {path}.{key}", field=f"{path}.{key}")
        out[key] = [float(x) for x in v] if v is not None else None
    return out


_PROFILE_KEYS = {
    "gaussian": {"amplitude", "spread", "center"},
    "barenblatt": {"coeff", "time"},
    "poisson": {"t0"},
    "step": {"left", "right", "position"},
    "indicator": {"lo", "hi"},
    "constant": {"value"},
}


def _validate_profile(b, path, dim):
    if b is None:
        raise ConfigurationError(f"missing {path}", field=path)
    _require_dict(b, path)
    kind = b.get("kind")
    if kind not in _PROFILE_KEYS:
        raise ConfigurationError(
            f"{path}.kind must be one of {sorted(_PROFILE_KEYS)}", field=f"{path}.kind")
    _check_keys(b, _PROFILE_KEYS[kind] | {"kind"}, path)
    out = {"kind": kind}
    if kind == "gaussian":
        out["amplitude"] = _get_number(b, "amplitude", path, required=True)
        out["spread"] = _get_number(b, "spread", path, required=True, positive=True)
        center = b.get("center")
        if center is not None:
            if not (isinstance(center, list) and len(center) == dim):
                raise ConfigurationError(f"{path}.center must be a list of {dim} numbers",
                                         field=f"{path}.center")
            out["center"] = [float(x) for x in center]
        else:
            out["center"] = [0.0] * dim
    elif kind == "barenblatt":
        out["coeff"] = _get_number(b, "coeff", path, positive=True)
        out["time"] = _get_number(b, "time", path, required=True, positive=True)
    elif kind == "poisson":
        out["t0"] = _get_number(b, "t0", path, required=True, positive=True)
    elif kind == "step":
        out["left"] = _get_number(b, "left", path, required=True)
        out["right"] = _get_number(b, "right", path, required=True)
        out["position"] = _get_number(b, "position", path, default=0.0)
    elif kind == "indicator":
        out["lo"] = _get_number(b, "lo", path, required=True)
        out["hi"] = _get_number(b, "hi", path, required=True)
    else:
        out["value"] = _get_number(b, "value", path, required=True)
    if kind in ("barenblatt", "poisson", "step", "indicator") and dim != 1:
        raise ConfigurationError(f"{path}.kind {kind!r} is one-dimensional only",
                                 field=f"{path}.kind")
    return out


def _validate_source(s, path, dim):
    if s is None:
        return None
    _require_dict(s, path)
    _check_keys(s, {"spatial", "temporal"}, path)
    out = {"spatial": _validate_profile(s.get("spatial"), f"{path}.spatial", dim)}
    t = s.get("temporal")
    if t is None:
        out["temporal"] = {"kind": "constant", "value": 1.0}
        return out
    _require_dict(t, f"{path}.temporal")
    _check_keys(t, {"kind", "value", "slope"}, f"{path}.temporal")
    tk = t.get("kind")
    if tk not in ("constant", "linear"):
        raise ConfigurationError(f"{path}.temporal.kind must be constant or linear",
                                 field=f"{path}.temporal.kind")
    out["temporal"] = {"kind": tk,
                       "value": _get_number(t, "value", f"{path}.temporal", default=1.0),
                       "slope": _get_number(t, "slope", f"{path}.temporal", default=1.0)}
    return out


_EXACT_NAMES = (None, "heat_gaussian", "barenblatt", "poisson", "shock")

_PROBLEM_KEYS = {"dim", "operator", "phi", "flux", "initial", "source",
                 "box_half_extent", "h", "T", "dt", "exact"}


def _validate_operator(op):
    if op is None:
        raise ConfigurationError("missing problem.operator", field="problem.operator")
    _require_dict(op, "problem.operator")
    _check_keys(op, {"c", "measure", "support_radius"}, "problem.operator")
    c = _get_number(op, "c", "problem.operator", default=1, integer=True)
    if c not in (0, 1):
        raise ConfigurationError("problem.operator.c must be 0 or 1",
                                 field="problem.operator.c")
    out = {
        "c": c,
        "measure": _validate_measure(op.get("measure"), "problem.operator.measure"),
        "support_radius": _get_number(op, "support_radius", "problem.operator",
                                      positive=True),
    }
    if c == 0 and out["measure"] is None:
        raise ConfigurationError("operator has neither local part nor measure",
                                 field="problem.operator")
    return out


def _validate_problem(p):
    path = "problem"
    if p is None:
        raise ConfigurationError("missing problem block", field=path)
    _require_dict(p, path)
    _check_keys(p, _PROBLEM_KEYS, path)
    out = {}
    out["dim"] = _get_number(p, "dim", path, default=1, integer=True, positive=True)
    out["operator"] = _validate_operator(p.get("operator"))
    if "phi" not in p:
        raise ConfigurationError("missing problem.phi", field="problem.phi")
    out["phi"] = _validate_phi(p.get("phi"), "problem.phi")
    out["flux"] = _validate_flux(p.get("flux"), "problem.flux")
    out["initial"] = _validate_profile(p.get("initial"), "problem.initial", out["dim"])
    out["source"] = _validate_source(p.get("source"), "problem.source", out["dim"])
    out["box_half_extent"] = _get_number(p, "box_half_extent", path, required=True,
                                         positive=True)
    out["h"] = _get_number(p, "h", path, required=True, positive=True)
    out["T"] = _get_number(p, "T", path, required=True, positive=True)
    dt = p.get("dt")
    if dt is None:
        raise ConfigurationError("missing problem.dt", field="problem.dt")
    _require_dict(dt, "problem.dt")
    _check_keys(dt, {"policy", "factor"}, "problem.dt")
    pol = dt.get("policy")
    if pol not in ("linear", "quadratic"):
        raise ConfigurationError("problem.dt.policy must be linear or quadratic",
                                 field="problem.dt.policy")
    out["dt"] = {"policy": pol,
                 "factor": _get_number(dt, "factor", "problem.dt", required=True,
                                       positive=True)}
    exact = p.get("exact")
    if exact not in _EXACT_NAMES:
        raise ConfigurationError(
            f"problem.exact must be one of {[e for e in _EXACT_NAMES if e]}",
            field="problem.exact")
    out["exact"] = exact
    return out


def _validate_solver(s):
    path = "solver"
    if s is None:
        s = {}
    _require_dict(s, path)
    _check_keys(s, {"residual_tol", "scalar_tol", "max_sweeps", "max_scalar_iter"}, path)
    return {
        "residual_tol": _get_number(s, "residual_tol", path, default=1e-13, positive=True),
        "scalar_tol": _get_number(s, "scalar_tol", path, default=1e-14, positive=True),
        "max_sweeps": _get_number(s, "max_sweeps", path, integer=True, positive=True),
        "max_scalar_iter": _get_number(s, "max_scalar_iter", path, default=300,
                                       integer=True, positive=True),
    }


def _validate_diagnostics(d):
    path = "diagnostics"
    if d is None:
        d = {}
    _require_dict(d, path)
    _check_keys(d, {"R_list", "r", "save_stride"}, path)
    rl = d.get("R_list", [])
    if not (isinstance(rl, list) and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in rl)):
        raise ConfigurationError("diagnostics.R_list must be a list of positive numbers",
                                 field="diagnostics.R_list")
    r = _get_number(d, "r", path, default=1.0)
    if not (r >= 1.0):
        raise ConfigurationError("diagnostics.r must be >= 1", field="diagnostics.r")
    return {
        "R_list": [float(x) for x in rl],
        "r": r,
        "save_stride": _get_number(d, "save_stride", path, default=1, integer=True,
                                   positive=True),
    }


def merge_config(base, override):
    """Deep merge: override wins; dicts merge recursively, everything else
    replaces."""
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = merge_config(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _load_raw(source):
    """Read and preset-merge a config source into a plain dict.

    source is a dict, a path to a JSON file, or a bare preset name."""
    if isinstance(source, dict):
        raw = copy.deepcopy(source)
    elif str(source).lstrip().startswith("{"):
        try:
            raw = json.loads(str(source))
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"config is not valid JSON: {e}", field="config")
    else:
        p = Path(str(source))
        if p.suffix == ".json" or p.exists():
            try:
                text = p.read_text()
            except OSError as e:
                raise ConfigurationError(f"cannot read config file {source}: {e}",
                                         field="config")
            try:
                raw = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"config is not valid JSON: {e}", field="config")
        else:
            raw = {"preset": str(source)}
    _require_dict(raw, "config")
    _check_keys(raw, {"preset", "problem", "solver", "diagnostics", "output_dir"}, "config")
    preset = raw.get("preset")
    if preset is not None:
        merged = merge_config(get_preset(preset), {k: v for k, v in raw.items()
                                                   if k != "preset"})
        merged["preset"] = preset
        return merged
    raw.pop("preset", None)
    return raw


def load_config(source):
    """Parse, preset-merge, and validate a config; returns the normalized
    config dict with defaults filled in."""
    raw = _load_raw(source)
    out = {
        "problem": _validate_problem(raw.get("problem")),
        "solver": _validate_solver(raw.get("solver")),
        "diagnostics": _validate_diagnostics(raw.get("diagnostics")),
        "output_dir": raw.get("output_dir"),
    }
    if "preset" in raw:
        out["preset"] = raw["preset"]
    od = out["output_dir"]
    if od is not None and not isinstance(od, str):
        raise ConfigurationError("output_dir must be a string", field="output_dir")
    return out


def load_stencil_config(source):
    """Like load_config but only the operator geometry is required:
    problem.operator, problem.h, problem.box_half_extent, problem.dim.
    Full run configs (presets included) pass through unchanged."""
    raw = _load_raw(source)
    p = raw.get("problem")
    if p is None:
        raise ConfigurationError("missing problem block", field="problem")
    _require_dict(p, "problem")
    _check_keys(p, _PROBLEM_KEYS, "problem")
    dim = _get_number(p, "dim", "problem", default=1, integer=True, positive=True)
    return {
        "problem": {
            "dim": dim,
            "operator": _validate_operator(p.get("operator")),
            "h": _get_number(p, "h", "problem", required=True, positive=True),
            "box_half_extent": _get_number(p, "box_half_extent", "problem",
                                           required=True, positive=True),
        },
        "diagnostics": _validate_diagnostics(raw.get("diagnostics")),
    }


def dt_for(cfg_problem, h):
    """Time-step size at mesh width h under the configured policy."""
    fac = cfg_problem["dt"]["factor"]
    if cfg_problem["dt"]["policy"] == "quadratic":
        return fac * h * h
    return fac * h


@dataclass(frozen=True)
class RunPlan:
    """Everything cmd_run needs, built once from a validated config."""

    config: dict
    problem: object
    grid: object
    time_grid: object
    solver: object
    diagnostics: dict
    exact: object


def build_measure(mcfg):
    from .levy_operators import MeasureSpec
    if mcfg is None:
        return None
    kw = dict(kind=mcfg["kind"], alpha=mcfg["alpha"], beta=mcfg["beta"],
              scale=mcfg["scale"], truncation=mcfg["truncation"],
              tail_order=mcfg["tail_order"],
              finite_first_moment=mcfg["finite_first_moment"],
              weight_rule=mcfg["weight_rule"])
    if mcfg["kind"] == "custom":
        if mcfg["form"] == "inverse_power":
            q = mcfg["exponent"]
            kw["density"] = lambda r: np.power(r, -q)
        else:
            loc = mcfg["location"]
            kw["density"] = lambda r: 1.0 / np.abs(r - loc)
    return MeasureSpec(**kw)


def _build_profile(bcfg, dim):
    from . import profiles as pr
    kind = bcfg["kind"]
    if kind == "gaussian":
        return pr.GaussianProfile(bcfg["amplitude"], bcfg["spread"],
                                  tuple(bcfg["center"]), dim)
    if kind == "barenblatt":
        coeff = bcfg["coeff"]
        if coeff is None:
            coeff = pr.BarenblattProfile.coeff_for_unit_mass()
        return pr.BarenblattProfile(coeff, bcfg["time"])
    if kind == "poisson":
        return pr.PoissonKernelProfile(bcfg["t0"])
    if kind == "step":
        return pr.StepProfile(bcfg["left"], bcfg["right"], bcfg["position"])
    if kind == "indicator":
        return pr.IndicatorProfile(bcfg["lo"], bcfg["hi"])
    return pr.ConstantProfile(bcfg["value"], dim)


def _build_source(scfg, dim):
    from . import profiles as pr
    if scfg is None:
        return None
    spatial = _build_profile(scfg["spatial"], dim)
    t = scfg["temporal"]
    if t["kind"] == "constant":
        temporal = pr.ConstantInTime(t["value"])
    else:
        temporal = pr.LinearInTime(t["slope"])
    return pr.SeparableSource(spatial, temporal)


def _build_exact(pcfg):
    from . import profiles as pr
    name = pcfg["exact"]
    if name is None:
        return None
    init = pcfg["initial"]
    if name == "heat_gaussian":
        if init["kind"] != "gaussian":
            raise ConfigurationError("heat_gaussian reference needs gaussian data",
                                     field="problem.exact")
        return pr.HeatGaussianExact(init["amplitude"], init["spread"], pcfg["dim"])
    if name == "barenblatt":
        if init["kind"] != "barenblatt":
            raise ConfigurationError("barenblatt reference needs barenblatt data",
                                     field="problem.exact")
        coeff = init["coeff"]
        if coeff is None:
            coeff = pr.BarenblattProfile.coeff_for_unit_mass()
        return pr.BarenblattExact(coeff, init["time"])
    if name == "poisson":
        if init["kind"] != "poisson":
            raise ConfigurationError("poisson reference needs poisson data",
                                     field="problem.exact")
        return pr.PoissonExact(init["t0"])
    if init["kind"] != "step":
        raise ConfigurationError("shock reference needs step data", field="problem.exact")
    return pr.ShockExact(init["left"], init["right"])


def build_plan(cfg, h=None):
    """Materialize a validated config; h overrides the configured mesh
    width (refinement studies reuse one config across levels)."""
    from .elliptic_solver import EpSolveConfig, PhiSpec
    from .evolution import FluxSpec, ProblemSpec
    from .grid_field import TimeGrid, UniformGrid
    from .levy_operators import OperatorSpec

    p = cfg["problem"]
    dim = p["dim"]
    hh = float(h) if h is not None else p["h"]
    grid = UniformGrid.from_box(dim, hh, p["box_half_extent"])
    time_grid = TimeGrid.uniform(p["T"], dt_for(p, hh))

    measure = build_measure(p["operator"]["measure"])
    operator = OperatorSpec(c=p["operator"]["c"], measure=measure,
                            support_radius=p["operator"]["support_radius"])
    phi_cfg = p["phi"]
    phi = PhiSpec(kind=phi_cfg["kind"], exponent=phi_cfg["exponent"],
                  latent=phi_cfg["latent"], slope=phi_cfg["slope"],
                  table_u=tuple(phi_cfg["table_u"]) if phi_cfg["table_u"] else None,
                  table_phi=tuple(phi_cfg["table_phi"]) if phi_cfg["table_phi"] else None)
    flux_cfg = p["flux"]
    if flux_cfg is None:
        flux = None
    else:
        flux = FluxSpec(kind=flux_cfg["kind"], u_range=tuple(flux_cfg["u_range"]),
                        numerical=flux_cfg["numerical"],
                        velocity=tuple(flux_cfg["velocity"]) if flux_cfg["velocity"] else None,
                        table_u=tuple(flux_cfg["table_u"]) if flux_cfg["table_u"] else None,
                        table_f=tuple(flux_cfg["table_f"]) if flux_cfg["table_f"] else None)
    problem = ProblemSpec(operator=operator, phi=phi,
                          initial=_build_profile(p["initial"], dim),
                          source=_build_source(p["source"], dim), flux=flux)
    s = cfg["solver"]
    solver = EpSolveConfig(residual_tol=s["residual_tol"], scalar_tol=s["scalar_tol"],
                           max_sweeps=s["max_sweeps"],
                           max_scalar_iter=s["max_scalar_iter"])
    return RunPlan(config=cfg, problem=problem, grid=grid, time_grid=time_grid,
                   solver=solver, diagnostics=cfg["diagnostics"],
                   exact=_build_exact(p))
