"""Scenario files (JSON) and run outputs (CSV time series, JSON metrics).

Scenario document layout::

    {
      "name": "case1",
      "duration": 1000.0,
      "v_pp_ref": 0.98,
      "model": {"c_v": [...], "c_q": [[...], ...]},
      "pf": [1.0, 1.0, 1.0, 1.0],
      "generators": [{"tau_avr": 0.5, "v_base": 1.40, "v_min": 0.5, "v_max": 2.0}, ...],
      "plant": {"dt_plant": 0.01},
      "controllers": {"preset": "desk", "inner_period": 0.1, ...},
      "initial_mask": {"connected": [...], "svc_active": [...]},
      "log_interval": 0.1,
      "events": [{"at": 500.0, "kind": "setpoint_step", "v_pp_ref": 1.0}, ...]
    }

Only ``model`` and ``v_pp_ref`` are required.  Generator indices in
events are zero-based.
"""

from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path
from typing import Any

import numpy as np

from .control import DtipGains
from .errors import SvcError
from .estimation import DifferentiatorConfig
from .model import ActiveMask, ParticipationFactors, SensitivityModel, solve_alignment
from .plant import GeneratorParams, PlantConfig
from .scenario import (
    ControllerConfig,
    Disconnect,
    Event,
    JoinSvc,
    LeaveSvc,
    LinePerturb,
    LoadDisturbance,
    RunResult,
    Scenario,
    SetDelay,
    SetpointStep,
    column_names,
    compute_metrics,
)

EVENT_KINDS = {
    "setpoint_step": SetpointStep,
    "set_delay": SetDelay,
    "load_disturbance": LoadDisturbance,
    "line_perturb": LinePerturb,
    "disconnect": Disconnect,
    "join_svc": JoinSvc,
    "leave_svc": LeaveSvc,
}
_KIND_NAMES = {cls: name for name, cls in EVENT_KINDS.items()}


class ParseError(SvcError, ValueError):
    """The document is not well-formed JSON."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidationError(SvcError, ValueError):
    """A well-formed document violates the scenario schema or a model invariant."""

    def __init__(self, field: str, reason: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}{where}: {reason}")
        self.field = field
        self.reason = reason
        self.line = line


# -- serialisation ------------------------------------------------------------

def _gains_to_dict(g: DtipGains) -> dict:
    return {"alpha": g.alpha, "k_p": g.k_p, "h_d": g.h_d}


def _diff_to_dict(d: DifferentiatorConfig) -> dict:
    return {"t_ndf": d.t_ndf, "n_ndf": d.n_ndf}


def _event_to_dict(ev: Event) -> dict:
    k = ev.kind
    out: dict[str, Any] = {"at": ev.at, "kind": _KIND_NAMES[type(k)]}
    if isinstance(k, SetpointStep):
        out["v_pp_ref"] = k.v_pp_ref
    elif isinstance(k, SetDelay):
        out["delay"] = k.delay
    elif isinstance(k, LoadDisturbance):
        out["d_v"] = k.d_v
        if k.d_q is not None:
            out["d_q"] = list(k.d_q)
    elif isinstance(k, LinePerturb):
        if k.model is not None:
            out["model"] = k.model.to_dict()
        else:
            out["gen"] = k.gen
            out["factor"] = k.factor
    else:
        out["gen"] = k.gen
    return out


def scenario_to_dict(sc: Scenario) -> dict:
    c = sc.controllers
    doc = {
        "name": sc.name,
        "duration": sc.duration,
        "v_pp_ref": sc.v_pp_ref,
        "model": sc.model.to_dict(),
        "pf": sc.pf.pf.tolist(),
        "generators": [
            {"tau_avr": g.tau_avr, "v_base": g.v_base, "v_min": g.v_min, "v_max": g.v_max}
            for g in sc.generators
        ],
        "plant": {"dt_plant": sc.plant.dt_plant},
        "controllers": {
            "inner_period": c.inner_period,
            "outer_period": c.outer_period,
            "inner_gains": [_gains_to_dict(g) for g in c.inner_gains],
            "outer_gains": _gains_to_dict(c.outer_gains),
            "inner_diff": _diff_to_dict(c.inner_diff),
            "outer_diff": _diff_to_dict(c.outer_diff),
            "u2_distribution": c.u2_distribution,
            "ref_ramp": c.ref_ramp,
            "ref_derivative": c.ref_derivative,
        },
        "log_interval": sc.log_interval,
        "events": [_event_to_dict(ev) for ev in sc.events],
    }
    if sc.initial_mask is not None:
        doc["initial_mask"] = {
            "connected": list(sc.initial_mask.connected),
            "svc_active": list(sc.initial_mask.svc_active),
        }
    if sc.initial_v_t is not None:
        doc["initial_v_t"] = list(sc.initial_v_t)
    return doc


def serialize_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


# -- parsing ------------------------------------------------------------------

def _line_of(text: str | None, path: str) -> int | None:
    """Best-effort line number of the last key named in ``path``."""
    if not text:
        return None
    keys = re.findall(r"[A-Za-z_][A-Za-z0-9_]*", path)
    for key in reversed(keys):
        m = re.search(rf'"{re.escape(key)}"\s*:', text)
        if m:
            return text.count("\n", 0, m.start()) + 1
    return None


class _Reader:
    def __init__(self, text: str | None):
        self.text = text

    def fail(self, field: str, reason: str) -> ValidationError:
        return ValidationError(field, reason, _line_of(self.text, field))

    def get(self, doc: dict, key: str, path: str, default: Any = ..., kind: type | tuple = object):
        if not isinstance(doc, dict):
            raise self.fail(path, "expected an object")
        if key not in doc:
            if default is ...:
                raise self.fail(f"{path}.{key}".lstrip("."), "required field missing")
            return default
        value = doc[key]
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise self.fail(f"{path}.{key}".lstrip("."), f"expected a number, got {value!r}")
            return float(value)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise self.fail(f"{path}.{key}".lstrip("."), f"expected an integer, got {value!r}")
            return value
        if kind is not object and not isinstance(value, kind):
            raise self.fail(f"{path}.{key}".lstrip("."), f"unexpected type {type(value).__name__}")
        return value

    def build(self, field: str, fn, *args, **kw):
        """Call a constructor, turning its invariant violations into ValidationError."""
        try:
            return fn(*args, **kw)
        except (SvcError, ValueError, TypeError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise self.fail(field, str(exc)) from exc


def _model(r: _Reader, doc: dict, path: str) -> SensitivityModel:
    c_v = r.get(doc, "c_v", path, kind=list)
    c_q = r.get(doc, "c_q", path, kind=list)
    try:
        c_v_arr = np.array(c_v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise r.fail(f"{path}.c_v", "expected a numeric array") from exc
    try:
        c_q_arr = np.array(c_q, dtype=float)
    except (TypeError, ValueError) as exc:
        raise r.fail(f"{path}.c_q", "expected a rectangular numeric matrix") from exc
    n = c_v_arr.size
    if c_q_arr.shape != (n, n):
        raise r.fail(f"{path}.c_q", f"shape {c_q_arr.shape} does not match c_v length {n}")
    return r.build(path, SensitivityModel, c_v_arr, c_q_arr)


def _gains(r: _Reader, doc: dict, path: str) -> DtipGains:
    return r.build(
        path,
        DtipGains,
        r.get(doc, "alpha", path, kind=float),
        r.get(doc, "k_p", path, kind=float),
        r.get(doc, "h_d", path, 1, kind=int),
    )


def _diff(r: _Reader, doc: dict, path: str) -> DifferentiatorConfig:
    return r.build(
        path,
        DifferentiatorConfig,
        r.get(doc, "t_ndf", path, kind=float),
        r.get(doc, "n_ndf", path, 5, kind=int),
    )


def _event(r: _Reader, doc: dict, path: str, n: int) -> Event:
    at = r.get(doc, "at", path, kind=float)
    kind = r.get(doc, "kind", path, kind=str)
    if kind not in EVENT_KINDS:
        raise r.fail(f"{path}.kind", f"unknown event kind {kind!r}; expected one of {sorted(EVENT_KINDS)}")
    if kind == "setpoint_step":
        payload = SetpointStep(r.get(doc, "v_pp_ref", path, kind=float))
    elif kind == "set_delay":
        payload = r.build(path, SetDelay, r.get(doc, "delay", path, kind=float))
        if not payload.delay >= 0.0:
            raise r.fail(f"{path}.delay", "delay must be >= 0")
    elif kind == "load_disturbance":
        d_q = r.get(doc, "d_q", path, None, kind=list)
        payload = LoadDisturbance(
            r.get(doc, "d_v", path, 0.0, kind=float),
            None if d_q is None else tuple(float(x) for x in d_q),
        )
    elif kind == "line_perturb":
        if "model" in doc:
            payload = LinePerturb(model=_model(r, doc["model"], f"{path}.model"))
        else:
            payload = LinePerturb(
                r.get(doc, "gen", path, 1, kind=int), r.get(doc, "factor", path, 1.15, kind=float)
            )
    else:
        payload = EVENT_KINDS[kind](r.get(doc, "gen", path, kind=int))
    gen = getattr(payload, "gen", None)
    if gen is not None and not 0 <= gen < n:
        raise r.fail(f"{path}.gen", f"generator index {gen} outside 0..{n - 1}")
    return r.build(path, Event, at, payload)


def _controllers(r: _Reader, doc: dict, model: SensitivityModel) -> ControllerConfig:
    path = "controllers"
    preset = r.get(doc, "preset", path, "desk", kind=str)
    if preset == "desk":
        base = ControllerConfig.desk(model)
    elif preset == "benchmark":
        if model.n != 4:
            raise r.fail(f"{path}.preset", "the benchmark preset is defined for four generators")
        base = ControllerConfig.benchmark()
    else:
        raise r.fail(f"{path}.preset", f"unknown preset {preset!r}")
    kw: dict[str, Any] = {}
    if "inner_gains" in doc:
        gains = r.get(doc, "inner_gains", path, kind=list)
        if len(gains) != model.n:
            raise r.fail(f"{path}.inner_gains", f"expected {model.n} entries, got {len(gains)}")
        kw["inner_gains"] = tuple(_gains(r, g, f"{path}.inner_gains[{i}]") for i, g in enumerate(gains))
    if "outer_gains" in doc:
        kw["outer_gains"] = _gains(r, doc["outer_gains"], f"{path}.outer_gains")
    for key in ("inner_period", "outer_period", "ref_ramp"):
        if key in doc:
            kw[key] = r.get(doc, key, path, kind=float)
    for key in ("inner_diff", "outer_diff"):
        if key in doc:
            kw[key] = _diff(r, doc[key], f"{path}.{key}")
    for key in ("u2_distribution", "ref_derivative"):
        if key in doc:
            kw[key] = r.get(doc, key, path, kind=str)
    return r.build(path, lambda: ControllerConfig(**{**base.__dict__, **kw}))


def scenario_from_dict(doc: dict, text: str | None = None) -> Scenario:
    """Validate a decoded scenario document; missing optional fields get defaults."""
    r = _Reader(text)
    if not isinstance(doc, dict):
        raise r.fail("<root>", "expected a JSON object")
    model = _model(r, r.get(doc, "model", "", kind=dict), "model")
    n = model.n
    pf_list = r.get(doc, "pf", "", [1.0] * n, kind=list)
    if len(pf_list) != n:
        raise r.fail("pf", f"expected {n} entries, got {len(pf_list)}")
    pf = r.build("pf", ParticipationFactors, np.array(pf_list, dtype=float))
    v_pp_ref = r.get(doc, "v_pp_ref", "", kind=float)

    mask = None
    if "initial_mask" in doc:
        m = r.get(doc, "initial_mask", "", kind=dict)
        mask = r.build(
            "initial_mask",
            ActiveMask,
            tuple(r.get(m, "connected", "initial_mask", [True] * n, kind=list)),
            tuple(r.get(m, "svc_active", "initial_mask", [True] * n, kind=list)),
        )
        if mask.n != n:
            raise r.fail("initial_mask", f"expected {n} entries")

    gens_doc = r.get(doc, "generators", "", None, kind=list)
    if gens_doc is not None and len(gens_doc) != n:
        raise r.fail("generators", f"expected {n} entries, got {len(gens_doc)}")
    # unspecified base setpoints default to the aligned operating point
    sol = r.build("v_pp_ref", solve_alignment, model, pf, v_pp_ref, mask)
    v_eq = np.linalg.solve(model.c_q, sol.q_ref)
    generators = []
    for i in range(n):
        g = gens_doc[i] if gens_doc is not None else {}
        p = f"generators[{i}]"
        generators.append(r.build(
            p,
            GeneratorParams,
            tau_avr=r.get(g, "tau_avr", p, 0.5, kind=float),
            v_base=r.get(g, "v_base", p, float(v_eq[i]), kind=float),
            v_min=r.get(g, "v_min", p, 0.5, kind=float),
            v_max=r.get(g, "v_max", p, 2.0, kind=float),
        ))

    plant_doc = r.get(doc, "plant", "", {}, kind=dict)
    plant = r.build("plant", PlantConfig, r.get(plant_doc, "dt_plant", "plant", 0.01, kind=float))
    controllers = _controllers(r, r.get(doc, "controllers", "", {}, kind=dict), model)
    events = tuple(
        _event(r, e, f"events[{i}]", n) for i, e in enumerate(r.get(doc, "events", "", [], kind=list))
    )
    v_t0 = r.get(doc, "initial_v_t", "", None, kind=list)
    return r.build(
        "<scenario>",
        Scenario,
        model=model,
        pf=pf,
        generators=tuple(generators),
        controllers=controllers,
        v_pp_ref=v_pp_ref,
        duration=r.get(doc, "duration", "", 1000.0, kind=float),
        events=events,
        plant=plant,
        initial_mask=mask,
        initial_v_t=None if v_t0 is None else tuple(float(x) for x in v_t0),
        log_interval=r.get(doc, "log_interval", "", 0.1, kind=float),
        name=r.get(doc, "name", "", "scenario", kind=str),
    )


def parse_scenario(text: str, overrides: list[str] | tuple[str, ...] = ()) -> Scenario:
    """Parse a JSON scenario document, applying ``key.path=value`` overrides first."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    for item in overrides:
        apply_override(doc, item)
    return scenario_from_dict(doc, text)


def load_scenario(path: str | Path, overrides: list[str] | tuple[str, ...] = ()) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"), overrides)


def apply_override(doc: dict, item: str) -> None:
    """Set ``a.b[2].c=value`` style paths; the value is read as JSON, else as a string."""
    if "=" not in item:
        raise ValidationError(item, "override must look like key=value")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = [p for p in re.split(r"\.|\[(\d+)\]", key) if p]
    if not parts:
        raise ValidationError(item, "empty override key")
    node: Any = doc
    for i, part in enumerate(parts):
        last = i == len(parts) - 1
        idx: Any = int(part) if part.isdigit() and isinstance(node, list) else part
        try:
            if last:
                node[idx] = value
            else:
                if isinstance(node, dict) and idx not in node:
                    node[idx] = {}
                node = node[idx]
        except (IndexError, TypeError, KeyError) as exc:
            raise ValidationError(key, f"cannot set override: {exc}") from exc


# -- outputs ------------------------------------------------------------------

def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_outputs(result: RunResult, out_dir: str | Path, scenario: Scenario | None = None) -> list[Path]:
    """Write ``timeseries.csv`` and ``metrics.json`` (plus ``scenario.json`` if given)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    csv_path = out / "timeseries.csv"
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(result.columns) + "\n")
        for row in result.data:
            fh.write(",".join(_fmt(x) for x in row.tolist()) + "\n")
    paths.append(csv_path)
    metrics_path = out / "metrics.json"
    metrics_path.write_text(json.dumps(result.metrics, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths.append(metrics_path)
    if scenario is not None:
        sc_path = out / "scenario.json"
        sc_path.write_text(serialize_scenario(scenario), encoding="utf-8")
        paths.append(sc_path)
    return paths


def read_timeseries(path: str | Path) -> RunResult:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    n = (len(header) - 5) // 8
    if header != column_names(n):
        raise ValidationError(str(path), "unexpected CSV header")
    return RunResult(header, data.reshape(-1, len(header)), n)


def report(out_dir: str | Path) -> dict[str, dict]:
    """Recompute metrics for every run directory under ``out_dir`` (or the directory itself)."""
    root = Path(out_dir)
    dirs = [root] if (root / "timeseries.csv").exists() else sorted(
        p.parent for p in root.glob("*/timeseries.csv")
    )
    summary = {}
    for d in dirs:
        result = read_timeseries(d / "timeseries.csv")
        scenario = load_scenario(d / "scenario.json")
        result.metrics = compute_metrics(result, scenario)
        (d / "metrics.json").write_text(
            json.dumps(result.metrics, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        summary[d.name] = result.metrics
    return summary
