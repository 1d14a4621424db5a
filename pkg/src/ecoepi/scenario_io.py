"""Scenario documents, bundled presets, and delimited/JSON exports.

A scenario document is a JSON object with five sections: coefficients
(ten tagged records keyed by role), responses (susceptible and infected
predation responses by registry name), initial (S, I, P), step_size, and
run (optional numeric settings).  Parsing is strict: unknown keys anywhere
are structural errors, inadmissible values are validation errors, and the
two are kept apart because the command line maps them to different exit
codes.

Serialisation resolves every default, so serialize(parse(serialize(x)))
is byte-identical to serialize(x).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .coefficients import (COEFF_NAMES, CoefficientSpec, ContinuousModelSpec,
                           discretize_continuous, validate_h1_h2)
from .dynamics import Scenario, make_response
from .errors import ScenarioParseError, ScenarioValidationError

_TOP_KEYS = {"label", "coefficients", "responses", "initial", "step_size", "run"}
_REQUIRED_TOP = {"coefficients", "responses", "initial", "step_size"}
_RECORD_KEYS = {
    "constant": {"kind", "value"},
    "cosine": {"kind", "base", "amplitude", "frequency"},
    "table": {"kind", "values", "extend"},
}
_RESPONSE_KEYS = {"susceptible", "infected"}
_INITIAL_KEYS = {"S", "I", "P"}


@dataclass(frozen=True)
class RunSettings:
    """Numeric knobs for simulation, reference building and verdicts."""

    steps: int = 2000
    burn_in: int = 5000
    attractor_window: object = None
    attractor_tol: float = 1e-8
    lambda_max: object = None
    extinction_tol: float = 1e-4
    extinction_tail: int = 500
    persistence_eps: float = 1e-3
    persistence_tail: int = 500
    attractivity_tol: float = 1e-4
    bound_slack: float = 0.5


_RUN_KEYS = {f.name for f in fields(RunSettings)}


@dataclass
class LoadedScenario:
    """A parsed scenario together with its run settings and the resolved
    document it serialises back to."""

    scenario: Scenario
    run: RunSettings
    document: dict


def _require_number(value, where, *, allow_int=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _parse_record(name, record):
    where = f"coefficients.{name}"
    if not isinstance(record, dict):
        raise ScenarioParseError(f"{where}: expected an object")
    kind = record.get("kind")
    if kind not in _RECORD_KEYS:
        raise ScenarioParseError(f"{where}: unknown kind {kind!r}")
    extra = set(record) - _RECORD_KEYS[kind]
    if extra:
        raise ScenarioParseError(f"{where}: unknown keys {sorted(extra)}")
    missing = _RECORD_KEYS[kind] - set(record)
    if missing:
        raise ScenarioParseError(f"{where}: missing keys {sorted(missing)}")
    if kind == "constant":
        return CoefficientSpec.constant(_require_number(record["value"], where))
    if kind == "cosine":
        return CoefficientSpec.cosine(
            _require_number(record["base"], where),
            _require_number(record["amplitude"], where),
            _require_number(record["frequency"], where))
    values = record["values"]
    if not isinstance(values, list) or not values:
        raise ScenarioParseError(f"{where}: values must be a nonempty list")
    if record["extend"] not in ("hold", "wrap"):
        raise ScenarioParseError(
            f"{where}: extend must be 'hold' or 'wrap'")
    return CoefficientSpec.table(
        [_require_number(v, where) for v in values], record["extend"])


def _record_dict(spec):
    if spec.kind == "constant":
        return {"kind": "constant", "value": spec.value}
    if spec.kind == "cosine":
        return {"kind": "cosine", "base": spec.base,
                "amplitude": spec.amplitude, "frequency": spec.frequency}
    return {"kind": "table", "values": list(spec.values),
            "extend": spec.extend}


def _parse_response(role, record):
    where = f"responses.{role}"
    if not isinstance(record, dict):
        raise ScenarioParseError(f"{where}: expected an object")
    if "name" not in record:
        raise ScenarioParseError(f"{where}: missing response name")
    name = record["name"]
    if not isinstance(name, str):
        raise ScenarioParseError(f"{where}: response name must be a string")
    params = {k: _require_number(v, f"{where}.{k}")
              for k, v in record.items() if k != "name"}
    try:
        return make_response(name, **params)
    except ValueError as exc:
        raise ScenarioValidationError(f"{where}: {exc}") from None


def parse_scenario(source, validate=True, validation_horizon=None):
    """Load a scenario from a path, JSON text, or an already-decoded dict.

    With validate=True (the default) the parsed coefficients must clear
    the basic admissibility checks (nonnegativity, positive mortality,
    mortality below infected removal) over the working horizon; recall the
    positivity-of-recruitment style conditions are deliberately not
    enforced here, since plain simulation is well defined without them.
    """
    if isinstance(source, dict):
        doc = source
    else:
        if _looks_like_path(source):
            try:
                text = Path(source).read_text()
            except OSError as exc:
                raise ScenarioParseError(
                    f"cannot read scenario file: {exc}") from None
        else:
            text = source
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario document must be a JSON object")

    extra = set(doc) - _TOP_KEYS
    if extra:
        raise ScenarioParseError(f"unknown top-level keys {sorted(extra)}")
    missing = _REQUIRED_TOP - set(doc)
    if missing:
        raise ScenarioParseError(f"missing top-level keys {sorted(missing)}")

    label = doc.get("label", "")
    if not isinstance(label, str):
        raise ScenarioParseError("label must be a string")

    coeff_doc = doc["coefficients"]
    if not isinstance(coeff_doc, dict):
        raise ScenarioParseError("coefficients must be an object")
    extra = set(coeff_doc) - set(COEFF_NAMES)
    if extra:
        raise ScenarioParseError(f"unknown coefficients {sorted(extra)}")
    missing = set(COEFF_NAMES) - set(coeff_doc)
    if missing:
        raise ScenarioParseError(f"missing coefficients {sorted(missing)}")
    specs = {name: _parse_record(name, coeff_doc[name]) for name in COEFF_NAMES}

    resp_doc = doc["responses"]
    if not isinstance(resp_doc, dict):
        raise ScenarioParseError("responses must be an object")
    if set(resp_doc) != _RESPONSE_KEYS:
        raise ScenarioParseError(
            "responses must have exactly the keys "
            f"{sorted(_RESPONSE_KEYS)}, got {sorted(resp_doc)}")
    f = _parse_response("susceptible", resp_doc["susceptible"])
    g = _parse_response("infected", resp_doc["infected"])

    init_doc = doc["initial"]
    if not isinstance(init_doc, dict) or set(init_doc) != _INITIAL_KEYS:
        raise ScenarioParseError(
            f"initial must have exactly the keys {sorted(_INITIAL_KEYS)}")
    initial = tuple(_require_number(init_doc[k], f"initial.{k}")
                    for k in ("S", "I", "P"))

    h = _require_number(doc["step_size"], "step_size")

    run_doc = doc.get("run", {})
    if not isinstance(run_doc, dict):
        raise ScenarioParseError("run must be an object")
    extra = set(run_doc) - _RUN_KEYS
    if extra:
        raise ScenarioParseError(f"unknown run keys {sorted(extra)}")
    run = _build_run(run_doc)

    # semantic checks
    if not (math.isfinite(h) and h > 0):
        raise ScenarioValidationError(f"step_size must be positive, got {h}")
    if any(not math.isfinite(v) or v < 0 for v in initial):
        raise ScenarioValidationError(
            f"initial state must be nonnegative and finite, got {initial}")

    model = ContinuousModelSpec(label=label, **specs)
    coeffs = discretize_continuous(model, h)
    scenario = Scenario(coeffs=coeffs, f=f, g=g, initial=initial, label=label)

    if validate:
        horizon = validation_horizon
        if horizon is None:
            horizon = max(run.steps, 1000)
        report = validate_h1_h2(coeffs, horizon=horizon)
        if not report.h1_ok:
            detail = "; ".join(
                f"{msg} (first at index {idx})" if idx >= 0 else msg
                for (_, msg, idx) in report.violations
                if _ == "h1")
            raise ScenarioValidationError(
                f"coefficient admissibility failed: {detail}")

    loaded = LoadedScenario(scenario=scenario, run=run, document={})
    loaded.document = _resolved_document(loaded)
    return loaded


def _looks_like_path(source):
    if isinstance(source, Path):
        return True
    s = str(source)
    return not s.lstrip().startswith("{")


def _build_run(run_doc):
    kwargs = {}
    for key, raw in run_doc.items():
        if key in ("attractor_window", "lambda_max") and raw is None:
            kwargs[key] = None
            continue
        val = _require_number(raw, f"run.{key}")
        if key in ("steps", "burn_in", "extinction_tail", "persistence_tail",
                   "attractor_window", "lambda_max"):
            if val != int(val):
                raise ScenarioParseError(f"run.{key} must be an integer")
            val = int(val)
        kwargs[key] = val
    run = RunSettings(**kwargs)
    if run.steps < 0 or run.burn_in < 0:
        raise ScenarioValidationError("run.steps and run.burn_in must be "
                                      "nonnegative")
    for name in ("attractor_tol", "extinction_tol", "persistence_eps",
                 "attractivity_tol"):
        if getattr(run, name) <= 0:
            raise ScenarioValidationError(f"run.{name} must be positive")
    if run.extinction_tail < 1 or run.persistence_tail < 1:
        raise ScenarioValidationError("tail windows must be at least 1")
    if run.bound_slack < 0:
        raise ScenarioValidationError("run.bound_slack must be nonnegative")
    if run.attractor_window is not None and run.attractor_window < 1:
        raise ScenarioValidationError("run.attractor_window must be >= 1")
    if run.lambda_max is not None and run.lambda_max < 0:
        raise ScenarioValidationError("run.lambda_max must be nonnegative")
    return run


def _resolved_document(loaded):
    scen = loaded.scenario
    run = loaded.run
    coeff_doc = {name: _record_dict(getattr(scen.coeffs, name).spec)
                 for name in COEFF_NAMES}

    def resp_dict(resp):
        out = {"name": resp.name}
        out.update(resp.params)
        return out

    run_doc = {f.name: getattr(run, f.name) for f in fields(RunSettings)}
    return {
        "label": scen.label,
        "coefficients": coeff_doc,
        "responses": {"susceptible": resp_dict(scen.f),
                      "infected": resp_dict(scen.g)},
        "initial": {"S": scen.initial[0], "I": scen.initial[1],
                    "P": scen.initial[2]},
        "step_size": scen.coeffs.step_size,
        "run": run_doc,
    }


def serialize_scenario(loaded, path=None):
    """Canonical JSON text of a loaded scenario; optionally written out."""
    text = json.dumps(loaded.document, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# bundled presets

@dataclass(frozen=True)
class Preset:
    """A named scenario family with its three stock initial states and the
    classification the thresholds are expected to deliver."""

    name: str
    description: str
    expected: str
    document: dict
    initials: tuple


def _const(v):
    return {"kind": "constant", "value": v}


def _seasonal(base):
    return {"kind": "cosine", "base": base, "amplitude": 0.7,
            "frequency": math.pi / 5}


_EXTINCTION_STARTS = ((0.8, 0.6, 0.1), (1.7, 0.2, 0.3), (2.3, 0.4, 0.7))
_PERSISTENCE_STARTS = ((1.5, 0.1, 0.2), (0.7, 0.2, 0.4), (0.3, 0.15, 0.9))


def _stock_document(label, *, predation, transmission, infected_predation,
                    initial):
    return {
        "label": label,
        "step_size": 1.0,
        "coefficients": {
            "recruitment": _const(0.3),
            "mortality": _const(0.1),
            "predation": predation,
            "transmission": transmission,
            "infected_predation": infected_predation,
            "infected_removal": _const(0.18),
            "predator_growth": _const(0.3),
            "predator_competition": _const(0.2),
            "conversion": _const(0.1),
            "infected_conversion": _const(0.9),
        },
        "responses": {"susceptible": {"name": "linear_prey"},
                      "infected": {"name": "linear_predator"}},
        "initial": {"S": initial[0], "I": initial[1], "P": initial[2]},
        "run": {"steps": 2000},
    }


def _build_presets():
    presets = {}

    def add(name, description, expected, *, predation, transmission,
            infected_predation):
        starts = (_EXTINCTION_STARTS if expected == "Extinction"
                  else _PERSISTENCE_STARTS)
        doc = _stock_document(name, predation=predation,
                              transmission=transmission,
                              infected_predation=infected_predation,
                              initial=starts[0])
        presets[name] = Preset(name=name, description=description,
                               expected=expected, document=doc,
                               initials=starts)

    add("np-extinction",
        "seasonal transmission, no predation pressure, subcritical",
        "Extinction",
        predation=_const(0.0), transmission=_seasonal(0.17),
        infected_predation=_seasonal(0.3))
    add("np-persistence",
        "seasonal transmission, no predation pressure, supercritical",
        "StrongPersistence",
        predation=_const(0.0), transmission=_seasonal(0.29),
        infected_predation=_seasonal(0.3))
    add("periodic-extinction",
        "seasonal transmission with predation, subcritical",
        "Extinction",
        predation=_const(0.4), transmission=_seasonal(0.17),
        infected_predation=_seasonal(0.3))
    add("periodic-persistence",
        "seasonal transmission with predation, supercritical",
        "StrongPersistence",
        predation=_const(0.4), transmission=_seasonal(2.2),
        infected_predation=_seasonal(0.3))
    add("autonomous-extinction",
        "constant coefficients with predation, subcritical",
        "Extinction",
        predation=_const(0.4), transmission=_const(0.17),
        infected_predation=_const(0.3))
    add("autonomous-persistence",
        "constant coefficients with predation, supercritical",
        "StrongPersistence",
        predation=_const(0.4), transmission=_const(2.2),
        infected_predation=_const(0.3))
    return presets


PRESETS = _build_presets()
PRESET_NAMES = tuple(PRESETS)


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(PRESET_NAMES)
        raise ScenarioValidationError(
            f"unknown preset {name!r}; known presets: {known}") from None


def preset_scenario(name, initial_index=0):
    """Load one preset as a scenario, selecting one of its three starts."""
    preset = get_preset(name)
    if not 0 <= initial_index < len(preset.initials):
        raise ValueError(f"initial_index out of range for {name}")
    doc = json.loads(json.dumps(preset.document))
    s0, i0, p0 = preset.initials[initial_index]
    doc["initial"] = {"S": s0, "I": i0, "P": p0}
    return parse_scenario(doc)


# ---------------------------------------------------------------------------
# exports

def _fmt(x):
    return format(float(x), ".17g")


def write_trajectory_csv(traj, path):
    """Write n,S,I,P rows at 17 significant digits.

    The format is deterministic: identical trajectories produce
    byte-identical files.
    """
    lines = ["n,S,I,P"]
    for j in range(len(traj)):
        s, i, p = traj.states[j]
        lines.append(f"{traj.start + j},{_fmt(s)},{_fmt(i)},{_fmt(p)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_threshold_csv(report, path):
    lines = ["lambda,r_lower,r_upper"]
    for lam, rl, ru in report.entries:
        lines.append(f"{lam},{_fmt(rl)},{_fmt(ru)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_reference_csv(ref, path):
    """Write a reference window; n,value for scalars, n,x,z for pairs."""
    if ref.values.ndim == 1:
        lines = ["n,value"]
        for j, v in enumerate(ref.values):
            lines.append(f"{ref.start + j},{_fmt(v)}")
    else:
        lines = ["n,x,z"]
        for j in range(len(ref.values)):
            x, z = ref.values[j]
            lines.append(f"{ref.start + j},{_fmt(x)},{_fmt(z)}")
    Path(path).write_text("\n".join(lines) + "\n")


def reference_summary(ref):
    return {
        "kind": ref.kind,
        "start": ref.start,
        "window": int(len(ref.values)),
        "burn_in": ref.burn_in,
        "detected_period": ref.detected_period,
        "convergence_residual": ref.convergence_residual,
        "tol": ref.tol,
    }


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
