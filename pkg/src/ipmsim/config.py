"""Scenario configuration: JSON files, bundled presets, variants, sweeps.

A scenario file is a single JSON object with a ``schema_version`` field and
sections for parameters, impulse schedule, initial state, time span, solver
settings and requested outputs.  Any scalar may be written either as a plain
number or as ``{"value": number, "assumed": true}``; the latter marks values
that the scenario source did not pin down, and the marks are carried through
to the loaded ScenarioConfig.  Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import ConfigError, DomainError
from .integrator import SolverConfig
from .model import ImpulseSchedule, ModelParameters, SystemState

__all__ = [
    "ScenarioConfig",
    "SweepSpec",
    "load_config",
    "load_config_data",
    "load_preset",
    "preset_names",
    "resolve_config_argument",
]

SCHEMA_VERSION = 1

_OUTPUT_KINDS = (
    "trajectory_csv",
    "stability_report",
    "diagnostics_report",
    "svg_plot",
)

# JSON key -> ModelParameters field ("lambda" is a reserved word in Python).
_PARAM_FIELDS = {
    "r": "r",
    "k": "k",
    "alpha": "alpha",
    "phi": "phi",
    "lambda": "lam",
    "c1": "c1",
    "c2": "c2",
    "d": "d",
    "delta": "delta",
    "theta": "theta",
    "gamma": "gamma",
    "mu": "mu",
    "m1": "m1",
    "m2": "m2",
}
_SCHEDULE_KEYS = ("tau1", "tau2", "v_i", "s_i", "first_impulse_at_zero")
_INITIAL_KEYS = ("x", "y", "z", "v", "s")
_SOLVER_KEYS = ("rtol", "atol", "h_init", "h_max", "dense_dt", "max_steps")
_TOP_KEYS = (
    "schema_version",
    "name",
    "description",
    "params",
    "schedule",
    "initial",
    "t_span",
    "solver",
    "outputs",
    "variants",
    "sweep",
)
_VARIANT_KEYS = ("name", "params", "schedule", "initial", "t_span", "solver", "outputs")
_SWEEP_AXES = ("v_i", "s_i", "tau1", "tau2")
_DEFAULT_SWEEP_CAP = 10_000


@dataclass(frozen=True)
class SweepSpec:
    """A grid over schedule quantities, with a point-count cap."""

    axes: tuple[tuple[str, tuple[float, ...]], ...]
    cap: int = _DEFAULT_SWEEP_CAP

    @property
    def size(self) -> int:
        n = 1
        for _, values in self.axes:
            n *= len(values)
        return n


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully resolved scenario: model, schedule, run window, outputs."""

    name: str
    params: ModelParameters
    schedule: ImpulseSchedule
    initial: SystemState
    t_span: tuple[float, float]
    solver: SolverConfig = field(default_factory=SolverConfig)
    outputs: tuple[str, ...] = ("trajectory_csv",)
    description: str = ""
    assumed: tuple[str, ...] = ()
    variants: tuple["ScenarioConfig", ...] = ()
    sweep: SweepSpec | None = None

    def variant(self, name: str) -> "ScenarioConfig":
        """Look up a named variant (the base name is not included)."""
        for var in self.variants:
            if var.name == name:
                return var
        raise ConfigError(f"scenario {self.name!r} has no variant {name!r}")


def _fail(path: str, message: str) -> ConfigError:
    where = path if path else "top level"
    return ConfigError(f"{where}: {message}")


def _require_mapping(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise _fail(path, f"expected an object, got {type(value).__name__}")
    return value

def _check_keys(data: Mapping[str, Any], allowed: Sequence[str], path: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise _fail(path, f"unknown key(s) {', '.join(map(repr, unknown))}")


def _scalar(value: Any, path: str, assumed: list[str], *, allow_null: bool = False):
    """Unwrap a plain scalar or a {value, assumed} wrapper."""
    if isinstance(value, Mapping):
        _check_keys(value, ("value", "assumed"), path)
        if "value" not in value:
            raise _fail(path, "wrapper object needs a 'value' key")
        flag = value.get("assumed", False)
        if not isinstance(flag, bool):
            raise _fail(path, "'assumed' must be true or false")
        if flag:
            assumed.append(path)
        value = value["value"]
    if value is None:
        if allow_null:
            return None
        raise _fail(path, "null is not allowed here")
    return value


def _number(value: Any, path: str, assumed: list[str], *, allow_null: bool = False):
    value = _scalar(value, path, assumed, allow_null=allow_null)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(path, f"expected a number, got {value!r}")
    return float(value)


def _boolean(value: Any, path: str, assumed: list[str]) -> bool:
    value = _scalar(value, path, assumed)
    if not isinstance(value, bool):
        raise _fail(path, f"expected true/false, got {value!r}")
    return value


def _integer(value: Any, path: str, assumed: list[str]) -> int:
    value = _scalar(value, path, assumed)
    if isinstance(value, bool) or not isinstance(value, int):
        raise _fail(path, f"expected an integer, got {value!r}")
    return value


def _parse_params(data: Any, assumed: list[str]) -> ModelParameters:
    data = _require_mapping(data, "params")
    _check_keys(data, tuple(_PARAM_FIELDS), "params")
    missing = sorted(set(_PARAM_FIELDS) - set(data))
    if missing:
        raise _fail("params", f"missing key(s) {', '.join(map(repr, missing))}")
    kwargs = {}
    for key, fieldname in _PARAM_FIELDS.items():
        kwargs[fieldname] = _number(data[key], f"params.{key}", assumed)
    try:
        return ModelParameters(**kwargs)
    except DomainError as exc:
        raise _fail("params", str(exc)) from exc


def _parse_schedule(data: Any, assumed: list[str]) -> ImpulseSchedule:
    data = _require_mapping(data, "schedule")
    _check_keys(data, _SCHEDULE_KEYS, "schedule")
    kwargs: dict[str, Any] = {}
    for key in ("tau1", "tau2"):
        if key in data:
            kwargs[key] = _number(data[key], f"schedule.{key}", assumed, allow_null=True)
    for key in ("v_i", "s_i"):
        if key in data:
            kwargs[key] = _number(data[key], f"schedule.{key}", assumed)
    if "first_impulse_at_zero" in data:
        kwargs["first_impulse_at_zero"] = _boolean(
            data["first_impulse_at_zero"], "schedule.first_impulse_at_zero", assumed
        )
    try:
        return ImpulseSchedule(**kwargs)
    except DomainError as exc:
        raise _fail("schedule", str(exc)) from exc


def _parse_initial(data: Any, assumed: list[str]) -> SystemState:
    data = _require_mapping(data, "initial")
    _check_keys(data, _INITIAL_KEYS, "initial")
    missing = sorted(set(_INITIAL_KEYS) - set(data))
    if missing:
        raise _fail("initial", f"missing key(s) {', '.join(map(repr, missing))}")
    kwargs = {
        key: _number(data[key], f"initial.{key}", assumed) for key in _INITIAL_KEYS
    }
    try:
        return SystemState(**kwargs)
    except DomainError as exc:
        raise _fail("initial", str(exc)) from exc


def _parse_t_span(data: Any, assumed: list[str]) -> tuple[float, float]:
    if not isinstance(data, Sequence) or isinstance(data, (str, bytes)) or len(data) != 2:
        raise _fail("t_span", "expected a [t0, tf] pair")
    t0 = _number(data[0], "t_span[0]", assumed)
    tf = _number(data[1], "t_span[1]", assumed)
    if not t0 < tf:
        raise _fail("t_span", f"need t0 < tf, got [{t0!r}, {tf!r}]")
    return (t0, tf)


def _parse_solver(data: Any, assumed: list[str]) -> SolverConfig:
    data = _require_mapping(data, "solver")
    _check_keys(data, _SOLVER_KEYS, "solver")
    kwargs: dict[str, Any] = {}
    for key in ("rtol", "atol", "h_init", "h_max", "dense_dt"):
        if key in data:
            kwargs[key] = _number(data[key], f"solver.{key}", assumed)
    if "max_steps" in data:
        kwargs["max_steps"] = _integer(data["max_steps"], "solver.max_steps", assumed)
    try:
        return SolverConfig(**kwargs)
    except DomainError as exc:
        raise _fail("solver", str(exc)) from exc


def _parse_outputs(data: Any) -> tuple[str, ...]:
    if not isinstance(data, Sequence) or isinstance(data, (str, bytes)):
        raise _fail("outputs", "expected a list of artifact names")
    outputs = []
    for i, item in enumerate(data):
        if item not in _OUTPUT_KINDS:
            raise _fail(
                f"outputs[{i}]",
                f"unknown artifact {item!r}; valid: {', '.join(_OUTPUT_KINDS)}",
            )
        if item not in outputs:
            outputs.append(item)
    return tuple(outputs)


def _parse_sweep(data: Any, assumed: list[str]) -> SweepSpec:
    data = _require_mapping(data, "sweep")
    _check_keys(data, ("axes", "cap"), "sweep")
    if "axes" not in data:
        raise _fail("sweep", "missing 'axes'")
    axes_data = _require_mapping(data["axes"], "sweep.axes")
    _check_keys(axes_data, _SWEEP_AXES, "sweep.axes")
    if not axes_data:
        raise _fail("sweep.axes", "need at least one axis")
    axes = []
    # Fixed axis order keeps sweep row order independent of JSON key order.
    for key in _SWEEP_AXES:
        if key not in axes_data:
            continue
        raw = axes_data[key]
        if not isinstance(raw, Sequence) or isinstance(raw, (str, bytes)) or not raw:
            raise _fail(f"sweep.axes.{key}", "expected a non-empty list of numbers")
        values = tuple(
            _number(v, f"sweep.axes.{key}[{i}]", assumed) for i, v in enumerate(raw)
        )
        axes.append((key, values))
    cap = _DEFAULT_SWEEP_CAP
    if "cap" in data:
        cap = _integer(data["cap"], "sweep.cap", assumed)
        if cap < 1:
            raise _fail("sweep.cap", "must be >= 1")
    return SweepSpec(axes=tuple(axes), cap=cap)


def _merge_section(base: Any, override: Any, path: str) -> Any:
    if isinstance(base, Mapping) and isinstance(override, Mapping):
        merged = dict(base)
        merged.update(override)
        return merged
    return override


def load_config_data(data: Mapping[str, Any], *, default_name: str = "scenario") -> ScenarioConfig:
    """Build a ScenarioConfig from already-parsed JSON data."""
    data = _require_mapping(data, "")
    _check_keys(data, _TOP_KEYS, "")
    if "schema_version" not in data:
        raise _fail("", "missing 'schema_version'")
    if data["schema_version"] != SCHEMA_VERSION:
        raise _fail(
            "schema_version",
            f"unsupported version {data['schema_version']!r} (expected {SCHEMA_VERSION})",
        )
    for key in ("params", "schedule", "initial", "t_span"):
        if key not in data:
            raise _fail("", f"missing section {key!r}")

    name = data.get("name", default_name)
    if not isinstance(name, str) or not name:
        raise _fail("name", "expected a non-empty string")
    description = data.get("description", "")
    if not isinstance(description, str):
        raise _fail("description", "expected a string")

    assumed: list[str] = []
    params = _parse_params(data["params"], assumed)
    schedule = _parse_schedule(data["schedule"], assumed)
    initial = _parse_initial(data["initial"], assumed)
    t_span = _parse_t_span(data["t_span"], assumed)
    solver = _parse_solver(data["solver"], assumed) if "solver" in data else SolverConfig()
    outputs = _parse_outputs(data["outputs"]) if "outputs" in data else ("trajectory_csv",)
    sweep = _parse_sweep(data["sweep"], assumed) if "sweep" in data else None

    variants: list[ScenarioConfig] = []
    if "variants" in data:
        raw_variants = data["variants"]
        if not isinstance(raw_variants, Sequence) or isinstance(raw_variants, (str, bytes)):
            raise _fail("variants", "expected a list of variant objects")
        for i, raw in enumerate(raw_variants):
            raw = _require_mapping(raw, f"variants[{i}]")
            _check_keys(raw, _VARIANT_KEYS, f"variants[{i}]")
            if "name" not in raw or not isinstance(raw["name"], str) or not raw["name"]:
                raise _fail(f"variants[{i}]", "missing variant 'name'")
            merged = {
                key: data[key]
                for key in ("schema_version", "params", "schedule", "initial", "t_span")
            }
            if "solver" in data:
                merged["solver"] = data["solver"]
            if "outputs" in data:
                merged["outputs"] = data["outputs"]
            for key in ("params", "schedule", "initial", "t_span", "solver", "outputs"):
                if key in raw:
                    merged[key] = _merge_section(
                        merged.get(key), raw[key], f"variants[{i}].{key}"
                    )
            merged["name"] = f"{name}-{raw['name']}"
            try:
                variants.append(load_config_data(merged, default_name=merged["name"]))
            except ConfigError as exc:
                raise _fail(f"variants[{i}]", str(exc)) from exc

    return ScenarioConfig(
        name=name,
        description=description,
        params=params,
        schedule=schedule,
        initial=initial,
        t_span=t_span,
        solver=solver,
        outputs=outputs,
        assumed=tuple(assumed),
        variants=tuple(variants),
        sweep=sweep,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    """Load a scenario file (JSON)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return load_config_data(data, default_name=path.stem)


def preset_names() -> tuple[str, ...]:
    """Names of the bundled scenario presets."""
    root = resources.files("ipmsim").joinpath("presets")
    names = [
        entry.name[: -len(".json")]
        for entry in root.iterdir()
        if entry.name.endswith(".json")
    ]
    return tuple(sorted(names))


def load_preset(name: str) -> ScenarioConfig:
    """Load one of the bundled presets by name (e.g. 'fig1')."""
    resource = resources.files("ipmsim").joinpath("presets", f"{name}.json")
    if not resource.is_file():
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    data = json.loads(resource.read_text(encoding="utf-8"))
    return load_config_data(data, default_name=name)


def resolve_config_argument(arg: str) -> ScenarioConfig:
    """Interpret a CLI config argument as a file path or a preset name."""
    path = Path(arg)
    if path.exists() or arg.endswith(".json") or "/" in arg:
        return load_config(path)
    return load_preset(arg)
