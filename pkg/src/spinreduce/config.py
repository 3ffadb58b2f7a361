"""Run configuration: YAML schema, validation, defaults.

Parsing is total: every malformed input raises :class:`ConfigError` whose
message names the offending field by path (e.g. ``integrator.dt: must be a
positive number``), never an uncaught exception.  Unknown keys are rejected
so typos cannot silently change a run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .dynamics import IntegratorSpec
from .errors import ConfigError, InadmissibleParameterError
from .model import MLState, ModelParams, ReducedState, SublatticeParams

__all__ = ["PortraitConfig", "OutputConfig", "CheckConfig", "RunConfig", "load_config"]

SUPPORTED_FORMATS = ("csv", "svg", "json-lines")

_PARAM_KEYS = ("A", "B", "alpha", "b", "beta", "C", "g", "h", "p_v")
_SUBLATTICE_KEYS = (
    "A1",
    "A2",
    "A3",
    "B",
    "alpha1",
    "alpha2",
    "alpha3",
    "b",
    "beta1",
    "beta2",
)
_INTEGRATOR_KEYS = ("method", "dt", "rel_tol", "abs_tol", "t_end", "sample_stride")
_PORTRAIT_KEYS = (
    "grid_n",
    "resolution",
    "levels",
    "u_periods",
    "separatrix_dt",
    "separatrix_eps",
    "match_radius",
    "arc_budget",
)
_OUTPUT_KEYS = ("directory", "formats", "write_lifted")
_CHECK_KEYS = ("seed", "break_sign_hook")


@dataclass(frozen=True)
class PortraitConfig:
    grid_n: int = 64
    resolution: int = 201
    levels: int = 12
    u_periods: int = 1
    separatrix_dt: float = 1e-3
    separatrix_eps: float = 1e-6
    match_radius: float = 1e-4
    arc_budget: float | None = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv", "svg")
    write_lifted: bool = False


@dataclass(frozen=True)
class CheckConfig:
    seed: int = 20250809
    break_sign_hook: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Validated contents of one configuration file."""

    params: ModelParams
    integrator: IntegratorSpec
    portrait: PortraitConfig = field(default_factory=PortraitConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    check: CheckConfig = field(default_factory=CheckConfig)
    initial_reduced: ReducedState | None = None
    initial_ml: MLState | None = None
    sublattice: SublatticeParams | None = None

    def require_initial(self) -> None:
        """A simulate run needs exactly one initial-state representation."""
        given = (self.initial_reduced is not None) + (self.initial_ml is not None)
        if given != 1:
            raise ConfigError(
                "initial",
                "exactly one of 'reduced' or 'ml' must be given for a simulate run",
            )


def _require_mapping(node, path: str) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(path, f"expected a mapping, got {type(node).__name__}")
    return node


def _reject_unknown(node: dict, path: str, allowed) -> None:
    for key in node:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}" if path else str(key), "unknown key")


def _number(node: dict, path: str, key: str, default=None, positive=False):
    if key not in node or node[key] is None:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}", "required number is missing")
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}", "must be a positive number")
    return float(v)


def _integer(node: dict, path: str, key: str, default=None, minimum=None):
    if key not in node or node[key] is None:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}", "required integer is missing")
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key}", f"must be at least {minimum}")
    return v


def _boolean(node: dict, path: str, key: str, default=False):
    if key not in node or node[key] is None:
        return default
    v = node[key]
    if not isinstance(v, bool):
        raise ConfigError(f"{path}.{key}", f"expected a boolean, got {v!r}")
    return v


def _vector3(node: dict, path: str, key: str):
    if key not in node:
        raise ConfigError(f"{path}.{key}", "required 3-vector is missing")
    v = node[key]
    if (
        not isinstance(v, (list, tuple))
        or len(v) != 3
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v)
    ):
        raise ConfigError(f"{path}.{key}", f"expected a list of 3 numbers, got {v!r}")
    return [float(x) for x in v]


def _parse_params(node, path: str) -> ModelParams:
    node = _require_mapping(node, path)
    _reject_unknown(node, path, _PARAM_KEYS)
    values = {k: _number(node, path, k) for k in _PARAM_KEYS}
    try:
        return ModelParams(**values)
    except InadmissibleParameterError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_sublattice(node, path: str) -> SublatticeParams | None:
    if node is None:
        return None
    node = _require_mapping(node, path)
    _reject_unknown(node, path, _SUBLATTICE_KEYS)
    return SublatticeParams(**{k: _number(node, path, k, default=0.0) for k in _SUBLATTICE_KEYS})


def _parse_initial(node, path: str):
    node = _require_mapping(node, path)
    _reject_unknown(node, path, ("reduced", "ml"))
    if "reduced" in node and "ml" in node:
        raise ConfigError(path, "give either 'reduced' or 'ml', not both")
    reduced = ml = None
    if "reduced" in node:
        sub = _require_mapping(node["reduced"], f"{path}.reduced")
        _reject_unknown(sub, f"{path}.reduced", ("u", "p_u", "v"))
        reduced = ReducedState(
            u=_number(sub, f"{path}.reduced", "u"),
            p_u=_number(sub, f"{path}.reduced", "p_u"),
            v=_number(sub, f"{path}.reduced", "v", default=0.0),
        )
    if "ml" in node:
        sub = _require_mapping(node["ml"], f"{path}.ml")
        _reject_unknown(sub, f"{path}.ml", ("m", "l"))
        ml = MLState(m=_vector3(sub, f"{path}.ml", "m"), l=_vector3(sub, f"{path}.ml", "l"))
    return reduced, ml


def _parse_integrator(node, path: str) -> IntegratorSpec:
    node = _require_mapping(node, path)
    _reject_unknown(node, path, _INTEGRATOR_KEYS)
    method = node.get("method", "symplectic-midpoint")
    if not isinstance(method, str):
        raise ConfigError(f"{path}.method", f"expected a string, got {method!r}")
    try:
        return IntegratorSpec(
            method=method,
            dt=_number(node, path, "dt", default=1e-3, positive=True),
            rel_tol=_number(node, path, "rel_tol", default=1e-10, positive=True),
            abs_tol=_number(node, path, "abs_tol", default=1e-12, positive=True),
            t_end=_number(node, path, "t_end", default=100.0, positive=True),
            sample_stride=_integer(node, path, "sample_stride", default=10, minimum=1),
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _parse_portrait(node, path: str) -> PortraitConfig:
    node = _require_mapping(node, path)
    _reject_unknown(node, path, _PORTRAIT_KEYS)
    arc = None
    if node.get("arc_budget") is not None:
        arc = _number(node, path, "arc_budget", positive=True)
    return PortraitConfig(
        grid_n=_integer(node, path, "grid_n", default=64, minimum=2),
        resolution=_integer(node, path, "resolution", default=201, minimum=2),
        levels=_integer(node, path, "levels", default=12, minimum=0),
        u_periods=_integer(node, path, "u_periods", default=1, minimum=1),
        separatrix_dt=_number(node, path, "separatrix_dt", default=1e-3, positive=True),
        separatrix_eps=_number(node, path, "separatrix_eps", default=1e-6, positive=True),
        match_radius=_number(node, path, "match_radius", default=1e-4, positive=True),
        arc_budget=arc,
    )


def _parse_outputs(node, path: str) -> OutputConfig:
    node = _require_mapping(node, path)
    _reject_unknown(node, path, _OUTPUT_KEYS)
    directory = node.get("directory", "out")
    if not isinstance(directory, str) or not directory:
        raise ConfigError(f"{path}.directory", "expected a non-empty string")
    formats = node.get("formats", ["csv", "svg"])
    if not isinstance(formats, list) or not formats:
        raise ConfigError(f"{path}.formats", "expected a non-empty list")
    for f in formats:
        if f not in SUPPORTED_FORMATS:
            raise ConfigError(
                f"{path}.formats", f"unsupported format {f!r}; supported: {SUPPORTED_FORMATS}"
            )
    return OutputConfig(
        directory=directory,
        formats=tuple(dict.fromkeys(formats)),
        write_lifted=_boolean(node, path, "write_lifted"),
    )


def _parse_check(node, path: str) -> CheckConfig:
    node = _require_mapping(node, path)
    _reject_unknown(node, path, _CHECK_KEYS)
    return CheckConfig(
        seed=_integer(node, path, "seed", default=20250809, minimum=0),
        break_sign_hook=_boolean(node, path, "break_sign_hook"),
    )


def parse_config(data, source: str = "<config>") -> RunConfig:
    """Validate a raw mapping (already YAML-parsed) into a RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError(source, "top level must be a mapping")
    _reject_unknown(
        data,
        "",
        ("params", "initial", "integrator", "portrait", "outputs", "sublattice_params", "check"),
    )
    if "params" not in data:
        raise ConfigError("params", "required section is missing")
    params = _parse_params(data["params"], "params")
    reduced, ml = _parse_initial(data.get("initial"), "initial")
    return RunConfig(
        params=params,
        integrator=_parse_integrator(data.get("integrator"), "integrator"),
        portrait=_parse_portrait(data.get("portrait"), "portrait"),
        outputs=_parse_outputs(data.get("outputs"), "outputs"),
        check=_parse_check(data.get("check"), "check"),
        initial_reduced=reduced,
        initial_ml=ml,
        sublattice=_parse_sublattice(data.get("sublattice_params"), "sublattice_params"),
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a YAML configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config file: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML: {exc}") from exc
    return parse_config(data, source=str(path))
