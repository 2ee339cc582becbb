"""TOML scenario configuration with validation and environment overrides.

Layout (schema_version 1)::

    schema_version = 1
    output = "out"

    [field]
    name = "rigid_swirl_pulsatile"
    params = { omega = 1.0, g = "1 + t**2", r_max = 2.0 }

    [tolerances]
    rel_tol = 1e-10
    abs_tol = 1e-12

    [trace]        # also [fields], [atlas], [frames], [identities], [scan]
    seeds = [[1.0, 0.0, 0.0]]
    t_range = [0.0, 2.0]

Any key can be overridden from the environment: ``SWIRLFRAME_TRACE__T_RANGE="[0, 4]"``
sets ``trace.t_range``.  Values are parsed as TOML literals and fall back to
plain strings.
"""

from __future__ import annotations

import dataclasses
import inspect
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import tomli

from . import fields as F
from .errors import ConfigError
from .identities import ScanParams
from .womersley import WomersleyParams, womersley_field

SCHEMA_VERSION = 1
ENV_PREFIX = "SWIRLFRAME_"


def _womersley(R=1.0, nu=1.0, N=1.0, p_o=1.0, ell=1.0, p_s=1.0, include_steady=False):
    return womersley_field(WomersleyParams(R, nu, N, p_o, ell, p_s), include_steady)


CATALOG: dict[str, Callable] = {
    "poiseuille": F.poiseuille_field,
    "womersley": _womersley,
    "uniform": F.uniform_field,
    "rigid_swirl_pulsatile": F.rigid_swirl_pulsatile_field,
    "rigid_rotation_axial": F.rigid_rotation_axial_field,
    "radial_expansion": F.radial_expansion_field,
    "nozzle": F.nozzle_field,
    "swirl_vortex_nozzle": F.swirl_vortex_nozzle_field,
    "modulated_nozzle": F.modulated_nozzle_field,
    "swirl_nozzle": F.swirl_nozzle_field,
    "sheared_swirl": F.sheared_swirl_field,
    "strained_vortex": F.strained_vortex_field,
    "profiled_nozzle": F.profiled_nozzle_field,
}


@dataclass
class FieldSpec:
    name: str = ""
    params: dict = field(default_factory=dict)

    def build(self) -> F.AxisymmetricField:
        if self.name not in CATALOG:
            raise ConfigError(f"unknown field {self.name!r}; choose from {sorted(CATALOG)}")
        ctor = CATALOG[self.name]
        sig = inspect.signature(ctor)
        required = [p.name for p in sig.parameters.values()
                    if p.default is inspect.Parameter.empty and p.kind is not p.VAR_KEYWORD]
        missing = [k for k in required if k not in self.params]
        if missing:
            raise ConfigError(f"field {self.name!r} is missing parameters: {', '.join(missing)}")
        unknown = [k for k in self.params if k not in sig.parameters]
        if unknown:
            raise ConfigError(f"field {self.name!r} does not take parameters: {', '.join(unknown)}")
        try:
            return ctor(**self.params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field {self.name!r}: {exc}") from exc


@dataclass
class Tolerances:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    certify_tol: float = 1e-8
    identity_tol: float = 1e-4


@dataclass
class FieldsSection:
    r_values: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    z_values: list = field(default_factory=lambda: [-1.0, 0.0, 1.0])
    t_values: list = field(default_factory=lambda: [0.0, 0.5, 1.0])


@dataclass
class TraceSection:
    seeds: list = field(default_factory=lambda: [[0.5, 0.0, 0.0]])
    t_range: list = field(default_factory=lambda: [0.0, 1.0])
    samples: int = 101


@dataclass
class AtlasSection:
    t: float = 0.0
    r0_grid: list = field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8])
    z_grid: list = field(default_factory=lambda: [-2.0, -1.0, 0.0, 1.0, 2.0])
    z_in: float = math.nan
    dt: float = math.nan
    time_rates: bool = True


@dataclass
class FramesSection:
    seed: list = field(default_factory=lambda: [1.0, 0.0, 0.0])
    t_range: list = field(default_factory=lambda: [0.0, 1.0])
    samples: int = 51


@dataclass
class IdentitiesSection:
    seed: list = field(default_factory=lambda: [1.0, 0.0, 0.0])
    t_range: list = field(default_factory=lambda: [0.0, 1.0])
    probes: list = field(default_factory=lambda: [0.5])
    fd_steps: list = field(default_factory=list)


@dataclass
class ScanSection:
    family: str = "swirl_nozzle"
    eps: float = 0.5
    beta: float = 2.0
    delta: float = 0.1
    g0_values: list = field(default_factory=lambda: [1.0])
    g1_values: list = field(default_factory=lambda: [20.0, 40.0, 80.0, 160.0, 320.0])
    g2_values: list = field(default_factory=list)
    g2_factors: list = field(default_factory=lambda: [2.0, 5.0, 10.0])
    seeds: list = field(default_factory=lambda: [[0.8, 0.0]])
    swirl: float = 1.0
    swirl_band: list = field(default_factory=lambda: [0.5, 2.0])
    gain: float = 1e-3
    response: float = 1e-3
    contraction: float = 0.25
    z_in: float = -20.0

    def params(self, tol: Tolerances) -> ScanParams:
        tup = lambda v: tuple(tuple(x) if isinstance(x, list) else x for x in v)
        return ScanParams(
            eps=self.eps, beta=self.beta, delta=self.delta, g0_values=tup(self.g0_values),
            g1_values=tup(self.g1_values), g2_values=tup(self.g2_values), g2_factors=tup(self.g2_factors),
            seeds=tup(self.seeds), swirl=self.swirl, swirl_band=tup(self.swirl_band), gain=self.gain,
            response=self.response, contraction=self.contraction, z_in=self.z_in,
            rel_tol=tol.rel_tol, abs_tol=tol.abs_tol,
        )


SECTIONS = {
    "fields": FieldsSection,
    "trace": TraceSection,
    "atlas": AtlasSection,
    "frames": FramesSection,
    "identities": IdentitiesSection,
    "scan": ScanSection,
}


@dataclass
class ScenarioConfig:
    schema_version: int = SCHEMA_VERSION
    output: str = "out"
    field: FieldSpec = dataclasses.field(default_factory=FieldSpec)
    tolerances: Tolerances = dataclasses.field(default_factory=Tolerances)
    fields: FieldsSection = dataclasses.field(default_factory=FieldsSection)
    trace: TraceSection = dataclasses.field(default_factory=TraceSection)
    atlas: AtlasSection = dataclasses.field(default_factory=AtlasSection)
    frames: FramesSection = dataclasses.field(default_factory=FramesSection)
    identities: IdentitiesSection = dataclasses.field(default_factory=IdentitiesSection)
    scan: ScanSection = dataclasses.field(default_factory=ScanSection)

    def echo(self) -> dict:
        """Plain-dict form that reproduces the run when fed back to ``from_dict``."""
        return dataclasses.asdict(self)


def _coerce(value, default, where: str):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if value is None and math.isnan(default):
            return math.nan  # "unset" as echoed into JSON
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, list) and not isinstance(value, list):
        raise ConfigError(f"{where} must be an array, got {value!r}")
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(f"{where} must be a string, got {value!r}")
    return value


def _section(cls, data: Any, where: str):
    if not isinstance(data, Mapping):
        raise ConfigError(f"[{where}] must be a table")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"unknown keys in [{where}]: {', '.join(unknown)}")
    defaults = cls()
    kwargs = {k: _coerce(v, getattr(defaults, k), f"{where}.{k}") for k, v in data.items()}
    return cls(**kwargs)


def from_dict(data: Mapping) -> ScenarioConfig:
    top = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(data) - top)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {', '.join(unknown)}")
    if "schema_version" not in data:
        raise ConfigError("schema_version is required")
    if data["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {data['schema_version']!r} (expected {SCHEMA_VERSION})")
    cfg = ScenarioConfig(schema_version=SCHEMA_VERSION, output=str(data.get("output", "out")))
    fs = data.get("field", {})
    if not isinstance(fs, Mapping):
        raise ConfigError("[field] must be a table")
    extra = sorted(set(fs) - {"name", "params"})
    if extra:
        raise ConfigError(f"unknown keys in [field]: {', '.join(extra)}")
    cfg.field = FieldSpec(str(fs.get("name", "")), dict(fs.get("params", {})))
    cfg.tolerances = _section(Tolerances, data.get("tolerances", {}), "tolerances")
    for name, value in dataclasses.asdict(cfg.tolerances).items():
        if not value > 0:
            raise ConfigError(f"tolerances.{name} must be positive, got {value!r}")
    for name, cls in SECTIONS.items():
        setattr(cfg, name, _section(cls, data.get(name, {}), name))
    return cfg


def _parse_env_value(text: str):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


def apply_env(data: dict, environ: Mapping[str, str] | None = None) -> dict:
    """Overlay ``SWIRLFRAME_A__B__C=value`` entries as data['a']['b']['c'] = value."""
    environ = os.environ if environ is None else environ
    for key in sorted(environ):
        if not key.startswith(ENV_PREFIX):
            continue
        path = [p.lower() for p in key[len(ENV_PREFIX):].split("__") if p]
        if not path:
            continue
        node = data
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"environment override {key} descends into a non-table value")
        node[path[-1]] = _parse_env_value(environ[key])
    return data


def load_config(path: str | os.PathLike | None, environ: Mapping[str, str] | None = None) -> ScenarioConfig:
    data: dict = {}
    if path is not None:
        try:
            data = tomli.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return from_dict(apply_env(data, environ))
