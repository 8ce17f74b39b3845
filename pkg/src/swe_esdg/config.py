"""INI run configuration with a canonical text form.

Example::

    [scenario]
    name = dam_break_box

    [solver]
    n = 4
    g = 1.0
    flux = es

    [mesh]
    nx = 40
    amplitude = 0.0

    [time]
    t_end = 1.0
    cfl = 0.25
    every = 10

    [output]
    dir = out
    fields = true

Keys left out take the scenario's defaults. Exactly one of ``dt`` and
``cfl`` ends up set.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, fields, replace

from .dg import FLUX_MODES
from .scenarios import SCENARIO_DEFAULTS, UnknownScenarioError


class ConfigError(ValueError):
    pass


_SECTIONS = {
    "scenario": ("name",),
    "solver": ("n", "g", "flux"),
    "mesh": ("nx", "amplitude"),
    "time": ("t_end", "dt", "cfl", "every"),
    "output": ("dir", "fields"),
}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    n: int
    g: float
    flux: str
    nx: int
    amplitude: float
    t_end: float
    dt: float | None
    cfl: float | None
    every: int = 1
    dir: str = "out"
    fields: bool = False

    def __post_init__(self):
        if self.flux not in FLUX_MODES:
            raise ConfigError(f"flux must be one of {FLUX_MODES}, got {self.flux!r}")
        if self.n < 1:
            raise ConfigError(f"polynomial order must be >= 1, got {self.n}")
        if (self.dt is None) == (self.cfl is None):
            raise ConfigError("set exactly one of dt and cfl")
        for key in ("dt", "cfl"):
            val = getattr(self, key)
            if val is not None and not val > 0:
                raise ConfigError(f"{key} must be positive, got {val}")
        if not self.t_end >= 0:
            raise ConfigError(f"t_end must be non-negative, got {self.t_end}")
        if self.every < 1:
            raise ConfigError("every must be >= 1")

    @classmethod
    def defaults(cls, name: str) -> "ScenarioConfig":
        if name not in SCENARIO_DEFAULTS:
            raise UnknownScenarioError(f"unknown scenario {name!r}")
        d = SCENARIO_DEFAULTS[name]
        return cls(name=name, n=d["N"], g=d["g"], flux=d["flux"], nx=d["nx"], amplitude=d["amplitude"],
                   t_end=d["t_end"], dt=d["dt"], cfl=d["cfl"])

    def override(self, **kw) -> "ScenarioConfig":
        """Replace the given non-None values; setting dt clears cfl and vice versa."""
        kw = {k: v for k, v in kw.items() if v is not None}
        if "dt" in kw:
            kw.setdefault("cfl", None)
        if "cfl" in kw and "dt" not in kw:
            kw["dt"] = None
        return replace(self, **kw)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        values = asdict(self)
        for section, keys in _SECTIONS.items():
            cp[section] = {k: _dump(values[k]) for k in keys if values[k] is not None}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _dump(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _parse_value(key: str, raw: str, cp, section):
    kind = _TYPES[key]
    try:
        if kind == "bool":
            return cp.getboolean(section, key)
        if kind == "int":
            return int(raw)
        if kind in ("float", "float | None"):
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from None


def parse_config(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    known = {k: s for s, keys in _SECTIONS.items() for k in keys}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if known.get(key) != section:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    if not cp.has_option("scenario", "name"):
        raise ConfigError("missing [scenario] name")
    base = ScenarioConfig.defaults(cp.get("scenario", "name").strip())
    values = {}
    for section, keys in _SECTIONS.items():
        for key in keys:
            if cp.has_option(section, key):
                values[key] = _parse_value(key, cp.get(section, key), cp, section)
    values.pop("name")
    try:
        return base.override(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
