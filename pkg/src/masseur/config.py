"""Run configuration: INI-style ``[section]`` blocks of ``key = value`` lines.

Unknown sections and keys are rejected so typos fail loudly, and every
parameter invariant is checked at load time.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

from .admittance import AdmittanceParams
from .analysis import DEFAULT_TOLERANCES, STAT_FIELDS, Tolerance
from .contact import ParameterError, SkinModel
from .core_types import PathLike
from .sim import SimConfig
from .techniques import TECHNIQUES, TechniqueSpec

# technique cycles simulated when [sim] duration_s is absent
DEFAULT_CYCLES = {"beat": 6, "press": 6, "push": 6}
DEFAULT_VIBRATE_DURATION = 10.0

# config key -> dataclass field, where they differ
_RENAMES = {"admittance": {"period_s": "T"}}

_SIM_KEYS = ("technique", "duration_s", "seed")
_ANALYSIS_KEYS = ("window",) + tuple(f"tol_{name}" for name in STAT_FIELDS)

RawConfig = Dict[str, Dict[str, str]]


class ConfigError(ValueError):
    pass


def _section_keys() -> Dict[str, Tuple[str, ...]]:
    keys = {"sim": _SIM_KEYS, "analysis": _ANALYSIS_KEYS}
    keys["admittance"] = ("m", "b", "sigma", "period_s")
    keys["skin"] = tuple(f.name for f in dataclasses.fields(SkinModel))
    for name, cls in TECHNIQUES.items():
        keys[name] = tuple(f.name for f in dataclasses.fields(cls))
    return keys


SECTION_KEYS = _section_keys()


def parse_text(text: str, source: str = "<config>") -> RawConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                       default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc.message if hasattr(exc, 'message') else exc}") from None
    raw: RawConfig = {}
    for section in parser.sections():
        if section not in SECTION_KEYS:
            raise ConfigError(f"{section}: unknown section (expected one of {', '.join(SECTION_KEYS)})")
        raw[section] = {}
        for key, value in parser.items(section):
            if key not in SECTION_KEYS[section]:
                raise ConfigError(f"{section}.{key}: unknown key")
            raw[section][key] = value.strip()
    return raw


def read_raw(path: PathLike) -> RawConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_text(text, str(path))


def set_value(raw: RawConfig, dotted: str, value: str) -> RawConfig:
    """Copy of ``raw`` with ``section.key`` replaced."""
    section, _, key = dotted.partition(".")
    if section not in SECTION_KEYS or key not in SECTION_KEYS[section]:
        raise ConfigError(f"{dotted}: unknown parameter")
    out = {s: dict(kv) for s, kv in raw.items()}
    out.setdefault(section, {})[key] = value
    return out


def _unquote(v: str) -> str:
    v = v.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'":
        return v[1:-1]
    return v


def _convert(section: str, key: str, value: str, ftype):
    v = _unquote(value)
    try:
        if ftype in (bool, "bool"):
            lowered = v.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if ftype in (int, "int"):
            f = float(v)
            if f != int(f):
                raise ValueError
            return int(f)
        return float(v)
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot parse {value!r}") from None


def _build(section: str, cls, values: Dict[str, str]):
    renames = _RENAMES.get(section, {})
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in values.items():
        name = renames.get(key, key)
        kwargs[name] = _convert(section, key, value, types[name])
    try:
        return cls(**kwargs)
    except ParameterError as exc:
        key = {v: k for k, v in renames.items()}.get(exc.field, exc.field)
        got = f" (got {exc.value!r})" if exc.value is not None else ""
        raise ConfigError(f"{section}.{key} {exc.constraint} violated{got}") from None


def _parse_window(text: str) -> Tuple[Optional[float], Optional[float]]:
    t0, sep, t1 = _unquote(text).partition(":")
    if not sep:
        raise ValueError("expected t0:t1")
    lo = float(t0) if t0.strip() else None
    hi = float(t1) if t1.strip() else None
    if lo is not None and hi is not None and hi <= lo:
        raise ValueError("t1 must exceed t0")
    return lo, hi


@dataclass(frozen=True)
class RunConfig:
    technique: str
    duration: float
    seed: int
    admittance: AdmittanceParams
    skin: SkinModel
    params: Dict[str, object]
    window: Optional[Tuple[Optional[float], Optional[float]]] = None
    tolerances: Dict[str, Optional[Tolerance]] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @property
    def technique_params(self):
        return self.params[self.technique]

    def sim_config(self) -> SimConfig:
        try:
            return SimConfig(TechniqueSpec(self.technique_params, self.duration),
                             self.admittance, self.skin, self.seed)
        except ParameterError as exc:
            got = f" (got {exc.value!r})" if exc.value is not None else ""
            raise ConfigError(f"sim.duration_s {exc.constraint} violated{got}") from None


def build(raw: RawConfig) -> RunConfig:
    sim = raw.get("sim", {})
    if "technique" not in sim:
        raise ConfigError("sim.technique: missing (beat, press, push or vibrate)")
    technique = _unquote(sim["technique"]).lower()
    if technique not in TECHNIQUES:
        raise ConfigError(f"sim.technique: unknown technique {technique!r}")
    admittance = _build("admittance", AdmittanceParams, raw.get("admittance", {}))
    skin = _build("skin", SkinModel, raw.get("skin", {}))
    params = {name: _build(name, cls, raw.get(name, {})) for name, cls in TECHNIQUES.items()}

    if "duration_s" in sim:
        duration = _convert("sim", "duration_s", sim["duration_s"], float)
    elif technique == "vibrate":
        duration = DEFAULT_VIBRATE_DURATION
    else:
        duration = DEFAULT_CYCLES[technique] * params[technique].cycle
    seed = _convert("sim", "seed", sim["seed"], int) if "seed" in sim else 0

    analysis = raw.get("analysis", {})
    window = None
    if "window" in analysis:
        try:
            window = _parse_window(analysis["window"])
        except ValueError as exc:
            raise ConfigError(f"analysis.window: {exc}") from None
    tolerances = dict(DEFAULT_TOLERANCES)
    for name in STAT_FIELDS:
        key = f"tol_{name}"
        if key in analysis:
            try:
                tolerances[name] = Tolerance.parse(analysis[key])
            except ValueError as exc:
                raise ConfigError(f"analysis.{key}: {exc}") from None

    cfg = RunConfig(technique, duration, seed, admittance, skin, params, window, tolerances)
    cfg.sim_config()  # enforce cross-module invariants now
    return cfg


def load_config(path: PathLike) -> RunConfig:
    return build(read_raw(path))


def default_config_text(technique: str) -> str:
    """A complete config with every default spelled out."""
    if technique not in TECHNIQUES:
        raise ConfigError(f"unknown technique {technique!r}")
    lines = ["[sim]", f'technique = "{technique}"', ""]
    adm = AdmittanceParams()
    lines += ["[admittance]", f"m = {adm.m!r}", f"b = {adm.b!r}", f"sigma = {adm.sigma!r}",
              f"period_s = {adm.T!r}", ""]
    skin = SkinModel()
    lines += ["[skin]"] + [f"{f.name} = {getattr(skin, f.name)!r}" for f in dataclasses.fields(skin)] + [""]
    p = TECHNIQUES[technique]()
    lines += [f"[{technique}]"]
    for f in dataclasses.fields(p):
        v = getattr(p, f.name)
        lines.append(f"{f.name} = {str(v).lower() if isinstance(v, bool) else repr(v)}")
    return "\n".join(lines) + "\n"
