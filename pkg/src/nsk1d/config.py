"""Run configuration: dataclasses plus the ``[section] key = value`` text format.

Example::

    [grid]
    n = 256

    [exponents]
    alpha = 1
    beta = -1
    epsilon = 0.01

    [initial]
    rho0 = 2 + 0.5*sin(1)
    u0 = 0.1*sin(1)

    [integrator]
    t_end = 0.05
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .coefficients import CoefficientLaw, ExponentParams, derive_exponents
from .errors import ConfigurationError
from .grid import Grid, make_grid

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TERM = re.compile(
    rf"\s*(?P<sign>[+-])?\s*(?:(?P<amp>{_NUM})\s*(?:\*\s*)?)?(?:(?P<fn>sin|cos)\s*\(\s*(?P<k>\d+)\s*\))?\s*"
)


@dataclass(frozen=True)
class FieldSpec:
    """``constant + sum amp * {sin,cos}(2 pi k x / L)``."""

    constant: float = 0.0
    modes: tuple = ()

    def realize(self, grid: Grid) -> np.ndarray:
        x = grid.x
        out = np.full(grid.n, float(self.constant))
        for kind, k, amp in self.modes:
            arg = 2.0 * np.pi * k * x / grid.length
            out += amp * (np.sin(arg) if kind == "sin" else np.cos(arg))
        return out

    def to_text(self) -> str:
        parts = [repr(float(self.constant))]
        for kind, k, amp in self.modes:
            parts.append(f"{'-' if amp < 0 else '+'} {abs(amp)!r}*{kind}({k})")
        return " ".join(parts)


PRESETS = {
    "reference": (FieldSpec(2.0, (("sin", 1, 0.5),)), FieldSpec(0.0, (("sin", 1, 0.1),))),
    "equilibrium": (FieldSpec(1.0), FieldSpec(0.0)),
    "near_vacuum": (FieldSpec(1.0, (("sin", 1, 0.95),)), FieldSpec(0.0)),
}


def parse_field(text: str) -> FieldSpec:
    """Parse ``2 + 0.5*sin(1) - 0.1*cos(3)``; mode numbers count periods on the torus."""
    constant = 0.0
    modes = []
    pos, first = 0, True
    text = text.strip()
    if not text:
        raise ConfigurationError("empty field expression")
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m.end() == pos or (m.group("amp") is None and m.group("fn") is None) or (not first and not m.group("sign")):
            raise ConfigurationError(f"cannot parse field expression {text!r} at column {pos + 1}")
        sign = -1.0 if m.group("sign") == "-" else 1.0
        amp = sign * (float(m.group("amp")) if m.group("amp") is not None else 1.0)
        if m.group("fn"):
            modes.append((m.group("fn"), int(m.group("k")), amp))
        else:
            constant += amp
        pos, first = m.end(), False
    return FieldSpec(constant, tuple(modes))


@dataclass(frozen=True)
class InitialDataSpec:
    rho0: FieldSpec = PRESETS["reference"][0]
    u0: FieldSpec = PRESETS["reference"][1]
    floor: float = 1e-3
    preset: str | None = None

    def realize(self, grid: Grid):
        rho = self.rho0.realize(grid)
        u = self.u0.realize(grid)
        if not np.min(rho) >= self.floor:
            raise ConfigurationError(
                f"initial density min {np.min(rho):.6g} is below the floor {self.floor:g} (requires rho0 >= floor > 0)"
            )
        return rho, u


@dataclass(frozen=True)
class IntegratorConfig:
    cfl: float = 0.25
    t_end: float = 0.05
    sample_every: int = 10
    dt: float | None = None
    max_steps: int = 2_000_000


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    precision: int = 17


@dataclass(frozen=True)
class RunConfig:
    n: int = 256
    length: float = 1.0
    exponents: ExponentParams = field(default_factory=lambda: ExponentParams(1.0, -1.0, 2.0, 0.01))
    initial: InitialDataSpec = field(default_factory=InitialDataSpec)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    @property
    def grid(self) -> Grid:
        return make_grid(self.n, self.length)

    @property
    def law(self) -> CoefficientLaw:
        return CoefficientLaw(self.exponents)

    def with_(self, **changes) -> "RunConfig":
        """Copy with top-level or dotted (``integrator.cfl``) fields replaced."""
        out = self
        for key, value in changes.items():
            if "." in key:
                section, name = key.split(".", 1)
                sub = getattr(out, section)
                if isinstance(sub, ExponentParams):
                    vals = {f: getattr(sub, f) for f in ("alpha", "beta", "gamma", "epsilon")}
                    vals[name] = value
                    sub = derive_exponents(**vals)
                else:
                    sub = replace(sub, **{name: value})
                out = replace(out, **{section: sub})
            else:
                out = replace(out, **{key: value})
        return out


DEFAULTS = {
    "grid": {"n": "256", "length": "1"},
    "exponents": {"alpha": None, "beta": None, "gamma": "2", "epsilon": "0.01"},
    "initial": {"rho0": "reference", "u0": "reference", "floor": "1e-3"},
    "integrator": {"cfl": "0.25", "t_end": "0.05", "sample_every": "10", "dt": None, "max_steps": "2000000"},
    "output": {"directory": "out", "precision": "17"},
    "run": {"seed": "0"},
}
SWEEP_SECTION = "sweep"


def _lineno(text, section, key):
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and "=" in s and s.split("=", 1)[0].strip() == key:
            return i
    return None


def _number(text, section, key, value, kind=float):
    try:
        return kind(value)
    except ValueError:
        if kind is int:
            try:
                f = float(value)
            except ValueError:
                f = None
            if f is not None and f.is_integer():
                return int(f)
        line = _lineno(text, section, key)
        where = f" (line {line})" if line else ""
        raise ConfigurationError(f"malformed number for {section}.{key}{where}: {value!r}") from None


def _field_or_preset(value, which):
    if value in PRESETS:
        return PRESETS[value][0 if which == "rho0" else 1], value
    return parse_field(value), None


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from None

    values = {}
    for section in parser.sections():
        if section == SWEEP_SECTION:
            continue
        if section not in DEFAULTS:
            raise ConfigurationError(f"unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in DEFAULTS[section]:
                raise ConfigurationError(f"unknown key {section}.{key}")
            values[(section, key)] = value.strip()

    def get(section, key):
        return values.get((section, key), DEFAULTS[section][key])

    for key in ("alpha", "beta"):
        if get("exponents", key) is None:
            raise ConfigurationError(f"missing required key exponents.{key}")

    num = lambda s, k, kind=float: _number(text, s, k, get(s, k), kind)  # noqa: E731
    exps = derive_exponents(num("exponents", "alpha"), num("exponents", "beta"),
                            num("exponents", "gamma"), num("exponents", "epsilon"))
    rho0, preset = _field_or_preset(get("initial", "rho0"), "rho0")
    u0, _ = _field_or_preset(get("initial", "u0"), "u0")
    dt = get("integrator", "dt")
    cfg = RunConfig(
        n=num("grid", "n", int),
        length=num("grid", "length"),
        exponents=exps,
        initial=InitialDataSpec(rho0, u0, num("initial", "floor"), preset),
        integrator=IntegratorConfig(
            cfl=num("integrator", "cfl"),
            t_end=num("integrator", "t_end"),
            sample_every=num("integrator", "sample_every", int),
            dt=None if dt in (None, "", "auto") else _number(text, "integrator", "dt", dt),
            max_steps=num("integrator", "max_steps", int),
        ),
        output=OutputConfig(get("output", "directory"), num("output", "precision", int)),
        seed=num("run", "seed", int),
    )
    validate(cfg)
    return cfg


def parse_sweep(text: str) -> dict:
    """``[sweep]`` entries ``exponents.epsilon = 0.1, 0.05`` as {dotted key: [values]}."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string(text)
    if not parser.has_section(SWEEP_SECTION):
        return {}
    out = {}
    for key, value in parser.items(SWEEP_SECTION):
        if "." not in key:
            raise ConfigurationError(f"sweep keys must be section.key, got {key!r}")
        section, name = key.split(".", 1)
        if section not in DEFAULTS or name not in DEFAULTS[section]:
            raise ConfigurationError(f"unknown sweep key {key}")
        kind = int if name in ("n", "sample_every", "max_steps", "seed") else float
        out[key] = [_number(text, SWEEP_SECTION, key, v.strip(), kind) for v in value.split(",")]
    return out


def validate(cfg: RunConfig) -> None:
    make_grid(cfg.n, cfg.length)
    it = cfg.integrator
    if not 0.0 < it.cfl <= 1.0:
        raise ConfigurationError(f"requires 0 < cfl <= 1, got {it.cfl}")
    if not it.t_end > 0.0:
        raise ConfigurationError(f"requires t_end > 0, got {it.t_end}")
    if it.sample_every < 1:
        raise ConfigurationError("requires sample_every >= 1")
    if it.dt is not None and not it.dt > 0.0:
        raise ConfigurationError("requires dt > 0")
    if not cfg.initial.floor > 0.0:
        raise ConfigurationError("requires floor > 0")
    if not 1 <= cfg.output.precision <= 17:
        raise ConfigurationError("requires 1 <= precision <= 17")
    cfg.initial.realize(cfg.grid)


def to_text(cfg: RunConfig) -> str:
    """Fully resolved config in the same format ``parse_config`` reads."""
    e, it, init = cfg.exponents, cfg.integrator, cfg.initial
    lines = [
        "[grid]", f"n = {cfg.n}", f"length = {cfg.length!r}", "",
        "[exponents]", f"alpha = {e.alpha!r}", f"beta = {e.beta!r}", f"gamma = {e.gamma!r}",
        f"epsilon = {e.epsilon!r}", "",
        "[initial]", f"rho0 = {init.rho0.to_text()}", f"u0 = {init.u0.to_text()}", f"floor = {init.floor!r}", "",
        "[integrator]", f"cfl = {it.cfl!r}", f"t_end = {it.t_end!r}", f"sample_every = {it.sample_every}",
        f"dt = {'auto' if it.dt is None else repr(it.dt)}", f"max_steps = {it.max_steps}", "",
        "[output]", f"directory = {cfg.output.directory}", f"precision = {cfg.output.precision}", "",
        "[run]", f"seed = {cfg.seed}", "",
    ]
    return "\n".join(lines)
