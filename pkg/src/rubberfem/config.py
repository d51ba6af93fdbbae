"""Run configuration: a flat ``key = value`` file.

One assignment per line, ``#`` starts a comment.  Values are numbers, bare
strings, or function specs such as ``constant(1.0)``, ``linear(0.1)`` or
``table(0:1.0, 5:2.0)``.  Unknown keys are errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional

from .model import (Clamped, DimensionlessParameters, PhysicalParameters, nondimensionalize,
                    parse_coefficient)

MODES = ("simulate", "convergence-space", "convergence-time", "check-invariants")


class ConfigError(ValueError):
    pass


def _number(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("not finite")
    return x


def _count(v: str) -> int:
    x = float(v)
    if x != int(x):
        raise ValueError("not an integer")
    return int(x)


def _counts(v: str) -> tuple[int, ...]:
    out = tuple(_count(t) for t in v.replace(",", " ").split())
    if not out:
        raise ValueError("empty list")
    return out


def _string(v: str) -> str:
    return v


# key -> (parser, sign constraint: "positive", "nonnegative" or None)
_KEYS: dict[str, tuple[Callable[[str], Any], bool]] = {
    "mode": (_string, None),
    "D": (_number, "positive"), "beta": (_number, "positive"), "H": (_number, "positive"),
    "a0": (_number, "positive"), "s0": (_number, "positive"), "m0": (_number, "positive"),
    "L": (_number, "positive"), "Tf": (_number, "positive"),
    "b": (parse_coefficient, None), "sigma": (parse_coefficient, None),
    "m_init": (parse_coefficient, None),
    "sigma_plateau": (_number, "positive"),
    # direct overrides of the dimensionless groups; zero switches a coupling off
    "Bi": (_number, "nonnegative"), "A0": (_number, "nonnegative"),
    "n_nodes": (_count, "positive"), "dt": (_number, "positive"),
    "record_every": (_count, "positive"),
    "output_dir": (_string, None),
    "space_dt": (_number, "positive"), "space_nodes": (_counts, "positive"),
    "space_reference_nodes": (_count, "positive"),
    "time_nodes": (_count, "positive"), "time_dt": (_number, "positive"),
    "time_levels": (_count, "positive"),
    "energy_nodes": (_counts, "positive"), "energy_dt": (_number, "positive"),
}

_PHYSICAL = ("D", "beta", "H", "a0", "s0", "m0", "Tf", "b", "sigma")
_MODE_KEYS = {
    "simulate": ("n_nodes", "dt"),
    "check-invariants": ("n_nodes", "dt"),
    "convergence-space": (),
    "convergence-time": (),
}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    D: float
    beta: float
    H: float
    a0: float
    s0: float
    m0: float
    Tf: float
    b: Callable
    sigma: Callable
    L: float = 1.0
    m_init: Optional[Callable] = None
    sigma_plateau: Optional[float] = None
    Bi: Optional[float] = None
    A0: Optional[float] = None
    n_nodes: Optional[int] = None
    dt: Optional[float] = None
    record_every: int = 1
    output_dir: str = "out"
    space_dt: float = 1e-4
    space_nodes: tuple[int, ...] = (20, 40, 80, 160, 320, 640)
    space_reference_nodes: int = 1280
    time_nodes: int = 320
    time_dt: float = 1e-3
    time_levels: int = 6
    energy_nodes: tuple[int, ...] = (40, 80, 160, 320)
    energy_dt: float = 1e-3
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def physical(self) -> PhysicalParameters:
        sigma = self.sigma if self.sigma_plateau is None else Clamped(self.sigma, self.sigma_plateau)
        return PhysicalParameters(D=self.D, beta=self.beta, H=self.H, a0=self.a0, s0=self.s0,
                                  m0=self.m0, L=self.L, Tf=self.Tf, b_fn=self.b, sigma_fn=sigma)

    def dimensionless(self) -> DimensionlessParameters:
        d = nondimensionalize(self.physical(), self.m_init)
        if self.Bi is not None:
            d = replace(d, Bi=self.Bi)
        if self.A0 is not None:
            d = replace(d, A0=self.A0)
        return d


def parse_config(text: str, mode: Optional[str] = None) -> RunConfig:
    """Parse a configuration document; ``mode`` overrides the file's ``mode`` key."""
    values: dict[str, Any] = {}
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, val = body.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key or not val:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        parser, sign = _KEYS[key]
        try:
            parsed = parser(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        nums = parsed if isinstance(parsed, tuple) else (parsed,)
        if sign == "positive" and not all(x > 0 for x in nums):
            raise ConfigError(f"line {lineno}: {key} must be positive, got {val!r}")
        if sign == "nonnegative" and not all(x >= 0 for x in nums):
            raise ConfigError(f"line {lineno}: {key} must be nonnegative, got {val!r}")
        values[key] = parsed
        raw[key] = val

    if mode is not None:
        values["mode"] = mode
    chosen = values.get("mode")
    missing = [] if chosen else ["mode"]
    if chosen is not None and chosen not in MODES:
        raise ConfigError(f"unknown mode {chosen!r}; expected one of {', '.join(MODES)}")
    missing += [k for k in _PHYSICAL if k not in values]
    if chosen is not None:
        missing += [k for k in _MODE_KEYS[chosen] if k not in values]
    if missing:
        raise ConfigError("missing required key(s): " + ", ".join(missing))
    if values["s0"] >= values.get("L", 1.0):
        raise ConfigError(f"s0={values['s0']!r} must be below L={values.get('L', 1.0)!r}")
    for key in ("n_nodes", "time_nodes", "space_reference_nodes"):
        if key in values and values[key] < 2:
            raise ConfigError(f"{key} must be at least 2")
    if "space_nodes" in values and min(values["space_nodes"]) < 2:
        raise ConfigError("space_nodes entries must be at least 2")
    if "time_levels" in values and values["time_levels"] < 2:
        raise ConfigError("time_levels must be at least 2")
    return RunConfig(source=raw, **values)


def load_config(path: str | Path, mode: Optional[str] = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_config(text, mode)


def shipped_config(name: str = "rubber_exposure.cfg") -> Path:
    return Path(__file__).with_name("configs") / name
