"""Run configuration files: ``key = value`` lines, ``#`` comments, unknown keys rejected."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def _ints(text):
    return [int(x) for x in text.replace(",", " ").split()]


@dataclass
class RunConfig:
    # profile
    profile: str = "ds-schwarzschild"
    n: int = 3
    B: float = 1.0
    a: float | None = None
    m: float = 1.0
    kappa: float = 0.0
    r_max: float = 10.0
    # grid
    grid_mode: str = "axisym"
    N: int = 128
    # surface
    surface: str = "slice"
    r0: float | None = None
    lambda0: float | None = None
    amplitude: float = 0.1
    modes: int = 3
    seed: int = 0
    ellipsoid_a: float = 1.0
    ellipsoid_c: float = 2.0
    surface_csv: str | None = None
    # tasks
    p: list = field(default_factory=lambda: [1])
    amplitudes: list = field(default_factory=lambda: [0.05, 0.1, 0.2])
    tol: float | None = None
    samples: int = 512
    label: str = ""
    out: str = "."


_CASTS = {
    "profile": str, "n": int, "B": float, "a": float, "m": float, "kappa": float,
    "r_max": float, "grid_mode": str, "N": int, "surface": str, "r0": float,
    "lambda0": float, "amplitude": float, "modes": int, "seed": int,
    "ellipsoid_a": float, "ellipsoid_c": float, "surface_csv": str, "p": _ints,
    "amplitudes": _floats, "tol": float, "samples": int, "label": str, "out": str,
}

_CHOICES = {
    "profile": ("euclidean", "cosh", "ds-schwarzschild"),
    "grid_mode": ("axisym", "full-s2"),
    "surface": ("slice", "perturbed", "ellipsoid", "csv"),
}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    known = {f.name for f in fields(RunConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        set_value(cfg, key, value)
    return cfg


def set_value(cfg: RunConfig, key: str, value) -> None:
    try:
        val = _CASTS[key](value) if isinstance(value, str) else value
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    if key in _CHOICES and val not in _CHOICES[key]:
        raise ConfigError(f"{key} must be one of {_CHOICES[key]}, got {val!r}")
    setattr(cfg, key, val)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
