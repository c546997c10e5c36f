"""Experiment configuration in a plain ``key = value`` INI format."""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, fields, replace
from typing import Optional

from .errors import ConfigError, ConicError
from .kernels import AdditionSpec

__all__ = ["ExperimentConfig", "load_config"]

# (section, key, type) for every field, in file order
_LAYOUT = [
    ("domain", "kind", str),
    ("domain", "d", int),
    ("domain", "gamma", float),
    ("domain", "mu", float),
    ("grid", "degree", int),
    ("grid", "degree_fine", int),
    ("grid", "truncation", int),
    ("maximal", "n_points", int),
    ("maximal", "theta_geometric", int),
    ("maximal", "theta_linear", int),
    ("maximal", "theta_depth", int),
    ("maximal", "nodes_per_piece", int),
    ("maximal", "battery", str),
    ("summability", "delta", float),
    ("summability", "cesaro_n", int),
    ("multiplier", "sequence", str),
    ("multiplier", "p_list", str),
    ("multiplier", "n_list", str),
    ("multiplier", "degree", int),
    ("run", "seed", int),
    ("run", "tolerance", float),
    ("run", "workers", int),
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a CLI run depends on.

    ``delta`` and ``workers`` use ``-1`` as "derive a default": the Cesaro
    order ``max(alpha, beta) + 0.6`` and the available parallelism.
    """

    kind: str = "surface"
    d: int = 2
    gamma: float = 0.5
    mu: float = 0.0
    degree: int = 40
    degree_fine: int = 60
    truncation: int = 12
    n_points: int = 25
    theta_geometric: int = 24
    theta_linear: int = 16
    theta_depth: int = 10
    nodes_per_piece: int = 6
    battery: str = "battery-v1"
    delta: float = -1.0
    cesaro_n: int = 12
    sequence: str = "riesz"
    p_list: str = "1.5,2,4"
    n_list: str = "8,16,32"
    degree_multiplier: int = 64
    seed: int = 0
    tolerance: float = 1e-8
    workers: int = -1

    def __post_init__(self):
        try:
            self.spec()
        except ConicError as exc:
            raise ConfigError(str(exc)) from exc
        if self.degree < 1 or self.degree_fine < 1 or self.truncation < 0:
            raise ConfigError("grid degrees must be positive and the truncation nonnegative")
        if self.sequence not in ("riesz", "alternating", "constant"):
            raise ConfigError(f"unknown sequence {self.sequence!r}")
        if self.n_points < 1:
            raise ConfigError("n_points must be positive")
        try:
            self.ps, self.ns
        except ValueError as exc:
            raise ConfigError(f"bad list value: {exc}") from exc

    def spec(self) -> AdditionSpec:
        return AdditionSpec(self.kind, self.d, self.gamma, self.mu if self.kind == "solid" else 0.0)

    @property
    def ps(self) -> list[float]:
        return [float(v) for v in self.p_list.split(",") if v.strip()]

    @property
    def ns(self) -> list[int]:
        return [int(v) for v in self.n_list.split(",") if v.strip()]

    @property
    def cesaro_delta(self) -> float:
        s = self.spec()
        return max(s.alpha, -0.5) + 0.6 if self.delta < 0 else self.delta

    def to_text(self) -> str:
        cp = configparser.ConfigParser()
        for section, key, _ in _LAYOUT:
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, key, repr(getattr(self, _field(section, key))) if _kind(section, key) is float
                   else str(getattr(self, _field(section, key))))
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        known = {(s, k) for s, k, _ in _LAYOUT}
        values = {}
        for section in cp.sections():
            for key, raw in cp.items(section):
                if (section, key) not in known:
                    raise ConfigError(f"unknown config key [{section}] {key}")
                typ = _kind(section, key)
                try:
                    values[_field(section, key)] = typ(raw)
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from exc
        return cls(**values)

    def hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def _field(section: str, key: str) -> str:
    return "degree_multiplier" if (section, key) == ("multiplier", "degree") else key


def _kind(section: str, key: str):
    for s, k, t in _LAYOUT:
        if (s, k) == (section, key):
            return t
    raise KeyError(key)


def load_config(path: Optional[str]) -> ExperimentConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig()
    try:
        with open(path) as fh:
            return ExperimentConfig.from_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
