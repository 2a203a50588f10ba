"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored; unknown keys are errors.  Real
values accept ``pi`` multiples (``pi``, ``2pi``, ``0.5*pi``), and lists are
comma separated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from .dynamics import ModelParams, SchemeConfig
from .kernel import MemoryKernel, load_table, make_exponential, make_table
from .spectral import DomainSpec, ModalBasis, build_basis
from .stationary import Nonlinearity

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "DOCUMENTED_KEYS"]


class ConfigError(ValueError):
    pass


def _real(text: str) -> float:
    t = text.strip().replace(" ", "")
    if t.endswith("pi"):
        head = t[:-2].rstrip("*")
        return (float(head) if head else 1.0) * math.pi
    return float(t)


def _reals(text: str) -> tuple[float, ...]:
    return tuple(_real(p) for p in text.split(",") if p.strip())


@dataclass(frozen=True)
class RunConfig:
    """Every knob of a run; defaults reproduce the demo configuration."""

    dimension: int = 1
    sides: tuple[float, ...] = (math.pi,)
    modes: int = 32
    oversampling: Fraction = Fraction(2)
    kernel: str = "exponential"
    kappa0: float = 1.0
    delta: float = 1.0
    kernel_table: Optional[str] = None
    kernel_power: float = 2.0
    kernel_smax: float = 1000.0
    f: tuple[float, ...] = (0.0, -1.0, 0.0, 1.0)
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    scheme: str = "imex-cn"
    dt: float = 1e-3
    ds: Optional[float] = None
    T: float = 200.0
    stride: int = 200
    seed: int = 0
    init_norm: float = 1.0
    tail_tol: float = 1e-10
    functional: str = "audit"
    guesses: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    fit_tail: float = 0.5
    out: Optional[str] = None
    threads: int = 1

    # derived objects -----------------------------------------------------
    def domain(self) -> DomainSpec:
        return DomainSpec(self.dimension, self.sides, self.modes, self.oversampling)

    def basis(self) -> ModalBasis:
        return build_basis(self.domain())

    def nonlinearity(self) -> Nonlinearity:
        return Nonlinearity(self.f)

    def memory_kernel(self) -> MemoryKernel:
        if self.kernel == "exponential":
            return make_exponential(self.kappa0, self.delta)
        if self.kernel == "table":
            return load_table(self.kernel_table)
        s = np.linspace(0.0, self.kernel_smax, 20001)
        return make_table(s, (1.0 + s) ** -self.kernel_power,
                          -self.kernel_power * (1.0 + s) ** (-self.kernel_power - 1))

    def params(self) -> ModelParams:
        return ModelParams(self.nonlinearity(), self.memory_kernel(), self.c1, self.c2, self.c3)

    def scheme_config(self, **over) -> SchemeConfig:
        kw = dict(dt=self.dt, T=self.T, scheme=self.scheme, stride=self.stride,
                  tail_tol=self.tail_tol)
        kw.update(over)
        return SchemeConfig(**kw)

    def functional_pair(self) -> Optional[tuple[float, float]]:
        """``(alpha, eps)`` when fixed in the config, ``None`` for ``audit``."""
        if self.functional == "audit":
            return None
        a, e = _reals(self.functional)
        return a, e

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def validate(self) -> "RunConfig":
        try:
            dom = self.domain()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.ds is not None and not math.isclose(self.ds, self.dt, rel_tol=1e-12):
            raise ConfigError(f"history spacing ds={self.ds} must equal dt={self.dt}")
        if self.kernel not in ("exponential", "table", "power"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "table" and not self.kernel_table:
            raise ConfigError("kernel = table needs kernel_table")
        if self.kernel == "exponential" and not (self.kappa0 > 0 and self.delta > 0):
            raise ConfigError("kappa0 and delta must be positive")
        if self.init_norm < 0 or self.threads < 1 or self.seed < 0:
            raise ConfigError("init_norm, seed must be nonnegative and threads positive")
        if not 0 < self.fit_tail <= 1:
            raise ConfigError("fit_tail must lie in (0, 1]")
        try:
            self.scheme_config()
            self.functional_pair()
            f = self.nonlinearity()
            ModelParams(f, make_exponential(1.0, 1.0), self.c1, self.c2, self.c3)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        g, n = dom.grid_points, dom.modes
        if f.degree > (2 * (g + 1) - 1) // n - 1:
            raise ConfigError(f"oversampling {dom.oversampling} aliases degree-{f.degree} products")
        return self


_PARSERS = {
    "dimension": int, "modes": int, "stride": int, "seed": int, "threads": int,
    "sides": _reals, "f": _reals, "guesses": _reals,
    "oversampling": lambda t: Fraction(t.strip()),
    "kernel": str.strip, "kernel_table": str.strip, "scheme": str.strip,
    "functional": str.strip, "out": str.strip,
}

DOCUMENTED_KEYS = tuple(f.name for f in fields(RunConfig))


def parse_config(text: str, base: Optional[RunConfig] = None) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in DOCUMENTED_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS.get(key, _real)(val)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r} ({exc})") from exc
    cfg = replace(base or RunConfig(), **values)
    return cfg.validate()


def load_config(path: Optional[str | Path]) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
