"""Run configuration: flat ``key = value`` files with ``#`` comments.

Every key is optional; defaults reproduce the 2D moving-front experiment
(``h = 1/64``, 101 snapshots, ``r = 99``, ``R = 95``, ``alpha = 1e-3``).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from .rom import ClosureConfig, Variant

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]

DEFAULT_DT_SET = (5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 1.0 / 3200.0)
DEFAULT_R_SET = (6, 10, 16, 24, 34, 45, 56)


class ConfigError(ValueError):
    pass


def _float_list(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _int_list(text):
    return tuple(int(x) for x in text.replace(",", " ").split())


@dataclass(frozen=True)
class RunConfig:
    n_div: int = 64
    dT: float = 1e-2
    M: int = 100
    nu: float = 1e-3
    steepness: float = 500.0
    r: int = 99
    R: int = 95
    alpha: float = 1e-3
    variant: Variant = Variant.VMS
    dt: float = 5e-3
    T_final: float = 1.0
    rank_tol: float = 1e-14
    dt_set: tuple = DEFAULT_DT_SET
    R_set: tuple = DEFAULT_R_SET
    R_sweep_dt: float = 1e-4
    workers: int = 1
    snapshots: str | None = None
    basis: str | None = None
    out: str | None = None
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        try:
            object.__setattr__(self, "variant", Variant.parse(self.variant))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        self.validate()

    def validate(self):
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.n_div >= 2, f"n_div must be >= 2, got {self.n_div}")
        need(self.dT > 0, f"dT must be positive, got {self.dT}")
        need(self.M >= 0, f"M must be >= 0, got {self.M}")
        need(self.dT * self.M <= self.T_final * (1 + 1e-12),
             f"snapshot window dT*M = {self.dT * self.M} exceeds T_final = {self.T_final}")
        need(self.nu > 0, f"nu must be positive, got {self.nu}")
        need(self.steepness >= 0, f"steepness must be >= 0, got {self.steepness}")
        need(self.r >= 1, f"r must be >= 1, got {self.r}")
        need(0 <= self.R <= self.r, f"R must satisfy 0 <= R <= r, got R={self.R}, r={self.r}")
        need(self.alpha >= 0, f"alpha must be >= 0, got {self.alpha}")
        need(self.rank_tol > 0, f"rank_tol must be positive, got {self.rank_tol}")
        need(self.workers >= 1, f"workers must be >= 1, got {self.workers}")
        for name, dt in [("dt", self.dt), ("R_sweep_dt", self.R_sweep_dt)] + \
                [("dt_set", x) for x in self.dt_set]:
            need(dt > 0, f"{name} entries must be positive, got {dt}")
            ratio = self.T_final / dt
            need(abs(ratio - round(ratio)) <= 1e-9,
                 f"{name} = {dt!r} does not divide T_final = {self.T_final}")
        for R in self.R_set:
            need(0 <= R <= self.r, f"R_set entry {R} outside [0, r={self.r}]")

    @property
    def closure(self):
        return ClosureConfig(self.variant, self.alpha, self.R)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_CASTS = {
    "n_div": int, "M": int, "r": int, "R": int, "workers": int,
    "dT": float, "nu": float, "steepness": float, "alpha": float, "dt": float,
    "T_final": float, "rank_tol": float, "R_sweep_dt": float,
    "variant": str, "snapshots": str, "basis": str, "out": str,
    "dt_set": _float_list, "R_set": _int_list,
}


def parse_config(text, **overrides):
    """Parse ``key = value`` lines into a :class:`RunConfig`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CASTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CASTS[key](value)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def load_config(path=None, **overrides):
    if path is None:
        return parse_config("", **overrides)
    with open(path) as fh:
        return parse_config(fh.read(), **overrides)
