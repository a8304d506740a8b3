"""Experiment configuration and the plain ``key=value`` config-file format."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..integrators import METHODS, NEWTON_METHODS
from ..models import DEFAULT_NU
from ..solvers import SOLVER_KINDS

MODELS = ("nls", "kdv")

# apparent upper ends of the timestep grids behind the published tables
DEFAULT_H_MAX = {"nls": 0.1, "kdv": 0.005}
DEFAULT_HORIZON_TIME = 3.0
DEFAULT_MAX_STEPS = 20000


class ConfigError(ValueError):
    pass


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Dashes in keys become underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def validate_combination(method: str, solver: str):
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    if solver not in SOLVER_KINDS:
        raise ConfigError(f"unknown solver {solver!r}; choose from {SOLVER_KINDS}")
    if solver == "newton" and method not in NEWTON_METHODS:
        raise ConfigError(f"newton is only available for {NEWTON_METHODS}, not {method!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "nls"
    N: int = 41
    nu: float = DEFAULT_NU
    method: str = "exp_midpoint"
    solver: str = "fixed_point"
    h: float = 0.01
    steps: int = 100
    tol: float = 1e-12
    max_iterations: int = 100
    output: str = "trajectory.csv"
    seed: int = 0
    reference: bool = False
    reference_factor: int = 100
    linear: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODELS}")
        validate_combination(self.method, self.solver)
        for name in ("N", "nu", "h", "steps", "tol", "max_iterations", "reference_factor"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.N % 2 == 0 or self.N < 3:
            raise ConfigError(f"N must be odd and >= 3, got {self.N}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")


@dataclass(frozen=True)
class SweepConfig:
    model: str = "nls"
    Ns: tuple[int, ...] = (11, 21, 41, 81)
    nu: float = DEFAULT_NU
    methods: tuple[tuple[str, str], ...] = (("midpoint", "fixed_point"),)
    h_min: float = 1e-6
    h_max: float | None = None
    horizon_steps: int = 100
    horizon_time: float = DEFAULT_HORIZON_TIME
    max_steps: int = DEFAULT_MAX_STEPS
    tol: float = 1e-10
    max_iterations: int = 100
    full_grid: bool = False
    linear: bool = False
    workers: int = 1
    seed: int = 0
    output: str = "sweep.csv"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        for m, s in self.methods:
            validate_combination(m, s)
        if not self.Ns or any(n % 2 == 0 or n < 3 for n in self.Ns):
            raise ConfigError(f"every N must be odd and >= 3, got {self.Ns}")
        if self.horizon_steps < 50:
            raise ConfigError("horizon_steps must be >= 50")
        if not 0 < self.h_min <= self.grid_top:
            raise ConfigError("need 0 < h_min <= h_max")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def grid_top(self) -> float:
        return self.h_max if self.h_max is not None else DEFAULT_H_MAX[self.model]


def parse_methods(text: str, default_solver: str = "fixed_point") -> tuple[tuple[str, str], ...]:
    """``"midpoint,midpoint:newton,energy_exp"`` -> ((method, solver), ...)."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        method, _, solver = item.partition(":")
        out.append((method, solver or default_solver))
    if not out:
        raise ConfigError("no methods given")
    return tuple(out)


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc
