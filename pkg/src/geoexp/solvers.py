"""Fixed-point and dense Newton kernels for the implicit step equations."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

__all__ = [
    "SolverConfig",
    "SolveResult",
    "SolverError",
    "fixed_point_solve",
    "newton_solve",
    "fd_jacobian",
]

SOLVER_KINDS = ("fixed_point", "newton")


class SolverError(RuntimeError):
    """Raised when a Newton system cannot be factorised."""


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules shared by both kernels.

    ``tolerance`` bounds the infinity norm of the successive update (fixed
    point) or of the residual (Newton). An iteration is abandoned as divergent
    once the update exceeds ``divergence_factor`` times the first update.
    """

    tolerance: float = 1e-12
    max_iterations: int = 100
    divergence_factor: float = 1e6
    kind: str = "fixed_point"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.divergence_factor > 1:
            raise ValueError("divergence_factor must exceed 1")
        if self.kind not in SOLVER_KINDS:
            raise ValueError(f"unknown solver kind {self.kind!r}; expected one of {SOLVER_KINDS}")


@dataclass(frozen=True)
class SolveResult:
    solution: np.ndarray
    iterations: int
    residual: float
    converged: bool
    diverged: bool = False

    def __iter__(self):
        # allows ``x, its, res, ok = fixed_point_solve(...)``
        return iter((self.solution, self.iterations, self.residual, self.converged))


def _inf(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def fixed_point_solve(mapping: Callable[[np.ndarray], np.ndarray], guess,
                      config: SolverConfig = SolverConfig()) -> SolveResult:
    """Iterate ``x <- mapping(x)`` from ``guess``.

    ``iterations`` counts evaluations of ``mapping``. A map whose fixed point
    is the guess itself therefore converges in one iteration.
    """
    x = np.asarray(guess, dtype=float)
    threshold = None
    delta = np.inf
    for it in range(1, config.max_iterations + 1):
        x_new = np.asarray(mapping(x), dtype=float)
        if not np.all(np.isfinite(x_new)):
            return SolveResult(x, it, np.inf, False, diverged=True)
        delta = _inf(x_new - x)
        x = x_new
        if delta <= config.tolerance:
            return SolveResult(x, it, delta, True)
        if threshold is None:
            threshold = config.divergence_factor * delta
        elif delta > threshold:
            return SolveResult(x, it, delta, False, diverged=True)
    return SolveResult(x, config.max_iterations, delta, False)


def newton_solve(residual: Callable[[np.ndarray], np.ndarray],
                 jacobian: Callable[[np.ndarray], np.ndarray], guess,
                 config: SolverConfig = SolverConfig()) -> SolveResult:
    """Full-step Newton with a fresh dense LU factorisation every iteration.

    Converged when ``||residual(x)||_inf <= tolerance``; ``iterations`` counts
    Newton updates. Raises :class:`SolverError` on a singular Jacobian.
    """
    x = np.array(guess, dtype=float)
    r = np.asarray(residual(x), dtype=float)
    rnorm = _inf(r)
    threshold = config.divergence_factor * max(rnorm, config.tolerance)
    for it in range(config.max_iterations + 1):
        if not np.isfinite(rnorm):
            return SolveResult(x, it, np.inf, False, diverged=True)
        if rnorm <= config.tolerance:
            return SolveResult(x, it, rnorm, True)
        if rnorm > threshold:
            return SolveResult(x, it, rnorm, False, diverged=True)
        if it == config.max_iterations:
            break
        Jm = np.atleast_2d(jacobian(x))
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                lu = scipy.linalg.lu_factor(Jm, check_finite=True)
            if np.any(np.diag(lu[0]) == 0):
                raise scipy.linalg.LinAlgError("zero pivot")
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise SolverError(f"singular Newton matrix at iteration {it + 1}: {exc}") from exc
        x = x - scipy.linalg.lu_solve(lu, r)
        r = np.asarray(residual(x), dtype=float)
        rnorm = _inf(r)
    return SolveResult(x, config.max_iterations, rnorm, False)


def fd_jacobian(fun: Callable[[np.ndarray], np.ndarray], x, eps: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian, one column per coordinate."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = eps
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * eps))
    return np.column_stack(cols)
