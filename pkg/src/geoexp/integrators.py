"""One-step methods for semilinear Poisson systems.

Every stepper has the signature ``step(system, state, h, solver=None)`` and
returns a :class:`StepOutcome`. Implicit equations are solved with the
kernels in :mod:`geoexp.solvers`; exponential methods always use fixed-point
iteration, while the classical midpoint and discrete gradient methods also
accept ``SolverConfig(kind="newton")``.

A negative ``h`` steps backwards in time (used by the DISEX substeps with
negative weights and by reversibility checks).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterator

import numpy as np

from .psystem import PoissonSystem, State
from .solvers import (SolveResult, SolverConfig, SolverError, fd_jacobian, fixed_point_solve,
                      newton_solve)

__all__ = [
    "DisrkScheme",
    "DISEX6",
    "StepOutcome",
    "exp_euler_step",
    "midpoint_step",
    "discrete_gradient_step",
    "exp_midpoint_step",
    "disex_step",
    "energy_exp_step",
    "METHODS",
    "EXPONENTIAL_METHODS",
    "NEWTON_METHODS",
    "get_stepper",
    "integrate",
]


@dataclass(frozen=True)
class DisrkScheme:
    """Composition weights ``b_1..b_s``; abscissae are derived from them."""

    weights: tuple[float, ...]
    name: str = "disrk"

    def __post_init__(self):
        w = tuple(float(b) for b in self.weights)
        if not w:
            raise ValueError("a scheme needs at least one stage")
        object.__setattr__(self, "weights", w)
        if abs(self.consistency_error) > 1e-8:
            raise ValueError(f"weights sum to {sum(w)!r}, expected 1")

    @property
    def stages(self) -> int:
        return len(self.weights)

    @property
    def consistency_error(self) -> float:
        return float(np.sum(self.weights) - 1.0)

    @property
    def abscissae(self) -> np.ndarray:
        b = np.asarray(self.weights)
        return np.cumsum(b) - b / 2

    def tableau(self) -> np.ndarray:
        """Lower-triangular ``a_ij``: ``b_j`` below the diagonal, ``b_i / 2`` on it."""
        b = np.asarray(self.weights)
        a = np.tril(np.broadcast_to(b, (self.stages, self.stages)), -1).copy()
        a[np.diag_indices(self.stages)] = b / 2
        return a


DISEX6 = DisrkScheme(
    (0.5080048194000274, 1.360107162294827, 2.019293359181722,
     0.5685658926458250, -1.459852049586439, -1.996119183935963),
    name="disex6",
)
MIDPOINT_SCHEME = DisrkScheme((1.0,), name="midpoint")


@dataclass(frozen=True)
class StepOutcome:
    state: State
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    failed_substep: int | None = None


_DEFAULT = SolverConfig()


def _check_h(h):
    if not np.isfinite(h) or h == 0:
        raise ValueError(f"timestep must be finite and nonzero, got {h!r}")


def _outcome(state, h, res: SolveResult, **kw) -> StepOutcome:
    # keep the last finite iterate so a failed step still yields a valid State
    q = res.solution if np.all(np.isfinite(res.solution)) else state.q
    return StepOutcome(State(q, state.t + h), res.iterations, res.residual, res.converged, **kw)


def _failed(state, h, it=0):
    return StepOutcome(State(state.q, state.t + h), it, np.inf, False)


def _fixed_point_only(name, solver):
    if solver.kind != "fixed_point":
        raise ValueError(f"{name} is implemented with fixed-point iteration only")


def exp_euler_step(system: PoissonSystem, state: State, h: float,
                   solver: SolverConfig | None = None) -> StepOutcome:
    """``q' = exp(A h) q + T(h) f(q)``; explicit."""
    _check_h(h)
    q = state.q
    q_new = system.exp_action(h, q) + system.int_exp_action(h, system.f(q))
    if not np.all(np.isfinite(q_new)):
        return _failed(state, h)
    return StepOutcome(State(q_new, state.t + h))


def _newton(system, state, h, solver, residual, analytic_jac):
    jac = analytic_jac if analytic_jac is not None else partial(fd_jacobian, residual)
    try:
        res = newton_solve(residual, jac, state.q, solver)
    except SolverError:
        return _failed(state, h)
    return _outcome(state, h, res)


def _midpoint_jacobian(system, q, h):
    J, D = _dense_JD(system)
    eye = np.eye(system.dim)
    return lambda x: eye - 0.5 * h * J @ (D + system.hessian_V(0.5 * (q + x)))


def midpoint_step(system: PoissonSystem, state: State, h: float,
                  solver: SolverConfig | None = None) -> StepOutcome:
    """Classical implicit midpoint rule ``q' = q + h J grad H((q + q') / 2)``."""
    _check_h(h)
    solver = solver or _DEFAULT
    q = state.q
    if solver.kind == "newton":
        def residual(x):
            return x - q - h * system.vector_field(0.5 * (q + x))

        jac = _midpoint_jacobian(system, q, h) if system.has_hessian else None
        return _newton(system, state, h, solver, residual, jac)
    res = fixed_point_solve(lambda x: q + h * system.vector_field(0.5 * (q + x)), q, solver)
    return _outcome(state, h, res)


def discrete_gradient_step(system: PoissonSystem, state: State, h: float,
                           solver: SolverConfig | None = None) -> StepOutcome:
    """``q' = q + h J (D (q + q') / 2 + dgrad V(q, q'))``; conserves H exactly."""
    _check_h(h)
    solver = solver or _DEFAULT
    q = state.q
    Dq = system.apply_D(q)

    def rhs(x):
        return q + h * system.apply_J(0.5 * (Dq + system.apply_D(x))
                                      + system.discrete_grad_V(q, x))

    if solver.kind == "newton":
        return _newton(system, state, h, solver, lambda x: x - rhs(x), None)
    return _outcome(state, h, fixed_point_solve(rhs, q, solver))


def _exp_midpoint(system, q, h, solver):
    Sq = system.exp_action(h, q)
    half_q = system.exp_action(0.5 * h, q)
    guess = Sq + system.int_exp_action(h, system.f(q))

    def rhs(x):
        mid = 0.5 * (half_q + system.exp_action(-0.5 * h, x))
        return Sq + h * system.exp_action(0.5 * h, system.f(mid))

    return fixed_point_solve(rhs, guess, solver)


def exp_midpoint_step(system: PoissonSystem, state: State, h: float,
                      solver: SolverConfig | None = None) -> StepOutcome:
    """Exponential midpoint rule.

    Solves ``q' = S(h) q + h S(h/2) f((S(h/2) q + S(-h/2) q') / 2)`` with
    ``S(t) = exp(A t)``. Preserves the Poisson structure.
    """
    _check_h(h)
    solver = solver or _DEFAULT
    _fixed_point_only("exp_midpoint", solver)
    return _outcome(state, h, _exp_midpoint(system, state.q, h, solver))


def disex_step(system: PoissonSystem, state: State, h: float,
               solver: SolverConfig | None = None, scheme: DisrkScheme = DISEX6) -> StepOutcome:
    """Diagonally implicit symplectic exponential step.

    Runs exponential midpoint substeps of size ``b_i h`` in sequence. The
    reported ``iterations`` is the largest count of any substep solve. On
    failure ``failed_substep`` holds the 1-based index of the offending substep.
    """
    _check_h(h)
    solver = solver or _DEFAULT
    _fixed_point_only("disex", solver)
    q = state.q
    its, worst = 0, 0.0
    for i, b in enumerate(scheme.weights, start=1):
        res = _exp_midpoint(system, q, b * h, solver)
        its = max(its, res.iterations)
        worst = max(worst, res.residual)
        if not res.converged:
            return StepOutcome(State(q, state.t + h), its, res.residual, False,
                               failed_substep=i)
        q = res.solution
    return StepOutcome(State(q, state.t + h), its, worst, True)


def energy_exp_step(system: PoissonSystem, state: State, h: float,
                    solver: SolverConfig | None = None) -> StepOutcome:
    """Energy-preserving exponential integrator.

    Solves ``q' = S(h) q + T(h) J dgrad V(q, q')``. H is conserved up to the
    accuracy of the fixed point.
    """
    _check_h(h)
    solver = solver or _DEFAULT
    _fixed_point_only("energy_exp", solver)
    q = state.q
    Sq = system.exp_action(h, q)
    guess = Sq + system.int_exp_action(h, system.f(q))

    def rhs(x):
        return Sq + system.int_exp_action(h, system.apply_J(system.discrete_grad_V(q, x)))

    return _outcome(state, h, fixed_point_solve(rhs, guess, solver))


_dense_cache: dict[int, tuple] = {}


def _dense_JD(system):
    key = id(system)
    hit = _dense_cache.get(key)
    if hit is None or hit[0] is not system:
        if len(_dense_cache) > 8:
            _dense_cache.clear()
        hit = _dense_cache[key] = (system, system.dense_J(), system.dense_D())
    return hit[1], hit[2]


Stepper = Callable[..., StepOutcome]

METHODS: dict[str, Stepper] = {
    "midpoint": midpoint_step,
    "dg": discrete_gradient_step,
    "exp_euler": exp_euler_step,
    "exp_midpoint": exp_midpoint_step,
    "disex6": partial(disex_step, scheme=DISEX6),
    "energy_exp": energy_exp_step,
}
EXPONENTIAL_METHODS = ("exp_euler", "exp_midpoint", "disex6", "energy_exp")
NEWTON_METHODS = ("midpoint", "dg")


def get_stepper(method: str) -> Stepper:
    try:
        return METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}") from None


def integrate(method: str | Stepper, system: PoissonSystem, state: State, h: float, steps: int,
              solver: SolverConfig | None = None, stop_on_failure: bool = True
              ) -> Iterator[StepOutcome]:
    """Yield the outcome of each of ``steps`` successive steps."""
    step = get_stepper(method) if isinstance(method, str) else method
    for _ in range(steps):
        out = step(system, state, h, solver)
        yield out
        if not out.converged and stop_on_failure:
            return
        state = out.state
