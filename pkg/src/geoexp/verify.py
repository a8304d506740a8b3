"""Executable checks: Poisson structure of a step map, energy drift,
discrete-gradient identity, convergence order, and maximum-timestep sweeps.

Also holds :func:`disex_tableau_step`, a direct stage-by-stage evaluation of
the DISEX Butcher tableau. It is kept apart from the integrators because it
exists only as an independent oracle for the composition implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .integrators import DISEX6, DisrkScheme, get_stepper
from .psystem import PoissonSystem, State
from .solvers import SolverConfig, fixed_point_solve

__all__ = [
    "PoissonCheckError",
    "poisson_check",
    "step_map",
    "energy_drift",
    "bounded_drift",
    "dg_condition_check",
    "OrderResult",
    "estimate_order",
    "run_trajectory",
    "SweepPoint",
    "SweepResult",
    "timestep_grid",
    "sweep_max_timestep",
    "disex_tableau_step",
    "loglog_slope",
]

# decade mantissas of the sweep grid
GRID_MANTISSAS = (1, 2, 4, 5, 6, 8)


class PoissonCheckError(RuntimeError):
    pass


def poisson_check(step: Callable[[np.ndarray], np.ndarray], J, q, fd_eps: float = 1e-6) -> float:
    """``max |M J M^T - J|`` for the central-difference Jacobian ``M`` of ``step``.

    ``J`` is a dense matrix or a callable applying it. ``step`` maps a vector
    to a vector and may raise, or return ``None``, to signal failure.
    """
    if not fd_eps > 0:
        raise ValueError("fd_eps must be positive")
    q = np.asarray(q, dtype=float)
    d = q.shape[0]
    if callable(J):
        eye = np.eye(d)
        J = np.column_stack([J(eye[:, i]) for i in range(d)])
    J = np.asarray(J, dtype=float)
    M = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = fd_eps
        try:
            plus, minus = step(q + e), step(q - e)
        except Exception as exc:
            raise PoissonCheckError(f"step failed at probe {i}: {exc}") from exc
        if plus is None or minus is None:
            raise PoissonCheckError(f"step failed at probe {i}")
        M[:, i] = (np.asarray(plus) - np.asarray(minus)) / (2 * fd_eps)
    return float(np.max(np.abs(M @ J @ M.T - J)))


def step_map(method: str, system: PoissonSystem, h: float, solver: SolverConfig | None = None):
    """Wrap a stepper as ``q -> q'`` returning ``None`` when the solver fails."""
    step = get_stepper(method)

    def phi(q):
        out = step(system, State(q), h, solver)
        return out.state.q if out.converged else None

    return phi


def energy_drift(system: PoissonSystem, trajectory: Sequence) -> tuple[float, np.ndarray]:
    """Return ``max_k |H(q_k) - H(q_0)|`` and the full drift series."""
    if len(trajectory) == 0:
        raise ValueError("trajectory is empty")
    qs = [s.q if isinstance(s, State) else np.asarray(s) for s in trajectory]
    H = np.array([system.hamiltonian(q) for q in qs])
    series = H - H[0]
    return float(np.max(np.abs(series))), series


def bounded_drift(series, factor: float = 2.0) -> tuple[bool, float, float]:
    """Second-half max of ``|series|`` against ``factor`` times the first-half max."""
    a = np.abs(np.asarray(series))
    half = len(a) // 2
    first, second = float(a[:half].max()), float(a[half:].max())
    return second <= factor * first, first, second


def dg_condition_check(system: PoissonSystem, q, q_new) -> tuple[float, float]:
    """Residuals of the discrete-gradient identity for V and for the full H.

    The H version uses ``dgrad H = D (q + q') / 2 + dgrad V(q, q')``.
    """
    q = np.asarray(q, dtype=float)
    q_new = np.asarray(q_new, dtype=float)
    dq = q_new - q
    gV = system.discrete_grad_V(q, q_new)
    res_V = abs(gV @ dq - (system.V(q_new) - system.V(q)))
    gH = 0.5 * system.apply_D(q + q_new) + gV
    res_H = abs(gH @ dq - (system.hamiltonian(q_new) - system.hamiltonian(q)))
    return float(res_V), float(res_H)


def run_trajectory(method: str, system: PoissonSystem, state: State, h: float, steps: int,
                   solver: SolverConfig | None = None) -> tuple[list[State], bool]:
    """States after each step (initial state first) and whether all steps converged."""
    step = get_stepper(method)
    states = [state]
    for _ in range(steps):
        out = step(system, state, h, solver)
        if not out.converged:
            return states, False
        state = out.state
        states.append(state)
    return states, True


def _final_state(method, system, state, h, T, solver):
    steps = int(round(T / h))
    if steps < 1 or abs(steps * h - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"horizon {T} is not a multiple of h={h}")
    states, ok = run_trajectory(method, system, state, h, steps, solver)
    return states[-1].q, ok


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


@dataclass
class OrderResult:
    slope: float
    h: np.ndarray
    errors: np.ndarray
    excluded: list[float] = field(default_factory=list)


def estimate_order(method: str, system: PoissonSystem, state0: State, T: float,
                   h_list: Sequence[float], solver: SolverConfig | None = None,
                   reference_method: str = "exp_midpoint", reference_factor: int = 20,
                   reference: np.ndarray | None = None) -> OrderResult:
    """Least-squares slope of log(relative L2 error at ``T``) against log h.

    The reference is ``reference_method`` at ``min(h_list) / reference_factor``
    unless a precomputed final state is passed as ``reference``. Runs whose
    solver fails are dropped and listed in ``excluded``.
    """
    h_list = sorted(float(h) for h in h_list)
    if len(h_list) < 4:
        raise ValueError("need at least 4 timesteps")
    if reference_factor < 20:
        raise ValueError("reference_factor must be >= 20")
    if reference is None:
        reference, ok = _final_state(reference_method, system, state0,
                                     h_list[0] / reference_factor, T, solver)
        if not ok:
            raise RuntimeError("reference run did not converge")
    ref_norm = np.linalg.norm(reference)
    hs, errs, excluded = [], [], []
    for h in h_list:
        q, ok = _final_state(method, system, state0, h, T, solver)
        if not ok:
            excluded.append(h)
            continue
        hs.append(h)
        errs.append(np.linalg.norm(q - reference) / ref_norm)
    if len(hs) < 3:
        raise RuntimeError(f"only {len(hs)} runs converged (excluded {excluded})")
    hs, errs = np.array(hs), np.array(errs)
    return OrderResult(loglog_slope(hs, errs), hs, errs, excluded)


def timestep_grid(lo: float, hi: float) -> list[float]:
    """Values ``m * 10**e`` with ``m`` in {1, 2, 4, 5, 6, 8} lying in ``[lo, hi]``."""
    if not 0 < lo <= hi:
        raise ValueError("need 0 < lo <= hi")
    out = []
    for e in range(math.floor(math.log10(lo)) - 1, math.ceil(math.log10(hi)) + 1):
        for m in GRID_MANTISSAS:
            v = float(f"{m}e{e}")
            if lo * (1 - 1e-12) <= v <= hi * (1 + 1e-12):
                out.append(v)
    return out


def horizon_for(h: float, min_steps: int, horizon_time: float, max_steps: int) -> int:
    """Steps covering ``horizon_time``, at least ``min_steps``, at most ``max_steps``."""
    return int(min(max(min_steps, math.ceil(horizon_time / h - 1e-9)), max(max_steps, min_steps)))


@dataclass
class SweepPoint:
    h: float
    converged: bool
    steps: int
    max_iterations: int


@dataclass
class SweepResult:
    """Largest converging grid timestep for one (method, solver, N) combination.

    ``h_max`` is ``None`` when no tested timestep converged. Every tested
    timestep below ``h_max`` converged.
    """

    method: str
    solver: str
    N: int
    h_max: float | None
    points: list[SweepPoint]

    def __post_init__(self):
        if self.h_max is not None:
            tested = {p.h for p in self.points}
            if self.h_max not in tested:
                raise ValueError("h_max must be a tested timestep")
            bad = [p.h for p in self.points if p.h < self.h_max and not p.converged]
            if bad:
                raise ValueError(f"non-monotone sweep: failures below h_max at {bad}")


def _sweep_point(method, system, state, h, steps, solver):
    step = get_stepper(method)
    worst = 0
    for i in range(steps):
        out = step(system, state, h, solver)
        worst = max(worst, out.iterations)
        if not out.converged:
            return SweepPoint(h, False, i + 1, worst)
        state = out.state
    return SweepPoint(h, True, steps, worst)


def sweep_max_timestep(method: str, system: PoissonSystem, state: State, h_grid: Sequence[float],
                       solver: SolverConfig | None = None, horizon_steps: int = 100,
                       horizon_time: float = 0.0, max_steps: int = 20000,
                       full_grid: bool = False, on_point=None) -> SweepResult:
    """Find the largest timestep in ``h_grid`` for which a whole run converges.

    Each timestep ``h`` is run for ``horizon_for(h, ...)`` steps and counts as
    converging only if every step's solver converges. The grid is scanned from
    the top down and stops at the first success (all larger values failed);
    with ``full_grid`` every value is run and ``h_max`` is the largest ``h``
    below which nothing failed.
    """
    if horizon_steps < 50:
        raise ValueError("horizon_steps must be >= 50")
    solver = solver or SolverConfig(tolerance=1e-10, max_iterations=100)
    grid = sorted(float(h) for h in h_grid)
    if not grid:
        raise ValueError("empty timestep grid")
    points = []
    for h in reversed(grid):
        n = horizon_for(h, horizon_steps, horizon_time, max_steps)
        pt = _sweep_point(method, system, state, h, n, solver)
        points.append(pt)
        if on_point is not None:
            on_point(pt)
        if pt.converged and not full_grid:
            break
    points.sort(key=lambda p: p.h)
    h_max = None
    for p in points:
        if not p.converged:
            break
        h_max = p.h
    return SweepResult(method, solver.kind, getattr(system, "N", system.dim), h_max, points)


def disex_tableau_step(system: PoissonSystem, q, h: float, scheme: DisrkScheme = DISEX6,
                       solver: SolverConfig | None = None) -> np.ndarray:
    """One DISEX step evaluated directly from its Butcher tableau.

    Stage ``i`` solves::

        Q_i = S(c_i h) q + h * sum_{j<i} b_j S((c_i - c_j) h) f(Q_j) + (b_i h / 2) f(Q_i)

    and the update is ``S(h) q + h * sum_i b_i S((1 - c_i) h) f(Q_i)``.
    """
    solver = solver or SolverConfig(tolerance=1e-13)
    q = np.asarray(q, dtype=float)
    b = np.asarray(scheme.weights)
    c = scheme.abscissae
    fQ = []
    for i in range(scheme.stages):
        base = system.exp_action(c[i] * h, q)
        for j in range(i):
            base = base + h * b[j] * system.exp_action((c[i] - c[j]) * h, fQ[j])
        guess = base + 0.5 * b[i] * h * system.f(base)
        res = fixed_point_solve(lambda Q: base + 0.5 * b[i] * h * system.f(Q), guess, solver)
        if not res.converged:
            raise RuntimeError(f"tableau stage {i + 1} did not converge")
        fQ.append(system.f(res.solution))
    out = system.exp_action(h, q)
    for i in range(scheme.stages):
        out = out + h * b[i] * system.exp_action((1 - c[i]) * h, fQ[i])
    return out
