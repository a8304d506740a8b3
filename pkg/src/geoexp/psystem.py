"""Constant Poisson systems ``q' = J (D q + grad V(q))`` with ``A = J D``.

A :class:`PoissonSystem` exposes only the actions an integrator needs. The
matrix ``A`` is never formed for the spectral models; the flow ``exp(A h)`` and
its integral ``T(h) = int_0^h exp(A tau) dtau`` are applied directly.

Transposes are never implemented separately. Because ``A`` is skew,
``exp(A h)^T = exp(-A h)``, and ``T^T = exp(A h)^T T``; see
:meth:`PoissonSystem.exp_action_T` and :meth:`PoissonSystem.int_exp_action_T`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "PoissonSystem",
    "State",
    "DenseTestSystem",
    "StructureReport",
    "check_structure",
    "harmonic_oscillator",
    "random_dense_system",
]


@dataclass(frozen=True)
class State:
    """A point ``q`` of phase space at model time ``t``."""

    q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 1:
            raise ValueError(f"state must be a 1-d vector, got shape {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("state contains NaN or Inf")
        q.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self) -> int:
        return self.q.shape[0]


class PoissonSystem(ABC):
    """Semilinear Poisson system with constant ``J`` (skew) and ``D`` (symmetric).

    Subclasses supply the linear actions and the potential through ``_V``,
    ``_grad_V``, ``_discrete_grad_V`` (and optionally ``_hessian_V``). Setting
    ``nonlinear = False`` switches the potential off, leaving the linear
    system ``q' = A q``.
    """

    dim: int
    nonlinear: bool = True

    @abstractmethod
    def apply_J(self, v: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def apply_D(self, v: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def exp_action(self, h: float, v: np.ndarray) -> np.ndarray:
        """``exp(A h) v``."""

    @abstractmethod
    def int_exp_action(self, h: float, v: np.ndarray) -> np.ndarray:
        """``(int_0^h exp(A tau) dtau) v``; well defined for singular ``A``."""

    @abstractmethod
    def _V(self, q): ...

    @abstractmethod
    def _grad_V(self, q): ...

    @abstractmethod
    def _discrete_grad_V(self, q, q_new): ...

    def _hessian_V(self, q):
        raise NotImplementedError

    def V(self, q) -> float:
        return float(self._V(q)) if self.nonlinear else 0.0

    def grad_V(self, q) -> np.ndarray:
        return self._grad_V(q) if self.nonlinear else np.zeros_like(q, dtype=float)

    def discrete_grad_V(self, q, q_new) -> np.ndarray:
        if not self.nonlinear:
            return np.zeros_like(q, dtype=float)
        return self._discrete_grad_V(q, q_new)

    def hessian_V(self, q) -> np.ndarray:
        """Dense Hessian of V; raises NotImplementedError when unavailable."""
        if not self.nonlinear:
            return np.zeros((self.dim, self.dim))
        return self._hessian_V(q)

    @property
    def has_hessian(self) -> bool:
        return type(self)._hessian_V is not PoissonSystem._hessian_V

    def f(self, q) -> np.ndarray:
        """Nonlinear vector field ``J grad V(q)``."""
        return self.apply_J(self.grad_V(q))

    def apply_A(self, v) -> np.ndarray:
        return self.apply_J(self.apply_D(v))

    def grad_H(self, q) -> np.ndarray:
        return self.apply_D(q) + self.grad_V(q)

    def vector_field(self, q) -> np.ndarray:
        return self.apply_J(self.grad_H(q))

    def hamiltonian(self, q) -> float:
        q = np.asarray(q, dtype=float)
        return 0.5 * float(q @ self.apply_D(q)) + self.V(q)

    def exp_action_T(self, h, v):
        return self.exp_action(-h, v)

    def int_exp_action_T(self, h, v):
        return self.exp_action(-h, self.int_exp_action(h, v))

    def dense_J(self) -> np.ndarray:
        return _materialize(self.apply_J, self.dim)

    def dense_D(self) -> np.ndarray:
        return _materialize(self.apply_D, self.dim)


def _materialize(op, d):
    eye = np.eye(d)
    return np.column_stack([op(eye[:, i]) for i in range(d)])


def _expm_pair(A, h):
    """``(exp(A h), int_0^h exp(A tau) dtau)`` by one augmented ``expm``."""
    d = A.shape[0]
    aug = np.zeros((2 * d, 2 * d))
    aug[:d, :d] = A
    aug[:d, d:] = np.eye(d)
    E = scipy.linalg.expm(aug * h)
    return E[:d, :d], E[:d, d:]


class DenseTestSystem(PoissonSystem):
    """Small system with explicit matrices, used as an oracle backend.

    The potential defaults to ``V(q) = sum(q**4) / 4``. Exponentials come from
    scipy's scaling-and-squaring ``expm``.
    """

    MAX_DIM = 16

    def __init__(self, J, D, V=None, grad_V=None, discrete_grad_V=None, hessian_V=None,
                 nonlinear=True):
        J = np.array(J, dtype=float)
        D = np.array(D, dtype=float)
        if J.shape != D.shape or J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError("J and D must be square matrices of equal size")
        if J.shape[0] > self.MAX_DIM:
            raise ValueError(f"dense test systems are limited to dimension {self.MAX_DIM}")
        self.J = J
        self.D = D
        self.A = J @ D
        self.dim = J.shape[0]
        self.nonlinear = nonlinear
        if V is None:
            V = lambda q: 0.25 * np.sum(q ** 4)
            grad_V = lambda q: q ** 3
            discrete_grad_V = lambda q, r: 0.25 * (q ** 3 + q * q * r + q * r * r + r ** 3)
            hessian_V = lambda q: np.diag(3 * q ** 2)
        self._v, self._gv, self._dgv, self._hv = V, grad_V, discrete_grad_V, hessian_V
        self._cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    def _pair(self, h):
        h = float(h)
        if h not in self._cache:
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[h] = _expm_pair(self.A, h)
        return self._cache[h]

    def apply_J(self, v):
        return self.J @ v

    def apply_D(self, v):
        return self.D @ v

    def exp_action(self, h, v):
        return self._pair(h)[0] @ v

    def int_exp_action(self, h, v):
        return self._pair(h)[1] @ v

    def _V(self, q):
        return self._v(q)

    def _grad_V(self, q):
        return self._gv(q)

    def _discrete_grad_V(self, q, q_new):
        return self._dgv(q, q_new)

    def _hessian_V(self, q):
        if self._hv is None:
            raise NotImplementedError
        return self._hv(q)

    @property
    def has_hessian(self) -> bool:
        return self._hv is not None

    def dense_J(self):
        return self.J.copy()

    def dense_D(self):
        return self.D.copy()


def harmonic_oscillator(nonlinear=False) -> DenseTestSystem:
    """``J = [[0, 1], [-1, 0]]``, ``D = I``; linear unless asked otherwise."""
    return DenseTestSystem([[0.0, 1.0], [-1.0, 0.0]], np.eye(2), nonlinear=nonlinear)


def random_dense_system(m: int = 3, seed: int = 0, nonlinear: bool = True) -> DenseTestSystem:
    """Random system of dimension ``2m`` with canonical ``J`` and a commuting ``D``.

    ``D = [[S, K], [-K, S]]`` with ``S`` symmetric and ``K`` antisymmetric is
    symmetric and commutes with the canonical ``J``.
    """
    rng = np.random.default_rng(seed)
    S = rng.uniform(-1, 1, (m, m))
    S = S + S.T
    K = rng.uniform(-1, 1, (m, m))
    K = K - K.T
    D = np.block([[S, K], [-K, S]])
    J = np.block([[np.zeros((m, m)), np.eye(m)], [-np.eye(m), np.zeros((m, m))]])
    return DenseTestSystem(J, D, nonlinear=nonlinear)


@dataclass
class StructureReport:
    """Largest relative deviation observed for each structural identity."""

    deviations: dict[str, float]
    tol: float
    seed: int
    trials: int

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.deviations.items() if not v <= self.tol]

    @property
    def passed(self) -> bool:
        return not self.failed

    def __str__(self):
        lines = [f"structure check (trials={self.trials}, seed={self.seed}, tol={self.tol:g})"]
        for k, v in self.deviations.items():
            lines.append(f"  {'FAIL' if not v <= self.tol else 'ok  '} {k:<28s} {v:.3e}")
        return "\n".join(lines)


def _rel(a, scale):
    return float(abs(a) / scale) if scale > 0 else float(abs(a))


def check_structure(system: PoissonSystem, trials: int = 5, tol: float = 1e-10,
                    seed: int = 0, steps=(0.01, 0.1, 1.0), dense_oracle: bool | None = None
                    ) -> StructureReport:
    """Randomized check of the algebraic assumptions behind the integrators.

    Covers skewness of J, symmetry of D, commutation, the Hamiltonian split, the
    discrete-gradient identity and its symmetry/diagonal consistency, the
    ``h = 0`` limits, and the flow identities ``<Sv, Su> = <v, u>``,
    ``A T = S - I``, ``A T^T = I - S^T`` and ``S^T T = T^T``. When
    ``dense_oracle`` is set (default: ``dim <= 64``), ``S`` and ``T`` are also
    compared against ``expm`` of the assembled ``A``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    d = system.dim
    dev: dict[str, float] = {}

    def note(name, value):
        dev[name] = max(dev.get(name, 0.0), float(value))

    nrm = np.linalg.norm
    if dense_oracle is None:
        dense_oracle = d <= 64
    pairs = {}
    if dense_oracle:
        A = system.dense_J() @ system.dense_D()
        pairs = {h: _expm_pair(A, h) for h in steps}

    for _ in range(trials):
        u = rng.uniform(-1, 1, d)
        v = rng.uniform(-1, 1, d)
        Ju, Jv, Du, Dv = system.apply_J(u), system.apply_J(v), system.apply_D(u), system.apply_D(v)
        note("J skew", _rel(u @ Jv + Ju @ v, nrm(u) * nrm(Jv) + nrm(Ju) * nrm(v)))
        note("D symmetric", _rel(u @ Dv - Du @ v, nrm(u) * nrm(Dv) + nrm(Du) * nrm(v)))
        JDv, DJv = system.apply_J(Dv), system.apply_D(Jv)
        note("J D = D J", _rel(nrm(JDv - DJv), nrm(JDv) + nrm(DJv)))
        H = system.hamiltonian(u)
        H_split = 0.5 * (u @ Du) + system.V(u)
        note("H = qDq/2 + V", _rel(H - H_split, abs(0.5 * (u @ Du)) + abs(system.V(u))))

        g = system.discrete_grad_V(u, v)
        lhs, dV = g @ (v - u), system.V(v) - system.V(u)
        note("discrete gradient identity",
             _rel(lhs - dV, abs(lhs) + abs(system.V(u)) + abs(system.V(v))))
        g_swap = system.discrete_grad_V(v, u)
        note("discrete gradient symmetric", _rel(nrm(g - g_swap), nrm(g) + nrm(g_swap)))
        gd, gv = system.discrete_grad_V(u, u), system.grad_V(u)
        note("discrete gradient diagonal", _rel(nrm(gd - gv), nrm(gv)))

        note("exp(0) = I", _rel(nrm(system.exp_action(0.0, v) - v), nrm(v)))
        note("T(0) = 0", _rel(nrm(system.int_exp_action(0.0, v)), nrm(v)))

        for h in steps:
            Sv, Su = system.exp_action(h, v), system.exp_action(h, u)
            Tv = system.int_exp_action(h, v)
            StSv = system.exp_action_T(h, Sv)
            note("S^T S = I", _rel(nrm(StSv - v), nrm(v)))
            note("<Sv,Su> = <v,u>", _rel(Sv @ Su - v @ u, nrm(u) * nrm(v)))
            note("A T = S - I", _rel(nrm(system.apply_A(Tv) - (Sv - v)), nrm(v)))
            TtU = system.int_exp_action_T(h, u)  # candidate T^T u = S^T T u
            note("S^T T = T^T", _rel(u @ Tv - TtU @ v, nrm(u) * nrm(v) * max(abs(h), 1.0)))
            note("A T^T = I - S^T",
                 _rel(nrm(system.apply_A(TtU) - (u - system.exp_action_T(h, u))), nrm(u)))
            if dense_oracle:
                S_ref, T_ref = pairs[h]
                note("S vs dense expm", _rel(nrm(Sv - S_ref @ v), nrm(v)))
                note("T vs dense expm", _rel(nrm(Tv - T_ref @ v), nrm(v) * max(abs(h), 1.0)))
    return StructureReport(dev, tol, seed, trials)
