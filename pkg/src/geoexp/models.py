"""Pseudospectral semi-discretisations of the cubic NLS and KdV equations.

NLS, ``i psi_t + psi_xx - 2 |psi|^2 psi = 0`` with ``psi = q + i p``::

    z = (q | p),  J = [[0, I], [-I, 0]],  D = diag(-D2, -D2),
    V(z) = 1/2 sum (q^2 + p^2)^2

KdV, ``u_t + u u_x + nu u_xxx = 0``::

    J = -D1,  D = nu D2,  A = -nu D3,  V(q) = 1/6 sum q^3

Every linear operator is diagonal in Fourier space, so ``exp(A h)`` and
``int_0^h exp(A tau) dtau`` are applied mode by mode via real FFTs. Hamiltonians
are plain nodal sums without a quadrature weight.
"""

from __future__ import annotations

import numpy as np

from .psystem import PoissonSystem, State
from .spectral import SpectralGrid, dense_diff_matrix, phi1

__all__ = [
    "NlsSystem",
    "KdvSystem",
    "DEFAULT_NU",
    "nls_exp_action",
    "nls_intexp_action",
    "nls_discrete_grad",
    "kdv_exp_action",
    "kdv_intexp_action",
    "kdv_discrete_grad",
    "standard_initial_condition",
    "make_system",
]

DEFAULT_NU = 5e-4

_CACHE_LIMIT = 32


def _as_grid(grid) -> SpectralGrid:
    return grid if isinstance(grid, SpectralGrid) else SpectralGrid(int(grid))


def _half_wavenumbers(grid: SpectralGrid) -> np.ndarray:
    return np.arange(grid.n + 1, dtype=float)


class _FactorCache:
    """Per-timestep cache of Fourier multipliers; cleared when it grows."""

    def __init__(self, build):
        self._build = build
        self._store = {}

    def __call__(self, h):
        h = float(h)
        out = self._store.get(h)
        if out is None:
            if len(self._store) >= _CACHE_LIMIT:
                self._store.clear()
            out = self._store[h] = self._build(h)
        return out


def _nls_rotation(grid, h):
    k2 = _half_wavenumbers(grid) ** 2
    return np.cos(k2 * h), np.sin(k2 * h)


def _nls_integral(grid, h):
    # int_0^h exp(-i k^2 tau) dtau = a - i b
    k2 = _half_wavenumbers(grid) ** 2
    w = h * phi1(-1j * k2 * h)
    return w.real, -w.imag


def _rotate(grid, c, s, z):
    N = grid.N
    qh = np.fft.rfft(z[:N])
    ph = np.fft.rfft(z[N:])
    out = np.empty(2 * N)
    out[:N] = np.fft.irfft(c * qh + s * ph, N)
    out[N:] = np.fft.irfft(c * ph - s * qh, N)
    return out


def nls_exp_action(grid, h: float, z) -> np.ndarray:
    """``exp(A h) z`` for NLS: mode k rotates ``(q_k, p_k)`` by angle ``k^2 h``."""
    grid = _as_grid(grid)
    c, s = _nls_rotation(grid, h)
    return _rotate(grid, c, s, np.asarray(z, dtype=float))


def nls_intexp_action(grid, h: float, z) -> np.ndarray:
    """``T(h) z`` for NLS, block ``[[a, b], [-b, a]]`` per mode; k = 0 gives ``h I``."""
    grid = _as_grid(grid)
    a, b = _nls_integral(grid, h)
    return _rotate(grid, a, b, np.asarray(z, dtype=float))


def nls_discrete_grad(z, z_new) -> np.ndarray:
    """Average-based discrete gradient of ``V = 1/2 sum (q^2 + p^2)^2``."""
    z = np.asarray(z, dtype=float)
    z_new = np.asarray(z_new, dtype=float)
    mean = 0.5 * (z + z_new)
    sq_mean = 0.5 * (z * z + z_new * z_new)
    N = z.shape[0] // 2
    r2 = sq_mean[:N] + sq_mean[N:]
    return 2.0 * np.concatenate([r2, r2]) * mean


def kdv_exp_action(grid, nu: float, h: float, q) -> np.ndarray:
    """``exp(-nu D3 h) q``: multiplier ``exp(i nu k^3 h)``."""
    grid = _as_grid(grid)
    k = _half_wavenumbers(grid)
    return np.fft.irfft(np.exp(1j * nu * k ** 3 * h) * np.fft.rfft(q), grid.N)


def kdv_intexp_action(grid, nu: float, h: float, q) -> np.ndarray:
    """``int_0^h exp(-nu D3 tau) dtau q``: multiplier ``h phi1(i nu k^3 h)``."""
    grid = _as_grid(grid)
    k = _half_wavenumbers(grid)
    return np.fft.irfft(h * phi1(1j * nu * k ** 3 * h) * np.fft.rfft(q), grid.N)


def kdv_discrete_grad(q, q_new) -> np.ndarray:
    """``(q^2 + q q' + q'^2) / 6``, the exact discrete gradient of ``sum q^3 / 6``."""
    q = np.asarray(q, dtype=float)
    q_new = np.asarray(q_new, dtype=float)
    return (q * q + q * q_new + q_new * q_new) / 6.0


class NlsSystem(PoissonSystem):
    """Cubic defocusing NLS on ``N`` nodes; state ``(Re psi | Im psi)`` of length 2N."""

    name = "nls"

    def __init__(self, grid, nonlinear: bool = True):
        self.grid = _as_grid(grid)
        self.N = self.grid.N
        self.dim = 2 * self.N
        self.nonlinear = nonlinear
        self._k2 = _half_wavenumbers(self.grid) ** 2
        self._rot = _FactorCache(lambda h: _nls_rotation(self.grid, h))
        self._int = _FactorCache(lambda h: _nls_integral(self.grid, h))

    def __repr__(self):
        return f"NlsSystem(N={self.N}, nonlinear={self.nonlinear})"

    def apply_J(self, v):
        N = self.N
        return np.concatenate([v[N:], -v[:N]])

    def apply_D(self, v):
        N = self.N
        out = np.empty(2 * N)
        out[:N] = np.fft.irfft(self._k2 * np.fft.rfft(v[:N]), N)
        out[N:] = np.fft.irfft(self._k2 * np.fft.rfft(v[N:]), N)
        return out

    def exp_action(self, h, v):
        if h == 0:
            return np.array(v, dtype=float)
        c, s = self._rot(h)
        return _rotate(self.grid, c, s, v)

    def int_exp_action(self, h, v):
        if h == 0:
            return np.zeros(np.shape(v))
        a, b = self._int(h)
        return _rotate(self.grid, a, b, v)

    def _V(self, z):
        N = self.N
        r2 = z[:N] ** 2 + z[N:] ** 2
        return 0.5 * np.sum(r2 * r2)

    def _grad_V(self, z):
        N = self.N
        r2 = z[:N] ** 2 + z[N:] ** 2
        return 2.0 * np.concatenate([r2, r2]) * z

    def _discrete_grad_V(self, z, z_new):
        return nls_discrete_grad(z, z_new)

    def _hessian_V(self, z):
        N = self.N
        q, p = z[:N], z[N:]
        r2 = q * q + p * p
        H = np.zeros((2 * N, 2 * N))
        i = np.arange(N)
        H[i, i] = 2 * r2 + 4 * q * q
        H[i + N, i + N] = 2 * r2 + 4 * p * p
        H[i, i + N] = H[i + N, i] = 4 * q * p
        return H

    def dense_J(self):
        N = self.N
        Z, I = np.zeros((N, N)), np.eye(N)
        return np.block([[Z, I], [-I, Z]])

    def dense_D(self):
        N = self.N
        D2 = dense_diff_matrix(self.grid, 2)
        Z = np.zeros((N, N))
        return np.block([[-D2, Z], [Z, -D2]])


class KdvSystem(PoissonSystem):
    """KdV with dispersion ``nu`` on ``N`` nodes."""

    name = "kdv"

    def __init__(self, grid, nu: float = DEFAULT_NU, nonlinear: bool = True):
        if not nu > 0:
            raise ValueError(f"nu must be positive, got {nu!r}")
        self.grid = _as_grid(grid)
        self.N = self.grid.N
        self.dim = self.N
        self.nu = float(nu)
        self.nonlinear = nonlinear
        k = _half_wavenumbers(self.grid)
        self._minus_ik = -1j * k
        self._nu_k2 = -self.nu * k ** 2
        self._exp = _FactorCache(lambda h: np.exp(1j * self.nu * k ** 3 * h))
        self._int = _FactorCache(lambda h: h * phi1(1j * self.nu * k ** 3 * h))

    def __repr__(self):
        return f"KdvSystem(N={self.N}, nu={self.nu:g}, nonlinear={self.nonlinear})"

    def _mult(self, m, v):
        return np.fft.irfft(m * np.fft.rfft(v), self.N)

    def apply_J(self, v):
        return self._mult(self._minus_ik, v)

    def apply_D(self, v):
        return self._mult(self._nu_k2, v)

    def exp_action(self, h, v):
        if h == 0:
            return np.array(v, dtype=float)
        return self._mult(self._exp(h), v)

    def int_exp_action(self, h, v):
        if h == 0:
            return np.zeros(np.shape(v))
        return self._mult(self._int(h), v)

    def _V(self, q):
        return np.sum(q ** 3) / 6.0

    def _grad_V(self, q):
        return 0.5 * q * q

    def _discrete_grad_V(self, q, q_new):
        return kdv_discrete_grad(q, q_new)

    def _hessian_V(self, q):
        return np.diag(np.asarray(q, dtype=float))

    def dense_J(self):
        return -dense_diff_matrix(self.grid, 1)

    def dense_D(self):
        return self.nu * dense_diff_matrix(self.grid, 2)


def standard_initial_condition(model: str, grid) -> State:
    """Smooth single-mode initial data: NLS ``psi = 0.5 + 0.1 cos x``, KdV ``u = cos x``."""
    grid = _as_grid(grid)
    x = grid.nodes
    if model == "nls":
        return State(np.concatenate([0.5 + 0.1 * np.cos(x), np.zeros(grid.N)]))
    if model == "kdv":
        return State(np.cos(x))
    raise ValueError(f"unknown model {model!r}")


def make_system(model: str, N: int, nu: float = DEFAULT_NU, nonlinear: bool = True
                ) -> PoissonSystem:
    if model == "nls":
        return NlsSystem(N, nonlinear=nonlinear)
    if model == "kdv":
        return KdvSystem(N, nu=nu, nonlinear=nonlinear)
    raise ValueError(f"unknown model {model!r}")
