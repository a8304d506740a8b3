"""Fourier pseudospectral tools on odd-length periodic grids over [0, 2*pi).

Conventions
-----------
The forward transform carries the 1/N factor::

    v_hat[k] = (1/N) * sum_j v[j] * exp(-1j * k * x[j])
    v[j]     = sum_k v_hat[k] * exp(1j * k * x[j])

which is the opposite of the numpy default (``np.fft.fft`` is unnormalised on the
forward side). Spectra are stored in FFT order, k = 0, 1, ..., n, -n, ..., -1.

Every differentiation operator is diagonal in this basis with eigenvalues
``1j*k`` (first derivative), ``-k**2`` (second) and ``-1j*k**3`` (third), so any
analytic function of them acts on a nodal vector through one forward and one
inverse FFT.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "SpectralGrid",
    "Spectrum",
    "SpectralSymbol",
    "SymbolError",
    "dft",
    "idft",
    "direct_dft",
    "dense_diff_matrix",
    "apply_symbol",
    "phi1",
    "D1",
    "D2",
    "D3",
]

# relative size of the discarded imaginary part before a symbol is rejected
IMAG_RESIDUE_TOL = 1e-10

_PHI1_SWITCH = 1e-4
_PHI1_TERMS = 11  # m = 0..10


class SymbolError(ValueError):
    """A symbol applied to a real vector produced a non-real result."""


@dataclass(frozen=True)
class SpectralGrid:
    """Equispaced periodic grid with ``N = 2n + 1`` nodes on [0, 2*pi)."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3 or self.N % 2 == 0:
            raise ValueError(f"grid size must be an odd integer >= 3, got {self.N!r}")

    @property
    def n(self) -> int:
        return (self.N - 1) // 2

    @property
    def dx(self) -> float:
        return 2 * np.pi / self.N

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N) * self.dx

    @property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers in storage (FFT) order."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N).round().astype(int)

    def index_of(self, k: int) -> int:
        """Storage index of logical wavenumber ``k``."""
        if abs(k) > self.n:
            raise IndexError(f"wavenumber {k} outside [-{self.n}, {self.n}]")
        return k % self.N

    def _check(self, v, what="vector"):
        v = np.asarray(v)
        if v.shape != (self.N,):
            raise ValueError(f"{what} must have shape ({self.N},), got {v.shape}")
        return v


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients of a grid function, stored in FFT order."""

    grid: SpectralGrid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.shape(self.coefficients) != (self.grid.N,):
            raise ValueError(
                f"spectrum length {np.shape(self.coefficients)} does not match grid N={self.grid.N}"
            )

    def __getitem__(self, k: int) -> complex:
        return complex(self.coefficients[self.grid.index_of(k)])

    def logical(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(k, coefficients)`` sorted by k from -n to n."""
        k = self.grid.wavenumbers
        order = np.argsort(k)
        return k[order], self.coefficients[order]


@dataclass(frozen=True)
class SpectralSymbol:
    """Eigenvalue rule ``k -> lambda(k)`` of an operator diagonal in Fourier space."""

    rule: Callable[[np.ndarray], np.ndarray]
    label: str = "custom"

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k)
        return np.broadcast_to(np.asarray(self.rule(k), dtype=complex), k.shape)

    def compose(self, f: Callable[[np.ndarray], np.ndarray], label: str | None = None):
        """Symbol of ``f(op)``, for analytic ``f`` applied to eigenvalues."""
        rule = self.rule
        return SpectralSymbol(lambda k: f(np.asarray(rule(k), dtype=complex)),
                              label or f"f({self.label})")


D1 = SpectralSymbol(lambda k: 1j * k, "D1")
D2 = SpectralSymbol(lambda k: -(k.astype(float) ** 2) + 0j, "D2")
D3 = SpectralSymbol(lambda k: -1j * k.astype(float) ** 3, "D3")


def dft(grid: SpectralGrid, values) -> Spectrum:
    """Forward transform with the 1/N normalisation on this side."""
    v = grid._check(values, "values")
    return Spectrum(grid, np.fft.fft(v) / grid.N)


def idft(grid: SpectralGrid, spectrum) -> np.ndarray:
    """Nodal values of the trigonometric interpolant with the given coefficients."""
    coeffs = spectrum.coefficients if isinstance(spectrum, Spectrum) else spectrum
    coeffs = grid._check(coeffs, "spectrum")
    return np.fft.ifft(coeffs) * grid.N


def direct_dft(grid: SpectralGrid, values) -> np.ndarray:
    """O(N^2) summation of the forward transform, FFT order. Used as a test oracle."""
    v = grid._check(values, "values")
    k = grid.wavenumbers[:, None]
    x = grid.nodes[None, :]
    return (np.exp(-1j * k * x) @ v) / grid.N


def dense_diff_matrix(grid: SpectralGrid, order: int) -> np.ndarray:
    """Nodal Fourier differentiation matrix of order 1, 2 or 3.

    Order 3 is returned as the product ``D1 @ D2``.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order!r}")
    if order == 3:
        return dense_diff_matrix(grid, 1) @ dense_diff_matrix(grid, 2)
    idx = np.arange(grid.N)
    m = idx[:, None] - idx[None, :]
    off = m != 0
    half = np.where(off, m * grid.dx / 2, 1.0)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    out = np.empty((grid.N, grid.N))
    if order == 1:
        out[:] = sign / (2 * np.sin(half))
        out[~off] = 0.0
    else:
        out[:] = -sign * np.cos(half) / (2 * np.sin(half) ** 2)
        out[~off] = -grid.n * (grid.n + 1) / 3
    return out


def apply_symbol(grid: SpectralGrid, symbol, v) -> np.ndarray:
    """Apply the operator with eigenvalues ``symbol(k)`` to a real nodal vector.

    ``symbol`` may be a :class:`SpectralSymbol` or a precomputed array of
    eigenvalues in FFT order. Raises :class:`SymbolError` when the result is not
    real to within ``IMAG_RESIDUE_TOL`` relative to its norm.
    """
    v = grid._check(v)
    lam = symbol(grid.wavenumbers) if callable(symbol) else np.asarray(symbol)
    out = np.fft.ifft(lam * np.fft.fft(v))
    scale = np.linalg.norm(out)
    resid = np.linalg.norm(out.imag)
    if resid > IMAG_RESIDUE_TOL * max(scale, np.finfo(float).tiny):
        raise SymbolError(
            f"symbol {getattr(symbol, 'label', '')!s} is not conjugate symmetric: "
            f"imaginary residue {resid:.3e} vs norm {scale:.3e}"
        )
    return out.real.copy()


def phi1(z):
    """``(exp(z) - 1) / z`` with the removable singularity at 0 filled in.

    Switches to a truncated Taylor series for ``|z| < 1e-4``. Accepts scalars or
    arrays; scalar in, scalar out.
    """
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _PHI1_SWITCH
    safe = np.where(small, 1.0, z)
    out = np.where(small, 0.0, np.expm1(safe) / safe)
    if np.any(small):
        zs = z[small] if z.ndim else z
        acc = np.zeros_like(zs)
        term = np.ones_like(zs)
        for m in range(_PHI1_TERMS):
            # term = z^m / (m+1)!
            acc = acc + term
            term = term * zs / (m + 2)
        if z.ndim:
            out[small] = acc
        else:
            out = acc
    return complex(out) if scalar else out
