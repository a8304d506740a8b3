import numpy as np
import pytest
import scipy.linalg

from geoexp.spectral import (D1, D2, D3, SpectralGrid, SpectralSymbol, Spectrum, SymbolError,
                             apply_symbol, dense_diff_matrix, dft, direct_dft, idft, phi1)
from oracles import phi1_series


def test_grid_requires_odd_N():
    with pytest.raises(ValueError):
        SpectralGrid(10)
    with pytest.raises(ValueError):
        SpectralGrid(1)
    g = SpectralGrid(11)
    assert g.n == 5
    assert np.isclose(g.dx, 2 * np.pi / 11)
    assert sorted(g.wavenumbers) == list(range(-5, 6))


def test_dft_constant_is_dc_only():
    g = SpectralGrid(11)
    s = dft(g, np.full(11, 3.5))
    assert np.isclose(s[0], 3.5)
    assert np.max(np.abs(np.delete(s.coefficients, g.index_of(0)))) < 1e-14


def test_dft_cosine():
    g = SpectralGrid(11)
    s = dft(g, np.cos(g.nodes))
    assert abs(s[1] - 0.5) < 1e-13 and abs(s[-1] - 0.5) < 1e-13
    rest = [s[k] for k in g.wavenumbers if abs(k) != 1]
    assert max(abs(c) for c in rest) < 1e-13


def test_dft_matches_direct_sum_and_round_trips():
    g = SpectralGrid(31)
    v = np.random.default_rng(1).standard_normal(31)
    s = dft(g, v)
    assert np.allclose(s.coefficients, direct_dft(g, v), atol=1e-14)
    back = idft(g, s)
    assert np.linalg.norm(back - v) / np.linalg.norm(v) < 1e-12


def test_idft_examples():
    g = SpectralGrid(11)
    c = np.zeros(11, complex)
    c[g.index_of(0)] = 1
    assert np.allclose(idft(g, c), 1.0, atol=1e-14)
    c = np.zeros(11, complex)
    c[g.index_of(1)] = c[g.index_of(-1)] = 0.5
    assert np.allclose(idft(g, c).real, np.cos(g.nodes), atol=1e-14)


def test_spectrum_round_trip():
    g = SpectralGrid(21)
    rng = np.random.default_rng(2)
    c = rng.standard_normal(21) + 1j * rng.standard_normal(21)
    assert np.allclose(dft(g, idft(g, c)).coefficients, c, atol=1e-12)


def test_spectrum_length_checked():
    with pytest.raises(ValueError):
        Spectrum(SpectralGrid(5), np.zeros(7))


def test_logical_ordering():
    g = SpectralGrid(7)
    k, _ = dft(g, np.cos(g.nodes)).logical()
    assert list(k) == [-3, -2, -1, 0, 1, 2, 3]


@pytest.mark.parametrize("N", [3, 11, 21, 31])
def test_dense_matrices_structure(N):
    g = SpectralGrid(N)
    d1 = dense_diff_matrix(g, 1)
    d2 = dense_diff_matrix(g, 2)
    assert np.all(np.diag(d1) == 0)
    assert np.allclose(d1, -d1.T, atol=1e-13)
    assert np.allclose(np.diag(d2), -g.n * (g.n + 1) / 3)
    assert np.allclose(d2, d2.T, atol=1e-12)


def test_dense_first_derivative_of_sine():
    g = SpectralGrid(21)
    assert np.allclose(dense_diff_matrix(g, 1) @ np.sin(g.nodes), np.cos(g.nodes), atol=1e-10)


@pytest.mark.parametrize("N", [11, 31])
def test_third_derivative_commutes(N):
    g = SpectralGrid(N)
    d1, d2, d3 = (dense_diff_matrix(g, k) for k in (1, 2, 3))
    scale = np.abs(d3).max()
    assert np.abs(d3 - d1 @ d2).max() / scale < 1e-9
    assert np.abs(d3 - d2 @ d1).max() / scale < 1e-9


def test_dense_matches_symbols():
    g = SpectralGrid(31)
    v = np.random.default_rng(3).standard_normal(31)
    for order, sym in ((1, D1), (2, D2), (3, D3)):
        ref = dense_diff_matrix(g, order) @ v
        assert np.linalg.norm(apply_symbol(g, sym, v) - ref) / np.linalg.norm(ref) < 1e-9


def test_bad_order():
    with pytest.raises(ValueError):
        dense_diff_matrix(SpectralGrid(5), 4)


def test_apply_symbol_identity_and_decay():
    g = SpectralGrid(11)
    v = np.random.default_rng(4).standard_normal(11)
    one = SpectralSymbol(lambda k: np.ones(k.shape), "one")
    assert np.allclose(apply_symbol(g, one, v), v, atol=1e-14)
    heat = D2.compose(lambda lam: np.exp(0.1 * lam))
    assert np.allclose(apply_symbol(g, heat, np.cos(g.nodes)), np.exp(-0.1) * np.cos(g.nodes),
                       atol=1e-14)


def test_apply_symbol_vs_expm():
    g = SpectralGrid(11)
    h = 0.3
    v = np.random.default_rng(5).standard_normal(11)
    sym = SpectralSymbol(lambda k: np.exp(1j * k.astype(float) ** 3 * h))
    ref = scipy.linalg.expm(-dense_diff_matrix(g, 3) * h) @ v
    assert np.linalg.norm(apply_symbol(g, sym, v) - ref) / np.linalg.norm(ref) < 1e-9


def test_apply_symbol_rejects_non_hermitian_symbol():
    g = SpectralGrid(11)
    bad = SpectralSymbol(lambda k: np.where(k == 1, 1j, 1.0))
    with pytest.raises(SymbolError):
        apply_symbol(g, bad, np.cos(g.nodes))


def test_phi1_values():
    assert phi1(0) == 1
    assert abs(phi1(1) - (np.e - 1)) < 1e-15
    z = 1e-6j
    assert abs(phi1(z) - phi1_series(z)) < 1e-15
    zs = np.array([0, 1e-5, -3e-5j, 0.5, -2 + 1j, 10j])
    assert np.allclose(phi1(zs), [phi1_series(z) for z in zs], rtol=1e-13, atol=0)
