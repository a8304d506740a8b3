"""Property-based checks over random states, grids and timesteps."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from geoexp.harness.experiments import fmt
from geoexp.integrators import energy_exp_step, exp_midpoint_step
from geoexp.models import KdvSystem, NlsSystem
from geoexp.psystem import State
from geoexp.solvers import SolverConfig
from geoexp.spectral import SpectralGrid, dft, direct_dft, idft, phi1
from geoexp.verify import timestep_grid
from oracles import phi1_series

odd_N = st.integers(1, 20).map(lambda n: 2 * n + 1)
finite = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
small_h = st.floats(1e-4, 0.05).flatmap(lambda h: st.sampled_from([h, -h]))
TIGHT = SolverConfig(tolerance=1e-13)


def vec(n):
    return arrays(np.float64, n, elements=finite)


@settings(max_examples=40, deadline=None)
@given(odd_N.flatmap(lambda N: st.tuples(st.just(N), vec(N))))
def test_dft_round_trip_and_oracle(args):
    N, v = args
    g = SpectralGrid(N)
    s = dft(g, v)
    assert np.allclose(s.coefficients, direct_dft(g, v), atol=1e-12)
    assert np.allclose(idft(g, s).real, v, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_phi1_matches_series(z):
    assert abs(phi1(z) - phi1_series(z)) <= 1e-13 * max(1.0, abs(phi1_series(z)))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 10).map(lambda n: 2 * n + 1), st.floats(-5, 5), st.integers(0, 2 ** 31))
def test_nls_exp_isometry_and_group(N, h, seed):
    sys_ = NlsSystem(N)
    z = np.random.default_rng(seed).standard_normal(2 * N)
    a = sys_.exp_action(h, z)
    assert abs(np.linalg.norm(a) - np.linalg.norm(z)) <= 1e-11 * np.linalg.norm(z)
    assert np.allclose(sys_.exp_action(-h, a), z, atol=1e-11)
    assert np.allclose(sys_.exp_action(h / 2, sys_.exp_action(h / 2, z)), a, atol=1e-11)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 15).map(lambda n: 2 * n + 1), st.floats(-1, 1), st.integers(0, 2 ** 31))
def test_kdv_variation_of_constants_identity(N, h, seed):
    # A T(h) v = S(h) v - v
    sys_ = KdvSystem(N, nu=0.5)
    v = np.random.default_rng(seed).standard_normal(N)
    lhs = sys_.apply_A(sys_.int_exp_action(h, v))
    rhs = sys_.exp_action(h, v) - v
    assert np.allclose(lhs, rhs, atol=1e-10 * max(1.0, np.abs(lhs).max()))


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["nls", "kdv"]), st.integers(0, 2 ** 31), st.floats(0.01, 3))
def test_discrete_gradient_identity(model, seed, amp):
    sys_ = NlsSystem(11) if model == "nls" else KdvSystem(31)
    rng = np.random.default_rng(seed)
    q, r = amp * rng.standard_normal(sys_.dim), amp * rng.standard_normal(sys_.dim)
    g = sys_.discrete_grad_V(q, r)
    scale = abs(sys_.V(q)) + abs(sys_.V(r)) + 1
    assert abs(g @ (r - q) - (sys_.V(r) - sys_.V(q))) <= 1e-12 * scale
    assert np.allclose(g, sys_.discrete_grad_V(r, q), atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), small_h, st.floats(0.05, 0.6))
def test_energy_exp_conserves_random_nls_state(seed, h, amp):
    sys_ = NlsSystem(11)
    rng = np.random.default_rng(seed)
    q = amp * (1 + 0.2 * rng.standard_normal(22))
    out = energy_exp_step(sys_, State(q), h, TIGHT)
    if out.converged:
        assert abs(sys_.hamiltonian(out.state.q) - sys_.hamiltonian(q)) <= 1e-11


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), small_h)
def test_exp_midpoint_conserves_mass(seed, h):
    # the plane-wave symmetry of NLS gives the quadratic invariant sum(q^2 + p^2)
    sys_ = NlsSystem(11)
    q = 0.5 * np.random.default_rng(seed).standard_normal(22)
    out = exp_midpoint_step(sys_, State(q), h, TIGHT)
    if out.converged:
        assert abs(np.sum(out.state.q ** 2) - np.sum(q ** 2)) <= 1e-11


@given(st.floats(1e-7, 1.0), st.floats(1.0, 1e3))
def test_timestep_grid_properties(lo, span):
    hi = min(lo * span, 10.0)
    g = timestep_grid(lo, hi)
    assert g == sorted(g)
    assert all(lo * (1 - 1e-12) <= h <= hi * (1 + 1e-12) for h in g)
    for h in g:
        m = float(f"{h:.0e}".split("e")[0])
        assert m in (1, 2, 4, 5, 6, 8)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_float_round_trip(x):
    assert float(fmt(x)) == x
