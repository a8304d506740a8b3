import numpy as np
import pytest

from geoexp.psystem import (DenseTestSystem, State, check_structure, harmonic_oscillator,
                            random_dense_system)
from oracles import expm_series_pair


def test_state_is_read_only_copy():
    q = np.array([1.0, 2.0])
    s = State(q, 0.5)
    q[0] = 9
    assert s.q[0] == 1.0
    with pytest.raises(ValueError):
        s.q[0] = 3.0
    assert s.dim == 2


def test_state_rejects_nonfinite():
    with pytest.raises(ValueError):
        State(np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        State(np.array([np.inf]))


def test_oscillator_structure():
    rep = check_structure(harmonic_oscillator(), tol=1e-12)
    assert rep.passed, str(rep)


def test_random_dense_structure():
    rep = check_structure(random_dense_system(3, seed=4), tol=1e-10)
    assert rep.passed, str(rep)


def test_corrupted_D_is_flagged():
    D = np.eye(4)
    D[0, 1] = 0.3
    J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    rep = check_structure(DenseTestSystem(J, D, nonlinear=False), tol=1e-10)
    assert not rep.passed
    assert any("symm" in name for name in rep.failed)


def test_non_skew_J_rejected_or_flagged():
    J = np.array([[0.0, 1.0], [1.0, 0.0]])
    try:
        sys_ = DenseTestSystem(J, np.eye(2), nonlinear=False)
    except ValueError:
        return
    assert not check_structure(sys_).passed


def test_dense_actions_match_series():
    sys_ = random_dense_system(2, seed=7, nonlinear=False)
    A = sys_.dense_J() @ sys_.dense_D()
    v = np.random.default_rng(0).standard_normal(4)
    for h in (0.0, 0.05, 0.4, -0.2):
        S, T = expm_series_pair(A, h)
        assert np.allclose(sys_.exp_action(h, v), S @ v, atol=1e-12)
        assert np.allclose(sys_.int_exp_action(h, v), T @ v, atol=1e-12)


def test_hamiltonian_split():
    sys_ = random_dense_system(3, seed=1)
    q = np.random.default_rng(2).standard_normal(6)
    H = sys_.hamiltonian(q)
    assert np.isclose(H, 0.5 * q @ sys_.dense_D() @ q + sys_.V(q))
    assert np.allclose(sys_.grad_H(q), sys_.dense_D() @ q + sys_.grad_V(q))
    assert np.allclose(sys_.vector_field(q), sys_.dense_J() @ sys_.grad_H(q))


def test_linear_switch_zeroes_potential():
    sys_ = random_dense_system(2, seed=3, nonlinear=False)
    q = np.ones(4)
    assert sys_.V(q) == 0
    assert np.all(sys_.grad_V(q) == 0)
    assert np.all(sys_.f(q) == 0)


def test_hessian_matches_fd():
    sys_ = random_dense_system(2, seed=5)
    assert sys_.has_hessian
    q = np.random.default_rng(6).standard_normal(4)
    eps = 1e-6
    fd = np.column_stack([(sys_.grad_V(q + eps * e) - sys_.grad_V(q - eps * e)) / (2 * eps)
                          for e in np.eye(4)])
    assert np.allclose(sys_.hessian_V(q), fd, atol=1e-7)


def test_dimension_limit():
    with pytest.raises(ValueError):
        DenseTestSystem(np.zeros((18, 18)), np.eye(18))
