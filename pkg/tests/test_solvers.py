import numpy as np
import pytest

from geoexp.solvers import (SolverConfig, SolverError, fd_jacobian, fixed_point_solve,
                            newton_solve)


def test_config_validation():
    for bad in (dict(tolerance=0), dict(max_iterations=0), dict(divergence_factor=1),
                dict(kind="anderson")):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def test_fixed_point_contraction():
    res = fixed_point_solve(lambda x: 0.5 * x + 1, np.zeros(1))
    assert res.converged and not res.diverged
    assert abs(res.solution[0] - 2.0) < 1e-12
    assert res.iterations <= 45


def test_fixed_point_exact_guess_takes_one_iteration():
    res = fixed_point_solve(lambda x: np.full(3, 4.0), np.full(3, 4.0))
    assert res.converged and res.iterations == 1


def test_fixed_point_expansion_flagged():
    res = fixed_point_solve(lambda x: 2 * x + 1, np.zeros(1), SolverConfig(max_iterations=100))
    assert not res.converged and res.diverged
    assert res.iterations < 100


def test_fixed_point_nonfinite_flagged():
    res = fixed_point_solve(lambda x: x * np.inf, np.ones(2))
    assert res.diverged and not res.converged
    assert np.all(np.isfinite(res.solution))


def test_fixed_point_unpacks():
    x, its, res, ok = fixed_point_solve(lambda x: 0.5 * x, np.ones(1))
    assert ok and its > 1 and res <= 1e-12


def test_newton_scalar():
    res = newton_solve(lambda x: x ** 2 - 4, lambda x: np.diag(2 * x), np.array([3.0]))
    assert res.converged
    assert abs(res.solution[0] - 2.0) < 1e-12
    assert res.iterations <= 8


def test_newton_linear_one_step():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((5, 5)) + 5 * np.eye(5)
    b = rng.standard_normal(5)
    res = newton_solve(lambda x: M @ x - b, lambda x: M, np.zeros(5))
    assert res.converged and res.iterations == 1
    assert np.allclose(M @ res.solution, b)


def test_newton_singular_raises():
    with pytest.raises(SolverError):
        newton_solve(lambda x: x ** 2 + 1, lambda x: np.zeros((1, 1)), np.array([1.0]))


def test_fd_jacobian():
    f = lambda x: np.array([x[0] * x[1], np.sin(x[0])])
    x = np.array([0.3, -1.2])
    assert np.allclose(fd_jacobian(f, x), [[x[1], x[0]], [np.cos(x[0]), 0]], atol=1e-8)

