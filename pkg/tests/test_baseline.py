import numpy as np
import pytest

from branchlearn.baseline import fit_least_squares, stack
from branchlearn.core import TrainingExample


def make(rng, n, alpha, noise=0.0):
    out = []
    for _ in range(n):
        a = rng.uniform(0, 10, (5, len(alpha)))
        out.append(TrainingExample(a, a @ alpha + rng.normal(0, noise, 5)))
    return out


def test_recovers_linear_truth():
    alpha = np.array([1.5, -2.0, 0.25, 4.0])
    fit = fit_least_squares(make(np.random.default_rng(0), 20, alpha))
    assert np.allclose(fit.alpha, alpha, atol=1e-8)
    assert fit.residual_norm < 1e-8


def test_single_scalar_example():
    fit = fit_least_squares([TrainingExample(np.array([[2.0]]), np.array([6.0]))])
    assert fit.alpha[0] == pytest.approx(3.0)


def test_duplicate_rows_do_not_change_fit():
    data = make(np.random.default_rng(1), 8, np.array([1.0, 2.0]), noise=1.0)
    a = fit_least_squares(data).alpha
    b = fit_least_squares(data + data).alpha
    assert np.allclose(a, b)


def test_empty_data():
    with pytest.raises(ValueError):
        fit_least_squares([])


def test_local_optimality():
    rng = np.random.default_rng(2)
    data = make(rng, 10, np.array([1.0, -1.0, 3.0]), noise=2.0)
    fit = fit_least_squares(data)
    A, y = stack(data)
    for _ in range(100):
        other = fit.alpha + rng.normal(0, 0.1, 3)
        assert np.linalg.norm(A @ other - y) >= fit.residual_norm - 1e-9


def test_rank_deficient_uses_ridge():
    a = np.array([[1.0, 1.0], [2.0, 2.0]])
    fit = fit_least_squares([TrainingExample(a, np.array([2.0, 4.0]))])
    assert np.all(np.isfinite(fit.alpha))
    assert np.allclose(a @ fit.alpha, [2.0, 4.0], atol=1e-6)
