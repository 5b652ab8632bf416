"""Row-sparse nonnegative regression (ADMM) used as the initializer."""

import numpy as np
import pytest

from hsunmix.csr import CsrParams, csr_objective, csr_solve, group_shrink


def _instance(rng, bands, size, pixels, rows):
    D = rng.uniform(0.2, 1.0, size=(bands, size))
    C = np.zeros((size, pixels))
    live = rng.choice(size, size=rows, replace=False)
    C[live] = rng.uniform(0.0, 1.0, size=(rows, pixels))
    return D, C, D @ C


def test_group_shrink_cases():
    assert np.array_equal(group_shrink(np.array([0.3, 0.4]), 2.5), np.zeros(2))
    row = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(group_shrink(row, 0.0), row)
    assert np.allclose(
        group_shrink(np.array([3.0, 4.0]), 2.5), np.array([1.5, 2.0]), atol=1e-15
    )


def test_group_shrink_nonexpansive():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.normal(size=6)
        b = rng.normal(size=6)
        t = rng.uniform(0.0, 2.0)
        lhs = np.linalg.norm(group_shrink(a, t) - group_shrink(b, t))
        assert lhs <= np.linalg.norm(a - b) + 1e-12


def test_group_shrink_validation():
    with pytest.raises(ValueError):
        group_shrink(np.ones((2, 2)), 0.5)
    with pytest.raises(ValueError):
        group_shrink(np.ones(3), -0.1)


def test_huge_lambda_zeroes_coefficients():
    rng = np.random.default_rng(1)
    D, _, Y = _instance(rng, 8, 5, 6, 3)
    result = csr_solve(Y, D, CsrParams(lam=1e8))
    assert np.max(np.abs(result.C)) <= 1e-12


def test_tiny_lambda_matches_clipped_least_squares():
    """Vanishing regularizer on a clean full-column-rank system."""
    rng = np.random.default_rng(2)
    D, C_true, Y = _instance(rng, 8, 5, 6, 5)
    result = csr_solve(Y, D, CsrParams(lam=1e-10, tol=1e-10, max_iter=20000))
    ref = np.maximum(np.linalg.lstsq(D, Y, rcond=None)[0], 0.0)
    rel = np.linalg.norm(result.C - ref) / np.linalg.norm(ref)
    assert rel <= 1e-3


def test_objective_matches_subgradient_oracle():
    """ADMM objective agrees with a projected-subgradient reference."""
    rng = np.random.default_rng(3)
    D, _, Y = _instance(rng, 8, 5, 6, 2)
    lam = 0.3
    result = csr_solve(Y, D, CsrParams(lam=lam, tol=1e-9, max_iter=10000))
    admm_obj = csr_objective(Y, D, result.C, lam)

    # generic projected subgradient with 1/(Lip * sqrt(t)) steps
    C = np.zeros_like(result.C)
    best = csr_objective(Y, D, C, lam)
    lipschitz = 2.0 * np.linalg.norm(D.T @ D, 2)
    for t in range(1, 30001):
        resid = D @ C - Y
        grad = 2.0 * D.T @ resid
        norms = np.linalg.norm(C, axis=1, keepdims=True)
        grad += lam * np.where(norms > 0.0, C / np.maximum(norms, 1e-300), 0.0)
        C = np.maximum(C - grad / (lipschitz * np.sqrt(t)), 0.0)
        best = min(best, csr_objective(Y, D, C, lam))
    assert abs(admm_obj - best) <= 1e-3 * best


def test_objective_not_worse_than_zero():
    rng = np.random.default_rng(4)
    D, _, Y = _instance(rng, 10, 7, 9, 3)
    result = csr_solve(Y, D)
    assert csr_objective(Y, D, result.C, 0.1) <= float(np.sum(Y * Y)) + 1e-9


def test_output_nonnegative_and_converged():
    rng = np.random.default_rng(5)
    D, _, Y = _instance(rng, 10, 6, 8, 3)
    result = csr_solve(Y, D)
    assert np.all(result.C >= 0.0)
    assert result.converged
    assert result.primal_residual <= 1e-5
    assert result.dual_residual <= 1e-5


def test_max_iter_reports_nonconvergence():
    rng = np.random.default_rng(6)
    D, _, Y = _instance(rng, 10, 6, 8, 3)
    result = csr_solve(Y, D, CsrParams(max_iter=3))
    assert not result.converged
    assert result.iterations == 3
    assert np.all(np.isfinite(result.C))


def test_param_and_shape_validation():
    with pytest.raises(ValueError):
        CsrParams(lam=0.0)
    with pytest.raises(ValueError):
        CsrParams(rho=-1.0)
    with pytest.raises(ValueError):
        CsrParams(max_iter=0)
    rng = np.random.default_rng(7)
    D = rng.uniform(0.2, 1.0, size=(8, 5))
    with pytest.raises(ValueError):
        csr_solve(rng.normal(size=(7, 6)), D)
    with pytest.raises(ValueError):
        csr_solve(rng.normal(size=6), D)
    with pytest.raises(ValueError):
        csr_solve(np.full((8, 6), np.nan), D)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
