"""Signal-subspace estimation and complement projection."""

import math

import numpy as np
import pytest

from hsunmix.subspace import (
    SignalSubspace,
    estimate_order,
    estimate_subspace,
    project_complement,
)


def _mixture(rng, bands, pixels, materials):
    A = rng.uniform(0.1, 1.0, size=(bands, materials))
    S = rng.dirichlet(np.ones(materials), size=pixels).T
    return A, S


def test_noiseless_span_recovery():
    """Noiseless Y = A S with full-row-rank S recovers span(A)."""
    rng = np.random.default_rng(11)
    A, S = _mixture(rng, 20, 200, 4)
    sub = estimate_subspace(A @ S, 4)
    for n in range(A.shape[1]):
        a = A[:, n]
        resid = np.linalg.norm(project_complement(sub, a))
        assert resid <= 1e-8 * np.linalg.norm(a)


def test_identity_observations_identity_projector():
    """Y = I at order 3 spans all of R^3, so the projector is I."""
    sub = estimate_subspace(np.eye(3), 3)
    P = sub.basis @ sub.basis.T
    assert np.allclose(P, np.eye(3), atol=1e-12)


def test_principal_angle_under_noise():
    """SNR 35 dB mixture: estimated span within 2 degrees of span(A)."""
    rng = np.random.default_rng(1)
    A, S = _mixture(rng, 20, 100, 4)
    X = A @ S
    sigma2 = float(np.sum(X * X)) / (20 * 100 * 10.0 ** 3.5)
    Y = X + rng.normal(0.0, math.sqrt(sigma2), size=X.shape)
    sub = estimate_subspace(Y, 4)
    Qa = np.linalg.qr(A)[0]
    cosines = np.linalg.svd(Qa.T @ sub.basis, compute_uv=False)
    worst = math.degrees(math.acos(min(1.0, cosines.min())))
    assert worst < 2.0


def test_subspace_basis_orthonormal():
    rng = np.random.default_rng(3)
    Y = rng.normal(size=(15, 40))
    sub = estimate_subspace(Y, 5)
    gram = sub.basis.T @ sub.basis
    assert np.max(np.abs(gram - np.eye(5))) <= 1e-10


def test_gram_path_matches_direct_svd():
    """Wide matrices (L > 10 M) switch to the Gram route; spans agree."""
    rng = np.random.default_rng(4)
    Y = rng.normal(size=(10, 150))
    sub = estimate_subspace(Y, 3)
    U = np.linalg.svd(Y, full_matrices=False)[0][:, :3]
    P_est = sub.basis @ sub.basis.T
    P_ref = U @ U.T
    assert np.allclose(P_est, P_ref, atol=1e-8)


def test_estimate_subspace_validation():
    Y = np.random.default_rng(0).normal(size=(6, 9))
    with pytest.raises(ValueError):
        estimate_subspace(Y, 0)
    with pytest.raises(ValueError):
        estimate_subspace(Y, 7)
    with pytest.raises(ValueError):
        estimate_subspace(np.full((4, 4), np.nan), 2)
    with pytest.raises(ValueError):
        estimate_subspace(Y[0], 1)


def test_signal_subspace_rejects_bad_basis():
    with pytest.raises(ValueError):
        SignalSubspace(np.ones((4, 2)))
    with pytest.raises(ValueError):
        SignalSubspace(np.ones((2, 3)))


def test_estimate_order_exact_rank():
    """Rank-3 noiseless matrix at fraction 0.999 reports order 3."""
    rng = np.random.default_rng(5)
    U = np.linalg.qr(rng.normal(size=(12, 3)))[0]
    V = np.linalg.qr(rng.normal(size=(30, 3)))[0]
    Y = U @ np.diag([3.0, 2.0, 1.0]) @ V.T
    assert estimate_order(Y, 0.999) == 3


def test_estimate_order_padded_rank_one():
    Y = np.zeros((8, 10))
    Y[2:5, 3:7] = np.outer([1.0, 2.0, 3.0], [1.0, 1.0, 2.0, 0.5])
    assert estimate_order(Y) == 1


def test_estimate_order_matches_bruteforce_cumsum():
    """N=6 at SNR 35 dB: module agrees with a cumulative-energy scan."""
    rng = np.random.default_rng(0)
    A, S = _mixture(rng, 8, 400, 6)
    X = A @ S
    sigma2 = float(np.sum(X * X)) / (8 * 400 * 10.0 ** 3.5)
    Y = X + rng.normal(0.0, math.sqrt(sigma2), size=X.shape)

    sv = np.linalg.svd(Y, compute_uv=False)
    energy = sv * sv
    fractions = np.cumsum(energy) / np.sum(energy)
    brute = int(np.argmax(fractions >= 0.9999)) + 1

    assert estimate_order(Y, 0.9999) == brute == 6


def test_estimate_order_validation():
    Y = np.eye(3)
    with pytest.raises(ValueError):
        estimate_order(Y, 0.0)
    with pytest.raises(ValueError):
        estimate_order(Y, 1.5)


def test_project_complement_in_span_and_perp():
    rng = np.random.default_rng(6)
    U = np.linalg.qr(rng.normal(size=(10, 3)))[0]
    sub = SignalSubspace(U)
    x_in = U @ rng.normal(size=3)
    assert np.linalg.norm(project_complement(sub, x_in)) <= (
        1e-10 * np.linalg.norm(x_in)
    )
    x = rng.normal(size=10)
    x_perp = x - U @ (U.T @ x)
    assert np.allclose(project_complement(sub, x_perp), x_perp, atol=1e-12)


def test_project_complement_dense_oracle():
    """Matches (I - U U^T) x from an explicitly formed projector."""
    rng = np.random.default_rng(7)
    U = np.linalg.qr(rng.normal(size=(10, 3)))[0]
    sub = SignalSubspace(U)
    P_perp = np.eye(10) - U @ U.T
    for _ in range(20):
        x = rng.normal(size=10)
        assert np.allclose(project_complement(sub, x), P_perp @ x, atol=1e-12)
    X = rng.normal(size=(10, 5))
    assert np.allclose(project_complement(sub, X), P_perp @ X, atol=1e-12)


def test_project_complement_idempotent_and_pythagoras():
    rng = np.random.default_rng(8)
    U = np.linalg.qr(rng.normal(size=(12, 4)))[0]
    sub = SignalSubspace(U)
    for _ in range(20):
        x = rng.normal(size=12)
        r = project_complement(sub, x)
        assert np.allclose(project_complement(sub, r), r, atol=1e-10)
        norm2 = np.linalg.norm(x) ** 2
        parts = np.linalg.norm(U.T @ x) ** 2 + np.linalg.norm(r) ** 2
        assert abs(norm2 - parts) <= 1e-9 * norm2


def test_project_complement_dimension_mismatch():
    sub = SignalSubspace(np.eye(5)[:, :2])
    with pytest.raises(ValueError):
        project_complement(sub, np.ones(4))


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
