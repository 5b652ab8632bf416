"""Collaborative sparse regression for abundance initialization.

Solves

    min_C  ||Y - D C||_F^2 + lam * sum_k ||c^k||_2   s.t.  C >= 0,

where c^k is the k-th row of C, by consensus ADMM with two auxiliary
blocks: one carrying the row-sparsity prox, one carrying the
nonnegativity projection.  The quadratic step factorizes
D^T D + rho * I once and reuses it every iteration.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError


@dataclass
class CsrParams:
    """ADMM settings for the row-sparse nonnegative regression."""

    lam: float = 0.1        # row-sparsity weight
    rho: float = 1.0        # fixed augmented-Lagrangian penalty
    tol: float = 1e-5       # RMS primal/dual residual tolerance
    max_iter: int = 2000

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError("lam must be > 0")
        if not self.rho > 0.0:
            raise ValueError("rho must be > 0")
        if not self.tol > 0.0:
            raise ValueError("tol must be > 0")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")
        self.max_iter = int(self.max_iter)


@dataclass
class CsrResult:
    """Solver output.

    Attributes
    ----------
    C : ndarray, shape (size, pixels)
        Nonnegative abundance estimate (the clipped sparsity block).
    iterations : int
    converged : bool
        False when the residual tolerances were not met by max_iter;
        the best iterate is still returned.
    primal_residual, dual_residual : float
        Final RMS residuals.
    """

    C: np.ndarray
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float


def _spectra_of(D):
    spectra = D.spectra if hasattr(D, "spectra") else np.asarray(D, dtype=float)
    if spectra.ndim != 2:
        raise ValueError("dictionary must be a 2-D bands x size array")
    return spectra


def _shrink_rows(V, threshold):
    """Row-wise group soft threshold: scale each row of V by
    max(0, 1 - threshold / ||row||), zeroing rows at or below it."""
    norms = np.linalg.norm(V, axis=1)
    with np.errstate(invalid="ignore"):
        scale = np.where(norms > threshold, 1.0 - threshold / norms, 0.0)
    return scale[:, None] * V


def group_shrink(row, threshold):
    """Group soft threshold of a single coefficient row.

    Returns the zero row when ||row|| <= threshold, otherwise the row
    scaled by (1 - threshold / ||row||).
    """
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise ValueError("row must be 1-D")
    threshold = float(threshold)
    if not (np.isfinite(threshold) and threshold >= 0.0):
        raise ValueError("threshold must be finite and >= 0")
    return _shrink_rows(row[None, :], threshold)[0]


def csr_objective(Y, D, C, lam):
    """||Y - D C||_F^2 + lam * sum of row norms of C."""
    spectra = _spectra_of(D)
    resid = Y - spectra @ C
    return float(np.sum(resid * resid) + lam * np.linalg.norm(C, axis=1).sum())


def csr_solve(Y, D, params=None):
    """Run the ADMM solver; returns a CsrResult.

    Non-convergence by ``max_iter`` is reported through the
    ``converged`` flag rather than an exception, because a truncated
    iterate is still a usable initializer.
    """
    if params is None:
        params = CsrParams()
    spectra = _spectra_of(D)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ValueError("observations must be a 2-D bands x pixels array")
    if Y.shape[0] != spectra.shape[0]:
        raise ValueError("observations and dictionary band counts differ")
    if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(spectra))):
        raise ValueError("inputs must be finite")

    M, L = Y.shape
    K = spectra.shape[1]
    rho = params.rho

    gram = spectra.T @ spectra + rho * np.eye(K)
    try:
        factor = scipy.linalg.cho_factor(gram)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"Gram factorization failed: {exc}") from exc
    DtY = spectra.T @ Y

    Z1 = np.zeros((K, L))
    Z2 = np.zeros((K, L))
    U1 = np.zeros((K, L))
    U2 = np.zeros((K, L))
    scale = np.sqrt(2.0 * K * L)
    shrink_level = params.lam / rho

    primal = np.inf
    dual = np.inf
    iterations = params.max_iter
    converged = False
    for it in range(1, params.max_iter + 1):
        rhs = DtY + (rho / 2.0) * (Z1 - U1 + Z2 - U2)
        C = scipy.linalg.cho_solve(factor, rhs)
        Z1_old, Z2_old = Z1, Z2
        Z1 = _shrink_rows(C + U1, shrink_level)
        Z2 = np.maximum(C + U2, 0.0)
        U1 = U1 + C - Z1
        U2 = U2 + C - Z2
        primal = np.sqrt(
            np.sum((C - Z1) ** 2) + np.sum((C - Z2) ** 2)
        ) / scale
        dual = rho * np.sqrt(
            np.sum((Z1 - Z1_old) ** 2) + np.sum((Z2 - Z2_old) ** 2)
        ) / scale
        if primal <= params.tol and dual <= params.tol:
            iterations = it
            converged = True
            break

    C_out = np.maximum(Z1, 0.0)
    if not np.all(np.isfinite(C_out)):
        raise NumericalError("ADMM produced non-finite coefficients")
    return CsrResult(C_out, iterations, converged, float(primal), float(dual))
