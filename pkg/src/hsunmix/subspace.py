"""Signal-subspace estimation for pixel matrices.

A hyperspectral pixel matrix Y (bands x pixels) built from N materials
concentrates its energy in an N-dimensional subspace of band space.  The
routines here estimate an orthonormal basis of that subspace, pick the
order from an energy-fraction rule, and apply orthogonal-complement
projections without ever forming an M x M projector.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

# Thin SVD of Y is cheaper until the pixel count outgrows the band count
# by this factor; past it the M x M Gram eigendecomposition wins.
_GRAM_RATIO = 10


@dataclass(frozen=True)
class SignalSubspace:
    """Orthonormal basis of an estimated signal subspace.

    Attributes
    ----------
    basis : ndarray, shape (bands, order)
        Columns are orthonormal and span the estimated subspace.
    """

    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2 or basis.shape[1] < 1:
            raise ValueError("basis must be a 2-D array with >= 1 column")
        if basis.shape[1] > basis.shape[0]:
            raise ValueError("subspace order cannot exceed the band count")
        if not np.all(np.isfinite(basis)):
            raise ValueError("basis entries must be finite")
        gram = basis.T @ basis
        if not np.allclose(gram, np.eye(basis.shape[1]), atol=1e-8):
            raise ValueError("basis columns must be orthonormal")
        object.__setattr__(self, "basis", basis)

    @property
    def bands(self):
        return self.basis.shape[0]

    @property
    def order(self):
        return self.basis.shape[1]


def _check_pixel_matrix(Y):
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] < 1 or Y.shape[1] < 1:
        raise ValueError("observations must be a 2-D bands x pixels array")
    if not np.all(np.isfinite(Y)):
        raise ValueError("observations contain non-finite entries")
    return Y


def _singular_triplets(Y, want_vectors):
    """Top singular values (and left vectors) of Y, by thin SVD for
    modest pixel counts and by Gram eigendecomposition otherwise."""
    M, L = Y.shape
    if L <= _GRAM_RATIO * M:
        try:
            U, s, _ = np.linalg.svd(Y, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed to converge: {exc}") from exc
        return U if want_vectors else None, s
    gram = Y @ Y.T
    try:
        evals, evecs = np.linalg.eigh(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    # eigh returns ascending order; singular values are sqrt of the
    # (clipped) eigenvalues in descending order.
    s = np.sqrt(np.maximum(evals[::-1], 0.0))
    return evecs[:, ::-1] if want_vectors else None, s


def estimate_subspace(Y, order):
    """Estimate an orthonormal basis of the signal subspace of Y.

    Parameters
    ----------
    Y : ndarray, shape (bands, pixels)
    order : int
        Subspace dimension, 1 <= order <= min(bands, pixels).

    Returns
    -------
    SignalSubspace
        Basis holding the top-``order`` left singular vectors of Y.
    """
    Y = _check_pixel_matrix(Y)
    M, L = Y.shape
    order = int(order)
    if not 1 <= order <= min(M, L):
        raise ValueError(
            f"order must satisfy 1 <= order <= min(bands, pixels); "
            f"got {order} for shape {Y.shape}"
        )
    U, _ = _singular_triplets(Y, want_vectors=True)
    return SignalSubspace(U[:, :order])


def estimate_order(Y, energy_fraction=0.9999):
    """Smallest order whose leading singular values capture the
    requested fraction of the total squared singular-value energy.

    Returns at least 1.  ``energy_fraction`` must lie in (0, 1].
    """
    Y = _check_pixel_matrix(Y)
    if not 0.0 < energy_fraction <= 1.0:
        raise ValueError("energy_fraction must lie in (0, 1]")
    _, s = _singular_triplets(Y, want_vectors=False)
    energy = s * s
    total = energy.sum()
    if total == 0.0:
        return 1
    captured = np.cumsum(energy) / total
    # The running sum can land 1 ulp shy of 1.0; pin the tail so a
    # fraction of exactly 1.0 still resolves to a valid order.
    captured[-1] = 1.0
    return int(np.searchsorted(captured, energy_fraction) + 1)


def project_complement(subspace, x):
    """Project x onto the orthogonal complement of the subspace.

    Computes x - U (U^T x) without forming the M x M projector.  Accepts
    a single band vector of length M or an (M, n) stack of columns.
    """
    U = subspace.basis
    x = np.asarray(x, dtype=float)
    if x.shape[0] != U.shape[0]:
        raise ValueError(
            f"vector length {x.shape[0]} does not match band count {U.shape[0]}"
        )
    return x - U @ (U.T @ x)
