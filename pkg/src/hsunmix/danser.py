"""Dictionary-adjusted nonconvex sparse unmixing.

Given observations Y and a pruned library D, the solver estimates a
nonnegative coefficient matrix C, a working mixing matrix H, and an
adjusted library D' by alternating minimization of

     0.5 * ||Y - H C||_F^2
   + 0.5 * mu * ||H - D'||_F^2
   + lam * sum_k (||c^k||_2^2 + tau)^(p/2)
       subject to  ||d'_k - d_k||_2 <= epsilon,  C >= 0,

with 0 < p < 1.  Each column of the library may drift inside an
epsilon-ball, which absorbs bounded mismatch between the library and
the spectra actually present in the scene, while the p-th power row
penalty drives the rows of inactive materials to zero.

The nonconvex row penalty is handled by reweighting: for each row,
(x^2 + tau)^(p/2) = min_{w >= 0} [ w x^2 + phi_p(w) ], minimized at
w = (p/2) (x^2 + tau)^((p-2)/2).  With the weights held at that
minimizer the coefficient subproblem is a nonnegative least-squares
problem, swept row by row in closed form.  Each full cycle runs: row
sweep, H update, library adjustment, reweighting; the true objective is
non-increasing across every cycle.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError

# A coefficient row counts as active when its norm exceeds this
# fraction of the largest row norm.
ACTIVITY_RATIO = 1e-4


@dataclass
class DanserParams:
    """Solver settings.

    lam weights the row-sparsity penalty, p in (0, 1) is its exponent,
    tau > 0 smooths it near zero rows, mu ties the mixing matrix to the
    adjusted library, and epsilon bounds how far each library column
    may drift.  Iteration stops when the coefficient update falls to
    ``tol`` in Frobenius norm or after ``max_iter`` cycles.
    """

    lam: float = 0.5
    p: float = 0.5
    mu: float = 1e5
    tau: float = 1e-6
    epsilon: float = 0.0
    tol: float = 1e-5
    max_iter: int = 5000

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly inside (0, 1)")
        if not self.lam > 0.0:
            raise ValueError("lam must be > 0")
        if not self.mu > 0.0:
            raise ValueError("mu must be > 0")
        if not self.tau > 0.0:
            raise ValueError("tau must be > 0")
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError("epsilon must be finite and >= 0")
        if not self.tol > 0.0:
            raise ValueError("tol must be > 0")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")
        self.max_iter = int(self.max_iter)


@dataclass
class DanserState:
    """Mutable iterate: mixing matrix H, adjusted library Dprime,
    coefficients C, row weights w, and the sweep caches F, G (valid for
    the H and w they were refreshed with)."""

    H: np.ndarray
    Dprime: np.ndarray
    C: np.ndarray
    w: np.ndarray
    F: np.ndarray = None
    G: np.ndarray = None
    objective: float = np.nan


@dataclass
class UnmixResult:
    """Solver output.

    Attributes
    ----------
    C : ndarray, shape (size, pixels)
        Nonnegative coefficients.
    Dprime : ndarray, shape (bands, size)
        Adjusted library columns, each within epsilon of its input.
    iterations : int
    objective_trace : ndarray
        Objective after every full cycle; non-increasing.
    active_rows : ndarray of int
        Rows whose norm exceeds ACTIVITY_RATIO times the largest.
    """

    C: np.ndarray
    Dprime: np.ndarray
    iterations: int
    objective_trace: np.ndarray
    active_rows: np.ndarray


def _spectra_of(D):
    spectra = D.spectra if hasattr(D, "spectra") else np.asarray(D, dtype=float)
    if spectra.ndim != 2:
        raise ValueError("library must be a 2-D bands x size array")
    return spectra


def phi_p(w, p, tau):
    """Conjugate-style penalty term paired with weight w:
    ((2 - p) / 2) * ((2 / p) * w)^(p / (p - 2)) + tau * w, for w > 0.

    Satisfies (x^2 + tau)^(p/2) = min_{w > 0} [w x^2 + phi_p(w)].
    """
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError("w must be > 0")
    value = ((2.0 - p) / 2.0) * ((2.0 / p) * w) ** (p / (p - 2.0)) + tau * w
    return float(value) if value.ndim == 0 else value


def update_weights(C, params):
    """Optimal reweighting for the current rows:
    w_k = (p / 2) * (||c^k||^2 + tau)^((p - 2) / 2)."""
    sq = np.sum(np.asarray(C, dtype=float) ** 2, axis=1)
    return (params.p / 2.0) * (sq + params.tau) ** ((params.p - 2.0) / 2.0)


def objective(state, Y, D, params):
    """True objective at the current iterate.

    The library D enters the problem only through the drift constraint
    on Dprime (enforced by update_Dprime), so it is used here just to
    check shapes.
    """
    spectra = _spectra_of(D)
    if state.H.shape != spectra.shape or state.Dprime.shape != spectra.shape:
        raise ValueError("H, Dprime and library shapes differ")
    if Y.shape[0] != spectra.shape[0] or state.C.shape[0] != spectra.shape[1]:
        raise ValueError("observation or coefficient shape mismatch")
    resid = Y - state.H @ state.C
    drift = state.H - state.Dprime
    row_sq = np.sum(state.C * state.C, axis=1)
    return float(
        0.5 * np.sum(resid * resid)
        + 0.5 * params.mu * np.sum(drift * drift)
        + params.lam * np.sum((row_sq + params.tau) ** (params.p / 2.0))
    )


def reweighted_objective(state, Y, params):
    """Upper-bound objective with the row penalty replaced by its
    weighted quadratic form; equals the true objective when the weights
    are fresh (w = update_weights(C))."""
    resid = Y - state.H @ state.C
    drift = state.H - state.Dprime
    row_sq = np.sum(state.C * state.C, axis=1)
    penalty = np.sum(state.w * row_sq + phi_p(state.w, params.p, params.tau))
    return float(
        0.5 * np.sum(resid * resid)
        + 0.5 * params.mu * np.sum(drift * drift)
        + params.lam * penalty
    )


def refresh_caches(state, Y, params):
    """Rebuild the row-sweep caches for the current H and w:
    F = 0.5 * Y^T H  (pixels x size) and
    G = 0.5 * H^T H + lam * diag(w)  (size x size)."""
    state.F = 0.5 * (Y.T @ state.H)
    G = 0.5 * (state.H.T @ state.H)
    G[np.diag_indices_from(G)] += params.lam * state.w
    state.G = G


def update_C_row(state, k):
    """Exact nonnegative minimizer of row k given all other rows,
    written into state.C in place.  Requires caches refreshed for the
    current H and w."""
    G = state.G
    gkk = G[k, k]
    if not gkk > 0.0:
        raise NumericalError(f"degenerate row subproblem for row {k}")
    row = (state.F[:, k] - state.C.T @ G[:, k] + state.C[k] * gkk) / gkk
    np.maximum(row, 0.0, out=row)
    state.C[k] = row


def update_H(state, Y, params):
    """Exact minimizer over the mixing matrix:
    H = (mu * Dprime + Y C^T) (C C^T + mu I)^{-1},
    written into state.H in place."""
    K = state.C.shape[0]
    A = state.C @ state.C.T + params.mu * np.eye(K)
    B = params.mu * state.Dprime + Y @ state.C.T
    try:
        factor = scipy.linalg.cho_factor(A)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"mixing-matrix solve failed: {exc}") from exc
    state.H = scipy.linalg.cho_solve(factor, B.T).T


def update_Dprime(H, D, epsilon):
    """Project each column of H onto the epsilon-ball around the
    matching library column: the column itself when it already lies
    inside, otherwise the boundary point on the segment toward it."""
    spectra = _spectra_of(D)
    H = np.asarray(H, dtype=float)
    if H.shape != spectra.shape:
        raise ValueError("H and library shapes differ")
    epsilon = float(epsilon)
    if not (np.isfinite(epsilon) and epsilon >= 0.0):
        raise ValueError("epsilon must be finite and >= 0")
    diff = H - spectra
    norms = np.linalg.norm(diff, axis=0)
    outside = norms > epsilon
    scale = np.where(outside, epsilon / np.where(outside, norms, 1.0), 1.0)
    return np.where(outside, spectra + scale * diff, H)


def solve(Y, D, C_init, params=None):
    """Alternating minimization from a nonnegative starting point.

    Parameters
    ----------
    Y : ndarray, shape (bands, pixels)
    D : SpectralDictionary or ndarray, shape (bands, size)
    C_init : ndarray, shape (size, pixels)
        Nonnegative starting coefficients (a collaborative-regression
        estimate works well).
    params : DanserParams, optional

    Returns
    -------
    UnmixResult
    """
    if params is None:
        params = DanserParams()
    spectra = _spectra_of(D)
    Y = np.asarray(Y, dtype=float)
    C = np.array(C_init, dtype=float, copy=True)
    if Y.ndim != 2 or Y.shape[0] != spectra.shape[0]:
        raise ValueError("observations must be bands x pixels, matching D")
    if C.shape != (spectra.shape[1], Y.shape[1]):
        raise ValueError("C_init must be size x pixels, matching D and Y")
    if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(spectra))):
        raise ValueError("inputs must be finite")
    if not np.all(np.isfinite(C)) or np.any(C < 0.0):
        raise ValueError("C_init must be finite and nonnegative")

    state = DanserState(
        H=spectra.copy(),
        Dprime=spectra.copy(),
        C=C,
        w=update_weights(C, params),
    )
    trace = []
    iterations = params.max_iter
    for it in range(1, params.max_iter + 1):
        C_prev = state.C.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            refresh_caches(state, Y, params)
            for k in range(state.C.shape[0]):
                update_C_row(state, k)
            if not np.all(np.isfinite(state.C)):
                raise NumericalError(
                    f"coefficients diverged at iteration {it}"
                )
            update_H(state, Y, params)
            state.Dprime = update_Dprime(state.H, spectra, params.epsilon)
            state.w = update_weights(state.C, params)
            state.objective = objective(state, Y, spectra, params)
        trace.append(state.objective)
        if not np.isfinite(state.objective):
            raise NumericalError(f"objective diverged at iteration {it}")
        if np.linalg.norm(state.C - C_prev) <= params.tol:
            iterations = it
            break

    row_norms = np.linalg.norm(state.C, axis=1)
    top = row_norms.max() if row_norms.size else 0.0
    active = np.flatnonzero(row_norms > ACTIVITY_RATIO * top)
    return UnmixResult(
        C=state.C,
        Dprime=state.Dprime,
        iterations=iterations,
        objective_trace=np.asarray(trace),
        active_rows=active,
    )
