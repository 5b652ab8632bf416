"""Dictionary pruning by subspace residues.

A library member is kept when its spectrum lies (nearly) inside the
signal subspace spanned by the observations.  The plain residue
(``music_residue``) measures the relative energy a spectrum leaves in
the orthogonal complement of that subspace.  The robust residue
(``rmusic_residue``) instead scores the best achievable residue over an
epsilon-ball around the spectrum, which forgives bounded library
mismatch: a perturbed copy of a true material can reach residue zero as
long as the true spectrum sits within epsilon of the library entry.

All residue evaluations are pure functions of their arguments, so
callers may evaluate disjoint columns concurrently.
"""

import math
from dataclasses import dataclass

import numpy as np

from .subspace import project_complement

# Golden-section refinement stops when the bracket width falls below
# this fraction of epsilon.
_REFINE_WIDTH = 1e-12
# Number of uniform grid points scanned before refinement.
_GRID_POINTS = 1024

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class SpectralDictionary:
    """Spectral library: one column per candidate material.

    Attributes
    ----------
    spectra : ndarray, shape (bands, size)
        Finite entries, no all-zero columns.
    labels : list of str
        One name per column; generated as ``m000``, ``m001``, ... when
        not supplied.
    """

    spectra: np.ndarray
    labels: list = None

    def __post_init__(self):
        spectra = np.asarray(self.spectra, dtype=float)
        if spectra.ndim != 2 or spectra.shape[0] < 1 or spectra.shape[1] < 1:
            raise ValueError("spectra must be a 2-D bands x size array")
        if not np.all(np.isfinite(spectra)):
            raise ValueError("spectra entries must be finite")
        norms = np.linalg.norm(spectra, axis=0)
        if np.any(norms == 0.0):
            raise ValueError("spectra must not contain all-zero columns")
        self.spectra = spectra
        if self.labels is None:
            self.labels = [f"m{k:03d}" for k in range(spectra.shape[1])]
        else:
            self.labels = [str(name) for name in self.labels]
            if len(self.labels) != spectra.shape[1]:
                raise ValueError("labels length must match the column count")

    @property
    def bands(self):
        return self.spectra.shape[0]

    @property
    def size(self):
        return self.spectra.shape[1]

    def column(self, k):
        return self.spectra[:, k]

    def take(self, indices):
        """New dictionary restricted to the given columns, in order."""
        indices = np.asarray(indices, dtype=int)
        return SpectralDictionary(
            self.spectra[:, indices], [self.labels[k] for k in indices]
        )


@dataclass(frozen=True)
class RobustnessBudget:
    """Mismatch budget: spectra may move by up to ``epsilon`` in 2-norm.

    ``alpha`` records the mismatch-level parameter the budget was
    derived from, when it was; it is informational only.
    """

    epsilon: float
    alpha: float = None

    def __post_init__(self):
        epsilon = float(self.epsilon)
        if not (np.isfinite(epsilon) and epsilon >= 0.0):
            raise ValueError("epsilon must be finite and >= 0")
        object.__setattr__(self, "epsilon", epsilon)

    @classmethod
    def from_alpha(cls, alpha, dictionary):
        return cls(epsilon_from_alpha(alpha, dictionary), float(alpha))


@dataclass
class PruneResult:
    """Outcome of pruning a dictionary against a signal subspace.

    Attributes
    ----------
    residues : ndarray, shape (size,)
        Residue of every column of the input dictionary.
    selected : ndarray of int
        Kept column indices, ordered by ascending residue (ties broken
        by ascending index).
    pruned : SpectralDictionary
        The kept columns, in ``selected`` order.
    """

    residues: np.ndarray
    selected: np.ndarray
    pruned: SpectralDictionary


def _checked_column(d, subspace):
    d = np.asarray(d, dtype=float)
    if d.ndim != 1:
        raise ValueError("spectrum must be a 1-D band vector")
    if d.shape[0] != subspace.bands:
        raise ValueError(
            f"spectrum length {d.shape[0]} does not match band count "
            f"{subspace.bands}"
        )
    if not np.all(np.isfinite(d)):
        raise ValueError("spectrum entries must be finite")
    if not np.any(d):
        raise ValueError("spectrum must be nonzero")
    return d


def music_residue(d, subspace):
    """Relative complement energy of a spectrum against a subspace.

    Returns ||P_perp d||^2 / ||d||^2, clipped into [0, 1].  Zero means
    the spectrum lies exactly inside the signal subspace.
    """
    d = _checked_column(d, subspace)
    r = project_complement(subspace, d)
    value = (r @ r) / (d @ d)
    return float(min(max(value, 0.0), 1.0))


def _eta_objective(a, b, epsilon):
    """1-D objective f(theta) = (a - theta) / (b + sqrt(eps^2 - theta^2))
    for theta in [0, epsilon], with f = +inf where the denominator is 0."""

    def f(theta):
        slack = epsilon * epsilon - theta * theta
        denom = b + math.sqrt(slack if slack > 0.0 else 0.0)
        if denom == 0.0:
            return math.inf
        return (a - theta) / denom

    return f


def _golden_refine(f, lo, hi, width):
    """Golden-section scan of f over [lo, hi]; returns (best_f, best_x)
    over every point it evaluates."""
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    best_f, best_x = (fc, c) if fc <= fd else (fd, d)
    while hi - lo > width:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
        if fc < best_f:
            best_f, best_x = fc, c
        if fd < best_f:
            best_f, best_x = fd, d
    return best_f, best_x


def solve_eta_star(a, b, epsilon):
    """Minimize (a - theta) / (b + sqrt(eps^2 - theta^2)) over
    0 <= theta <= epsilon.

    ``a`` is the complement-projection norm of the spectrum, ``b`` its
    in-subspace norm.  Requires a > epsilon >= 0 and b >= 0 (for
    a <= epsilon the minimum is 0 by moving the spectrum into the
    subspace, a case callers handle directly).

    Returns
    -------
    (eta_star, theta_star) : minimum value and its location.  The value
    never exceeds the objective at any scanned grid point.
    """
    a = float(a)
    b = float(b)
    epsilon = float(epsilon)
    if not (np.isfinite(a) and np.isfinite(b) and np.isfinite(epsilon)):
        raise ValueError("a, b, epsilon must be finite")
    if b < 0.0:
        raise ValueError("b must be >= 0")
    if not a > epsilon >= 0.0:
        raise ValueError("requires a > epsilon >= 0")
    if epsilon == 0.0:
        return (a / b if b > 0.0 else math.inf), 0.0
    f = _eta_objective(a, b, epsilon)

    thetas = np.linspace(0.0, epsilon, _GRID_POINTS)
    slack = np.maximum(epsilon * epsilon - thetas * thetas, 0.0)
    denom = b + np.sqrt(slack)
    with np.errstate(divide="ignore"):
        values = np.where(denom > 0.0, (a - thetas) / denom, np.inf)

    best = int(np.argmin(values))
    best_f = float(values[best])
    best_theta = float(thetas[best])

    # Refine every grid-local minimum; the objective is smooth but its
    # unimodality is not guaranteed, so each candidate basin is scanned.
    interior = np.flatnonzero(
        (values <= np.roll(values, 1)) & (values <= np.roll(values, -1))
    )
    candidates = set(interior.tolist()) | {0, _GRID_POINTS - 1}
    width = _REFINE_WIDTH * epsilon
    for i in candidates:
        lo = thetas[max(i - 1, 0)]
        hi = thetas[min(i + 1, _GRID_POINTS - 1)]
        if hi <= lo:
            continue
        f_ref, theta_ref = _golden_refine(f, lo, hi, width)
        if f_ref < best_f:
            best_f, best_theta = f_ref, theta_ref
    return best_f, best_theta


def rmusic_residue(d, subspace, budget):
    """Best residue achievable by moving the spectrum within the budget.

    Minimizes ||P_perp (d - xi)||^2 / ||d - xi||^2 over ||xi|| <= eps.
    With eps = 0 this reduces to ``music_residue`` exactly.  The
    spectrum norm must exceed eps so that the perturbed spectrum cannot
    vanish.
    """
    d = _checked_column(d, subspace)
    eps = budget.epsilon
    norm_d = np.linalg.norm(d)
    if eps >= norm_d:
        raise ValueError("epsilon must be smaller than the spectrum norm")
    if eps == 0.0:
        return music_residue(d, subspace)
    coords = subspace.basis.T @ d
    b = float(np.linalg.norm(coords))
    r = d - subspace.basis @ coords
    a = float(np.linalg.norm(r))
    if a <= eps:
        # The whole complement component can be cancelled inside the
        # ball, so the spectrum is consistent with the subspace.
        return 0.0
    eta, _ = solve_eta_star(a, b, eps)
    if not np.isfinite(eta):
        return 1.0
    value = eta * eta / (eta * eta + 1.0)
    # The minimizing perturbation can only lower the plain residue.
    return float(min(value, music_residue(d, subspace)))


def epsilon_from_alpha(alpha, dictionary):
    """Mismatch budget (1 - alpha) / (1 + alpha) times the smallest
    column norm of the dictionary, for alpha in [0, 1]."""
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    min_norm = float(np.linalg.norm(dictionary.spectra, axis=0).min())
    return (1.0 - alpha) / (1.0 + alpha) * min_norm


def prune(dictionary, subspace, budget, keep=None, threshold=None):
    """Score every dictionary column and keep the best ones.

    Exactly one of ``keep`` (column count) and ``threshold`` (residue
    cutoff, columns with residue <= threshold survive) must be given.
    Columns are ranked by ascending robust residue with ties broken by
    ascending index.
    """
    if dictionary.size < 2:
        raise ValueError("pruning needs a dictionary with >= 2 columns")
    if dictionary.bands != subspace.bands:
        raise ValueError("dictionary and subspace band counts differ")
    if (keep is None) == (threshold is None):
        raise ValueError("give exactly one of keep= or threshold=")
    if keep is not None:
        keep = int(keep)
        if not 1 <= keep <= dictionary.size:
            raise ValueError(
                f"keep must lie in [1, {dictionary.size}]; got {keep}"
            )
    else:
        threshold = float(threshold)
        if not (np.isfinite(threshold) and threshold >= 0.0):
            raise ValueError("threshold must be finite and >= 0")

    K = dictionary.size
    residues = np.empty(K)
    for k in range(K):
        residues[k] = rmusic_residue(dictionary.column(k), subspace, budget)

    order = np.lexsort((np.arange(K), residues))
    if keep is not None:
        selected = order[:keep]
    else:
        selected = order[residues[order] <= threshold]
        if selected.size == 0:
            raise ValueError(
                "threshold keeps no columns; lowest residue is "
                f"{residues.min():.6g}"
            )
    selected = np.asarray(selected, dtype=int)
    return PruneResult(residues, selected, dictionary.take(selected))
