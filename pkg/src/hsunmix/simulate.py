"""Synthetic-scene generation for Monte Carlo benchmarks.

A scene draws N truth materials from a clean library, mixes them with
per-pixel simplex abundances, then hands the solvers a *perturbed* copy
of the library plus noisy observations.  Library mismatch is measured
by the dictionary-mismatch energy ratio

    DMER(dB) = 10 log10( ||d_min||^2 / delta^2 ),

where d_min is the smallest-norm clean column and delta the largest
per-column perturbation norm; observation noise by

    SNR(dB) = 10 log10( sum_l ||A s_l||^2 / (M L sigma^2) ).

Draw order per seed is fixed and part of the format: truth indices,
abundances, library perturbation, observation noise.  Scenes are
bit-identical across runs for the same spec.
"""

import math
from dataclasses import dataclass

import numpy as np

from .pruning import SpectralDictionary


@dataclass(frozen=True)
class SceneSpec:
    """Scene recipe: material count, pixel count, mismatch and noise
    levels in dB (either may be ``inf`` for none), and the RNG seed."""

    materials: int
    pixels: int
    dmer_db: float = math.inf
    snr_db: float = math.inf
    seed: int = 0

    def __post_init__(self):
        if int(self.materials) < 1:
            raise ValueError("materials must be >= 1")
        if int(self.pixels) < 1:
            raise ValueError("pixels must be >= 1")
        for name in ("dmer_db", "snr_db"):
            value = float(getattr(self, name))
            if math.isnan(value):
                raise ValueError(f"{name} must not be NaN")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "materials", int(self.materials))
        object.__setattr__(self, "pixels", int(self.pixels))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass
class SyntheticScene:
    """Generated scene.

    Attributes
    ----------
    Y : ndarray, shape (bands, pixels)
        Noisy observations of the clean-spectra mixture.
    dictionary : SpectralDictionary
        The perturbed library handed to solvers.
    truth_indices : ndarray of int
        Columns of the clean library actually present, in draw order.
    S : ndarray, shape (materials, pixels)
        Simplex abundances (columns sum to 1).
    C : ndarray, shape (size, pixels)
        S embedded at the truth rows of the full library.
    delta : float
        Largest per-column perturbation norm (0 when dmer_db is inf).
    sigma2 : float
        Per-entry noise variance (0 when snr_db is inf).
    signal_energy : float
        ||A S||_F^2 of the clean mixture.
    ref_norm : float
        Smallest clean-column norm, the DMER reference.
    spec : SceneSpec
    """

    Y: np.ndarray
    dictionary: SpectralDictionary
    truth_indices: np.ndarray
    S: np.ndarray
    C: np.ndarray
    delta: float
    sigma2: float
    signal_energy: float
    ref_norm: float
    spec: SceneSpec


def generate(library, spec):
    """Draw one scene from a clean library according to the spec."""
    spectra = library.spectra
    M, K = spectra.shape
    N, L = spec.materials, spec.pixels
    if N > K:
        raise ValueError(f"cannot draw {N} materials from {K} columns")
    if N >= M:
        raise ValueError("materials must be fewer than bands")

    rng = np.random.default_rng(spec.seed)
    truth = rng.choice(K, size=N, replace=False)
    S = rng.dirichlet(np.ones(N), size=L).T
    A = spectra[:, truth]
    signal = A @ S
    signal_energy = float(np.sum(signal * signal))
    ref_norm = float(np.linalg.norm(spectra, axis=0).min())

    if math.isfinite(spec.dmer_db):
        delta = ref_norm * 10.0 ** (-spec.dmer_db / 20.0)
        E = rng.standard_normal((M, K))
        # Global rescale so the *largest* column perturbation hits
        # delta exactly, making the realized mismatch level exact.
        E *= delta / np.linalg.norm(E, axis=0).max()
        perturbed = spectra + E
    else:
        delta = 0.0
        perturbed = spectra.copy()

    if math.isfinite(spec.snr_db):
        sigma2 = signal_energy / (M * L * 10.0 ** (spec.snr_db / 10.0))
        Y = signal + rng.normal(0.0, math.sqrt(sigma2), size=(M, L))
    else:
        sigma2 = 0.0
        Y = signal.copy()

    C = np.zeros((K, L))
    C[truth] = S
    return SyntheticScene(
        Y=Y,
        dictionary=SpectralDictionary(perturbed, list(library.labels)),
        truth_indices=np.asarray(truth, dtype=int),
        S=S,
        C=C,
        delta=delta,
        sigma2=sigma2,
        signal_energy=signal_energy,
        ref_norm=ref_norm,
        spec=spec,
    )


def snr_of(scene):
    """Realized observation SNR in dB (inf for a noiseless scene)."""
    if scene.sigma2 == 0.0:
        return math.inf
    M, L = scene.Y.shape
    return 10.0 * math.log10(scene.signal_energy / (M * L * scene.sigma2))


def dmer_of(scene):
    """Realized mismatch level in dB (inf for an unperturbed library)."""
    if scene.delta == 0.0:
        return math.inf
    return 10.0 * math.log10((scene.ref_norm / scene.delta) ** 2)


def _bump_curve(rng, grid, n_bumps, amp_range, width_range):
    curve = np.zeros_like(grid)
    for _ in range(n_bumps):
        amp = rng.uniform(*amp_range)
        center = rng.uniform(0.0, 1.0)
        width = rng.uniform(*width_range)
        curve += amp * np.exp(-0.5 * ((grid - center) / width) ** 2)
    return curve


def synthetic_library(
    bands=100,
    size=120,
    seed=2024,
    principal=6,
    secondary=4,
    offset=(0.05, 0.09),
    detail=(0.028, 0.038),
    brightness=(0.7, 1.8),
    scale=8.0,
    separation=0.11,
):
    """Randomized library of smooth, strongly correlated spectra.

    Every column mixes a handful of shared *principal* smooth shapes
    (positive bump curves), a small admixture of shared *secondary*
    shapes whose relative weight is drawn from ``offset``, and a
    private ``detail`` curve that keeps columns in general position.
    Column norms are ``scale`` times a brightness factor drawn
    log-uniformly from ``brightness``.

    The construction concentrates the whole library near a low-dim
    smooth cone: any few columns span most of it, so the remaining
    columns sit at small, controlled angles to that span.  Together
    with the spread of column norms this makes subspace-based pruning
    genuinely hard for relative residues.  Two guards keep every
    column individually identifiable for coefficient recovery at its
    own signal level: the private detail weight scales inversely with
    brightness (the absolute detail energy is uniform across columns,
    so no column can be rebuilt cheaply from the others), and a
    rejection loop keeps every pair of columns apart by a minimum
    angle whose sine must reach ``separation`` divided by the smaller
    brightness of the pair.  All entries are strictly positive.
    """
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, bands)

    def shape(n_bumps, base_range):
        curve = rng.uniform(*base_range) + _bump_curve(
            rng, grid, n_bumps, (0.3, 1.0), (0.04, 0.18)
        )
        return curve / np.linalg.norm(curve)

    principal_shapes = np.column_stack(
        [shape(int(rng.integers(2, 5)), (0.1, 0.4)) for _ in range(principal)]
    )
    secondary_shapes = np.column_stack(
        [shape(int(rng.integers(2, 5)), (0.0, 0.05)) for _ in range(secondary)]
    )
    # Secondary shapes enter signed; centering them against the
    # principal mean keeps columns positive at small offsets.
    secondary_shapes -= secondary_shapes.mean(axis=1, keepdims=True)

    def draw_direction(bright):
        main = principal_shapes @ rng.dirichlet(np.ones(principal))
        main /= np.linalg.norm(main)
        side = secondary_shapes @ rng.normal(size=secondary)
        side /= np.linalg.norm(side)
        # White private texture: high-dimensional, so no mix of other
        # columns can reproduce it.  Its relative weight shrinks with
        # brightness, keeping the absolute detail energy uniform.
        rough = rng.standard_normal(grid.size)
        rough /= np.linalg.norm(rough)
        col = (
            main
            + rng.uniform(*offset) * side
            + rng.uniform(*detail) / bright * rough
        )
        floor = 0.02 * np.abs(col).max()
        col = np.maximum(col, floor)
        return col / np.linalg.norm(col)

    brights = np.exp(rng.uniform(*np.log(brightness), size=size))
    directions = np.empty((bands, size))
    for j in range(size):
        # Dim pairs must sit farther apart than bright pairs: the
        # required sine of the pairwise angle is separation / min
        # brightness, capped at 0.5 to stay satisfiable.
        need = np.minimum(separation / np.minimum(brights[:j], brights[j]), 0.5)
        allowed = np.sqrt(1.0 - need * need)
        best, best_excess = None, np.inf
        for _ in range(200):
            cand = draw_direction(brights[j])
            coh = np.abs(cand @ directions[:, :j]) if j else np.zeros(0)
            excess = float((coh - allowed).max()) if j else -1.0
            if excess < best_excess:
                best, best_excess = cand, excess
            if excess <= 0.0:
                break
        directions[:, j] = best
    return SpectralDictionary(directions * (scale * brights))
