"""Shared fixtures for the test suite.

The detection Monte Carlo run is expensive (100 scenes through subspace
estimation and two prune passes), so it runs once per session and both
the pruning tests and the acceptance checklist read from it.
"""

import time

import numpy as np
import pytest

from hsunmix.pruning import RobustnessBudget, prune
from hsunmix.simulate import SceneSpec, generate, synthetic_library
from hsunmix.subspace import estimate_subspace


@pytest.fixture(scope="session")
def full_library():
    """Default 120-column, 100-band synthetic pool."""
    return synthetic_library()


@pytest.fixture(scope="session")
def detection_run(full_library):
    """100 mismatch trials: plain vs robust residue pruning at keep=40.

    Scene: N=6 materials, L=500 pixels, DMER=20 dB, SNR=35 dB,
    alpha=0.85 for the robust budget, seeds 0..99.
    """
    t0 = time.perf_counter()
    music_hits = 0
    rmusic_hits = 0
    for trial in range(100):
        spec = SceneSpec(
            materials=6, pixels=500, dmer_db=20.0, snr_db=35.0, seed=trial
        )
        scene = generate(full_library, spec)
        subspace = estimate_subspace(scene.Y, spec.materials)
        truth = set(scene.truth_indices.tolist())
        plain = prune(
            scene.dictionary, subspace, RobustnessBudget(0.0), keep=40
        )
        budget = RobustnessBudget.from_alpha(0.85, scene.dictionary)
        robust = prune(scene.dictionary, subspace, budget, keep=40)
        music_hits += truth <= set(plain.selected.tolist())
        rmusic_hits += truth <= set(robust.selected.tolist())
    return {
        "music_rate": music_hits / 100.0,
        "rmusic_rate": rmusic_hits / 100.0,
        "elapsed_s": time.perf_counter() - t0,
    }


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
