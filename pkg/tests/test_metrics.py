"""Recovery metrics and trial aggregation."""

import math

import numpy as np
import pytest

from hsunmix.metrics import TrialOutcome, aggregate, detection, sre_db


def test_sre_exact_reconstruction_is_infinite():
    rng = np.random.default_rng(0)
    C = rng.uniform(size=(5, 7))
    assert sre_db(C, C.copy()) == math.inf
    # any nonzero error, however tiny, must stay finite
    bumped = C.copy()
    bumped[0, 0] += 1e-12
    assert math.isfinite(sre_db(C, bumped))


def test_sre_zero_estimate_is_zero_db():
    rng = np.random.default_rng(1)
    C = rng.uniform(size=(4, 6))
    assert abs(sre_db(C, np.zeros_like(C))) <= 1e-12


def test_sre_twenty_db_case():
    """Signal norm 10, error norm 1 -> exactly 20 dB."""
    C = np.zeros((2, 2))
    C[0, 0] = 10.0
    C_hat = C.copy()
    C_hat[1, 1] = 1.0
    assert abs(sre_db(C, C_hat) - 20.0) <= 1e-12


def test_sre_error_scale_covariance():
    rng = np.random.default_rng(2)
    C = rng.uniform(size=(5, 5))
    E = rng.normal(size=(5, 5))
    base = sre_db(C, C + E)
    for c in (2.0, 0.25, -3.0):
        shifted = sre_db(C, C + c * E)
        assert abs((base - shifted) - 20.0 * math.log10(abs(c))) <= 1e-9


def test_sre_validation():
    with pytest.raises(ValueError):
        sre_db(np.ones((2, 3)), np.ones((3, 2)))
    with pytest.raises(ValueError):
        sre_db(np.zeros((2, 2)), np.ones((2, 2)))


def test_detection_cases():
    assert detection([1, 2], [1, 2])
    assert not detection([1, 2], [2, 3])
    assert detection([], [5, 6])
    assert detection([3], [1, 2, 3, 4])


def test_detection_monotone_in_selected():
    rng = np.random.default_rng(3)
    for _ in range(20):
        truth = rng.choice(30, size=4, replace=False)
        selected = list(rng.choice(30, size=8, replace=False))
        before = detection(truth, selected)
        selected += list(rng.choice(30, size=5))
        after = detection(truth, selected)
        assert after or not before


def _outcome(sre=10.0, detected=True, active=4, runtime=0.1):
    return TrialOutcome(
        sre_db=sre, detected=detected, active_count=active, runtime_s=runtime
    )


def test_aggregate_single_outcome():
    summary = aggregate([_outcome(sre=12.5, detected=False, active=7)])
    assert summary.trials == 1
    assert summary.mean_sre_db == 12.5
    assert summary.sre_halfwidth == 0.0
    assert summary.detection_rate == 0.0
    assert summary.detection_halfwidth == 0.0
    assert summary.mean_active_count == 7.0
    assert summary.active_halfwidth == 0.0


def test_aggregate_pair_mean():
    summary = aggregate([_outcome(sre=10.0), _outcome(sre=20.0)])
    assert summary.mean_sre_db == 15.0
    assert summary.sre_halfwidth > 0.0


def test_aggregate_bernoulli_rate():
    rng = np.random.default_rng(4)
    flips = rng.uniform(size=100) < 0.5
    outcomes = [_outcome(detected=bool(f)) for f in flips]
    summary = aggregate(outcomes)
    assert 0.35 <= summary.detection_rate <= 0.65
    # the 95% interval should cover the true rate here
    assert abs(summary.detection_rate - 0.5) <= summary.detection_halfwidth + 0.05


def test_aggregate_empty_rejected():
    with pytest.raises(ValueError):
        aggregate([])


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
