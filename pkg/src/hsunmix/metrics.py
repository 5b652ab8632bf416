"""Recovery metrics and Monte Carlo aggregation."""

import math
from dataclasses import dataclass

import numpy as np

# Two-sided 95% normal quantile for confidence half-widths.
_Z95 = 1.959963984540054


@dataclass
class TrialOutcome:
    """Per-trial record for one method on one scene."""

    sre_db: float
    detected: bool
    active_count: int
    runtime_s: float


@dataclass
class Summary:
    """Aggregate over the successful trials of one method at one sweep
    point.  Half-widths are 95% normal-approximation confidence bounds
    (0 when only one trial contributed)."""

    trials: int
    mean_sre_db: float
    sre_halfwidth: float
    detection_rate: float
    detection_halfwidth: float
    mean_active_count: float
    active_halfwidth: float
    mean_runtime_s: float


def sre_db(C_true, C_hat):
    """Signal-to-reconstruction-error, 10 log10(||C||_F^2 / ||C - C_hat||_F^2).

    Returns ``inf`` for an exact reconstruction.  Shapes must match.
    """
    C_true = np.asarray(C_true, dtype=float)
    C_hat = np.asarray(C_hat, dtype=float)
    if C_true.shape != C_hat.shape:
        raise ValueError(
            f"shape mismatch: {C_true.shape} vs {C_hat.shape}"
        )
    signal = float(np.sum(C_true * C_true))
    if signal == 0.0:
        raise ValueError("reference coefficients are all zero")
    err = float(np.sum((C_true - C_hat) ** 2))
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(signal / err)


def detection(truth_indices, selected):
    """True when every truth index was selected (set containment)."""
    return bool(set(np.asarray(truth_indices, int).tolist())
                <= set(np.asarray(selected, int).tolist()))


def _half_width(values):
    values = np.asarray(values, dtype=float)
    if values.size <= 1:
        return 0.0
    sd = values.std(ddof=1)
    return float(_Z95 * sd / math.sqrt(values.size))


def aggregate(outcomes):
    """Summarize a list of TrialOutcome records."""
    if not outcomes:
        raise ValueError("no outcomes to aggregate")
    sre = np.array([o.sre_db for o in outcomes], dtype=float)
    det = np.array([1.0 if o.detected else 0.0 for o in outcomes])
    act = np.array([o.active_count for o in outcomes], dtype=float)
    rt = np.array([o.runtime_s for o in outcomes], dtype=float)
    return Summary(
        trials=len(outcomes),
        mean_sre_db=float(sre.mean()),
        sre_halfwidth=_half_width(sre),
        detection_rate=float(det.mean()),
        detection_halfwidth=_half_width(det),
        mean_active_count=float(act.mean()),
        active_halfwidth=_half_width(act),
        mean_runtime_s=float(rt.mean()),
    )
