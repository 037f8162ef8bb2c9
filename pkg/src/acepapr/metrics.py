"""Peak-to-average power ratio and CCDF estimation.

PAPR here is always measured against an explicitly supplied reference power —
the mean sample power of the system *before* constellation extension — so the
power added by extension shows up as a PAPR penalty instead of vanishing into
a per-frame average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def papr_db(samples, reference_power: float):
    """10*log10(max |s|^2 / reference_power) along the last axis.

    Scalar for a single frame, an array of the leading shape for batches.
    Invariant under sample reordering, conjugation, and a joint rescaling of
    the signal and the reference.
    """
    return papr_db_from_magnitudes(np.abs(np.asarray(samples)), reference_power)


def papr_db_from_magnitudes(magnitudes, reference_power: float):
    """papr_db for callers that already hold |s| (peak of squares = square of peak)."""
    if reference_power <= 0:
        raise ValueError("reference_power must be positive")
    peak = np.max(magnitudes, axis=-1) ** 2
    with np.errstate(divide="raise"):
        return 10.0 * np.log10(peak / reference_power)


def overall_papr_db(antenna_set):
    """Worst per-frame PAPR across all antennas and slots of a transmission.

    Accepts anything with ``frames`` shaped (n_antennas, n_slots, ..., n) and
    ``reference_power``; the maximum is taken over the first two axes so a
    trailing batch axis survives.
    """
    values = papr_db(antenna_set.frames, antenna_set.reference_power)
    return np.max(values, axis=(0, 1))


@dataclass(frozen=True)
class CcdfCurve:
    """Empirical Pr{PAPR >= threshold} over a threshold grid.

    n_frames is the number of OFDM frames consumed; n_samples the number of
    PAPR samples (one per transmission — smaller than n_frames for codes that
    span several frames).
    """

    thresholds_db: np.ndarray
    probabilities: np.ndarray
    n_frames: int
    seed: int | None = None
    n_samples: int = 0

    def __post_init__(self):
        t = np.asarray(self.thresholds_db, dtype=float)
        p = np.asarray(self.probabilities, dtype=float)
        if t.ndim != 1 or t.shape != p.shape:
            raise ValueError("thresholds and probabilities must be matching 1-D arrays")
        if np.any(np.diff(t) <= 0):
            raise ValueError("thresholds must be strictly ascending")
        if np.any(np.diff(p) > 0) or p[0] > 1.0 or np.any(p < 0):
            raise ValueError("probabilities must be non-increasing within [0, 1]")
        if self.n_samples == 0:
            object.__setattr__(self, "n_samples", self.n_frames)


def default_threshold_grid(start_db: float = 4.0, stop_db: float = 13.0, step_db: float = 0.1) -> np.ndarray:
    """Inclusive dB grid, rounded so the values are reproducible literals."""
    count = int(round((stop_db - start_db) / step_db))
    return np.round(start_db + step_db * np.arange(count + 1), 6)


def exceedance_counts(samples_db, thresholds_db) -> np.ndarray:
    """count(samples >= t) per threshold; integer, order-independent."""
    samples = np.sort(np.asarray(samples_db, dtype=float).ravel())
    t = np.asarray(thresholds_db, dtype=float)
    return samples.size - np.searchsorted(samples, t, side="left")


def ccdf(samples_db, thresholds_db, *, n_frames: int | None = None, seed: int | None = None) -> CcdfCurve:
    """Empirical CCDF of PAPR samples over a threshold grid."""
    samples = np.asarray(samples_db, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("cannot estimate a CCDF from zero samples")
    counts = exceedance_counts(samples, thresholds_db)
    return CcdfCurve(
        np.asarray(thresholds_db, dtype=float),
        counts / samples.size,
        n_frames if n_frames is not None else samples.size,
        seed,
        n_samples=samples.size,
    )


def papr_at_probability(curve: CcdfCurve, probability: float) -> float:
    """Threshold (dB) where the curve crosses the given probability.

    Linear interpolation in (threshold, log10 probability) between the last
    grid point above and the first at or below the target.  Raises when the
    probability lies outside what the curve attains (no extrapolation below
    the empirical floor).
    """
    if not 0.0 < probability <= 1.0:
        raise ValueError("probability must be in (0, 1]")
    p = curve.probabilities
    t = curve.thresholds_db
    positive = p[p > 0]
    floor = positive[-1] if positive.size else 1.0
    if probability > p[0] or probability < floor:
        raise ValueError(
            f"probability {probability:g} outside attainable range [{floor:g}, {p[0]:g}]"
        )
    j = int(np.argmax(p <= probability))  # first index at or below target
    if p[j] == probability or j == 0:
        return float(t[j])
    lo, hi = np.log10(p[j - 1]), np.log10(p[j])
    frac = (np.log10(probability) - lo) / (hi - lo)
    return float(t[j - 1] + frac * (t[j] - t[j - 1]))
