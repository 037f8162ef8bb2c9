"""Iterative clip / filter / project PAPR reduction for one frequency frame.

Each iteration: synthesize the current frame, soft-clip the time samples at a
fixed amplitude, transform back, discard the out-of-band bins, and project
every in-band symbol onto the allowable region anchored at the *original*
symbol.  The clip level stays anchored to the pre-extension average power, so
power added by the extension is not allowed to raise the effective threshold.

Alternating a convex time-domain constraint (bounded magnitude) with a convex
frequency-domain one (the extension regions) is an alternating-projection
scheme; it does not guarantee a monotone peak, only a statistically shrinking
one, which is what the CCDF experiments measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constellation import Constellation, _project, anchor_index
from .metrics import papr_db_from_magnitudes
from .transforms import OversamplingConfig, analyze, synthesize


@dataclass(frozen=True)
class AceParams:
    """Loop configuration: clip level in dB over the reference power, iteration
    budget, optional early-stop PAPR target, and the transform geometry."""

    clip_db: float
    iterations: int
    cfg: OversamplingConfig
    target_papr_db: float | None = None

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not np.isfinite(self.clip_db):
            raise ValueError("clip_db must be finite")


@dataclass
class AceDiagnostics:
    """Per-iterate records: entry i describes the frame after i iterations.

    papr_per_iteration_db and clipped_sample_counts have iterations+1 leading
    entries (fewer if an early-stop target was hit); trailing axes are the
    batch shape.  delta_power is the squared extension norm per frame.
    """

    papr_per_iteration_db: np.ndarray
    clipped_sample_counts: np.ndarray
    delta_power: np.ndarray | float
    reference_power: float = field(default=0.0)


def clip(samples, amplitude: float) -> np.ndarray:
    """Soft limiter: magnitudes above `amplitude` are scaled down, phase kept."""
    samples = np.asarray(samples, dtype=complex)
    return clip_with_magnitudes(samples, np.abs(samples), amplitude)


def clip_with_magnitudes(samples, magnitudes, amplitude: float) -> np.ndarray:
    """clip() for callers that already hold |s|; only offenders are touched."""
    if amplitude <= 0:
        raise ValueError("clip amplitude must be positive")
    out = samples.copy()
    over = magnitudes > amplitude
    if over.any():
        out[over] = samples[over] * (amplitude / magnitudes[over])
    return out


def clip_amplitude_from_db(clip_db: float, reference_power: float) -> float:
    """Clip amplitude sitting clip_db above a reference average power."""
    if reference_power <= 0:
        raise ValueError("reference_power must be positive")
    return float(np.sqrt(reference_power * 10.0 ** (clip_db / 10.0)))


def ace_iterate(original, current, amplitude: float, const: Constellation, cfg: OversamplingConfig) -> np.ndarray:
    """One clip/filter/project pass; regions stay anchored at `original`."""
    clipped = clip(synthesize(current, cfg), amplitude)
    moved = analyze(clipped, cfg)
    idx = anchor_index(original, const)
    return _project(moved, const.points[idx], const.extend_re[idx], const.extend_im[idx])


def ace_reduce(
    frame,
    params: AceParams,
    const: Constellation,
    *,
    reference_power: float | None = None,
    support=None,
) -> tuple[np.ndarray, AceDiagnostics]:
    """Run the iterative loop on a frame (or batch with leading axes).

    reference_power defaults to n_c/n, the ensemble mean sample power of a
    unit-power constellation, and feeds both the clip amplitude and every PAPR
    reading.  `support` restricts the loop to a boolean subset of the n_c
    bins: bins outside it are forced to zero after each analysis step and
    only supported bins are projected (used by the subblock reducer, where a
    frame is a zero-padded comb).
    """
    frame = np.asarray(frame, dtype=complex)
    cfg = params.cfg
    if reference_power is None:
        reference_power = cfg.n_c / cfg.n
    amplitude = clip_amplitude_from_db(params.clip_db, reference_power)

    if support is None:
        support = np.ones(cfg.n_c, dtype=bool)
    else:
        support = np.asarray(support, dtype=bool)
    idx = anchor_index(frame[..., support], const)
    anchors = const.points[idx]
    re_free = const.extend_re[idx]
    im_free = const.extend_im[idx]

    current = frame.copy()
    signal = synthesize(current, cfg)
    magnitudes = np.abs(signal)
    paprs = [papr_db_from_magnitudes(magnitudes, reference_power)]
    clipped_counts = [np.count_nonzero(magnitudes > amplitude, axis=-1)]
    batch_shape = frame.shape[:-1]
    done = np.zeros(batch_shape, dtype=bool)
    if params.target_papr_db is not None:
        done |= paprs[0] <= params.target_papr_db

    for _ in range(params.iterations):
        if done.all():
            break
        moved = analyze(clip_with_magnitudes(signal, magnitudes, amplitude), cfg)
        projected = np.zeros_like(current)
        projected[..., support] = _project(moved[..., support], anchors, re_free, im_free)
        # frames that already met the target are frozen
        current = np.where(done[..., None], current, projected) if done.any() else projected
        signal = synthesize(current, cfg)
        magnitudes = np.abs(signal)
        paprs.append(papr_db_from_magnitudes(magnitudes, reference_power))
        clipped_counts.append(np.count_nonzero(magnitudes > amplitude, axis=-1))
        if params.target_papr_db is not None:
            done |= paprs[-1] <= params.target_papr_db

    delta = current - frame
    diagnostics = AceDiagnostics(
        papr_per_iteration_db=np.asarray(paprs),
        clipped_sample_counts=np.asarray(clipped_counts),
        delta_power=np.sum(np.abs(delta) ** 2, axis=-1),
        reference_power=reference_power,
    )
    return current, diagnostics
