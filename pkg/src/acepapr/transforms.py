"""Oversampled OFDM synthesis/analysis and index-domain helpers.

Conventions (used consistently by every encoder in this package):

  synthesize:  s(n) = (1/sqrt(N)) * sum_{k<n_c} S(k) e^{+j 2 pi n k / N}
  analyze:     S(k) = (1/sqrt(N)) * sum_{n<N}   s(n) e^{-j 2 pi n k / N},  k < n_c

i.e. a unitary pair with the occupied bins at 0..n_c-1 and zero padding above,
so analyze(synthesize(S)) == S and a right circular shift by d of the occupied
bins multiplies the time signal by e^{+j 2 pi n d / N} (as long as the shift
does not push content past bin n_c-1).  Conjugating a frequency frame
conjugate-time-reverses its time signal.

All functions accept arrays whose last axis is the frame and broadcast over
leading axes.  The module keeps a per-process count of transformed rows for
complexity diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod, sqrt

import numpy as np

_fft_calls = 0


def fft_call_count() -> int:
    """Transform rows performed in this process since the last reset."""
    return _fft_calls


def reset_fft_call_count() -> None:
    global _fft_calls
    _fft_calls = 0


def _count_rows(shape) -> None:
    global _fft_calls
    _fft_calls += prod(shape[:-1]) if len(shape) > 1 else 1


@dataclass(frozen=True)
class OversamplingConfig:
    """Subcarrier count and integer oversampling ratio; n = oversample * n_c."""

    n_c: int
    oversample: int = 4

    def __post_init__(self):
        if self.n_c < 2:
            raise ValueError("n_c must be at least 2")
        if self.oversample < 1 or int(self.oversample) != self.oversample:
            raise ValueError("oversample must be a positive integer")

    @property
    def n(self) -> int:
        return self.oversample * self.n_c


def synthesize(frames, cfg: OversamplingConfig) -> np.ndarray:
    """Oversampled time-domain signal of frequency frames (last axis n_c -> n)."""
    frames = np.asarray(frames, dtype=complex)
    if frames.shape[-1] != cfg.n_c:
        raise ValueError(f"frame length {frames.shape[-1]} != n_c {cfg.n_c}")
    _count_rows(frames.shape)
    # ifft pads with trailing zeros, which is exactly the bin layout used here
    return np.fft.ifft(frames, n=cfg.n, axis=-1) * sqrt(cfg.n)


def analyze(samples, cfg: OversamplingConfig) -> np.ndarray:
    """In-band frequency content of time signals (last axis n -> n_c).

    Matched to synthesize; bins n_c..n-1 are discarded, which is where
    clipping noise outside the occupied band ends up.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.shape[-1] != cfg.n:
        raise ValueError(f"signal length {samples.shape[-1]} != n {cfg.n}")
    _count_rows(samples.shape)
    return np.fft.fft(samples, axis=-1)[..., : cfg.n_c] / sqrt(cfg.n)


def circular_shift(frames, shift: int) -> np.ndarray:
    """Right circular shift along the last axis: out(k) = in((k - shift) mod len)."""
    return np.roll(np.asarray(frames), shift, axis=-1)


def conj_time_reverse(samples) -> np.ndarray:
    """out(n) = conj(in((-n) mod N)) along the last axis.  An involution."""
    samples = np.asarray(samples)
    out = np.empty_like(samples)
    out[..., 0] = samples[..., 0]
    out[..., 1:] = samples[..., :0:-1]
    return np.conj(out, out=out) if np.iscomplexobj(out) else out
