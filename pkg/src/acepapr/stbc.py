"""Space-time block encoding for 2 and 4 transmit antennas.

The 2-antenna code sends, per subcarrier, (s0, -s1*) from antenna 1 and
(s1, s0*) from antenna 2 over two time slots.  The 4-antenna quasi-orthogonal
code applies the analogous 4x4 pattern to four sequential frames.  Every grid
entry is ±S_i or ±S_i*, so in the time domain every slot is the corresponding
time frame, possibly negated and/or conjugate-time-reversed — operations that
leave the PAPR of a slot exactly equal to that of its source frame.  PAPR
reduction therefore happens on the plain frames *before* encoding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ace import AceDiagnostics, AceParams, ace_reduce
from .constellation import Constellation
from .transforms import conj_time_reverse, synthesize

# (source frame index, negate, conjugate) for each antenna/slot of the two
# codes; read column-wise these reproduce the per-subcarrier matrices.
_PATTERN_2TX = (
    ((0, False, False), (1, True, True)),
    ((1, False, False), (0, False, True)),
)
_PATTERN_4TX = (
    ((0, False, False), (1, True, True), (2, False, False), (3, True, True)),
    ((1, False, False), (0, False, True), (3, False, False), (2, False, True)),
    ((2, False, False), (3, True, True), (0, False, False), (1, True, True)),
    ((3, False, False), (2, False, True), (1, False, False), (0, False, True)),
)


def _pattern(n_t: int):
    if n_t == 2:
        return _PATTERN_2TX
    if n_t == 4:
        return _PATTERN_4TX
    raise ValueError(f"unsupported antenna count {n_t}; expected 2 or 4")


@dataclass(frozen=True)
class StbcGrid:
    """Frequency-domain antenna/slot grid: frames shaped (n_t, slots, ..., n_c)."""

    antenna_frames: np.ndarray

    @property
    def n_t(self) -> int:
        return self.antenna_frames.shape[0]

    @property
    def slots(self) -> int:
        return self.antenna_frames.shape[1]


@dataclass(frozen=True)
class AntennaTimeSet:
    """Time-domain signals of one transmission, (n_antennas, n_slots, ..., n),
    plus the shared pre-extension reference power for PAPR readings."""

    frames: np.ndarray
    reference_power: float

    @property
    def n_t(self) -> int:
        return self.frames.shape[0]

    @property
    def slots(self) -> int:
        return self.frames.shape[1]


def _encode(frames) -> StbcGrid:
    pattern = _pattern(len(frames))
    first = np.asarray(frames[0], dtype=complex)
    for f in frames[1:]:
        if np.shape(f) != first.shape:
            raise ValueError("all frames of a block must have the same shape")
    grid = np.empty((len(frames), len(frames)) + first.shape, dtype=complex)
    for p, row in enumerate(pattern):
        for t, (src, negate, conjugate) in enumerate(row):
            entry = np.asarray(frames[src], dtype=complex)
            if conjugate:
                entry = np.conj(entry)
            grid[p, t] = -entry if negate else entry
    return StbcGrid(grid)


def stbc2_encode(s0, s1) -> StbcGrid:
    """Two-antenna block code over two sequential frames."""
    return _encode([s0, s1])


def stbc4_encode(s0, s1, s2, s3) -> StbcGrid:
    """Four-antenna quasi-orthogonal block code over four sequential frames."""
    return _encode([s0, s1, s2, s3])


def stbc_decode(grid: StbcGrid) -> list[np.ndarray]:
    """Invert the encoding pattern back to the input frames (exact).

    Every source frame appears un-negated and un-conjugated in slot 0, so the
    first column already carries the answer; kept as an explicit inversion so
    tests can check every grid entry agrees.
    """
    pattern = _pattern(grid.n_t)
    frames: list[np.ndarray | None] = [None] * grid.n_t
    for p, row in enumerate(pattern):
        for t, (src, negate, conjugate) in enumerate(row):
            entry = grid.antenna_frames[p, t]
            if negate:
                entry = -entry
            if conjugate:
                entry = np.conj(entry)
            if frames[src] is None:
                frames[src] = entry
    return frames


def stbc_time_frames(time_frames, n_t: int) -> np.ndarray:
    """Per-antenna time-domain slots built directly from pre-encoding signals.

    Uses only negation and conjugate time reversal, mirroring what encoding
    followed by synthesis produces: a conjugated frequency frame synthesizes
    to the conjugate-time-reverse of the original signal.
    Returns an (n_t, slots, ..., n) array.
    """
    pattern = _pattern(n_t)
    if len(time_frames) != n_t:
        raise ValueError(f"expected {n_t} time frames, got {len(time_frames)}")
    first = np.asarray(time_frames[0], dtype=complex)
    out = np.empty((n_t, n_t) + first.shape, dtype=complex)
    for p, row in enumerate(pattern):
        for t, (src, negate, conjugate) in enumerate(row):
            entry = np.asarray(time_frames[src], dtype=complex)
            if conjugate:
                entry = conj_time_reverse(entry)
            out[p, t] = -entry if negate else entry
    return out


def ace_stbc_pipeline(
    frames,
    params: AceParams,
    const: Constellation,
) -> tuple[AntennaTimeSet, list[AceDiagnostics]]:
    """Reduce each input frame independently, then space-time encode.

    With iterations=0 this is a plain block-coded transmission.  The set's
    reference power is the pre-extension mean sample power n_c/n, shared by
    all antennas and slots.
    """
    cfg = params.cfg
    n_t = len(frames)
    reduced = []
    diags = []
    for frame in frames:
        out, diag = ace_reduce(frame, params, const)
        reduced.append(out)
        diags.append(diag)
    time_frames = [synthesize(f, cfg) for f in reduced]
    return AntennaTimeSet(stbc_time_frames(time_frames, n_t), cfg.n_c / cfg.n), diags
