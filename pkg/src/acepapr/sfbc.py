"""Space-frequency block coding and its two constellation-extension reducers.

An SFBC encoder works on subblocks: subblock i of a frame is the comb that
keeps every gamma-th symbol starting at offset i, moved down to offsets
0, gamma, 2*gamma, ... and zero elsewhere.  Each antenna frame is a sum of
circularly shifted subblocks and/or their conjugates with unit coefficients,
one contribution per subcarrier, so the per-antenna frame is an exact
rearrangement (up to sign/conjugation) of the data symbols.

Two reducers keep those relationships intact while lowering the worst
per-antenna PAPR:

* subblock reduction ("sub" pipeline): run the clip/filter/project loop on
  each subblock independently — every antenna signal is a phase-rotated
  combination of the subblock signals and their conjugate time reversals, so
  taming the subblocks tames all antennas at once.  Recombination can create
  fresh peaks when subblock phases align, increasingly so for longer codes.
* selective reduction: per iteration, clip/filter/project only the antenna
  currently showing the worst PAPR, then regenerate the data frame (and hence
  all other antennas) from that antenna alone.  Costs one transform per
  antenna per iteration but avoids the recombination peaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ace import (
    AceDiagnostics,
    AceParams,
    ace_reduce,
    clip_amplitude_from_db,
    clip_with_magnitudes,
)
from .constellation import Constellation, _project, anchor_index
from .metrics import papr_db_from_magnitudes
from .stbc import AntennaTimeSet
from .transforms import analyze, circular_shift, conj_time_reverse, synthesize


@dataclass(frozen=True)
class SfbcCode:
    """Coefficient tables: antenna p = sum_i shift(a[p,i]*X_i + b[p,i]*conj(X_i), d[p,i]).

    For each (antenna, subblock) term exactly one of a, b is nonzero with unit
    magnitude, and per antenna the shifts are a permutation of 0..gamma-1 so
    every subcarrier receives exactly one contribution.
    """

    gamma: int
    n_t: int
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        d = np.asarray(self.d, dtype=int)
        expected = (self.n_t, self.gamma)
        if a.shape != expected or b.shape != expected or d.shape != expected:
            raise ValueError(f"coefficient tables must have shape {expected}")
        both = (a != 0) & (b != 0)
        neither = (a == 0) & (b == 0)
        if both.any() or neither.any():
            raise ValueError("each term needs exactly one of a, b nonzero")
        mags = np.abs(np.where(a != 0, a, b))
        if not np.allclose(mags, 1.0, rtol=0.0, atol=1e-12):
            raise ValueError("nonzero coefficients must have unit magnitude")
        if (d < 0).any() or (d >= self.gamma).any():
            raise ValueError("shifts must lie in [0, gamma)")
        for p in range(self.n_t):
            if sorted(d[p]) != list(range(self.gamma)):
                raise ValueError(f"antenna {p}: shifts must be a permutation of 0..gamma-1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)


def sfbc_code_2tx() -> SfbcCode:
    """Two-antenna code over symbol pairs.

    Per pair (s_even, s_odd): antenna 1 transmits (s_even, s_odd), antenna 2
    (s_odd*, -s_even*).  In subblock form: antenna1 = X0 + shift(X1, 1),
    antenna2 = -shift(conj(X0), 1) + conj(X1).
    """
    return SfbcCode(
        gamma=2,
        n_t=2,
        a=np.array([[1, 1], [0, 0]], dtype=complex),
        b=np.array([[0, 0], [-1, 1]], dtype=complex),
        d=np.array([[0, 1], [1, 0]]),
    )


def sfbc_code_4tx() -> SfbcCode:
    """Four-antenna code over symbol quads.

    Per quad (s0, s1, s2, s3) the antennas transmit
        1: ( s0,   s1,   s2,   s3 )
        2: (-s1*,  s0*, -s3*,  s2*)
        3: ( s2,   s3,   s0,   s1 )
        4: (-s3*,  s2*, -s1*,  s0*)
    """
    return SfbcCode(
        gamma=4,
        n_t=4,
        a=np.array(
            [[1, 1, 1, 1], [0, 0, 0, 0], [1, 1, 1, 1], [0, 0, 0, 0]], dtype=complex
        ),
        b=np.array(
            [[0, 0, 0, 0], [1, -1, 1, -1], [0, 0, 0, 0], [1, -1, 1, -1]], dtype=complex
        ),
        d=np.array([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]),
    )


def get_sfbc_code(n_t: int) -> SfbcCode:
    if n_t == 2:
        return sfbc_code_2tx()
    if n_t == 4:
        return sfbc_code_4tx()
    raise ValueError(f"no built-in code for {n_t} antennas")


def split_subblocks(frame, gamma: int) -> np.ndarray:
    """Zero-padded comb subblocks, shaped (gamma, ..., n_c).

    Subblock i holds frame[i], frame[i+gamma], ... at offsets 0, gamma, ...;
    summing the right-shift of subblock i by i recovers the frame.
    """
    frame = np.asarray(frame, dtype=complex)
    n_c = frame.shape[-1]
    if n_c % gamma:
        raise ValueError(f"gamma {gamma} does not divide frame length {n_c}")
    subblocks = np.zeros((gamma,) + frame.shape, dtype=complex)
    for i in range(gamma):
        subblocks[i, ..., ::gamma] = frame[..., i::gamma]
    return subblocks


def recompose(subblocks) -> np.ndarray:
    """Exact inverse of split_subblocks: sum of right-shifted subblocks."""
    subblocks = np.asarray(subblocks, dtype=complex)
    gamma = subblocks.shape[0]
    frame = np.zeros(subblocks.shape[1:], dtype=complex)
    for i in range(gamma):
        frame[..., i::gamma] = subblocks[i, ..., ::gamma]
    return frame


def subblock_support(n_c: int, gamma: int) -> np.ndarray:
    """Boolean mask of the bins a subblock may occupy (multiples of gamma)."""
    mask = np.zeros(n_c, dtype=bool)
    mask[::gamma] = True
    return mask


def sfbc_encode(frame, code: SfbcCode) -> np.ndarray:
    """Frequency-domain antenna frames, shaped (n_t, ..., n_c)."""
    frame = np.asarray(frame, dtype=complex)
    subblocks = split_subblocks(frame, code.gamma)
    out = np.zeros((code.n_t,) + frame.shape, dtype=complex)
    for p in range(code.n_t):
        for i in range(code.gamma):
            term = code.a[p, i] * subblocks[i] + code.b[p, i] * np.conj(subblocks[i])
            out[p] += circular_shift(term, int(code.d[p, i]))
    return out


def sfbc_time_synthesis(subblock_signals, code: SfbcCode, antenna: int) -> np.ndarray:
    """Antenna time signal from the synthesized subblock signals.

    Each term contributes a[p,i]*x_i(n) or b[p,i]*conj(x_i(-n mod N)), rotated
    by e^{+j 2 pi n d / N} — the time-domain image of the circular shift under
    this package's transform convention.  No transform is performed here.
    """
    signals = np.asarray(subblock_signals, dtype=complex)
    if signals.shape[0] != code.gamma:
        raise ValueError(f"expected {code.gamma} subblock signals")
    n = signals.shape[-1]
    out = np.zeros(signals.shape[1:], dtype=complex)
    for i in range(code.gamma):
        shift = int(code.d[antenna, i])
        if code.a[antenna, i] != 0:
            term = code.a[antenna, i] * signals[i]
        else:
            term = code.b[antenna, i] * conj_time_reverse(signals[i])
        if shift:
            term = term * np.exp((2j * np.pi * shift / n) * np.arange(n))
        out += term
    return out


def reconstruct_from_antenna(antenna_frame, antenna: int, code: SfbcCode) -> np.ndarray:
    """Recover the data frame from a single antenna's frequency frame (exact).

    Inverts the encoding per subblock: the bins congruent to d[p,i] mod gamma
    carry a[p,i]*X_i or b[p,i]*conj(X_i); dividing by the unit coefficient
    (and conjugating for b-terms) returns X_i, and interleaving the subblocks
    returns the frame.  Each built-in code row is a per-group permutation with
    optional negate/conjugate, so this holds for every antenna.
    """
    antenna_frame = np.asarray(antenna_frame, dtype=complex)
    if not 0 <= antenna < code.n_t:
        raise ValueError(f"antenna index {antenna} out of range for {code.n_t} antennas")
    frame = np.zeros_like(antenna_frame)
    for i in range(code.gamma):
        shift = int(code.d[antenna, i])
        values = antenna_frame[..., shift :: code.gamma]
        if code.a[antenna, i] != 0:
            frame[..., i :: code.gamma] = values * np.conj(code.a[antenna, i])
        else:
            frame[..., i :: code.gamma] = np.conj(values * np.conj(code.b[antenna, i]))
    return frame


def sub_ace(
    frame,
    code: SfbcCode,
    params: AceParams,
    const: Constellation,
) -> tuple[AntennaTimeSet, AceDiagnostics]:
    """Subblock-wise reduction, then recombination into antenna signals.

    Each subblock runs the full clip/filter/project loop with its own clip
    reference — the mean sample power (n_c/gamma)/n of a comb carrying
    n_c/gamma unit-power symbols — and with every bin outside the comb forced
    to zero, preserving the subblock structure exactly.  The returned
    diagnostics carry a leading subblock axis.
    """
    cfg = params.cfg
    if cfg.n_c % code.gamma:
        raise ValueError("code block length must divide the subcarrier count")
    subblocks = split_subblocks(frame, code.gamma)
    support = subblock_support(cfg.n_c, code.gamma)
    sub_reference = (cfg.n_c / code.gamma) / cfg.n
    reduced, diagnostics = ace_reduce(
        subblocks, params, const, reference_power=sub_reference, support=support
    )
    signals = synthesize(reduced, cfg)
    antennas = np.stack(
        [sfbc_time_synthesis(signals, code, p) for p in range(code.n_t)]
    )
    return AntennaTimeSet(antennas[:, None], cfg.n_c / cfg.n), diagnostics


@dataclass
class SelectiveAceState:
    """Trace of a selective reduction run.

    current is the final data frame; selected_antenna_history[k] is the
    antenna treated at iteration k; papr_history_db[k] is the overall (worst
    antenna) PAPR after k iterations, so it has one more entry than
    iterations actually performed.  Batch axes trail.
    """

    current: np.ndarray
    iterations: int
    selected_antenna_history: np.ndarray
    papr_history_db: np.ndarray


def selective_ace(
    frame,
    code: SfbcCode,
    params: AceParams,
    const: Constellation,
) -> tuple[AntennaTimeSet, SelectiveAceState]:
    """Iteratively clip/filter/project the worst antenna, regenerate the rest.

    Projection happens in the antenna domain, against anchors taken from the
    encoding of the *original* frame: antenna symbols are negated/conjugated
    data symbols, and the extension regions commute with both operations, so
    the reconstructed data frame stays inside the regions of the original.
    Ties in the worst-antenna search go to the lowest antenna index.
    """
    cfg = params.cfg
    if cfg.n_c % code.gamma:
        raise ValueError("code block length must divide the subcarrier count")
    frame = np.asarray(frame, dtype=complex)
    reference_power = cfg.n_c / cfg.n
    amplitude = clip_amplitude_from_db(params.clip_db, reference_power)

    anchors = sfbc_encode(frame, code)  # (n_t, ..., n_c)
    anchor_idx = anchor_index(anchors, const)

    current = frame.copy()
    batch_shape = frame.shape[:-1]
    selected = []
    papr_trace = []
    done = np.zeros(batch_shape, dtype=bool)

    antenna_frames = sfbc_encode(current, code)
    signals = synthesize(antenna_frames, cfg)
    magnitudes = np.abs(signals)
    per_antenna = papr_db_from_magnitudes(magnitudes, reference_power)  # (n_t, ...)
    papr_trace.append(per_antenna.max(axis=0))
    performed = 0
    for _ in range(params.iterations):
        if params.target_papr_db is not None:
            done |= papr_trace[-1] <= params.target_papr_db
        if done.all():
            break
        worst = np.argmax(per_antenna, axis=0)  # lowest index wins ties
        selected.append(worst)
        performed += 1

        gather = worst[None, ..., None]
        chosen_signal = np.take_along_axis(signals, gather, axis=0)[0]
        chosen_mags = np.take_along_axis(magnitudes, gather, axis=0)[0]
        moved = analyze(clip_with_magnitudes(chosen_signal, chosen_mags, amplitude), cfg)
        idx = np.take_along_axis(anchor_idx, gather, axis=0)[0]
        projected = _project(
            moved, const.points[idx], const.extend_re[idx], const.extend_im[idx]
        )

        updated = np.empty_like(current)
        for q in range(code.n_t):
            mask = worst == q
            if not mask.any():
                continue
            if batch_shape:
                updated[mask] = reconstruct_from_antenna(projected[mask], q, code)
            else:
                updated = reconstruct_from_antenna(projected, q, code)
        current = np.where(done[..., None], current, updated) if done.any() else updated

        antenna_frames = sfbc_encode(current, code)
        signals = synthesize(antenna_frames, cfg)
        magnitudes = np.abs(signals)
        per_antenna = papr_db_from_magnitudes(magnitudes, reference_power)
        papr_trace.append(per_antenna.max(axis=0))

    state = SelectiveAceState(
        current=current,
        iterations=performed,
        selected_antenna_history=np.asarray(selected, dtype=int),
        papr_history_db=np.asarray(papr_trace),
    )
    return AntennaTimeSet(signals[:, None], reference_power), state
