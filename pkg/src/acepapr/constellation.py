"""Complex-symbol constellations, Gray bit (de)mapping and extension regions.

A constellation point may be moved ("extended") away from the decision
boundaries without shrinking the minimum distance of the alphabet.  The set of
admissible positions for a point is its allowable region: per component, either
the nominal value is frozen, or the magnitude may only grow while the sign is
kept.  QPSK points extend in both components; for square 16-QAM only the
outermost level of a component is free (corners extend both ways, edge points
one way, interior points are pinned).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class Constellation:
    """Unit-average-power alphabet with Gray bit map and extension masks.

    ``points[i]`` is the symbol for the bit pattern whose MSB-first integer
    value is ``i``.  ``extend_re``/``extend_im`` mark, per point, whether the
    real/imaginary component may grow outward.
    """

    name: str
    points: np.ndarray
    bits_per_symbol: int
    extend_re: np.ndarray
    extend_im: np.ndarray
    bit_table: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        order = self.points.size
        if order != 2**self.bits_per_symbol:
            raise ValueError("constellation order must be 2**bits_per_symbol")
        # bit pattern of point i, MSB first
        table = (np.arange(order)[:, None] >> np.arange(self.bits_per_symbol - 1, -1, -1)) & 1
        object.__setattr__(self, "bit_table", table.astype(np.uint8))

    @property
    def order(self) -> int:
        return self.points.size

    @property
    def region_classes(self) -> list[str]:
        """Per-point region label derived from the extension masks.

        "edge-horizontal" points extend along the real axis only,
        "edge-vertical" along the imaginary axis only.
        """
        labels = []
        for re_free, im_free in zip(self.extend_re, self.extend_im):
            if re_free and im_free:
                labels.append("corner")
            elif re_free:
                labels.append("edge-horizontal")
            elif im_free:
                labels.append("edge-vertical")
            else:
                labels.append("interior")
        return labels


def qpsk() -> Constellation:
    """Gray-mapped QPSK: 00->(+,+), 01->(-,+), 10->(+,-), 11->(-,-), power 1.

    First bit selects the imaginary sign, second bit the real sign; all four
    points are corners (both components extendable).
    """
    re = np.array([1, -1, 1, -1], dtype=float)
    im = np.array([1, 1, -1, -1], dtype=float)
    points = (re + 1j * im) / np.sqrt(2.0)
    free = np.ones(4, dtype=bool)
    return Constellation("qpsk", points, 2, free, free.copy())


def qam16() -> Constellation:
    """Gray-mapped square 16-QAM on {±1,±3}²/√10.

    Per axis, two bits Gray-map to the levels 00->-3, 01->-1, 11->+1, 10->+3;
    the first bit pair drives the real part, the second the imaginary part.
    """
    gray_levels = {0b00: -3.0, 0b01: -1.0, 0b11: 1.0, 0b10: 3.0}
    points = np.empty(16, dtype=complex)
    for idx in range(16):
        points[idx] = gray_levels[idx >> 2] + 1j * gray_levels[idx & 0b11]
    points /= np.sqrt(10.0)
    re_lvl = np.round(points.real * np.sqrt(10.0))
    im_lvl = np.round(points.imag * np.sqrt(10.0))
    return Constellation("qam16", points, 4, np.abs(re_lvl) == 3, np.abs(im_lvl) == 3)


def get_constellation(name: str) -> Constellation:
    """Look up a built-in constellation by name ("qpsk" or "qam16")."""
    builders = {"qpsk": qpsk, "qam16": qam16}
    try:
        return builders[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}; expected one of {sorted(builders)}") from None


def map_bits(bits, const: Constellation) -> np.ndarray:
    """Map a bit array onto constellation symbols.

    The last axis length must be a multiple of ``bits_per_symbol``; each
    consecutive group of bits (MSB first) indexes one point.  Leading axes are
    preserved, so a (batch, n_bits) array maps to (batch, n_symbols).
    """
    bits = np.asarray(bits)
    bps = const.bits_per_symbol
    if bits.shape[-1] % bps:
        raise ValueError(f"bit count {bits.shape[-1]} is not a multiple of {bps}")
    groups = bits.reshape(*bits.shape[:-1], -1, bps)
    weights = 1 << np.arange(bps - 1, -1, -1)
    idx = (groups * weights).sum(axis=-1)
    return const.points[idx]


def demap_nearest(symbols, const: Constellation):
    """Hard-decide each symbol to the nearest point and return its bits.

    Ties go to the lowest point index, so the decision is deterministic.
    Output has the same leading shape with the last axis expanded by
    ``bits_per_symbol``.
    """
    symbols = np.asarray(symbols, dtype=complex)
    idx = nearest_point_index(symbols, const)
    bits = const.bit_table[idx]
    return bits.reshape(*symbols.shape[:-1], -1)


def nearest_point_index(symbols, const: Constellation) -> np.ndarray:
    """Index of the Euclidean-nearest point per symbol (lowest index on ties)."""
    symbols = np.asarray(symbols, dtype=complex)
    d2 = np.abs(symbols[..., None] - const.points) ** 2
    return np.argmin(d2, axis=-1)


def anchor_index(original, const: Constellation) -> np.ndarray:
    """Resolve region anchors to point indices, requiring an exact match.

    Anchors produced by the spatial encoders are negated and/or conjugated
    points; both operations map the alphabet onto itself, so every valid
    anchor is itself a nominal point.
    """
    original = np.asarray(original, dtype=complex)
    idx = nearest_point_index(original, const)
    if not np.allclose(original, const.points[idx], rtol=0.0, atol=_MATCH_TOL):
        raise ValueError("anchor symbols are not (±, conjugated) nominal constellation points")
    return idx


def project_to_region(moved, original, const: Constellation) -> np.ndarray:
    """Project moved symbols onto the allowable regions of their anchors.

    Component-wise orthogonal projection: a frozen component snaps back to the
    nominal value exactly; an extendable component keeps the anchor's sign and
    a magnitude of at least the nominal one (clamped up if it fell below,
    reset if the sign flipped).  Idempotent, and commutes with negation and
    conjugation of (moved, original) pairs.
    """
    moved = np.asarray(moved, dtype=complex)
    idx = anchor_index(original, const)
    anchors = const.points[idx]
    return _project(moved, anchors, const.extend_re[idx], const.extend_im[idx])


def _project(moved, anchors, re_free, im_free) -> np.ndarray:
    """Projection core with pre-resolved anchors and masks (loop hot path)."""
    out_re = _project_component(moved.real, anchors.real, re_free)
    out_im = _project_component(moved.imag, anchors.imag, im_free)
    return out_re + 1j * out_im


def _project_component(x, nominal, free):
    sign = np.sign(nominal)
    outward = np.maximum(sign * x, np.abs(nominal)) * sign
    return np.where(free, outward, nominal)
