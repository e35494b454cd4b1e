"""Gray-coded constellations for BPSK and square M-QAM signalling.

Symbols live on the odd-integer grid: BPSK uses {-1, +1} on the real axis,
M-QAM uses {a + b*1j : a, b in PAM(sqrt(M))} where PAM(L) is the L-level
ladder {-(L-1), ..., -3, -1, +1, +3, ..., +(L-1)}. Bit labels are assigned
per axis through a binary-reflected Gray code, so axis-adjacent points
differ in exactly one bit. The first half of each symbol's bits (MSB first)
addresses the real axis, the second half the imaginary axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Constellation",
    "build_constellation",
    "modulate_bits",
    "demodulate_symbols",
    "quantize_to_alphabet",
    "pam_levels",
]


def pam_levels(n_levels: int) -> np.ndarray:
    """Amplitude ladder {-(L-1), ..., -1, +1, ..., +(L-1)} for one axis."""
    return np.arange(-(n_levels - 1), n_levels, 2, dtype=float)


def _gray_encode(rank: np.ndarray) -> np.ndarray:
    return rank ^ (rank >> 1)


def _gray_decode(code: np.ndarray) -> np.ndarray:
    rank = code.copy()
    shift = 1
    while (code >> shift).any():
        rank = rank ^ (code >> shift)
        shift += 1
    return rank


def _valid_order(order: int) -> bool:
    # 2, or an even power of two (4, 16, 64, 256, ...).
    if order == 2:
        return True
    if order < 4:
        return False
    exp = order.bit_length() - 1
    return (1 << exp) == order and exp % 2 == 0


@dataclass(frozen=True, eq=False)
class Constellation:
    """Modulation alphabet with its Gray bit labelling.

    ``alphabet[w]`` is the symbol labelled by the MSB-first bit expansion of
    the word ``w``; ``symbol_energy`` is the mean |x|^2 over the alphabet.
    """

    order: int
    alphabet: np.ndarray
    bits_per_symbol: int
    symbol_energy: float

    @property
    def levels(self) -> np.ndarray:
        """Per-axis PAM levels (BPSK: the two real points)."""
        return pam_levels(2 if self.order == 2 else int(round(np.sqrt(self.order))))


def build_constellation(order: int) -> Constellation:
    """Build the Gray-labelled constellation of the given modulation order.

    Args:
        order: 2 for BPSK, otherwise an even power of 2 (4, 16, 64, 256, ...).

    Returns:
        An immutable :class:`Constellation`.
    """
    if not isinstance(order, (int, np.integer)) or not _valid_order(int(order)):
        raise ValueError(
            f"modulation order must be 2 or an even power of 2 (4, 16, 64, ...); got {order!r}"
        )
    order = int(order)
    bits_per_symbol = int(round(np.log2(order)))
    words = np.arange(order)
    if order == 2:
        # Bit 0 -> -1, bit 1 -> +1, purely real.
        alphabet = (2 * words - 1).astype(complex)
    else:
        half = bits_per_symbol // 2
        n_lev = 1 << half
        levels = pam_levels(n_lev)
        re_rank = _gray_decode(words >> half)
        im_rank = _gray_decode(words & (n_lev - 1))
        alphabet = levels[re_rank] + 1j * levels[im_rank]
    energy = float(np.mean(np.abs(alphabet) ** 2))
    return Constellation(order, alphabet, bits_per_symbol, energy)


def modulate_bits(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Map a bit vector onto symbols, MSB-first within each symbol group."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size % c.bits_per_symbol != 0:
        raise ValueError(
            f"bit count {bits.size} is not a multiple of {c.bits_per_symbol}"
        )
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    groups = bits.astype(np.int64).reshape(-1, c.bits_per_symbol)
    weights = 1 << np.arange(c.bits_per_symbol - 1, -1, -1)
    return c.alphabet[groups @ weights]


def _words_of_symbols(symbols: np.ndarray, c: Constellation) -> np.ndarray:
    """Invert the alphabet labelling; raises on off-alphabet points."""
    symbols = np.asarray(symbols, dtype=complex)
    if c.order == 2:
        rank = (symbols.real + 1) / 2
        rank_int = np.rint(rank).astype(np.int64)
        ok = (symbols.imag == 0) & (rank == rank_int) & (rank_int >= 0) & (rank_int <= 1)
        if not ok.all():
            bad = symbols[~ok][0]
            raise ValueError(f"symbol {bad} is not a BPSK alphabet point")
        return rank_int
    n_lev = int(round(np.sqrt(c.order)))
    half = c.bits_per_symbol // 2
    ranks = []
    for axis in (symbols.real, symbols.imag):
        rank = (axis + (n_lev - 1)) / 2
        rank_int = np.rint(rank).astype(np.int64)
        ok = (rank == rank_int) & (rank_int >= 0) & (rank_int < n_lev)
        if not ok.all():
            bad = symbols[~ok][0]
            raise ValueError(f"symbol {bad} is not a {c.order}-QAM alphabet point")
        ranks.append(rank_int)
    return (_gray_encode(ranks[0]) << half) | _gray_encode(ranks[1])


def demodulate_symbols(symbols: np.ndarray, c: Constellation) -> np.ndarray:
    """Exact inverse of :func:`modulate_bits`; rejects off-alphabet symbols."""
    words = _words_of_symbols(symbols, c)
    shifts = np.arange(c.bits_per_symbol - 1, -1, -1)
    return ((words[:, None] >> shifts) & 1).astype(np.int64).ravel()


def quantize_to_alphabet(z, c: Constellation):
    """Nearest alphabet point, per axis, ties toward the more positive level.

    Accepts a complex scalar or array; returns the same shape.
    """
    arr = np.asarray(z, dtype=complex)
    if not np.isfinite(arr).all():
        raise ValueError("cannot quantize non-finite values")
    n_lev = 2 if c.order == 2 else int(round(np.sqrt(c.order)))

    def nearest(axis):
        # Half-up rounding of the continuous rank resolves ties upward.
        rank = np.floor((axis + (n_lev - 1)) / 2 + 0.5)
        return 2 * np.clip(rank, 0, n_lev - 1) - (n_lev - 1)

    if c.order == 2:
        out = nearest(arr.real).astype(complex)
    else:
        out = nearest(arr.real) + 1j * nearest(arr.imag)
    if np.isscalar(z) or arr.ndim == 0:
        return complex(out)
    return out
