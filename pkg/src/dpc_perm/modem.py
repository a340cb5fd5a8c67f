"""QAM modulation, AWGN, and bit-error accounting.

Constellations are unit-average-energy with a fixed, documented bit
labeling so that result files are reproducible bit for bit:

* Square QAM (4, 16, 64): the first half of a symbol's bits selects the
  real axis, the second half the imaginary axis. On each axis the label
  bits are a binary-reflected Gray code over the amplitude levels, with
  the all-zero label on the most positive level. QPSK bits ``00``
  therefore map to ``(1 + 1j) / sqrt(2)``.
* 128-QAM uses the standard cross constellation (a 12 x 12 odd-integer
  grid minus the four 2 x 2 corners). No perfect Gray map exists on a
  cross, so labels follow a serpentine Gray walk over the columns:
  vertically adjacent points always differ in one bit.

Hard decisions are minimum-Euclidean-distance over the full point set;
exact ties resolve to the numerically smallest bit label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import LengthMismatch

__all__ = [
    "Constellation",
    "QAM_ORDERS",
    "make_constellation",
    "modulation_name",
    "qam_modulate",
    "qam_demodulate",
    "decision_margins",
    "add_awgn",
    "count_ber",
    "wilson_interval",
]

QAM_ORDERS = (4, 16, 64, 128)

# Two-sided 95% normal quantile used by the Wilson score interval.
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class Constellation:
    """Unit-energy constellation with ``points[label]`` indexed by bit label."""

    order: int
    bits_per_symbol: int
    points: np.ndarray

    @property
    def name(self) -> str:
        return modulation_name(self.order)


def modulation_name(order: int) -> str:
    return "qpsk" if order == 4 else f"{order}-qam"


def _gray(i: np.ndarray) -> np.ndarray:
    return i ^ (i >> 1)


def _gray_inverse(g: int) -> int:
    i = 0
    while g:
        i ^= g
        g >>= 1
    return i


def _square_points(order: int) -> np.ndarray:
    bits_axis = int(math.log2(order)) // 2
    m = 1 << bits_axis
    points = np.empty(order, dtype=np.complex128)
    for label in range(order):
        g_re = label >> bits_axis
        g_im = label & (m - 1)
        # Level index 0 sits at the positive extreme; Gray-adjacent
        # labels land on adjacent amplitude levels.
        re = (m - 1) - 2 * _gray_inverse(g_re)
        im = (m - 1) - 2 * _gray_inverse(g_im)
        points[label] = re + 1j * im
    return points


def _cross_points_128() -> np.ndarray:
    levels = np.arange(-11, 12, 2)
    cols = []
    for ci, re in enumerate(levels):
        ims = levels if ci % 2 == 0 else levels[::-1]
        col = [re + 1j * im for im in ims if not (abs(re) > 7 and abs(im) > 7)]
        cols.extend(col)
    walk = np.asarray(cols, dtype=np.complex128)
    points = np.empty(walk.size, dtype=np.complex128)
    idx = np.arange(walk.size, dtype=np.int64)
    points[_gray(idx)] = walk
    return points


@lru_cache(maxsize=None)
def make_constellation(order: int) -> Constellation:
    """Build the unit-average-energy constellation for a supported order."""
    if order not in QAM_ORDERS:
        raise ValueError(f"unsupported QAM order {order}, expected one of {QAM_ORDERS}")
    points = _cross_points_128() if order == 128 else _square_points(order)
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))
    points.setflags(write=False)
    return Constellation(order=order, bits_per_symbol=int(math.log2(order)), points=points)


def qam_modulate(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Map a bit vector to symbols, most significant bit first per symbol."""
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    b = c.bits_per_symbol
    if bits.size % b != 0:
        raise LengthMismatch(f"{bits.size} bits do not divide into {b}-bit symbols")
    weights = 1 << np.arange(b - 1, -1, -1, dtype=np.int64)
    labels = bits.reshape(-1, b) @ weights
    return c.points[labels]


def qam_demodulate(y: np.ndarray, c: Constellation) -> np.ndarray:
    """Hard-decision demodulation back to bits.

    Nearest constellation point in Euclidean distance; an exact tie goes
    to the smaller bit label (argmin picks the first minimum).
    """
    y = np.asarray(y, dtype=np.complex128).ravel()
    d2 = np.abs(y[:, np.newaxis] - c.points[np.newaxis, :]) ** 2
    labels = np.argmin(d2, axis=1)
    b = c.bits_per_symbol
    shifts = np.arange(b - 1, -1, -1, dtype=np.int64)
    return ((labels[:, np.newaxis] >> shifts) & 1).astype(np.uint8).ravel()


def decision_margins(y: np.ndarray, c: Constellation) -> np.ndarray:
    """Distance of each sample to its nearest decision boundary.

    Half the gap between the nearest and second-nearest point distances;
    zero means the sample sits exactly on a boundary.
    """
    y = np.asarray(y, dtype=np.complex128).ravel()
    d = np.abs(y[:, np.newaxis] - c.points[np.newaxis, :])
    d.sort(axis=1)
    return (d[:, 1] - d[:, 0]) / 2.0


def add_awgn(
    x: np.ndarray, snr_db: float, signal_power: float, rng: np.random.Generator
) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise at the given SNR.

    Noise variance per entry is ``signal_power / 10**(snr_db / 10)``.
    ``snr_db = inf`` is the noiseless sentinel and returns ``x``
    unchanged (no draw is consumed). Deterministic in ``rng``.
    """
    x = np.asarray(x, dtype=np.complex128)
    if not signal_power > 0:
        raise ValueError(f"signal_power must be positive, got {signal_power}")
    if math.isinf(snr_db):
        return x.copy()
    noise_var = signal_power / 10.0 ** (snr_db / 10.0)
    scale = math.sqrt(noise_var / 2.0)
    noise = rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    return x + scale * noise


def count_ber(tx_bits: np.ndarray, rx_bits: np.ndarray) -> tuple[int, int]:
    """Hamming distance and total length of two bit vectors."""
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.size != rx.size:
        raise LengthMismatch(f"bit vectors differ in length: {tx.size} vs {rx.size}")
    return int(np.count_nonzero(tx != rx)), int(tx.size)


def wilson_interval(errors: int, total: int) -> tuple[float, float]:
    """95% Wilson score interval for a bit-error proportion.

    Stays meaningful at zero observed errors, unlike the normal
    approximation. The interval always brackets errors/total.
    """
    if total <= 0:
        raise ValueError("total must be positive")
    if errors < 0 or errors > total:
        raise ValueError(f"errors={errors} outside 0..{total}")
    z2 = _Z95**2
    p = errors / total
    denom = 1.0 + z2 / total
    center = (p + z2 / (2 * total)) / denom
    half = _Z95 * math.sqrt(p * (1.0 - p) / total + z2 / (4 * total**2)) / denom
    # at the endpoints the lower/upper bound is exactly 0/1; rounding in
    # center - half must not push it past the observed proportion
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == total else min(1.0, center + half)
    return min(lo, p), max(hi, p)
