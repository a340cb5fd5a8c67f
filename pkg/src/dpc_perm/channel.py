"""Seeded broadcast-channel generation and binary persistence.

Channels are square complex Gaussian matrices with unit variance per
entry (1/2 per real component), drawn from counter-based Philox streams
so that every realization is a pure function of its seed regardless of
process or worker layout. The stream scheme is named ``philox-ss-v1``:
a ``SeedSequence(seed, spawn_key=...)`` feeding a Philox generator.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import FormatError
from .linalg import as_channel_matrix

__all__ = [
    "ChannelSpec",
    "DISTRIBUTIONS",
    "stream",
    "sample_channel",
    "generate_channel",
    "save_channel",
    "load_channel",
]

DISTRIBUTIONS = ("complex-gaussian-unit",)

_MAGIC = b"DPCM"
_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHI")


@dataclass(frozen=True)
class ChannelSpec:
    """Description of one reproducible channel draw."""

    n_users: int
    seed: int
    distribution: str = "complex-gaussian-unit"

    def __post_init__(self) -> None:
        if self.n_users < 1:
            raise ValueError(f"n_users must be >= 1, got {self.n_users}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")


def stream(seed: int, *spawn_key: int) -> np.random.Generator:
    """Philox generator for ``(seed, spawn_key)`` (scheme philox-ss-v1)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def sample_channel(rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw an n x n channel with i.i.d. CN(0, 1) entries.

    Real parts are drawn first, then imaginary parts, each N(0, 1/2), so
    every entry has unit total variance. The draw order is part of the
    reproducibility contract.
    """
    re = rng.standard_normal((n, n))
    im = rng.standard_normal((n, n))
    return (re + 1j * im) / np.sqrt(2.0)


def generate_channel(spec: ChannelSpec) -> np.ndarray:
    """Deterministically generate the channel described by ``spec``."""
    return sample_channel(stream(spec.seed), spec.n_users)


def save_channel(h: np.ndarray, path) -> None:
    """Write a channel to the DPCM container (bit-exact round trip).

    Layout: magic ``DPCM``, format version u16, dimension n as u32, then
    the n*n entries row-major as little-endian (re, im) float64 pairs.
    """
    h = as_channel_matrix(h)
    n = h.shape[0]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _FORMAT_VERSION, n))
        fh.write(np.ascontiguousarray(h, dtype=np.dtype("<c16")).tobytes())


def load_channel(path) -> np.ndarray:
    """Read a channel written by :func:`save_channel`.

    Raises
    ------
    FormatError
        On bad magic, unknown version, or a payload whose size does not
        match the declared dimension (truncated or oversized file).
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError("file too short for a DPCM header")
    magic, version, n = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {_MAGIC!r}")
    if version != _FORMAT_VERSION:
        raise FormatError(f"unsupported DPCM format version {version}")
    if n < 1:
        raise FormatError(f"declared dimension {n} is not positive")
    payload = raw[_HEADER.size :]
    expected = 16 * n * n
    if len(payload) != expected:
        raise FormatError(
            f"payload holds {len(payload)} bytes but dimension {n} requires {expected}"
        )
    h = np.frombuffer(payload, dtype=np.dtype("<c16")).reshape(n, n)
    return h.astype(np.complex128)


def pooled_entries(n_users: int, seeds: Sequence[int]) -> np.ndarray:
    """Flattened channel entries pooled over several seeds (for statistics)."""
    return np.concatenate(
        [generate_channel(ChannelSpec(n_users=n_users, seed=s)).ravel() for s in seeds]
    )
