"""Tests for channel generation and the DPCM container."""

import numpy as np
import pytest

from dpc_perm.channel import (
    ChannelSpec,
    generate_channel,
    load_channel,
    pooled_entries,
    save_channel,
)
from dpc_perm.exceptions import FormatError


def test_same_spec_is_bit_identical():
    spec = ChannelSpec(n_users=6, seed=123)
    a = generate_channel(spec)
    b = generate_channel(spec)
    np.testing.assert_array_equal(a, b)


def test_single_user_scalar_channel():
    h = generate_channel(ChannelSpec(n_users=1, seed=0))
    assert h.shape == (1, 1)
    assert np.isfinite(h).all()


def test_distinct_seeds_differ():
    a = generate_channel(ChannelSpec(n_users=4, seed=1))
    b = generate_channel(ChannelSpec(n_users=4, seed=2))
    assert np.any(a != b)


def test_entry_variance_statistic():
    # 100 seeds x 100 entries = 1e4 pooled entries; the mean of |h|^2
    # estimates the per-entry variance with standard error 1e-2, so the
    # [0.95, 1.05] window sits 5 sigma out.
    entries = pooled_entries(10, seeds=range(100))
    assert entries.size == 10_000
    variance = float(np.mean(np.abs(entries) ** 2))
    assert 0.95 <= variance <= 1.05
    # each real component carries half the variance
    assert 0.45 <= float(np.var(entries.real)) <= 0.55


def test_spec_validation():
    with pytest.raises(ValueError):
        ChannelSpec(n_users=0, seed=1)
    with pytest.raises(ValueError):
        ChannelSpec(n_users=2, seed=1, distribution="rayleigh-correlated")


def test_save_load_roundtrip(tmp_path):
    h = generate_channel(ChannelSpec(n_users=4, seed=77))
    path = tmp_path / "h.dpcm"
    save_channel(h, path)
    back = load_channel(path)
    np.testing.assert_array_equal(h, back)


def test_load_truncated_file(tmp_path):
    h = generate_channel(ChannelSpec(n_users=4, seed=77))
    path = tmp_path / "h.dpcm"
    save_channel(h, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(FormatError):
        load_channel(path)


def test_load_oversized_payload(tmp_path):
    h = generate_channel(ChannelSpec(n_users=3, seed=5))
    path = tmp_path / "h.dpcm"
    save_channel(h, path)
    path.write_bytes(path.read_bytes() + b"\x00" * 16)
    with pytest.raises(FormatError):
        load_channel(path)


def test_load_bad_magic(tmp_path):
    path = tmp_path / "h.dpcm"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(FormatError):
        load_channel(path)


def test_load_bad_version(tmp_path):
    h = generate_channel(ChannelSpec(n_users=2, seed=5))
    path = tmp_path / "h.dpcm"
    save_channel(h, path)
    raw = bytearray(path.read_bytes())
    raw[4] = 99
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        load_channel(path)


def test_load_header_only(tmp_path):
    path = tmp_path / "h.dpcm"
    path.write_bytes(b"DPC")
    with pytest.raises(FormatError):
        load_channel(path)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_channel(tmp_path / "missing.dpcm")
