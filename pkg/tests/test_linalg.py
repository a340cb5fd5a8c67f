"""Tests for the LQ/SVD factorizations and permutation identities."""

from itertools import permutations

import numpy as np
import pytest

from dpc_perm.channel import ChannelSpec, generate_channel
from dpc_perm.exceptions import InvalidPermutation, NumericallySingular
from dpc_perm.linalg import (
    EPS_LIN,
    as_order,
    compose_orders,
    count_decompositions,
    diagonal_permute,
    identity_order,
    inverse_via_lq,
    invert_order,
    lq_decompose,
    lq_not_permutation_linear_witness,
    permutation_matrix,
    permuted_svd,
    svd_decompose,
)


def random_channel(seed, n):
    return generate_channel(ChannelSpec(n_users=n, seed=seed))


def well_separated_channel(seed, n, gap=1e-6):
    """Random channel whose singular values are comfortably distinct."""
    for offset in range(100):
        h = random_channel(seed + 10_000 * offset, n)
        sv = np.linalg.svd(h, compute_uv=False)
        if np.min(-np.diff(sv)) > gap * sv[0]:
            return h
    raise AssertionError("no well-separated channel found")


# ---------------------------------------------------------------------------
# LQ decomposition
# ---------------------------------------------------------------------------


def test_lq_identity():
    f = lq_decompose(np.eye(2))
    np.testing.assert_allclose(f.l, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(f.q, np.eye(2), atol=1e-15)


def test_lq_positive_diagonal_matrix():
    f = lq_decompose(np.diag([2.0, 3.0]))
    np.testing.assert_allclose(f.l, np.diag([2.0, 3.0]), atol=1e-15)
    np.testing.assert_allclose(f.q, np.eye(2), atol=1e-15)


def test_lq_reconstruction_seeded():
    h = random_channel(7, 4)
    f = lq_decompose(h)
    err = np.linalg.norm(f.l @ f.q - h) / np.linalg.norm(h)
    assert err <= 1e-12


@pytest.mark.parametrize("n", range(2, 17))
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lq_contract(n, seed):
    h = random_channel(100 * seed + n, n)
    f = lq_decompose(h)
    # strict upper triangle exactly zero
    assert np.max(np.abs(np.triu(f.l, k=1)), initial=0.0) == 0.0
    # diagonal real and non-negative
    d = np.diag(f.l)
    assert np.all(d.imag == 0.0)
    assert np.all(d.real > 0.0)
    # unitarity and reconstruction
    n_ = h.shape[0]
    assert np.linalg.norm(f.q @ f.q.conj().T - np.eye(n_)) <= EPS_LIN * n_
    assert np.linalg.norm(f.l @ f.q - h) <= EPS_LIN * np.linalg.norm(h)


def test_lq_singular_raises():
    h = np.array([[1.0, 2.0], [0.5, 1.0]], dtype=complex)  # rank 1
    with pytest.raises(NumericallySingular):
        lq_decompose(h)


def test_lq_rejects_non_square_and_nan():
    with pytest.raises(ValueError):
        lq_decompose(np.ones((2, 3)))
    bad = np.eye(2, dtype=complex)
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        lq_decompose(bad)


# ---------------------------------------------------------------------------
# SVD decomposition
# ---------------------------------------------------------------------------


def test_svd_identity():
    f = svd_decompose(np.eye(3))
    np.testing.assert_allclose(f.sigma, np.ones(3), atol=1e-15)


def test_svd_diagonal():
    f = svd_decompose(np.diag([3.0, 2.0]))
    np.testing.assert_allclose(f.sigma, [3.0, 2.0], atol=1e-15)
    # u and v equal identity up to a per-column phase
    np.testing.assert_allclose(np.abs(f.u), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(np.abs(f.v), np.eye(2), atol=1e-14)


@pytest.mark.parametrize("n,seed", [(5, 3), (8, 11), (16, 5)])
def test_svd_contract(n, seed):
    h = random_channel(seed, n)
    f = svd_decompose(h)
    assert np.all(np.diff(f.sigma) <= 0) and np.all(f.sigma >= 0)
    assert np.linalg.norm(f.u @ f.u.conj().T - np.eye(n)) <= EPS_LIN * n
    assert np.linalg.norm(f.v @ f.v.conj().T - np.eye(n)) <= EPS_LIN * n
    err = np.linalg.norm(f.reconstruct() - h) / np.linalg.norm(h)
    assert err <= 1e-12


# ---------------------------------------------------------------------------
# Permutation operators
# ---------------------------------------------------------------------------


def test_permutation_matrix_identity():
    np.testing.assert_array_equal(permutation_matrix([0, 1, 2]), np.eye(3))


def test_permutation_matrix_swap():
    np.testing.assert_array_equal(permutation_matrix([1, 0]), [[0.0, 1.0], [1.0, 0.0]])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_permutation_matrix_orthogonal_all(n):
    for order in permutations(range(n)):
        g = permutation_matrix(order)
        np.testing.assert_array_equal(g @ g.T, np.eye(n))
        # row i of g @ m is row order[i] of m
        m = random_channel(1, n)
        np.testing.assert_allclose(g @ m, m[list(order), :])


@pytest.mark.parametrize(
    "bad", [[0, 0, 1], [0, 2], [1, 2, 3], [-1, 0], [0.5, 1.5], []]
)
def test_invalid_permutations_rejected(bad):
    with pytest.raises(InvalidPermutation):
        as_order(np.asarray(bad))


def test_permuted_svd_identity_order():
    h = random_channel(2, 4)
    f = svd_decompose(h)
    fp = permuted_svd(f, identity_order(4))
    np.testing.assert_array_equal(fp.u, f.u)
    np.testing.assert_array_equal(fp.sigma, f.sigma)
    np.testing.assert_array_equal(fp.v, f.v)


def test_permuted_svd_hand_example():
    f = svd_decompose(np.diag([3.0, 2.0]))
    fp = permuted_svd(f, [1, 0])
    np.testing.assert_allclose(np.abs(fp.u), [[0.0, 1.0], [1.0, 0.0]], atol=1e-14)
    np.testing.assert_allclose(fp.reconstruct(), [[0.0, 2.0], [3.0, 0.0]], atol=1e-14)


def test_permuted_svd_w_construction_matches_fresh_decomposition():
    # The precoder built from permuted factors must match the precoder
    # built from a fresh SVD of the permuted channel; both equal
    # (g h)^{-1} k, which is unique for distinct singular values.
    h = well_separated_channel(3, 4)
    k = np.array([0.5, 1.0, 1.5, 2.0])
    rng = np.random.default_rng(0)
    for order in [rng.permutation(4) for _ in range(5)]:
        f = permuted_svd(svd_decompose(h), order)
        w_perm = f.v @ ((f.u.conj().T * k[np.newaxis, :]) / f.sigma[:, np.newaxis])
        f2 = svd_decompose(h[order, :])
        w_fresh = f2.v @ ((f2.u.conj().T * k[np.newaxis, :]) / f2.sigma[:, np.newaxis])
        assert np.linalg.norm(w_perm - w_fresh) <= 1e-10 * np.linalg.norm(w_fresh)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_lemma1_constructive_identity_all_orders(n):
    h = random_channel(20 + n, n)
    f = svd_decompose(h)
    for order in permutations(range(n)):
        fp = permuted_svd(f, order)
        err = np.linalg.norm(fp.reconstruct() - h[list(order), :])
        assert err <= 1e-10 * np.linalg.norm(h)


# ---------------------------------------------------------------------------
# Diagonal permutation
# ---------------------------------------------------------------------------


def test_diagonal_permute_identity():
    np.testing.assert_array_equal(diagonal_permute([1.0, 2.0, 3.0], [0, 1, 2]), [1.0, 2.0, 3.0])


def test_diagonal_permute_matches_explicit_conjugation():
    k = np.array([1.0, 2.0, 3.0])
    order = [2, 0, 1]  # 1-based (3, 1, 2)
    g = permutation_matrix(order)
    expected = np.diag(g.conj().T @ np.diag(k) @ g)
    np.testing.assert_allclose(diagonal_permute(k, order), expected)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_diagonal_permute_roundtrip_and_multiset(n):
    rng = np.random.default_rng(n)
    k = rng.uniform(0.1, 5.0, n)
    for order in permutations(range(n)):
        p = np.asarray(order)
        out = diagonal_permute(k, p)
        np.testing.assert_array_equal(np.sort(out), np.sort(k))
        np.testing.assert_array_equal(diagonal_permute(out, invert_order(p)), k)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_diagonal_permute_group_action(n):
    # Applying q then p equals applying the composite p[q] once.
    rng = np.random.default_rng(100 + n)
    k = rng.uniform(0.1, 5.0, n)
    for p in permutations(range(n)):
        for q in permutations(range(n)):
            sequential = diagonal_permute(diagonal_permute(k, q), p)
            combined = diagonal_permute(k, compose_orders(np.asarray(p), np.asarray(q)))
            np.testing.assert_allclose(sequential, combined)


# ---------------------------------------------------------------------------
# LQ non-linearity witness and the reference inverse
# ---------------------------------------------------------------------------


def test_witness_identity_is_false():
    h = random_channel(5, 3)
    assert lq_not_permutation_linear_witness(h, [0, 1, 2]) is False


def test_witness_swap_is_true():
    h = random_channel(5, 3)
    assert lq_not_permutation_linear_witness(h, [1, 0, 2]) is True


def test_witness_diagonal_swap():
    # A permuted diagonal matrix keeps zero strictly-upper entries only
    # for the identity: the swap on diag(2, 3) moves 3 above the diagonal.
    assert lq_not_permutation_linear_witness(np.diag([2.0, 3.0]), [1, 0]) is True


def test_inverse_via_lq_matches_svd_inverse():
    h = well_separated_channel(9, 5)
    f = svd_decompose(h)
    w_svd = f.v @ (f.u.conj().T / f.sigma[:, np.newaxis])
    w_lq = inverse_via_lq(h)
    assert np.linalg.norm(w_svd - w_lq) <= 1e-8 * np.linalg.norm(w_lq)
    np.testing.assert_allclose(h @ w_lq, np.eye(5), atol=1e-10)


def test_inverse_product_invariant_under_svd_phase_ambiguity():
    # Any valid SVD of h differs by per-column phases on u and v; the
    # product v diag(1/sigma) u^H must not care.
    h = well_separated_channel(14, 4)
    f = svd_decompose(h)
    rng = np.random.default_rng(0)
    phases = np.exp(2j * np.pi * rng.uniform(size=4))
    u2 = f.u * phases[np.newaxis, :]
    v2 = f.v * phases[np.newaxis, :]
    # still a valid factorization of h
    assert np.linalg.norm((u2 * f.sigma) @ v2.conj().T - h) <= 1e-12 * np.linalg.norm(h)
    w1 = f.v @ (f.u.conj().T / f.sigma[:, np.newaxis])
    w2 = v2 @ (u2.conj().T / f.sigma[:, np.newaxis])
    assert np.linalg.norm(w1 - w2) <= 1e-8 * np.linalg.norm(w1)
    assert np.linalg.norm(w1 - inverse_via_lq(h)) <= 1e-8 * np.linalg.norm(w1)


# ---------------------------------------------------------------------------
# Decomposition counters
# ---------------------------------------------------------------------------


def test_counters_tick_only_inside_decompositions():
    h = random_channel(1, 3)
    with count_decompositions() as outer:
        lq_decompose(h)
        with count_decompositions() as inner:
            svd_decompose(h)
            svd_decompose(h)
        lq_decompose(h)
    assert (outer.lq, outer.svd) == (2, 2)
    assert (inner.lq, inner.svd) == (0, 2)
    # matrix products must not tick anything
    with count_decompositions() as c:
        _ = h @ h
        _ = np.linalg.norm(h)
    assert c.total == 0
