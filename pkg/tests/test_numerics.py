import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from identconcepts.exceptions import (
    NotPositiveDefiniteError,
    NotSymmetricError,
    RankDeficientError,
)
from identconcepts.numerics import (
    best_assignment,
    cholesky,
    inv_lower,
    inv_sqrt_spd,
    pinv,
    sym_eig,
)


def brute_force_assignment(score):
    k = score.shape[0]
    best, best_perm = -np.inf, None
    for perm in itertools.permutations(range(k)):
        total = score[np.arange(k), perm].sum()
        if total > best:
            best, best_perm = total, perm
    return np.array(best_perm), best


# --- sym_eig -----------------------------------------------------------------

def test_sym_eig_identity():
    w, v = sym_eig(np.eye(3))
    np.testing.assert_allclose(w, [1, 1, 1])
    np.testing.assert_allclose(v.T @ v, np.eye(3), atol=1e-12)


def test_sym_eig_diagonal_sorted_descending():
    w, v = sym_eig(np.diag([1.0, 4.0]))
    np.testing.assert_allclose(w, [4, 1])
    np.testing.assert_allclose(np.abs(v), [[0, 1], [1, 0]], atol=1e-12)


def test_sym_eig_two_by_two_hand_solution():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    w, v = sym_eig(a)
    np.testing.assert_allclose(w, [3, 1], atol=1e-12)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(np.abs(v[:, 0]), [s, s], atol=1e-12)
    assert abs(v[0, 1] * v[1, 1] + 0.5) < 1e-12  # (1, -1)/sqrt(2) up to sign
    np.testing.assert_allclose(a @ v, v * w, atol=1e-12)


@pytest.mark.parametrize("k", [2, 5, 9, 16])
def test_sym_eig_matches_lapack_and_reconstructs(k):
    rng = np.random.default_rng(k)
    b = rng.standard_normal((k, k))
    a = b + b.T
    w, v = sym_eig(a)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a)[::-1], atol=1e-10 * np.linalg.norm(a))
    assert np.linalg.norm(v @ np.diag(w) @ v.T - a) <= 1e-8 * np.linalg.norm(a)
    np.testing.assert_allclose(v.T @ v, np.eye(k), atol=1e-8)


def test_sym_eig_nearly_diagonal_converges():
    # off-diagonal mass far below the diagonal used to stall the stopping rule
    a = np.eye(4) + 1e-9 * np.ones((4, 4))
    w, v = sym_eig(a)
    assert np.linalg.norm(v @ np.diag(w) @ v.T - a) <= 1e-12


def test_sym_eig_rejects_asymmetric():
    with pytest.raises(NotSymmetricError):
        sym_eig([[1.0, 2.0], [0.0, 1.0]])


# --- cholesky / inverses -----------------------------------------------------

@pytest.mark.parametrize(
    "a, expected",
    [
        (np.eye(3), np.eye(3)),
        (np.diag([4.0, 9.0]), np.diag([2.0, 3.0])),
        (np.array([[4.0, 2.0], [2.0, 5.0]]), np.array([[2.0, 0.0], [1.0, 2.0]])),
    ],
)
def test_cholesky_examples(a, expected):
    np.testing.assert_allclose(cholesky(a), expected, atol=1e-14)


def test_cholesky_reports_failing_pivot():
    a = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 2.0], [0.0, 2.0, 1.0]])
    with pytest.raises(NotPositiveDefiniteError) as info:
        cholesky(a)
    assert info.value.pivot == 2


@given(st.integers(1, 8), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_cholesky_round_trip(k, seed):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((k, k))
    a = b @ b.T + 1e-3 * np.eye(k)
    low = cholesky(a)
    assert np.allclose(low, np.tril(low))
    assert np.linalg.norm(low @ low.T - a) <= 1e-10 * np.linalg.norm(a)
    np.testing.assert_allclose(inv_lower(low) @ low, np.eye(k), atol=1e-8)


def test_inv_sqrt_spd_squares_to_inverse():
    a = np.array([[4.0, 1.0], [1.0, 3.0]])
    r = inv_sqrt_spd(a)
    np.testing.assert_allclose(r @ a @ r, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(r, r.T)


def test_pinv_column_vector_closed_form():
    np.testing.assert_allclose(pinv(np.array([[3.0], [4.0]])), [[3 / 25, 4 / 25]])


def test_pinv_square_and_orthonormal():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4)) + 4 * np.eye(4)
    np.testing.assert_allclose(pinv(a), np.linalg.inv(a), atol=1e-12)
    q, _ = np.linalg.qr(rng.standard_normal((7, 3)))
    np.testing.assert_allclose(pinv(q), q.T, atol=1e-12)


@given(st.integers(1, 6), st.integers(0, 10), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_pinv_is_left_inverse(k, extra, seed):
    a = np.random.default_rng(seed).standard_normal((k + extra, k))
    np.testing.assert_allclose(pinv(a) @ a, np.eye(k), atol=1e-8)


def test_pinv_rank_deficient_reports_gap():
    with pytest.raises(RankDeficientError, match="singular value"):
        pinv(np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]))


# --- best_assignment ---------------------------------------------------------

def test_assignment_examples():
    np.testing.assert_array_equal(best_assignment(np.eye(3)), [0, 1, 2])
    np.testing.assert_array_equal(best_assignment([[0, 1], [1, 0]]), [1, 0])
    score = np.array([[5.0, 9.0, 1.0], [10.0, 3.0, 2.0], [8.0, 7.0, 4.0]])
    perm = best_assignment(score)
    np.testing.assert_array_equal(perm, [1, 0, 2])
    assert score[np.arange(3), perm].sum() == 23


@given(st.integers(1, 6), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=60, deadline=None)
def test_assignment_matches_brute_force(k, seed):
    score = np.random.default_rng(seed).uniform(0, 1, (k, k))
    perm = best_assignment(score)
    _, best = brute_force_assignment(score)
    assert sorted(perm) == list(range(k))
    assert score[np.arange(k), perm].sum() == pytest.approx(best, abs=1e-12)


def test_assignment_rejects_bad_input():
    with pytest.raises(ValueError):
        best_assignment(np.ones((2, 3)))
    with pytest.raises(ValueError):
        best_assignment([[-1.0, 0.0], [0.0, 1.0]])
