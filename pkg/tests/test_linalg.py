import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from projnil.errors import DomainError, InputError, NotPSDError
from projnil.linalg import (
    as_hermitian,
    complete_to_unitary,
    eig_hermitian,
    haar_unitary,
    op_norm,
    projection_rank,
    psd_sqrt,
    random_hermitian,
    rank_eps,
    spectral_apply,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 8)


def ginibre(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_psd(rng, n, rank=None):
    r = n if rank is None else rank
    G = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    return G @ G.conj().T


# op_norm

def test_op_norm_examples():
    assert op_norm(np.eye(3)) == pytest.approx(1.0, rel=1e-10)
    assert op_norm(np.zeros((4, 4))) == 0.0
    assert op_norm(2.5 * np.array([[0, 1], [0, 0]])) == pytest.approx(2.5, rel=1e-10)


def test_op_norm_rejects_nan():
    with pytest.raises(InputError):
        op_norm(np.array([[np.nan, 0], [0, 1]]))


@settings(max_examples=50, deadline=None)
@given(seeds, dims)
def test_op_norm_submultiplicative_and_subadditive(seed, n):
    rng = np.random.default_rng(seed)
    X, Y = ginibre(rng, n), ginibre(rng, n)
    assert op_norm(X @ Y) <= op_norm(X) * op_norm(Y) + 1e-9
    assert op_norm(X + Y) <= op_norm(X) + op_norm(Y) + 1e-9


# validation

def test_as_hermitian_symmetrizes_and_rejects():
    M = np.array([[1, 2 + 1e-14j], [2, 3]])
    H = as_hermitian(M)
    assert np.array_equal(H, H.conj().T)
    with pytest.raises(InputError):
        as_hermitian(np.array([[1, 2], [0, 1]]))
    with pytest.raises(InputError):
        as_hermitian(np.ones((2, 3)))


def test_projection_rank():
    U = haar_unitary(5, 3)
    P = U[:, :2] @ U[:, :2].conj().T
    assert projection_rank(P) == 2
    with pytest.raises(InputError):
        projection_rank(0.5 * np.eye(2))


# eigendecomposition

def test_eig_examples():
    np.testing.assert_allclose(eig_hermitian(np.diag([3.0, 1.0, 2.0])).eigenvalues, [3, 2, 1], atol=1e-14)
    np.testing.assert_allclose(
        eig_hermitian(0.5 * np.array([[1, -1], [-1, 1]])).eigenvalues, [1, 0], atol=1e-14
    )


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 12))
def test_eig_reconstructs_and_matches_lapack(seed, n):
    H = random_hermitian(n, np.random.default_rng(seed))
    sp = eig_hermitian(H)
    U = sp.eigenvectors
    scale = max(1.0, op_norm(H))
    assert op_norm(sp.reconstruct() - H) <= 1e-10 * scale
    assert op_norm(U.conj().T @ U - np.eye(n)) <= 1e-10
    assert np.all(np.diff(sp.eigenvalues) <= 0)
    np.testing.assert_allclose(sp.eigenvalues, np.linalg.eigvalsh(H)[::-1], atol=1e-10 * scale)


def test_eig_deterministic_under_degeneracy():
    U = haar_unitary(4, 11)
    P = U[:, :2] @ U[:, :2].conj().T
    a, b = eig_hermitian(P), eig_hermitian(P.copy())
    assert np.array_equal(a.eigenvectors, b.eigenvectors)
    # within the degenerate block the basis is Gram-Schmidt of the projected e_0, e_1, ...
    q0 = P[:, 0] / np.linalg.norm(P[:, 0])
    np.testing.assert_allclose(a.eigenvectors[:, 0] * np.vdot(a.eigenvectors[:, 0], q0), q0, atol=1e-10)
    assert abs(np.vdot(a.eigenvectors[:, 0], q0)) == pytest.approx(1.0, abs=1e-10)


def test_eig_identity_uses_standard_basis():
    sp = eig_hermitian(np.eye(3))
    np.testing.assert_allclose(sp.eigenvectors, np.eye(3), atol=1e-15)


# functional calculus

def test_spectral_apply_examples(rng):
    H = random_hermitian(4, rng)
    np.testing.assert_allclose(spectral_apply(H, lambda x: x), H, atol=1e-10)
    np.testing.assert_allclose(spectral_apply(np.diag([4.0, 1.0]), np.sqrt), np.diag([2.0, 1.0]), atol=1e-14)
    th = np.pi / 4
    out = spectral_apply(np.diag([np.pi / 4, 0.0]), lambda t: np.sin(t) / np.sin(t + th))
    np.testing.assert_allclose(out, np.diag([0.70710678118654757, 0.0]), atol=1e-12)


def test_spectral_apply_domain_errors():
    with pytest.raises(DomainError):
        spectral_apply(np.diag([1.0, 0.0]), lambda x: 1.0 / x)
    with pytest.raises(DomainError):
        spectral_apply(np.diag([2.0, 0.0]), lambda x: x, domain=(0.0, 1.0))


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_spectral_identity_property(seed, n):
    H = random_hermitian(n, np.random.default_rng(seed))
    assert op_norm(spectral_apply(H, lambda x: x) - H) <= 1e-10 * max(1.0, op_norm(H))


# square roots

def test_psd_sqrt_examples():
    np.testing.assert_allclose(psd_sqrt(np.diag([9.0, 4.0])), np.diag([3.0, 2.0]), atol=1e-14)
    np.testing.assert_allclose(psd_sqrt(np.zeros((3, 3))), np.zeros((3, 3)))
    U = haar_unitary(3, 5)
    P = U[:, :1] @ U[:, :1].conj().T
    np.testing.assert_allclose(psd_sqrt(P), P, atol=1e-12)


def test_psd_sqrt_clamps_and_rejects():
    np.testing.assert_allclose(psd_sqrt(np.diag([1.0, -5e-11])), np.diag([1.0, 0.0]), atol=1e-14)
    with pytest.raises(NotPSDError):
        psd_sqrt(np.diag([1.0, -1e-6]))


@settings(max_examples=40, deadline=None)
@given(seeds, dims, st.data())
def test_psd_sqrt_squares_back(seed, n, data):
    rank = data.draw(st.integers(1, n))
    M = random_psd(np.random.default_rng(seed), n, rank)
    R = psd_sqrt(M)
    assert op_norm(R @ R - M) <= 1e-9 * max(1.0, op_norm(M))


# rank

def test_rank_eps_examples(rng):
    U = haar_unitary(5, 1)
    P = U[:, :3] @ U[:, :3].conj().T
    assert rank_eps(P, 1e-8) == 3
    assert rank_eps(np.zeros((3, 3)), 1e-8) == 0
    v, w = U[:, 0], U[:, 1]
    assert rank_eps(np.outer(v, v.conj()) + 1e-14 * np.outer(w, w.conj()), 1e-8) == 1
    with pytest.raises(InputError):
        rank_eps(P, 0.0)


def _low_rank(rng, n, r):
    return (rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))) @ (
        rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
    )


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 8), st.data())
def test_rank_unitary_invariance_and_subadditivity(seed, n, data):
    rng = np.random.default_rng(seed)
    r1, r2 = data.draw(st.integers(0, n)), data.draw(st.integers(0, n))
    X = _low_rank(rng, n, r1)
    Y = _low_rank(rng, n, r2)
    U = haar_unitary(n, seed)
    rx = rank_eps(X, 1e-8)
    assert rx == r1
    assert rank_eps(U @ X, 1e-8) == rx
    assert rank_eps(X @ U, 1e-8) == rx
    assert rank_eps(X @ Y, 1e-8) <= rx
    assert rank_eps(X + Y, 1e-8) <= rx + rank_eps(Y, 1e-8)


# unitaries

def test_complete_to_unitary_examples():
    U = haar_unitary(3, 2)
    np.testing.assert_allclose(complete_to_unitary(U), U, atol=1e-15)
    V = np.array([[1, 0], [0, 0]], dtype=complex)
    np.testing.assert_allclose(complete_to_unitary(V), np.eye(2), atol=1e-15)
    V = np.array([[1, 0], [1, 0]], dtype=complex) / np.sqrt(2)
    W = complete_to_unitary(V)
    assert op_norm(W.conj().T @ W - np.eye(2)) <= 1e-12
    np.testing.assert_allclose(W[:, 0], [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 7), st.data())
def test_complete_to_unitary_agrees_on_initial_space(seed, n, data):
    r = data.draw(st.integers(0, n))
    U1, U2 = haar_unitary(n, seed), haar_unitary(n, seed + 1)
    V = U1[:, :r] @ U2[:, :r].conj().T
    W = complete_to_unitary(V)
    E = V.conj().T @ V
    assert op_norm((W - V) @ E) <= 1e-7
    assert op_norm(W.conj().T @ W - np.eye(n)) <= 1e-9


def test_complete_to_unitary_rejects_non_isometry():
    with pytest.raises(InputError):
        complete_to_unitary(np.array([[2.0, 0], [0, 0]]))


def test_haar_unitary():
    u = haar_unitary(1, 9)
    assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) < 1e-15
    assert np.array_equal(haar_unitary(4, 123), haar_unitary(4, 123))
    for s in range(100):
        U = haar_unitary(4, s)
        np.testing.assert_allclose(np.linalg.norm(U, axis=0), 1.0, atol=1e-12)
        assert op_norm(U.conj().T @ U - np.eye(4)) <= 1e-10
    with pytest.raises(InputError):
        haar_unitary(0, 1)
