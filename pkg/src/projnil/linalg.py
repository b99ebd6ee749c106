"""Dense complex linear algebra with a fixed tolerance policy.

Matrices are plain ``numpy`` complex arrays. The ``as_*`` helpers validate
and normalize inputs; everything downstream assumes validated arrays.

Tolerances: construction checks use 1e-12 (hermiticity) and 1e-10
(projections, spectra); verification elsewhere in the package uses 1e-8.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, InputError, NotPSDError

HERMITIAN_TOL = 1e-12
PROJECTION_TOL = 1e-10
PSD_CLAMP = 1e-10
CLUSTER_GAP = 1e-9

_JACOBI_MAX_SWEEPS = 60


def as_complex_matrix(M) -> np.ndarray:
    """Return ``M`` as a square complex128 array, rejecting non-finite entries."""
    arr = np.array(M, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InputError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    return arr


def as_hermitian(M) -> np.ndarray:
    """Validate hermiticity and return the symmetrized matrix ``(M + M*)/2``."""
    arr = as_complex_matrix(M)
    scale = max(1.0, float(np.max(np.abs(arr))))
    if np.max(np.abs(arr - arr.conj().T)) > HERMITIAN_TOL * scale:
        raise InputError("matrix is not Hermitian")
    return (arr + arr.conj().T) / 2


def projection_rank(M) -> int:
    """Return the rank of the orthogonal projection ``M``.

    Raises InputError unless ``M`` is Hermitian, idempotent to 1e-10 and has
    all eigenvalues within 1e-10 of 0 or 1.
    """
    H = as_hermitian(M)
    if op_norm(H @ H - H) > PROJECTION_TOL:
        raise InputError("matrix is not idempotent")
    lam = eig_hermitian(H).eigenvalues
    near_one = np.abs(lam - 1.0) <= PROJECTION_TOL
    near_zero = np.abs(lam) <= PROJECTION_TOL
    if not np.all(near_one | near_zero):
        raise InputError("projection has eigenvalues away from {0, 1}")
    return int(np.count_nonzero(near_one))


def as_projection(M) -> np.ndarray:
    projection_rank(M)
    return as_hermitian(M)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in descending order with unitary eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


def op_norm(M) -> float:
    """Largest singular value."""
    arr = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    if arr.size == 0:
        return 0.0
    return float(np.linalg.norm(arr, 2))


def _jacobi(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # cyclic complex Jacobi; each rotation is G = diag(1, conj(e)) @ R(c, s)
    A = H.copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    fro = np.linalg.norm(A)
    if n == 1 or fro == 0.0:
        return A.diagonal().real.copy(), V
    target = 1e-17 * fro
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = A[p, q]
                ag = abs(g)
                if ag <= 1e-300:
                    continue
                e = g / ag
                zeta = (A[q, q].real - A[p, p].real) / (2.0 * ag)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                G = np.array([[c, s], [-s * e.conjugate(), c * e.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = G.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ G
    return A.diagonal().real.copy(), V


def _gram_schmidt_basis(P: np.ndarray, r: int) -> np.ndarray:
    """Orthonormal basis of range(P) from P e_0, P e_1, ... in index order."""
    n = P.shape[0]
    basis: list[np.ndarray] = []
    for j in range(n):
        if len(basis) == r:
            break
        w = P[:, j].copy()
        for _ in range(2):
            for b in basis:
                w -= b * np.vdot(b, w)
        nrm = np.linalg.norm(w)
        # threshold below 1/sqrt(n) guarantees r vectors are found
        if nrm > 1e-3:
            w = w / nrm
            for b in basis:
                w -= b * np.vdot(b, w)
            basis.append(w / np.linalg.norm(w))
    if len(basis) < r:
        raise InputError("could not build an orthonormal basis for the eigenspace")
    return np.column_stack(basis)


def eig_hermitian(M) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Eigenvalues come back in descending order. Eigenvalues closer than
    ``CLUSTER_GAP`` (relative) form a cluster whose eigenvectors are
    re-chosen by Gram-Schmidt of the projected standard basis, so the output
    is a deterministic function of the eigenspaces rather than of rotation
    order. Singleton clusters get the same treatment, which fixes phases.
    """
    H = as_hermitian(M)
    lam, V = _jacobi(H)
    order = np.argsort(-lam, kind="stable")
    lam, V = lam[order], V[:, order]
    scale = max(1.0, float(np.max(np.abs(lam))))
    n = lam.size
    out_lam = np.empty(n)
    out_V = np.empty((n, n), dtype=complex)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and lam[stop - 1] - lam[stop] <= CLUSTER_GAP * scale:
            stop += 1
        block = V[:, start:stop]
        Q = _gram_schmidt_basis(block @ block.conj().T, stop - start)
        rq = np.einsum("ij,ik,kj->j", Q.conj(), H, Q).real
        sub = np.argsort(-rq, kind="stable")
        out_lam[start:stop] = rq[sub]
        out_V[:, start:stop] = Q[:, sub]
        start = stop
    return Spectrum(out_lam, out_V)


def eigvalsh(M) -> np.ndarray:
    return eig_hermitian(M).eigenvalues


def min_eig(M) -> float:
    return float(eigvalsh(M)[-1])


def spectral_apply(
    M,
    f: Callable,
    domain: tuple[float, float] | None = None,
    band: float = 1e-10,
) -> np.ndarray:
    """Return ``U diag(f(lam)) U*`` for Hermitian ``M``.

    ``f`` is called elementwise on the eigenvalues. If ``domain`` is given,
    eigenvalues must lie in ``[lo - band, hi + band]`` and are clipped into
    ``[lo, hi]`` before evaluation. Any non-finite value of ``f`` raises
    DomainError.
    """
    sp = eig_hermitian(M)
    lam = sp.eigenvalues
    if domain is not None:
        lo, hi = domain
        if np.any(lam < lo - band) or np.any(lam > hi + band):
            raise DomainError(f"eigenvalues {lam} outside domain [{lo}, {hi}]")
        lam = np.clip(lam, lo, hi)
    try:
        with np.errstate(all="raise"):
            vals = np.array([f(float(x)) for x in lam], dtype=float)
    except (ValueError, ZeroDivisionError, FloatingPointError, OverflowError) as exc:
        raise DomainError(f"function undefined at an eigenvalue: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise DomainError("function is not finite at an eigenvalue")
    U = sp.eigenvectors
    out = (U * vals) @ U.conj().T
    return (out + out.conj().T) / 2


def psd_sqrt(M) -> np.ndarray:
    """Positive square root; eigenvalues in [-1e-10, 0) are treated as 0."""
    sp = eig_hermitian(M)
    lam = sp.eigenvalues
    scale = max(1.0, float(np.max(np.abs(lam))))
    if lam[-1] < -PSD_CLAMP * scale:
        raise NotPSDError(f"matrix has eigenvalue {lam[-1]:.3e} < 0")
    U = sp.eigenvectors
    out = (U * np.sqrt(np.clip(lam, 0.0, None))) @ U.conj().T
    return (out + out.conj().T) / 2


def rank_eps(M, tol: float) -> int:
    """Number of singular values above ``tol * max(1, sigma_max)``."""
    if tol <= 0:
        raise InputError("tol must be positive")
    arr = np.asarray(M, dtype=complex)
    if arr.size == 0:
        return 0
    s = np.linalg.svd(arr, compute_uv=False)
    return int(np.count_nonzero(s > tol * max(1.0, float(s[0]))))


def complete_to_unitary(V) -> np.ndarray:
    """Extend a partial isometry to a unitary that agrees on its initial space.

    The complement of the initial space is mapped onto the complement of the
    final space; both bases come from Gram-Schmidt over the standard basis,
    so the result is deterministic.
    """
    V = as_complex_matrix(V)
    n = V.shape[0]
    E = V.conj().T @ V
    if op_norm(E @ E - E) > 1e-8 or op_norm(E - E.conj().T) > 1e-8:
        raise InputError("V is not a partial isometry (V*V is not a projection)")
    F = V @ V.conj().T
    r = int(round(np.trace(E).real))
    eye = np.eye(n)
    d = n - r
    if d == 0:
        U = V
    else:
        G1 = _gram_schmidt_basis(eye - E, d)
        G2 = _gram_schmidt_basis(eye - F, d)
        U = V @ E + G2 @ G1.conj().T
    if op_norm(U.conj().T @ U - eye) > 1e-9:
        raise InputError("completion is not unitary; V drifts too far from a partial isometry")
    return U


def haar_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix, phase-fixed."""
    if dim < 1:
        raise InputError("dim must be positive")
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = R.diagonal()
    return Q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator, spectrum=None) -> np.ndarray:
    """Random Hermitian matrix; with ``spectrum`` given, a Haar rotation of diag(spectrum)."""
    if spectrum is None:
        Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        return (Z + Z.conj().T) / 2
    U = haar_unitary(dim, int(rng.integers(2**63)))
    H = (U * np.asarray(spectrum, dtype=float)) @ U.conj().T
    return (H + H.conj().T) / 2
