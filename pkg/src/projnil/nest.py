"""Distance to a nest space and the nearest nilpotent in it.

For a flag 0 = P_0 <= ... <= P_n = I the nest space consists of all N with
(I - P_{k-1}) N P_k = 0 for every k. Its members are exactly the operators
that are strictly block upper triangular in a flag-adapted basis, hence
nilpotent of index at most n. The distance from X to this space is
max_k ||(I - P_{k-1}) X P_k|| and is attained; :func:`nearest_in_nest`
realizes it by successive 2x2 norm-preserving completions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import Flag, beta_schedule, build_chain, recover_flag
from .errors import CertificateError, InputError
from .formula import nu_matrix
from .linalg import as_complex_matrix, eig_hermitian, op_norm, rank_eps

FEASIBILITY_SLACK = 1e-10


def nest_terms(X, flag: Flag) -> np.ndarray:
    X = as_complex_matrix(X)
    if X.shape != (flag.dim, flag.dim):
        raise InputError(f"X has shape {X.shape}, flag acts on dimension {flag.dim}")
    eye = np.eye(flag.dim)
    Ps = flag.projections
    return np.array([op_norm((eye - Ps[k - 1]) @ X @ Ps[k]) for k in range(1, flag.n + 1)])


def nest_distance(X, flag: Flag) -> float:
    """max_k ||(I - P_{k-1}) X P_k||."""
    return float(np.max(nest_terms(X, flag)))


def constraint_residuals(N, flag: Flag) -> np.ndarray:
    """||(I - P_{k-1}) N P_k|| per step; all zero iff N lies in the nest space."""
    return nest_terms(N, flag)


def parrott_step(top_left, top_right, bottom_left, mu: float) -> np.ndarray:
    """Fill the corner Z of [[A, B], [C, Z]] so that the norm stays <= mu.

    Feasible iff ||[A; C]|| <= mu and ||[A, B]|| <= mu. Returns the central
    completion Z = -C (mu^2 I - A*A)^+ A* B, i.e. the dilation solution with
    its free contraction set to zero.
    """
    A = np.atleast_2d(np.asarray(top_left, dtype=complex))
    B = np.atleast_2d(np.asarray(top_right, dtype=complex))
    C = np.atleast_2d(np.asarray(bottom_left, dtype=complex))
    if B.shape[0] != A.shape[0] or C.shape[1] != A.shape[1]:
        raise InputError("block shapes do not fit together")
    col = op_norm(np.vstack([A, C]))
    row = op_norm(np.hstack([A, B]))
    need = max(col, row)
    if mu < need - FEASIBILITY_SLACK * max(1.0, need):
        raise InputError(f"mu={mu} is below the known row/column norm {need}")
    if A.size == 0:
        return np.zeros((C.shape[0], B.shape[1]), dtype=complex)
    mu = max(mu, need)
    G = mu * mu * np.eye(A.shape[1]) - A.conj().T @ A
    G = (G + G.conj().T) / 2
    Z = -C @ np.linalg.pinv(G, rcond=1e-13, hermitian=True) @ A.conj().T @ B
    return Z


def adapted_basis(flag: Flag) -> tuple[np.ndarray, list[int]]:
    """Unitary whose column groups span the ranges of P_k - P_{k-1}, and the group sizes."""
    cols = []
    sizes = []
    for k in range(1, flag.n + 1):
        D = flag.projections[k] - flag.projections[k - 1]
        sp = eig_hermitian(D)
        r = int(np.count_nonzero(sp.eigenvalues > 0.5))
        sizes.append(r)
        if r:
            cols.append(sp.eigenvectors[:, :r])
    W = np.hstack(cols)
    # one QR pass keeps W unitary to machine precision without mixing groups
    Q, R = np.linalg.qr(W)
    d = R.diagonal()
    return Q * (d / np.abs(d)), sizes


def nearest_in_nest(X, flag: Flag, mu: float | None = None) -> np.ndarray:
    """An element N of the nest space with ||X - N|| equal to the nest distance.

    In the adapted basis X - N keeps the blocks on and below the diagonal of
    X and has free strictly-upper blocks. They are filled superdiagonal by
    superdiagonal; block (i, j) is the corner of the 2x2 completion
    problem formed by rows i..end and columns 0..j, whose known row and
    column were completed at level mu in earlier passes.
    """
    X = as_complex_matrix(X)
    level = nest_distance(X, flag) if mu is None else mu
    W, sizes = adapted_basis(flag)
    sizes = [s for s in sizes if s]
    edges = np.concatenate([[0], np.cumsum(sizes)])
    b = len(sizes)
    T = W.conj().T @ X @ W

    def sl(i):
        return slice(edges[i], edges[i + 1])

    for d in range(1, b):
        for i in range(b - d):
            j = i + d
            rows_lo = slice(edges[i + 1], edges[b])  # block rows i+1..b-1
            cols_lo = slice(0, edges[j])  # block cols 0..j-1
            a = T[sl(i), cols_lo]
            c = T[rows_lo, cols_lo]
            dd = T[rows_lo, sl(j)]
            # [[a, Z], [c, dd]] -> reorder rows so the unknown sits bottom-right
            step = level
            for _ in range(3):
                Z = parrott_step(c, dd, a, step)
                T[sl(i), sl(j)] = Z
                sub = T[edges[i]:edges[b], 0:edges[j + 1]]
                if op_norm(sub) <= level + 1e-8:
                    break
                step += FEASIBILITY_SLACK * max(1.0, level)
    N_hat = W.conj().T @ X @ W - T
    N = W @ N_hat @ W.conj().T
    return N


def nilpotency_index(N, tol: float = 1e-7, max_power: int | None = None) -> int:
    """Smallest k >= 1 with ||N^k|| <= tol; raises InputError if none up to dim."""
    N = as_complex_matrix(N)
    limit = N.shape[0] if max_power is None else max_power
    M = np.eye(N.shape[0], dtype=complex)
    for k in range(1, limit + 1):
        M = M @ N
        if op_norm(M) <= tol:
            return k
    raise InputError(f"matrix is not nilpotent within tolerance {tol}")


def _range_projection(M, tol: float) -> np.ndarray:
    U, s, _ = np.linalg.svd(M)
    r = int(np.count_nonzero(s > tol * max(1.0, float(s[0]) if s.size else 0.0)))
    Ur = U[:, :r]
    P = Ur @ Ur.conj().T
    return (P + P.conj().T) / 2


def flag_of_nilpotent(N, tol: float = 1e-8) -> Flag:
    """Flag P_k = range projection of N^{n-k}, with n the nilpotency index."""
    N = as_complex_matrix(N)
    dim = N.shape[0]
    if op_norm(np.linalg.matrix_power(N, dim)) > tol:
        raise InputError("N is not numerically nilpotent")
    n = nilpotency_index(N, tol)
    powers = [np.eye(dim, dtype=complex)]
    for _ in range(n):
        powers.append(powers[-1] @ N)
    Ps = [np.zeros((dim, dim), dtype=complex)]
    for k in range(1, n):
        Ps.append(_range_projection(powers[n - k], tol))
    Ps.append(np.eye(dim, dtype=complex))
    return Flag(tuple(Ps))


@dataclass
class DistanceCertificate:
    n: int
    m: int
    P: np.ndarray
    flag: Flag
    nilpotent: np.ndarray
    achieved: float
    reference: float
    nil_index: int

    def residuals(self) -> np.ndarray:
        return constraint_residuals(self.nilpotent, self.flag)

    def power_norm(self) -> float:
        return op_norm(np.linalg.matrix_power(self.nilpotent, self.nil_index))

    def failures(self) -> list[str]:
        out = []
        res = float(np.max(self.residuals()))
        if res > 1e-9:
            out.append(f"flag residual {res:.3e} > 1e-9")
        if self.achieved > self.reference + 1e-7:
            out.append(f"achieved {self.achieved:.12f} exceeds reference {self.reference:.12f}")
        if self.nil_index > self.P.shape[0] or self.power_norm() > 1e-7:
            out.append("nilpotency check failed")
        return out

    @property
    def verified(self) -> bool:
        return not self.failures()


def certificate(n: int, m: int) -> DistanceCertificate:
    """Explicit nilpotent within 1/(2 cos theta) of a rank-m projection in M_n."""
    if not (1 <= m <= n):
        raise InputError(f"need 1 <= m <= n, got m={m}, n={n}")
    stage = "schedule"
    try:
        sched = beta_schedule(n, m)
        stage = "chain"
        chain = build_chain(sched)
        stage = "flag"
        flag = recover_flag(chain)
        stage = "completion"
        P = chain.P
        N = nearest_in_nest(P, flag)
        stage = "verification"
        achieved = op_norm(P - N)
        index = nilpotency_index(N, 1e-7)
    except InputError:
        raise
    except Exception as exc:
        raise CertificateError(stage, exc) from exc
    return DistanceCertificate(n, m, P, flag, N, achieved, nu_matrix(n, m), index)
