"""Operator chains 0 = A_0 <= ... <= A_n = P and their angle representation.

An increasing chain of positive contractions under P encodes a flag through
``P P_k P = A_k``; each A_k is in turn parametrized by an angle operator
``0 <= B_k <= (pi - 2 theta) P`` through the monotone map

    alpha(t) = sin(t) / (2 cos(theta) sin(t + theta)).

The optimal chain is built from an explicit angle schedule by rank-one
interlacing updates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InternalError, NumericalError, PreconditionError
from .formula import ThetaAngles, nu_of_theta, theta_of_trace, TraceValue
from .linalg import (
    as_hermitian,
    complete_to_unitary,
    eig_hermitian,
    eigvalsh,
    min_eig,
    op_norm,
    projection_rank,
    psd_sqrt,
    rank_eps,
    spectral_apply,
)

ORDER_TOL = 1e-9
RANK_TOL = 1e-8
# slack used when checking interlacing and clipping scalar arguments
SCALAR_SLACK = 1e-12
TIE_TOL = 1e-10
PREDICATE_BAND = 1e-8


# --------------------------------------------------------------------------
# angle schedule


@dataclass(frozen=True)
class BetaSchedule:
    n: int
    m: int
    theta: ThetaAngles
    beta: np.ndarray  # shape (n + 1, n), row k holds beta_{k,1..n}

    def alpha(self) -> np.ndarray:
        return np.vectorize(lambda b: alpha_from_beta(b, self.theta))(self.beta)


def _check_schedule(s: BetaSchedule, tol: float = 1e-12) -> None:
    n, m, th = s.n, s.m, s.theta
    beta = s.beta
    if beta.shape != (n + 1, n):
        raise InternalError(f"schedule has shape {beta.shape}")
    if np.any(beta < -tol) or np.any(beta > th.cap + tol):
        raise InternalError("schedule leaves [0, pi - 2 theta]")
    for k in range(n + 1):
        if abs(beta[k].sum() - k * th.theta) > tol:
            raise InternalError(f"row {k} does not sum to {k} theta")
    for k in range(1, n + 1):
        # beta_{k,1} >= beta_{k-1,1} >= beta_{k,2} >= ... >= beta_{k,n} >= beta_{k-1,n}
        weave = np.empty(2 * n)
        weave[0::2] = beta[k]
        weave[1::2] = beta[k - 1]
        if np.any(np.diff(weave) > tol):
            raise InternalError(f"rows {k - 1} and {k} do not interlace")
    expected = np.where(np.arange(n) < m, th.cap, 0.0)
    if np.any(np.abs(beta[n] - expected) > tol):
        raise InternalError("last row is not (cap, ..., cap, 0, ..., 0)")


def beta_schedule(n: int, m: int) -> BetaSchedule:
    """Angles beta_{kl} = clamp(k theta - (l-1)(pi - 2 theta), 0, pi - 2 theta).

    With theta = m pi / (n + 2m) both theta and the cap are integer multiples
    of ``u = pi/(n + 2m)`` (m u and n u), so entries are formed as exact
    integer multiples of u and ties between entries are exact.
    """
    if not (1 <= m <= n):
        raise InputError(f"need 1 <= m <= n, got m={m}, n={n}")
    theta = theta_of_trace(TraceValue.from_ratio(m, n))
    u = math.pi / (n + 2 * m)
    k = np.arange(n + 1)[:, None]
    l = np.arange(n)[None, :]
    beta = np.clip(k * m - l * n, 0, n) * u
    # endpoints pinned to the floating cap so that alpha(cap) evaluates with the same constant
    beta = np.where(np.clip(k * m - l * n, 0, n) == n, theta.cap, beta)
    sched = BetaSchedule(n, m, theta, beta)
    _check_schedule(sched)
    return sched


def alpha_from_beta(beta: float, theta: ThetaAngles) -> float:
    """The monotone bijection [0, pi - 2 theta] -> [0, 1]."""
    if beta < -SCALAR_SLACK or beta > theta.cap + SCALAR_SLACK:
        raise InputError(f"beta={beta} outside [0, {theta.cap}]")
    b = min(max(beta, 0.0), theta.cap)
    t = theta.theta
    return math.sin(b) / (2.0 * math.cos(t) * math.sin(b + t))


def beta_from_alpha(alpha: float, theta: ThetaAngles) -> float:
    """Inverse of :func:`alpha_from_beta`.

    Solving ``s sin(b + theta) = sin b`` with ``s = 2 cos(theta) alpha`` gives
    ``tan b = s sin(theta) / (1 - s cos(theta))``; ``atan2`` lands on the
    branch in [0, pi - 2 theta] because ``s sin(theta) >= 0``.
    """
    if alpha < -SCALAR_SLACK or alpha > 1 + SCALAR_SLACK:
        raise InputError(f"alpha={alpha} outside [0, 1]")
    a = min(max(alpha, 0.0), 1.0)
    t = theta.theta
    s = 2.0 * math.cos(t) * a
    b = math.atan2(s * math.sin(t), 1.0 - s * math.cos(t))
    return min(max(b, 0.0), theta.cap)


def a_of_b(B, theta: ThetaAngles) -> np.ndarray:
    """Apply the alpha map to an angle operator with spectrum in [0, pi - 2 theta]."""
    return spectral_apply(B, lambda x: alpha_from_beta(x, theta), domain=(0.0, theta.cap), band=ORDER_TOL)


def b_of_a(A, theta: ThetaAngles, P) -> np.ndarray:
    """Angle operator B with 0 <= B <= (pi - 2 theta) P and alpha(B) = A.

    Requires 0 <= A <= P. Since alpha^{-1}(0) = 0, applying the inverse map
    to A spectrally leaves the kernel of P in the kernel of B.
    """
    A = as_hermitian(A)
    P = as_hermitian(P)
    if min_eig(A) < -ORDER_TOL or min_eig(P - A) < -ORDER_TOL:
        raise InputError("b_of_a requires 0 <= A <= P")
    return spectral_apply(A, lambda x: beta_from_alpha(x, theta), domain=(0.0, 1.0), band=ORDER_TOL)


def cot_shift(B, shift: float) -> np.ndarray:
    """cot(B + shift I); the spectrum of B + shift I must stay inside (0, pi)."""
    lo = 1e-9 - shift
    hi = math.pi - 1e-9 - shift
    return spectral_apply(B, lambda x: 1.0 / math.tan(x + shift), domain=(lo, hi), band=0.0)


# --------------------------------------------------------------------------
# rank-one interlacing update


def _deflate(alpha: np.ndarray, target: np.ndarray, tol: float):
    """Pair off alpha_i with alpha'_i or alpha'_{i+1} where they coincide."""
    n = alpha.size
    used = np.zeros(n, dtype=bool)
    kept = []
    for i in range(n):
        scale = max(1.0, abs(alpha[i]))
        for j in (i, i + 1):
            if j < n and not used[j] and abs(alpha[i] - target[j]) <= tol * scale:
                used[j] = True
                break
        else:
            kept.append(i)
    return np.array(kept, dtype=int), np.flatnonzero(~used)


def interlace_update(A, targets) -> np.ndarray:
    """Rank-one PSD update ``A + v v*`` whose spectrum is ``targets``.

    ``targets`` (descending) must interlace the eigenvalues of A:
    t_1 >= a_1 >= t_2 >= a_2 >= ... >= t_n >= a_n. In the eigenbasis of A
    the update vector has squared coordinates

        |c_i|^2 = -prod_j (a_i - t_j) / prod_{j != i} (a_i - a_j)

    over the indices left after deflating coincident pairs.
    """
    A = as_hermitian(A)
    t = np.asarray(targets, dtype=float)
    n = A.shape[0]
    if t.shape != (n,):
        raise InputError(f"expected {n} targets, got shape {t.shape}")
    sp = eig_hermitian(A)
    a = sp.eigenvalues
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(t))))
    slack = SCALAR_SLACK * scale
    if np.any(np.diff(t) > slack):
        raise InputError("targets must be in descending order")
    weave = np.empty(2 * n)
    weave[0::2] = t
    weave[1::2] = a
    if np.any(np.diff(weave) > slack):
        raise InputError("targets do not interlace the spectrum of A")

    kept, free = _deflate(a, t, TIE_TOL)
    if kept.size != free.size:
        raise InternalError("deflation left unequal index sets")
    if kept.size == 0:
        return A.copy()
    ak, tk = a[kept], t[free]
    w = np.empty(kept.size)
    for idx, ai in enumerate(ak):
        num = np.prod(ai - tk)
        den = np.prod(np.delete(ai - ak, idx))
        w[idx] = -num / den
    if np.any(w < -1e-10 * scale):
        raise InputError("interlacing update produced negative weights")
    c = np.sqrt(np.clip(w, 0.0, None))
    v = sp.eigenvectors[:, kept] @ c
    Ap = A + np.outer(v, v.conj())
    Ap = (Ap + Ap.conj().T) / 2
    if np.max(np.abs(eigvalsh(Ap) - t)) > 1e-8:
        raise NumericalError("updated spectrum misses the targets by more than 1e-8")
    return Ap


# --------------------------------------------------------------------------
# chains and flags


@dataclass(frozen=True)
class OperatorChain:
    """0 = A_0 <= A_1 <= ... <= A_n = P with total increment rank <= dim."""

    P: np.ndarray
    A: tuple

    def __post_init__(self):
        P = self.P
        dim = P.shape[0]
        projection_rank(P)
        A = self.A
        if len(A) < 2:
            raise InputError("a chain needs at least A_0 and A_1")
        if op_norm(A[0]) > ORDER_TOL:
            raise InputError("A_0 must be 0")
        if op_norm(A[-1] - P) > ORDER_TOL:
            raise InputError("A_n must equal P")
        total = 0
        for k in range(1, len(A)):
            D = as_hermitian(A[k] - A[k - 1])
            if min_eig(D) < -ORDER_TOL:
                raise InputError(f"chain decreases at step {k}")
            total += rank_eps(D, RANK_TOL)
        if total > dim:
            raise InputError(f"increment ranks sum to {total} > dim {dim}")

    @property
    def n(self) -> int:
        return len(self.A) - 1

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    def increment_ranks(self) -> list[int]:
        return [rank_eps(self.A[k] - self.A[k - 1], RANK_TOL) for k in range(1, len(self.A))]


@dataclass(frozen=True)
class Flag:
    """0 = P_0 <= P_1 <= ... <= P_n = I."""

    projections: tuple

    def __post_init__(self):
        Ps = self.projections
        if len(Ps) < 2:
            raise InputError("a flag needs at least P_0 and P_1")
        dim = Ps[0].shape[0]
        for P in Ps:
            if P.shape != (dim, dim):
                raise InputError("flag projections have mismatched shapes")
            projection_rank(P)
        if op_norm(Ps[0]) > ORDER_TOL or op_norm(Ps[-1] - np.eye(dim)) > ORDER_TOL:
            raise InputError("flag must start at 0 and end at I")
        for k in range(1, len(Ps)):
            if min_eig(Ps[k] - Ps[k - 1]) < -ORDER_TOL:
                raise InputError(f"flag is not increasing at step {k}")

    @property
    def n(self) -> int:
        return len(self.projections) - 1

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    def ranks(self) -> list[int]:
        return [int(round(np.trace(P).real)) for P in self.projections]


@dataclass(frozen=True)
class BChain:
    theta: ThetaAngles
    B: tuple

    def traces(self) -> np.ndarray:
        return np.array([np.trace(Bk).real for Bk in self.B])


def build_chain(schedule: BetaSchedule) -> OperatorChain:
    """Chain whose A_k has eigenvalues alpha(beta_{k,1}) >= ... >= alpha(beta_{k,n})."""
    n = schedule.n
    alpha = schedule.alpha()
    A = [np.zeros((n, n), dtype=complex)]
    for k in range(1, n + 1):
        A.append(interlace_update(A[-1], alpha[k]))
    # snap the last element onto the exact projection of its eigenspace
    sp = eig_hermitian(A[-1])
    U = sp.eigenvectors
    P = (U * np.round(sp.eigenvalues)) @ U.conj().T
    P = (P + P.conj().T) / 2
    A[-1] = P
    return OperatorChain(P, tuple(A))


def b_chain(chain: OperatorChain, theta: ThetaAngles) -> BChain:
    return BChain(theta, tuple(b_of_a(Ak, theta, chain.P) for Ak in chain.A))


def recover_flag(chain: OperatorChain) -> Flag:
    """Flag with P P_k P = A_k for every k.

    Each increment D_k = A_k - A_{k-1} is factored as Y_k*Y_k with the range
    of Y_k in its own block of coordinates Q_k. Then Y = sum Y_k satisfies
    Y*Y = P, so Y is a partial isometry with initial projection P; any
    unitary U with UP = Y gives P_k = U*(Q_1 + ... + Q_k)U.
    """
    dim, n = chain.dim, chain.n
    rows = []
    block_ends = []
    offset = 0
    for k in range(1, n + 1):
        D = as_hermitian(chain.A[k] - chain.A[k - 1])
        sp = eig_hermitian(D)
        lam = sp.eigenvalues
        keep = lam > RANK_TOL * max(1.0, float(lam[0]))
        r = int(np.count_nonzero(keep))
        if offset + r > dim:
            raise InputError("rank budget exceeded: increments need more than dim coordinates")
        for j in np.flatnonzero(keep):
            rows.append((offset, math.sqrt(lam[j]) * sp.eigenvectors[:, j].conj()))
            offset += 1
        block_ends.append(offset)
    Y = np.zeros((dim, dim), dtype=complex)
    for i, row in rows:
        Y[i] = row
    if op_norm(Y.conj().T @ Y - chain.P) > 1e-7:
        raise NumericalError("Y*Y drifts from P by more than 1e-7")
    U = complete_to_unitary(Y)
    Ps = [np.zeros((dim, dim), dtype=complex)]
    for k in range(1, n):
        D = np.zeros(dim)
        D[: block_ends[k - 1]] = 1.0
        Pk = (U.conj().T * D) @ U
        Ps.append((Pk + Pk.conj().T) / 2)
    Ps.append(np.eye(dim, dtype=complex))
    return Flag(tuple(Ps))


def step_norms(P, chain: OperatorChain) -> np.ndarray:
    """||(P - A_{k-1})^{1/2} A_k^{1/2}|| for k = 1..n."""
    roots = [psd_sqrt(Ak) for Ak in chain.A]
    co_roots = [psd_sqrt(P - Ak) for Ak in chain.A]
    return np.array([op_norm(co_roots[k - 1] @ roots[k]) for k in range(1, chain.n + 1)])


def chain_objective(P, chain: OperatorChain) -> float:
    return float(np.max(step_norms(P, chain)))


# --------------------------------------------------------------------------
# trace audit


@dataclass
class StepAudit:
    k: int
    step_norm: float
    trace_B: float
    trace_diff: float  # normalized trace tau(B_k) - tau(B_{k-1})
    r: float  # normalized rank of cot(B_{k-1} + phi) - cot(B_k + phi)
    bound: float  # r * theta
    holds: bool
    tight: bool
    rank_condition: bool  # rank of cot(B_k + phi) - cot(B_{k-1} + 3 phi) equals dim (1 - r)

    def to_dict(self) -> dict:
        return {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in self.__dict__.items()}


@dataclass
class AuditReport:
    theta: float
    nu: float
    steps: list = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(s.holds for s in self.steps)

    @property
    def all_tight(self) -> bool:
        return all(s.tight and s.rank_condition for s in self.steps)


def lb_audit(chain: OperatorChain, theta: ThetaAngles, tol: float = 1e-7) -> AuditReport:
    """Check tau(B_k) - tau(B_{k-1}) <= r_k theta step by step.

    Every step must satisfy the norm bound ||(P - A_{k-1})^{1/2} A_k^{1/2}||
    <= 1/(2 cos theta) + 1e-9, otherwise PreconditionError names the step.
    """
    dim = chain.dim
    nu = nu_of_theta(theta.theta)
    norms = step_norms(chain.P, chain)
    for k, val in enumerate(norms, start=1):
        if val > nu + 1e-9:
            raise PreconditionError(f"step {k} has norm {val:.12f} > {nu:.12f}", step=k)
    bc = b_chain(chain, theta)
    phi = theta.phi
    report = AuditReport(theta.theta, nu)
    for k in range(1, chain.n + 1):
        Bp, B = bc.B[k - 1], bc.B[k]
        c_prev = cot_shift(Bp, phi)
        c_cur = cot_shift(B, phi)
        c_prev3 = cot_shift(Bp, 3 * phi)
        rank_r = rank_eps(c_prev - c_cur, tol)
        rank_s = rank_eps(c_cur - c_prev3, tol)
        r = rank_r / dim
        diff = (np.trace(B).real - np.trace(Bp).real) / dim
        bound = r * theta.theta
        report.steps.append(
            StepAudit(
                k=k,
                step_norm=float(norms[k - 1]),
                trace_B=float(np.trace(B).real),
                trace_diff=float(diff),
                r=r,
                bound=bound,
                holds=bool(diff <= bound + tol),
                tight=bool(abs(diff - bound) <= tol),
                rank_condition=bool(rank_s == dim - rank_r),
            )
        )
    return report


# --------------------------------------------------------------------------
# equivalence predicates


def _check_angle_range(B, theta: ThetaAngles, name: str) -> np.ndarray:
    B = as_hermitian(B)
    lam = eigvalsh(B)
    if lam[-1] < -ORDER_TOL or lam[0] > theta.cap + ORDER_TOL:
        raise InputError(f"{name} must satisfy 0 <= {name} <= (pi - 2 theta) I")
    return B


def ordering_margins(B, Bp, theta: ThetaAngles) -> tuple[float, float]:
    """Minimum eigenvalues of the two differences compared by :func:`ordering_iff_cot`."""
    B = _check_angle_range(B, theta, "B")
    Bp = _check_angle_range(Bp, theta, "B'")
    t = theta.theta

    def ratio(x):
        return math.sin(x) / math.sin(x + t)

    f = spectral_apply(B, ratio, domain=(0.0, theta.cap), band=ORDER_TOL)
    fp = spectral_apply(Bp, ratio, domain=(0.0, theta.cap), band=ORDER_TOL)
    lhs = min_eig(fp - f)
    rhs = min_eig(cot_shift(B, theta.phi) - cot_shift(Bp, theta.phi))
    return lhs, rhs


def ordering_iff_cot(B, Bp, theta: ThetaAngles) -> tuple[bool, bool]:
    """(sin B / sin(B + theta) <= sin B' / sin(B' + theta), cot(B + phi) >= cot(B' + phi))."""
    lhs, rhs = ordering_margins(B, Bp, theta)
    return lhs >= -PREDICATE_BAND, rhs >= -PREDICATE_BAND


def bound_margins(A, Ap, theta: ThetaAngles) -> tuple[float, float]:
    """Signed margins for :func:`bound_iff_cot3phi`; nonnegative means the side holds."""
    A = as_hermitian(A)
    Ap = as_hermitian(Ap)
    eye = np.eye(A.shape[0])
    for M, name in ((A, "A"), (Ap, "A'")):
        lam = eigvalsh(M)
        if lam[-1] < -ORDER_TOL or lam[0] > 1 + ORDER_TOL:
            raise InputError(f"{name} must satisfy 0 <= {name} <= I")
    B = b_of_a(A, theta, eye)
    Bp = b_of_a(Ap, theta, eye)
    nu = nu_of_theta(theta.theta)
    lhs = nu - op_norm(psd_sqrt(eye - A) @ psd_sqrt(Ap))
    rhs = min_eig(cot_shift(Bp, theta.phi) - cot_shift(B, 3 * theta.phi))
    return lhs, rhs


def bound_iff_cot3phi(A, Ap, theta: ThetaAngles) -> tuple[bool, bool]:
    """(||(I - A)^{1/2} A'^{1/2}|| <= 1/(2 cos theta), cot(B' + phi) >= cot(B + 3 phi))."""
    lhs, rhs = bound_margins(A, Ap, theta)
    return lhs >= -1e-9, rhs >= -PREDICATE_BAND
