"""Brute-force minimization of the nest distance over complete flags.

A unitary U determines the complete flag P_k = U* D_k U, with D_k the
projection onto the first k coordinates. For X = P the k-th nest term is
the norm of the block (U P U*)[k-1:, :k], so the search runs on the
unitary group with accept-if-improved Givens rotations and step halving.
Nothing here uses the angle construction; this module is an independent
check of the closed form.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chain import Flag
from .errors import InputError
from .formula import nu_matrix
from .linalg import as_complex_matrix, haar_unitary, op_norm, projection_rank

log = logging.getLogger(__name__)

INITIAL_STEP = 0.5
MIN_STEP = 1e-6
DEFAULT_RESTARTS = 32
DEFAULT_SWEEPS = 2000


def complete_flag_of_unitary(U) -> Flag:
    U = as_complex_matrix(U)
    n = U.shape[0]
    if op_norm(U.conj().T @ U - np.eye(n)) > 1e-9:
        raise InputError("U is not unitary")
    Ps = []
    for k in range(n + 1):
        D = np.zeros(n)
        D[:k] = 1.0
        Pk = (U.conj().T * D) @ U
        Ps.append((Pk + Pk.conj().T) / 2)
    return Flag(tuple(Ps))


def flag_value(P: np.ndarray, U: np.ndarray) -> float:
    """Nest distance of P to the complete flag of U."""
    Y = U @ P @ U.conj().T
    n = Y.shape[0]
    return max(np.linalg.norm(Y[k - 1:, :k], 2) for k in range(1, n + 1))


def _batch_values(P: np.ndarray, Us: np.ndarray) -> np.ndarray:
    Y = Us @ P @ np.conj(np.swapaxes(Us, -1, -2))
    n = P.shape[0]
    best = np.zeros(Us.shape[0])
    for k in range(1, n + 1):
        s = np.linalg.svd(Y[:, k - 1:, :k], compute_uv=False)[:, 0]
        np.maximum(best, s, out=best)
    return best


def _rotations(step: float) -> np.ndarray:
    # real and imaginary Givens generators, both signs
    c, s = np.cos(step), np.sin(step)
    return np.array(
        [
            [[c, -s], [s, c]],
            [[c, s], [-s, c]],
            [[c, 1j * s], [1j * s, c]],
            [[c, -1j * s], [-1j * s, c]],
        ]
    )


@dataclass
class RestartTrace:
    seed: int
    value: float
    unitary: np.ndarray
    sweeps: int
    history: list = field(default_factory=list)


@dataclass
class OracleResult:
    best_value: float
    best_unitary: np.ndarray
    restarts: int
    iterations_per_restart: int
    seed: int
    traces: list = field(default_factory=list, repr=False)

    def flag(self) -> Flag:
        return complete_flag_of_unitary(self.best_unitary)


def descend(P: np.ndarray, U: np.ndarray, max_sweeps: int = DEFAULT_SWEEPS,
            initial_step: float = INITIAL_STEP, min_step: float = MIN_STEP):
    """Givens coordinate descent from U; returns (U, value, sweeps, history)."""
    n = P.shape[0]
    value = flag_value(P, U)
    history = [value]
    if n == 1:
        return U, value, 0, history
    pairs = [(i, j) for i in range(n - 1) for j in range(i + 1, n)]
    step = initial_step
    rots = _rotations(step)
    sweeps = 0
    while sweeps < max_sweeps and step >= min_step:
        sweeps += 1
        improved = False
        for i, j in pairs:
            cand = np.broadcast_to(U, (4, n, n)).copy()
            rows = U[[i, j], :]
            cand[:, [i, j], :] = rots @ rows
            vals = _batch_values(P, cand)
            best = int(np.argmin(vals))
            if vals[best] < value:
                value = float(vals[best])
                U = cand[best]
                improved = True
        history.append(value)
        if not improved:
            step /= 2
            rots = _rotations(step)
    return U, value, sweeps, history


def _restart_seeds(seed: int, restarts: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(restarts)
    return [int(ch.generate_state(1, dtype=np.uint64)[0]) for ch in children]


def minimize_over_flags(P, restarts: int = DEFAULT_RESTARTS, seed: int = 42,
                        iters: int = DEFAULT_SWEEPS, workers: int = 1,
                        keep_history: bool = False) -> OracleResult:
    """Best complete flag found from ``restarts`` Haar-random starting unitaries.

    ``iters`` caps the number of sweeps per restart. Restarts are independent
    and may run on ``workers`` threads; the winner is chosen by value with
    ties broken by restart order, so the result does not depend on scheduling.
    """
    if restarts < 1:
        raise InputError("restarts must be at least 1")
    P = as_complex_matrix(P)
    projection_rank(P)
    n = P.shape[0]
    seeds = _restart_seeds(seed, restarts)

    def run(s):
        U0 = haar_unitary(n, s)
        U, value, sweeps, history = descend(P, U0, iters)
        return RestartTrace(s, value, U, sweeps, history if keep_history else [])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            traces = list(pool.map(run, seeds))
    else:
        traces = [run(s) for s in seeds]
    best = min(range(restarts), key=lambda r: (traces[r].value, r))
    win = traces[best]
    log.debug("oracle n=%d best %.12f after %d sweeps", n, win.value, win.sweeps)
    return OracleResult(
        best_value=win.value,
        best_unitary=win.unitary,
        restarts=restarts,
        iterations_per_restart=iters,
        seed=seed,
        traces=traces,
    )


def standard_projection(n: int, m: int) -> np.ndarray:
    return np.diag([1.0] * m + [0.0] * (n - m)).astype(complex)


def oracle_gap(n: int, m: int, restarts: int = DEFAULT_RESTARTS, seed: int = 42,
               iters: int = DEFAULT_SWEEPS, workers: int = 1) -> float:
    """best_value - nu for the rank-m coordinate projection in M_n (n <= 5)."""
    return oracle_report(n, m, restarts, seed, iters, workers)["gap"]


def oracle_report(n: int, m: int, restarts: int = DEFAULT_RESTARTS, seed: int = 42,
                  iters: int = DEFAULT_SWEEPS, workers: int = 1) -> dict:
    if not (1 <= m <= n <= 5):
        raise InputError(f"oracle needs 1 <= m <= n <= 5, got m={m}, n={n}")
    res = minimize_over_flags(standard_projection(n, m), restarts, seed, iters, workers)
    nu = nu_matrix(n, m)
    return {
        "n": n,
        "m": m,
        "nu_formula": nu,
        "oracle_value": res.best_value,
        "gap": res.best_value - nu,
        "restarts": restarts,
        "seed": seed,
    }
