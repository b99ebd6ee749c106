"""Seeded sampling of the two operator equivalences used by the lower bound.

ordering: sin B / sin(B + theta) <= sin B' / sin(B' + theta)  iff  cot(B + phi) >= cot(B' + phi)
bound:    ||(I - A)^{1/2} A'^{1/2}|| <= 1/(2 cos theta)       iff  cot(B' + phi) >= cot(B + 3 phi)

Both sides are decided numerically, so samples whose margin on either side
is below ``margin`` are discarded rather than resolved.
"""
from __future__ import annotations

import math

import numpy as np

from .chain import a_of_b, b_of_a, bound_margins, cot_shift, ordering_margins
from .formula import ThetaAngles
from .linalg import psd_sqrt, random_hermitian, spectral_apply

DEFAULT_THETAS = (math.pi / 8, math.pi / 5, math.pi / 4, 0.95 * math.pi / 3)
DEFAULT_DIMS = (2, 3, 4)


def _sandwich(lower, upper, R):
    """lower + (upper - lower)^{1/2} R (upper - lower)^{1/2}."""
    S = psd_sqrt(upper - lower)
    out = lower + S @ R @ S
    return (out + out.conj().T) / 2


def _ordering_pair(rng, dim, th: ThetaAngles, mode: int):
    eye = np.eye(dim)
    B = random_hermitian(dim, rng, rng.uniform(0, th.cap, dim))
    if mode == 0:
        Bp = random_hermitian(dim, rng, rng.uniform(0, th.cap, dim))
        return B, Bp
    A = a_of_b(B, th)
    R = random_hermitian(dim, rng, rng.uniform(0.05, 0.95, dim))
    Ap = _sandwich(A, eye, R)
    if mode == 2:
        # push a random subspace back below A
        Ap = Ap - 0.5 * random_hermitian(dim, rng, rng.uniform(0, 1, dim) * (rng.uniform(size=dim) < 0.5))
        Ap = spectral_apply(Ap, lambda x: min(max(x, 0.0), 1.0))
    Bp = b_of_a(Ap, th, eye)
    if mode == 3:
        B, Bp = Bp, B
    return B, Bp


def _bound_pair(rng, dim, th: ThetaAngles, mode: int):
    eye = np.eye(dim)
    if mode == 0:
        A = random_hermitian(dim, rng, rng.uniform(0, 1, dim))
        Ap = random_hermitian(dim, rng, rng.uniform(0, 1, dim) * rng.uniform())
        return A, Ap
    if mode == 3:
        # small A against large A' pushes the norm past the bound
        A = random_hermitian(dim, rng, rng.uniform(0, 0.4, dim))
        Ap = random_hermitian(dim, rng, rng.uniform(0.5, 1, dim))
        return A, Ap
    phi = th.phi
    B = random_hermitian(dim, rng, rng.uniform(0, th.cap, dim))
    L = cot_shift(B, 3 * phi)
    top = (1.0 / math.tan(phi)) * eye
    R = random_hermitian(dim, rng, rng.uniform(0.02, 0.98, dim))
    C = _sandwich(L, top, R)
    if mode == 2:
        C = C - random_hermitian(dim, rng, rng.uniform(0, 2.0, dim))
    lo, hi = -1.0 / math.tan(3 * phi), 1.0 / math.tan(phi)
    # B' + phi = arccot(C), kept inside [phi, pi - 3 phi]
    Bp = spectral_apply(C, lambda x: math.atan2(1.0, min(max(x, lo), hi)) - phi)
    Bp = spectral_apply(Bp, lambda x: min(max(x, 0.0), th.cap))
    return a_of_b(B, th), a_of_b(Bp, th)


def _serialize(M):
    return [[float(z.real), float(z.imag)] for z in np.asarray(M).ravel()]


def run_suite(samples: int = 500, seed: int = 42, dims=DEFAULT_DIMS, thetas=DEFAULT_THETAS,
              margin: float = 1e-6, max_attempts_factor: int = 20) -> dict:
    """Draw until ``samples`` non-boundary instances per predicate are collected.

    Returns a JSON-ready report with counts, discards and any disagreeing
    sample (matrices flattened row-major as [re, im] pairs).
    """
    rng = np.random.default_rng(seed)
    report = {"seed": seed, "margin": margin, "dims": list(dims), "thetas": list(thetas)}
    for name, sampler, margins in (
        ("ordering", _ordering_pair, ordering_margins),
        ("bound", _bound_pair, bound_margins),
    ):
        kept = discarded = agree = both_true = 0
        disagreements = []
        attempts = 0
        while kept < samples and attempts < max_attempts_factor * samples:
            dim = int(dims[attempts % len(dims)])
            theta = float(thetas[(attempts // len(dims)) % len(thetas)])
            mode = attempts % 4
            attempts += 1
            th = ThetaAngles.from_theta(theta)
            X, Y = sampler(rng, dim, th, mode)
            lhs, rhs = margins(X, Y, th)
            if abs(lhs) < margin or abs(rhs) < margin:
                discarded += 1
                continue
            kept += 1
            if (lhs > 0) == (rhs > 0):
                agree += 1
                both_true += lhs > 0
            else:
                disagreements.append(
                    {"dim": dim, "theta": theta, "lhs_margin": lhs, "rhs_margin": rhs,
                     "first": _serialize(X), "second": _serialize(Y)}
                )
        report[name] = {
            "samples": kept,
            "attempts": attempts,
            "discarded": discarded,
            "agree": agree,
            "true_cases": int(both_true),
            "disagreements": disagreements,
            "agreement_rate": agree / kept if kept else 0.0,
        }
    report["agreement_rate"] = min(report["ordering"]["agreement_rate"], report["bound"]["agreement_rate"])
    return report
