"""JSON encodings for matrices, chains, flags and certificates.

Matrix: ``{"dim": n, "entries": [[re, im], ...]}`` row-major.
Chain or flag: ``{"n": n, "matrices": [<matrix>, ...]}`` in ascending k.
"""
from __future__ import annotations

import numpy as np

from .chain import Flag, OperatorChain
from .errors import InputError
from .linalg import as_complex_matrix


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {
        "dim": int(M.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in M.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        n = int(obj["dim"])
        entries = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix JSON: {exc}") from exc
    if n < 1 or len(entries) != n * n:
        raise InputError(f"matrix JSON has {len(entries)} entries for dim {n}")
    flat = np.array([complex(re, im) for re, im in entries])
    return as_complex_matrix(flat.reshape(n, n))


def sequence_to_json(mats) -> dict:
    return {"n": len(mats) - 1, "matrices": [matrix_to_json(M) for M in mats]}


def sequence_from_json(obj: dict) -> list[np.ndarray]:
    mats = [matrix_from_json(m) for m in obj["matrices"]]
    if int(obj["n"]) != len(mats) - 1:
        raise InputError("sequence length does not match n")
    return mats


def chain_to_json(chain: OperatorChain) -> dict:
    return sequence_to_json(chain.A)


def chain_from_json(obj: dict) -> OperatorChain:
    mats = sequence_from_json(obj)
    return OperatorChain(mats[-1], tuple(mats))


def flag_to_json(flag: Flag) -> dict:
    return sequence_to_json(flag.projections)


def flag_from_json(obj: dict) -> Flag:
    return Flag(tuple(sequence_from_json(obj)))


def certificate_to_json(cert) -> dict:
    return {
        "n": cert.n,
        "m": cert.m,
        "reference": cert.reference,
        "achieved": cert.achieved,
        "nil_index": cert.nil_index,
        "P": matrix_to_json(cert.P),
        "N": matrix_to_json(cert.nilpotent),
        "flag": [matrix_to_json(Pk) for Pk in cert.flag.projections],
        "verified": cert.verified,
    }
