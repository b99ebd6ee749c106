"""Command line front end.

Subcommands print one JSON document to stdout (or ``--output``); logging
goes to stderr. Exit codes: 0 success, 2 usage, 3 verification failure,
4 identity disagreement.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import identities
from .chain import b_chain, beta_schedule, build_chain, chain_objective, lb_audit
from .errors import InputError
from .formula import TraceValue, nu_finite, nu_infinite, theta_of_trace
from .jsonio import certificate_to_json
from .nest import certificate
from .oracle import DEFAULT_RESTARTS, oracle_report

log = logging.getLogger("projnil")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFY = 3
EXIT_DISAGREE = 4

MAX_DIM = 12
MAX_ORACLE_DIM = 5
ORACLE_GAP_LIMIT = 1e-3


@dataclass
class CliConfig:
    subcommand: str
    dim: int | None = None
    rank: int | None = None
    trace: float | None = None
    tol: float = 1e-8
    seed: int = 42
    restarts: int = DEFAULT_RESTARTS
    samples: int = 500
    margin: float = 1e-6
    thetas: list | None = None
    output: str | None = None
    infinite: bool = False
    coprojection_finite: bool = False


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projnil",
        description="Distance from a projection to the nilpotent matrices.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, seed=False):
        p.add_argument("--dim", type=int, help="matrix dimension n")
        p.add_argument("--rank", type=int, help="projection rank m")
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--output", help="write JSON here instead of stdout")
        if seed:
            p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("nu", help="closed-form distance")
    common(p)
    p.add_argument("--trace", type=float, help="normalized trace in (0, 1]")
    p.add_argument("--infinite", action="store_true", help="projection in an infinite factor")
    p.add_argument("--coprojection-finite", type=_bool, default=False, metavar="BOOL")

    p = sub.add_parser("certificate", help="explicit near-optimal nilpotent")
    common(p)

    p = sub.add_parser("oracle", help="brute-force search over complete flags")
    common(p, seed=True)
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)

    p = sub.add_parser("audit", help="per-step trace audit of the optimal chain")
    common(p)

    p = sub.add_parser("identities", help="sampled operator equivalences")
    common(p, seed=True)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--margin", type=float, default=1e-6, help="discard band around the boundary")
    p.add_argument("--thetas", type=float, nargs="+", help="angles to sample (default pi/8 pi/5 pi/4 0.95 pi/3)")
    return parser


def config_from_args(args: argparse.Namespace) -> CliConfig:
    cfg = CliConfig(args.subcommand)
    for name in ("dim", "rank", "trace", "tol", "seed", "restarts", "samples", "margin",
                 "thetas", "output", "infinite", "coprojection_finite"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    validate(cfg)
    return cfg


def validate(cfg: CliConfig) -> None:
    """Raise InputError for an inconsistent configuration."""
    if cfg.tol <= 0:
        raise InputError("--tol must be positive")
    have_nm = cfg.dim is not None or cfg.rank is not None
    if cfg.subcommand == "nu":
        if cfg.infinite:
            if have_nm or cfg.trace is not None:
                raise InputError("--infinite takes no --dim/--rank/--trace")
            return
        if (cfg.trace is None) == (not have_nm):
            raise InputError("give exactly one of --trace or --dim/--rank")
        if cfg.trace is not None:
            if not (0 < cfg.trace <= 1):
                raise InputError("--trace must lie in (0, 1]")
            return
    if cfg.subcommand == "identities":
        if cfg.samples < 1:
            raise InputError("--samples must be positive")
        return
    if cfg.dim is None or cfg.rank is None:
        raise InputError("--dim and --rank are required")
    limit = MAX_ORACLE_DIM if cfg.subcommand == "oracle" else MAX_DIM
    if not (1 <= cfg.rank <= cfg.dim <= limit):
        raise InputError(f"need 1 <= rank <= dim <= {limit}")
    if cfg.subcommand == "oracle" and cfg.restarts < 1:
        raise InputError("--restarts must be positive")


def cmd_nu(cfg: CliConfig) -> tuple[dict, int]:
    if cfg.infinite:
        return {"infinite": True, "coprojection_finite": cfg.coprojection_finite,
                "nu": nu_infinite(cfg.coprojection_finite)}, EXIT_OK
    tau = TraceValue(cfg.trace) if cfg.trace is not None else TraceValue.from_ratio(cfg.rank, cfg.dim)
    out = {"tau": tau.value, "theta": theta_of_trace(tau).theta, "nu": nu_finite(tau)}
    if tau.exact is not None:
        out.update(dim=cfg.dim, rank=cfg.rank)
    return out, EXIT_OK


def cmd_certificate(cfg: CliConfig) -> tuple[dict, int]:
    cert = certificate(cfg.dim, cfg.rank)
    out = certificate_to_json(cert)
    failures = cert.failures()
    if failures:
        out["failures"] = failures
        log.error("certificate verification failed: %s", "; ".join(failures))
        return out, EXIT_VERIFY
    return out, EXIT_OK


def cmd_oracle(cfg: CliConfig) -> tuple[dict, int]:
    out = oracle_report(cfg.dim, cfg.rank, cfg.restarts, cfg.seed)
    code = EXIT_OK if abs(out["gap"]) <= ORACLE_GAP_LIMIT else EXIT_VERIFY
    return out, code


def cmd_audit(cfg: CliConfig) -> tuple[dict, int]:
    sched = beta_schedule(cfg.dim, cfg.rank)
    chain = build_chain(sched)
    th = sched.theta
    report = lb_audit(chain, th, tol=cfg.tol)
    traces = b_chain(chain, th).traces()
    steps = []
    for s in report.steps:
        d = s.to_dict()
        d["k_theta"] = s.k * th.theta
        d["trace_ok"] = bool(abs(traces[s.k] - s.k * th.theta) <= cfg.tol)
        steps.append(d)
    out = {
        "n": cfg.dim,
        "m": cfg.rank,
        "theta": th.theta,
        "nu": report.nu,
        "objective": chain_objective(chain.P, chain),
        "steps": steps,
        "all_hold": report.all_hold,
        "all_tight": report.all_tight,
        "trace_criterion": all(d["trace_ok"] for d in steps),
    }
    return out, EXIT_OK


def cmd_identities(cfg: CliConfig) -> tuple[dict, int]:
    thetas = tuple(cfg.thetas) if cfg.thetas else identities.DEFAULT_THETAS
    for t in thetas:
        if not (0 < t <= math.pi / 3):
            raise InputError(f"theta {t} outside (0, pi/3]")
    out = identities.run_suite(cfg.samples, cfg.seed, thetas=thetas, margin=cfg.margin)
    code = EXIT_OK if out["agreement_rate"] == 1.0 else EXIT_DISAGREE
    return out, code


COMMANDS = {
    "nu": cmd_nu,
    "certificate": cmd_certificate,
    "oracle": cmd_oracle,
    "audit": cmd_audit,
    "identities": cmd_identities,
}


def _default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        out, code = COMMANDS[cfg.subcommand](cfg)
    except InputError as exc:
        print(f"projnil {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = json.dumps(out, indent=2, default=_default)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
