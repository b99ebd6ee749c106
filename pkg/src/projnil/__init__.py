"""Operator-norm distance from a projection to the nilpotent matrices."""
from .formula import ThetaAngles, TraceValue, nu_finite, nu_infinite, nu_matrix, theta_of_trace
from .chain import (
    BetaSchedule,
    Flag,
    OperatorChain,
    beta_schedule,
    build_chain,
    chain_objective,
    lb_audit,
    recover_flag,
)
from .nest import DistanceCertificate, certificate, nearest_in_nest, nest_distance
from .oracle import OracleResult, minimize_over_flags, oracle_gap

__version__ = "0.1.0"
