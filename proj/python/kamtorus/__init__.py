"""KAM straightening of constant vector fields on tori."""

import json as _json

from ._kamtorus import (
    ConfigError,
    DivergenceError,
    Error,
    SmallDivisorError,
    FourierField,
    SchemeConstants,
    StraighteningResult,
    ReducedTransport,
    TransportOperator,
    conjugacy_flow_check,
    conjugacy_residual,
    diophantine_ok,
    forced_solve,
    kam_iterate,
    reduce,
    rotation_vector,
    solve_homological,
    sobolev_norm,
)
from . import _kamtorus

__all__ = [
    "ConfigError",
    "DivergenceError",
    "Error",
    "SmallDivisorError",
    "FourierField",
    "SchemeConstants",
    "StraighteningResult",
    "ReducedTransport",
    "TransportOperator",
    "conjugacy_flow_check",
    "conjugacy_residual",
    "diophantine_ok",
    "forced_solve",
    "kam_iterate",
    "reduce",
    "rotation_vector",
    "run",
    "solve_homological",
    "sobolev_norm",
]


def run(command, config, out=None, threads=1, seed=None):
    """Run a CLI command on a config dict. Returns (exit_code, log)."""
    return _kamtorus._run(command, _json.dumps(config), out, threads, seed)
