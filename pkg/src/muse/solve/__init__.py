"""Dispatch of encoded queries to external solver processes."""

from .config import (
    ENV_VAR,
    KIND_ENCODINGS,
    ConfigError,
    SolverConfig,
    SolverSet,
    config_path,
    load_config,
    parse_config,
)
from .pipeline import AUTO, KINDS, VerifyOptions, applicable_kinds, combine_split, portfolio, verify
from .runner import SolverRun, classify_output, run_backend

__all__ = [name for name in dir() if not name.startswith("_")]
