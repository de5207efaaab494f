"""Exact finite-domain evaluation of fixed-point equation systems."""

from .domain import DEFAULT_CAP, FiniteDomain, OracleError, Policy
from .evaluator import Evaluator
from .fixpoint import Interpretation, eval_system, holds_in, needed_by
from .verify import (
    DerivationSource,
    bounded_derivation,
    derivation_goal_holds,
    derivation_holds,
    oracle_run,
    oracle_verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
