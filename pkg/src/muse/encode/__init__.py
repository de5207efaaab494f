"""Encodings of verification queries and their textual emitters."""

from .emit import DEFAULT_TEMPLATE, MUCLP_HEADER, emit_horn, emit_muclp, emit_smtlib, render
from .encoders import (
    CHC,
    COCHC,
    ENCODERS,
    MUCLP,
    SMT,
    EncodedQuery,
    EncodingError,
    Optimizations,
    chc_of,
    co_chc_of,
    encode,
    muclp_of,
    query_cubes,
    smt_formula_of,
)
from .muclp_text import MuclpSyntaxError, MuclpSystem, parse_muclp

__all__ = [name for name in dir() if not name.startswith("_")]
