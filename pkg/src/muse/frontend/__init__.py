"""Reading and writing problem and solution files."""

from .parser import (
    FormulaContext,
    RelSig,
    parse_formula,
    parse_problem,
    parse_solution,
    parse_term,
    print_problem,
    print_solution,
)
from .sexpr import Diagnostic, FrontendError, SourceSpan, read_all

__all__ = [
    "Diagnostic",
    "FormulaContext",
    "FrontendError",
    "RelSig",
    "SourceSpan",
    "parse_formula",
    "parse_problem",
    "parse_solution",
    "parse_term",
    "print_problem",
    "print_solution",
    "read_all",
]
