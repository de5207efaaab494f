"""Core domain values: terms, grammars, formulas, semantics and problems."""

from .formula import (
    FALSE,
    TRUE,
    And,
    BoolConst,
    Cmp,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    IntConst,
    IntOp,
    NameSupply,
    Not,
    Or,
    RelApp,
    SortError,
    TermConst,
    Var,
    alpha_equivalent,
    bool_var,
    check_sorts,
    conj,
    disj,
    exists,
    forall,
    free_vars,
    int_var,
    relapps,
    simplify,
    sort_of,
    substitute,
    to_sexpr,
)
from .problem import (
    INVALID,
    MU,
    NU,
    SELF,
    TIMEOUT,
    VALID,
    FixpointEquation,
    Problem,
    SemanticRelation,
    SemanticRule,
    Semantics,
    Solution,
    Verdict,
    instantiate_spec,
    rule_of,
    unknown,
)
from .terms import (
    BOOL,
    INT,
    Grammar,
    Production,
    RankedSymbol,
    Sort,
    Term,
    ValidationError,
    check_term,
    distinct_subterms,
    enumerate_terms,
    term_sort,
)

__all__ = [name for name in dir() if not name.startswith("_")]
