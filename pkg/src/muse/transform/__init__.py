"""Formula and rule-set transformations."""

from .normal import (
    TransformError,
    dnf_cubes,
    dual_equation,
    erase_existentials,
    negate,
    nnf,
    norm,
    relation_free,
)
from .qe import eliminate_quantifiers
from .rules import (
    HornClause,
    ReifiedRelation,
    ReifiedRuleSet,
    RuleBase,
    SemanticsRules,
    clauses_of,
    expand,
    inline,
    phi_of,
    reify,
    reify_formula,
    rules_of,
)

__all__ = [name for name in dir() if not name.startswith("_")]
