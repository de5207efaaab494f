"""Semantics, problems, solutions, fixed-point equations and verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .formula import Formula, RelApp, TermConst, Var, substitute, to_sexpr
from .terms import Grammar, Production, Sort, Term, ValidationError, term_sort

SELF = "#self"


@dataclass(frozen=True, slots=True)
class SemanticRelation:
    name: str
    nonterminal: str
    params: tuple[Var, ...]
    out: Var | None = None

    @property
    def all_params(self) -> tuple[Var, ...]:
        return self.params + ((self.out,) if self.out is not None else ())

    @property
    def arg_sorts(self) -> tuple[Sort, ...]:
        return tuple(v.sort for v in self.all_params)


@dataclass(frozen=True, slots=True)
class SemanticRule:
    """``relation(production(child_vars...), params...) <- body``.

    Inside ``body`` the children are term-sorted variables named by
    ``child_vars`` and the whole term is the variable ``term_var``.
    """

    relation: str
    production: Production
    child_vars: tuple[str, ...]
    params: tuple[Var, ...]
    body: Formula

    @property
    def term_var(self) -> Var:
        return Var(SELF, term_sort(self.production.lhs))

    @property
    def child_term_vars(self) -> tuple[Var, ...]:
        return tuple(Var(n, term_sort(nt)) for n, nt in zip(self.child_vars, self.production.children))

    def instantiate_term(self, term: Term) -> Formula:
        """Body with the term variable and child variables made ground."""
        mapping: dict[str, Formula] = {SELF: TermConst(term, self.production.lhs)}
        for name, nt, child in zip(self.child_vars, self.production.children, term.children):
            mapping[name] = TermConst(child, nt)
        return substitute(self.body, mapping)

    def __str__(self) -> str:
        head = " ".join([self.production.symbol.name, *self.child_vars])
        params = " ".join(v.name for v in self.params)
        return f"{self.relation}(({head}) {params}) <- {to_sexpr(self.body)}"


@dataclass(frozen=True)
class Semantics:
    relations: tuple[SemanticRelation, ...]
    order: tuple[str, ...]
    rules: Mapping[tuple[str, str], SemanticRule]

    def __post_init__(self) -> None:
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate relation name")
        if sorted(self.order) != sorted(names):
            raise ValidationError("relation order must list every relation exactly once")

    def relation(self, name: str) -> SemanticRelation:
        for r in self.relations:
            if r.name == name:
                return r
        raise ValidationError(f"unknown relation {name!r}")

    def has_relation(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)

    def relations_of(self, nonterminal: str) -> list[SemanticRelation]:
        return [r for r in self.relations if r.nonterminal == nonterminal]

    def rank(self, name: str) -> int:
        return self.order.index(name)


def rule_of(semantics: Semantics, relation: str, production: Production | str) -> SemanticRule:
    symbol = production.symbol.name if isinstance(production, Production) else production
    try:
        return semantics.rules[(relation, symbol)]
    except KeyError:
        raise ValidationError(f"no rule for relation {relation} on production {symbol}") from None


@dataclass(frozen=True)
class Problem:
    grammar: Grammar
    semantics: Semantics
    synth_funs: tuple[tuple[str, str], ...]
    spec: Formula

    def synth_nonterminal(self, name: str) -> str:
        for f, nt in self.synth_funs:
            if f == name:
                return nt
        raise ValidationError(f"unknown synth-fun {name!r}")

    def with_spec(self, spec: Formula) -> Problem:
        return Problem(self.grammar, self.semantics, self.synth_funs, spec)


@dataclass(frozen=True)
class Solution:
    bindings: Mapping[str, Term] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Term:
        return self.bindings[name]


def instantiate_spec(problem: Problem, solution: Solution) -> Formula:
    """The specification with each synth-fun replaced by its bound term."""
    mapping = {
        f: TermConst(solution.bindings[f], nt) for f, nt in problem.synth_funs if f in solution.bindings
    }
    missing = [f for f, _ in problem.synth_funs if f not in solution.bindings]
    if missing:
        raise ValidationError(f"missing binding for {missing[0]}")
    return substitute(problem.spec, mapping)


MU = "mu"
NU = "nu"


@dataclass(frozen=True, slots=True)
class FixpointEquation:
    """``head =fix body``; ``head`` applies the defined relation to formal
    parameters (plus a ground term when not reified)."""

    head: RelApp
    fix: str
    body: Formula

    @property
    def key(self) -> tuple[str, Term | None, bool]:
        return self.head.key

    @property
    def params(self) -> tuple[Var, ...]:
        return self.head.args  # type: ignore[return-value]

    def __str__(self) -> str:
        return f"{to_sexpr(self.head)} ={self.fix} {to_sexpr(self.body)}"


@dataclass(frozen=True, slots=True)
class Verdict:
    kind: str  # "valid" | "invalid" | "unknown" | "timeout"
    reason: str = ""
    bounded: bool = False

    @property
    def definitive(self) -> bool:
        return self.kind in ("valid", "invalid")

    def __str__(self) -> str:
        text = self.kind.capitalize()
        if self.bounded:
            text += " (domain-bounded)"
        if self.reason and not self.definitive:
            text += f": {self.reason}"
        return text


VALID = Verdict("valid")
INVALID = Verdict("invalid")
TIMEOUT = Verdict("timeout")


def unknown(reason: str) -> Verdict:
    return Verdict("unknown", reason)
