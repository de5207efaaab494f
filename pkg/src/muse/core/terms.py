"""Sorts, ranked symbols, program terms and typed regular tree grammars."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator


class ValidationError(ValueError):
    """Raised when a core value violates a structural invariant."""


@dataclass(frozen=True, slots=True)
class Sort:
    kind: str  # "Int" | "Bool" | "Term"
    nonterminal: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("Int", "Bool", "Term"):
            raise ValidationError(f"unknown sort kind {self.kind!r}")
        if (self.kind == "Term") != (self.nonterminal is not None):
            raise ValidationError("term sorts carry a nonterminal, others do not")

    @property
    def is_term(self) -> bool:
        return self.kind == "Term"

    def __str__(self) -> str:
        return f"Term[{self.nonterminal}]" if self.is_term else self.kind


INT = Sort("Int")
BOOL = Sort("Bool")


def term_sort(nonterminal: str) -> Sort:
    return Sort("Term", nonterminal)


@dataclass(frozen=True, slots=True)
class RankedSymbol:
    name: str
    arg_types: tuple[str, ...]
    result_type: str

    @property
    def rank(self) -> int:
        return len(self.arg_types)


@dataclass(frozen=True, slots=True)
class Production:
    lhs: str
    symbol: RankedSymbol

    @property
    def children(self) -> tuple[str, ...]:
        return self.symbol.arg_types

    def __str__(self) -> str:
        kids = " ".join(self.children)
        return f"{self.lhs} -> {self.symbol.name}" + (f"({kids})" if kids else "")


@dataclass(frozen=True, slots=True)
class Term:
    """A ground program tree. Symbols are referenced by name; the grammar
    resolves names to ranked symbols."""

    symbol: str
    children: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.children and _is_atom_name(self.symbol):
            return self.symbol
        inner = " ".join([self.symbol, *map(str, self.children)])
        return f"({inner})"

    def __repr__(self) -> str:
        return f"Term<{self}>"

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    @property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=0)

    def subterms(self) -> Iterator[Term]:
        """Pre-order traversal, duplicates included."""
        yield self
        for c in self.children:
            yield from c.subterms()


def _is_atom_name(name: str) -> bool:
    return bool(name) and not any(ch in name for ch in "() \t\n;\"")


@dataclass(frozen=True)
class Grammar:
    nonterminals: tuple[str, ...]
    productions: tuple[Production, ...]
    _by_symbol: dict[str, Production] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_symbol: dict[str, Production] = {}
        known = set(self.nonterminals)
        if len(known) != len(self.nonterminals):
            raise ValidationError("duplicate nonterminal declaration")
        for p in self.productions:
            if p.lhs not in known:
                raise ValidationError(f"production {p} has undeclared left-hand side {p.lhs}")
            if p.symbol.result_type != p.lhs:
                raise ValidationError(f"symbol {p.symbol.name} result type differs from {p.lhs}")
            for child in p.children:
                if child not in known:
                    raise ValidationError(f"production {p} mentions undeclared nonterminal {child}")
            if p.symbol.name in by_symbol:
                raise ValidationError(f"symbol {p.symbol.name!r} is declared twice")
            by_symbol[p.symbol.name] = p
        object.__setattr__(self, "_by_symbol", by_symbol)

    def productions_of(self, nonterminal: str) -> tuple[Production, ...]:
        return tuple(p for p in self.productions if p.lhs == nonterminal)

    def production_of(self, symbol: str) -> Production:
        try:
            return self._by_symbol[symbol]
        except KeyError:
            raise ValidationError(f"unknown symbol {symbol!r}") from None

    def has_symbol(self, symbol: str) -> bool:
        return symbol in self._by_symbol

    def unproductive(self) -> list[str]:
        """Nonterminals with no production at all."""
        lhs = {p.lhs for p in self.productions}
        return [n for n in self.nonterminals if n not in lhs]

    def nonterminal_of(self, term: Term) -> str:
        return self.production_of(term.symbol).lhs


def check_term(grammar: Grammar, term: Term, nonterminal: str) -> bool:
    """True iff ``term`` is derivable from ``nonterminal``.

    Unknown symbols raise :class:`ValidationError` rather than returning False,
    since they indicate a malformed term rather than a non-member.
    """
    prod = grammar.production_of(term.symbol)
    if prod.lhs != nonterminal or len(term.children) != prod.symbol.rank:
        return False
    return all(check_term(grammar, c, nt) for c, nt in zip(term.children, prod.children))


def enumerate_terms(grammar: Grammar, nonterminal: str, max_depth: int) -> Iterator[Term]:
    """All members of L(nonterminal) of depth at most ``max_depth``."""
    memo: dict[tuple[str, int], list[Term]] = {}

    def gen(nt: str, depth: int) -> list[Term]:
        if depth <= 0:
            return []
        key = (nt, depth)
        if key not in memo:
            out: list[Term] = []
            for p in grammar.productions_of(nt):
                pools = [gen(c, depth - 1) for c in p.children]
                for kids in itertools.product(*pools):
                    out.append(Term(p.symbol.name, tuple(kids)))
            memo[key] = out
        return memo[key]

    yield from gen(nonterminal, max_depth)


def distinct_subterms(term: Term) -> list[Term]:
    """Distinct subterms in first-occurrence pre-order."""
    seen: dict[Term, None] = {}
    for t in term.subterms():
        seen.setdefault(t, None)
    return list(seen)
