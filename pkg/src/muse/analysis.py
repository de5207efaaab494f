"""Structural analyses of a (problem, solution) pair and backend selection."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator

from .core import (
    SELF,
    TRUE,
    And,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Problem,
    RelApp,
    Semantics,
    Solution,
    Term,
    TermConst,
    Var,
    conj,
    forall,
    free_vars,
    instantiate_spec,
    rule_of,
)
from .core.formula import children, strip_prefix


class Polarity(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    BOTH = "both"
    ABSENT = "absent"

    def join(self, other: Polarity) -> Polarity:
        if self is Polarity.ABSENT:
            return other
        if other is Polarity.ABSENT or other is self:
            return self
        return Polarity.BOTH

    def flip(self) -> Polarity:
        if self is Polarity.POSITIVE:
            return Polarity.NEGATIVE
        if self is Polarity.NEGATIVE:
            return Polarity.POSITIVE
        return self


POS, NEG, BOTH, ABSENT = Polarity.POSITIVE, Polarity.NEGATIVE, Polarity.BOTH, Polarity.ABSENT


def occurrences(f: Formula, pol: Polarity = POS) -> Iterator[tuple[RelApp, Polarity]]:
    """Every relation application in ``f`` with the polarity of its position."""
    match f:
        case RelApp():
            yield f, pol
        case Not(a):
            yield from occurrences(a, pol.flip())
        case Implies(l, r):
            yield from occurrences(l, pol.flip())
            yield from occurrences(r, pol)
        case Iff(l, r):
            yield from occurrences(l, BOTH)
            yield from occurrences(r, BOTH)
        case _:
            for c in children(f):
                yield from occurrences(c, pol)


def _quantifiers(f: Formula, pol: Polarity = POS) -> Iterator[tuple[str, Polarity]]:
    match f:
        case Forall(_, b) | Exists(_, b):
            yield ("forall" if isinstance(f, Forall) else "exists"), pol
            yield from _quantifiers(b, pol)
        case Not(a):
            yield from _quantifiers(a, pol.flip())
        case Implies(l, r):
            yield from _quantifiers(l, pol.flip())
            yield from _quantifiers(r, pol)
        case Iff(l, r):
            yield from _quantifiers(l, BOTH)
            yield from _quantifiers(r, BOTH)
        case _:
            for c in children(f):
                yield from _quantifiers(c, pol)


def has_universal(f: Formula) -> bool:
    """True if ``f`` contains a quantifier that acts universally once negations
    are pushed inward."""
    for kind, pol in _quantifiers(f):
        if pol is BOTH or (kind == "forall") == (pol is POS):
            return True
    return False


def spec_polarity(spec: Formula) -> dict[str, Polarity]:
    out: dict[str, Polarity] = {}
    for app, pol in occurrences(spec):
        out[app.display_name] = out.get(app.display_name, ABSENT).join(pol)
    return out


def polarity_closure(semantics: Semantics) -> list[str]:
    """Relations that occur negatively in their own definition, directly or
    through other relations. An empty list means the semantics is well formed."""
    edges: dict[str, set[tuple[str, bool]]] = {r.name: set() for r in semantics.relations}
    for (rel, _), rule in semantics.rules.items():
        for app, pol in occurrences(rule.body):
            if pol in (POS, BOTH):
                edges[rel].add((app.rel, False))
            if pol in (NEG, BOTH):
                edges[rel].add((app.rel, True))
    bad = []
    for r in semantics.order:
        seen: set[tuple[str, bool]] = set()
        stack = [(dst, neg) for dst, neg in edges[r]]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            here, neg = node
            stack.extend((dst, neg != flip) for dst, flip in edges.get(here, ()))
        if (r, True) in seen:
            bad.append(r)
    return bad


def _app_term(app: RelApp, rule_child_vars: tuple[str, ...], term: Term) -> Term:
    t = app.term
    if isinstance(t, Var):
        if t.name == SELF:
            return term
        return term.children[rule_child_vars.index(t.name)]
    if isinstance(t, TermConst):
        return t.term
    raise ValueError("relation application without a term argument")


def _rule_apps(semantics: Semantics, rel: str, term: Term) -> list[tuple[RelApp, Polarity, Term]]:
    rule = rule_of(semantics, rel, term.symbol)
    return [(app, pol, _app_term(app, rule.child_vars, term)) for app, pol in occurrences(rule.body)]


def is_t_ancestor(semantics: Semantics, rel_a: str, rel_b: str, term: Term) -> bool:
    """True iff ``rel_a`` is reached from ``rel_b`` in one or more steps along
    applications on the same term."""
    seen: set[str] = set()
    stack = [rel_b]
    while stack:
        cur = stack.pop()
        for app, _, sub in _rule_apps(semantics, cur, term):
            if sub is not term and sub != term:
                continue
            if app.rel == rel_a:
                return True
            if app.rel not in seen:
                seen.add(app.rel)
                stack.append(app.rel)
    return False


@dataclass
class _Memo:
    table: dict[tuple[str, Term], bool] = field(default_factory=dict)


def non_recursive_on(semantics: Semantics, rel: str, term: Term, _memo: _Memo | None = None) -> bool:
    memo = _memo or _Memo()
    key = (rel, term)
    if key in memo.table:
        return memo.table[key]
    memo.table[key] = False  # a cycle back to this key means recursion
    result = not is_t_ancestor(semantics, rel, rel, term) and all(
        non_recursive_on(semantics, app.rel, sub, memo) for app, _, sub in _rule_apps(semantics, rel, term)
    )
    memo.table[key] = result
    return result


def chc_like_for(semantics: Semantics, rel: str, term: Term, _memo: _Memo | None = None) -> bool:
    memo = _memo or _Memo()
    key = (rel, term)
    if key in memo.table:
        return memo.table[key]
    memo.table[key] = True  # coinductive: cycles through positive rules are fine
    body = rule_of(semantics, rel, term.symbol).body
    apps = _rule_apps(semantics, rel, term)
    ok = (
        all(pol is POS for _, pol, _ in apps)
        and not has_universal(body)
        and all(chc_like_for(semantics, app.rel, sub, memo) for app, _, sub in apps)
    )
    memo.table[key] = ok
    return ok


# ---------------------------------------------------------------------------
# splitting


class _NotSplittable:
    def __repr__(self) -> str:
        return "NotSplittable"

    def __bool__(self) -> bool:
        return False


NOT_SPLITTABLE = _NotSplittable()


def _conjuncts(f: Formula) -> list[Formula]:
    match f:
        case And(args):
            return [c for a in args for c in _conjuncts(a)]
        case Iff(l, r):
            return _conjuncts(Implies(l, r)) + _conjuncts(Implies(r, l))
        case Forall(v, b):
            return [Forall(v, c) for c in _conjuncts(b)]
        case Implies(p, Implies(q, r)):
            return _conjuncts(Implies(conj(p, q), r))
        case Implies(p, q):
            parts = _conjuncts(q)
            if len(parts) == 1:
                return [Implies(p, parts[0])]
            return [c for part in parts for c in _conjuncts(Implies(p, part))]
    return [f]


def split_specification(spec: Formula) -> tuple[Formula, Formula] | _NotSplittable:
    """Split into (positive-only, negative-only) halves, or NOT_SPLITTABLE."""
    prefix, body = strip_prefix(spec, Forall)
    pos: list[Formula] = []
    neg: list[Formula] = []
    for c in _conjuncts(body):
        pols = {p for _, p in occurrences(c)}
        if not pols or pols == {NEG}:
            neg.append(c)
        elif pols == {POS}:
            pos.append(c)
        else:
            return NOT_SPLITTABLE

    def close(parts: list[Formula]) -> Formula:
        if not parts:
            return TRUE
        matrix = conj(*parts)
        used = free_vars(matrix)
        return forall([v for v in prefix if v in used], matrix)

    return close(pos), close(neg)


# ---------------------------------------------------------------------------
# classification

SMT, CHC, COCHC, SPLIT, MUCLP = "SMT", "CHC", "COCHC", "SPLIT", "MUCLP"


@dataclass
class Classification:
    non_recursive: bool
    chc_like: bool
    spec_polarity: dict[str, Polarity]
    recommended: str
    reason: str = ""
    split: tuple[Formula, Formula] | None = None

    def applicable(self) -> list[str]:
        """Every encoding whose hypothesis holds, simplest first."""
        out = []
        pols = set(self.spec_polarity.values())
        if self.non_recursive:
            out.append(SMT)
        if self.chc_like and pols <= {NEG}:
            out.append(CHC)
        if self.chc_like and pols <= {POS}:
            out.append(COCHC)
        if self.split is not None:
            out.append(SPLIT)
        out.append(MUCLP)
        return out


def ground_occurrences(formula: Formula) -> list[tuple[RelApp, Term]]:
    return [(app, app.term.term) for app in _iter_apps(formula) if isinstance(app.term, TermConst)]


def _iter_apps(f: Formula) -> Iterator[RelApp]:
    for app, _ in occurrences(f):
        yield app


def classify(problem: Problem, solution: Solution) -> Classification:
    sem = problem.semantics
    psi = instantiate_spec(problem, solution)
    occ = ground_occurrences(psi)
    nr_memo, chc_memo = _Memo(), _Memo()
    non_rec = all(non_recursive_on(sem, app.rel, t, nr_memo) for app, t in occ)
    chc = all(chc_like_for(sem, app.rel, t, chc_memo) for app, t in occ)
    pol = spec_polarity(psi)
    pols = set(pol.values())
    split = split_specification(psi) if chc and pols else NOT_SPLITTABLE
    split_pair = split if isinstance(split, tuple) and TRUE not in split else None
    if non_rec:
        rec, why = SMT, "every relation is non-recursive on the candidate"
    elif chc and pols <= {NEG}:
        rec, why = CHC, "CHC-like rules, negative occurrences only"
    elif chc and pols <= {POS}:
        rec, why = COCHC, "CHC-like rules, positive occurrences only"
    elif split_pair is not None:
        rec, why = SPLIT, "CHC-like rules, specification splits by polarity"
    elif not chc:
        rec, why = MUCLP, "not CHC-like"
    else:
        rec, why = MUCLP, "mixed-polarity specification that does not split"
    return Classification(non_rec, chc, pol, rec, why, split_pair)
