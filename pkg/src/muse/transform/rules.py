"""Rule bases: expanding relation applications, Horn clauses, reification and
inlining."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Protocol

import networkx as nx

from ..core import (
    FixpointEquation,
    Formula,
    NameSupply,
    RelApp,
    Semantics,
    Term,
    TermConst,
    Var,
    rule_of,
    simplify,
    substitute,
)
from ..core.formula import freshen_binders, map_relapps, relapps_in_order
from .normal import TransformError, dnf_cubes


class RuleBase(Protocol):
    """Anything that can define a relation application."""

    def definition(self, app: RelApp) -> tuple[RelApp, Formula]:
        """Head with formal parameters and the defining body."""
        ...

    def rank(self, app: RelApp) -> int:
        """Position of the application's relation in the evaluation order."""
        ...


def expand(rules: RuleBase, app: RelApp, names: NameSupply) -> Formula:
    """The definition of ``app`` with its formal parameters replaced by the
    actual arguments; every bound variable is renamed fresh."""
    if app.co:
        raise TransformError(f"cannot expand complement application {app!r}")
    head, body = rules.definition(app)
    body = freshen_binders(body, names)
    mapping = {p.name: a for p, a in zip(head.args, app.args)}  # type: ignore[union-attr]
    return substitute(body, mapping, names=names)


class SemanticsRules:
    """Definitions taken directly from the semantic rules (terms stay as
    arguments)."""

    def __init__(self, semantics: Semantics) -> None:
        self.semantics = semantics
        self._cache: dict[tuple[str, Term], tuple[RelApp, Formula]] = {}

    def definition(self, app: RelApp) -> tuple[RelApp, Formula]:
        if not isinstance(app.term, TermConst):
            raise TransformError("cannot expand symbolic term")
        term = app.term.term
        key = (app.rel, term)
        if key not in self._cache:
            rule = rule_of(self.semantics, app.rel, term.symbol)
            head = RelApp(app.rel, TermConst(term, rule.production.lhs), rule.params)
            self._cache[key] = (head, rule.instantiate_term(term))
        return self._cache[key]

    def rank(self, app: RelApp) -> int:
        return self.semantics.rank(app.rel)


def phi_of(semantics: Semantics, app: RelApp, names: NameSupply | None = None) -> Formula:
    """The rule body for ``app``'s ground term with the actual arguments
    substituted for the formal ones."""
    if not isinstance(app.term, TermConst):
        raise TransformError("cannot expand symbolic term")
    return expand(SemanticsRules(semantics), app, names or NameSupply())


# ---------------------------------------------------------------------------
# Horn clauses


@dataclass(frozen=True)
class HornClause:
    """``head <- body``; a ``None`` head stands for false (a query clause)."""

    head: RelApp | None
    body: Formula

    def __str__(self) -> str:
        from ..core import to_sexpr

        head = to_sexpr(self.head) if self.head is not None else "false"
        return f"{head} <- {to_sexpr(self.body)}"


def clauses_of(head: RelApp, body: Formula, names: NameSupply) -> list[HornClause]:
    return [HornClause(head, cube) for cube in dnf_cubes(body, names)]


def rules_of(semantics: Semantics, rel: str, term: Term, names: NameSupply | None = None) -> list[HornClause]:
    """One Horn clause per DNF cube of the rule for ``term``'s production."""
    nt = rule_of(semantics, rel, term.symbol).production.lhs
    head, body = SemanticsRules(semantics).definition(RelApp(rel, TermConst(term, nt), ()))
    return clauses_of(head, body, names or NameSupply())


# ---------------------------------------------------------------------------
# reification


@dataclass(frozen=True)
class ReifiedRelation:
    name: str
    origin: str
    term: Term
    params: tuple[Var, ...]
    body: Formula

    @property
    def head(self) -> RelApp:
        return RelApp(self.name, None, self.params)


@dataclass
class ReifiedRuleSet:
    """Relations specialised to the subterms of concrete programs."""

    semantics: Semantics
    relations: dict[str, ReifiedRelation] = field(default_factory=dict)
    roots: list[str] = field(default_factory=list)
    term_ids: dict[Term, int] = field(default_factory=dict)
    by_origin: dict[tuple[str, Term], str] = field(default_factory=dict)

    def name_for(self, rel: str, term: Term) -> str:
        key = (rel, term)
        if key not in self.by_origin:
            idx = self.term_ids.setdefault(term, len(self.term_ids))
            name = f"{rel}_t{idx}"
            if any(r.name == name for r in self.semantics.relations):
                name = f"{rel}__t{idx}"
            self.by_origin[key] = name
        return self.by_origin[key]

    def reified_app(self, app: RelApp) -> RelApp:
        if not isinstance(app.term, TermConst):
            raise TransformError("reification needs ground term arguments")
        return RelApp(self.name_for(app.rel, app.term.term), None, app.args, app.co)

    def add_seed(self, rel: str, term: Term) -> str:
        name = self.name_for(rel, term)
        if name not in self.roots:
            self.roots.append(name)
        self._close([(rel, term)])
        return name

    def _close(self, work: Iterable[tuple[str, Term]]) -> None:
        queue = deque(work)
        while queue:
            rel, term = queue.popleft()
            name = self.name_for(rel, term)
            if name in self.relations:
                continue
            rule = rule_of(self.semantics, rel, term.symbol)
            body = rule.instantiate_term(term)
            found: list[tuple[str, Term]] = []

            def rename(app: RelApp) -> RelApp:
                assert isinstance(app.term, TermConst)
                found.append((app.rel, app.term.term))
                return self.reified_app(app)

            body = map_relapps(body, rename)
            self.relations[name] = ReifiedRelation(name, rel, term, rule.params, body)
            queue.extend(found)

    def rewrite(self, formula: Formula) -> Formula:
        """Replace ground applications in ``formula`` by reified ones, adding
        the needed relations."""
        for app in relapps_in_order(formula):
            if isinstance(app.term, TermConst):
                self.add_seed(app.rel, app.term.term)
        return map_relapps(formula, lambda a: self.reified_app(a) if isinstance(a.term, TermConst) else a)

    # RuleBase
    def definition(self, app: RelApp) -> tuple[RelApp, Formula]:
        try:
            r = self.relations[app.rel]
        except KeyError:
            raise TransformError(f"undefined reified relation {app.rel}") from None
        return r.head, r.body

    def rank(self, app: RelApp) -> int:
        r = self.relations.get(app.rel)
        return self.semantics.rank(r.origin if r else app.rel)

    def describe(self, name: str) -> str:
        r = self.relations[name]
        return f"{r.origin} on {r.term}"


def reify(semantics: Semantics, rel: str, term: Term) -> ReifiedRuleSet:
    rs = ReifiedRuleSet(semantics)
    rs.add_seed(rel, term)
    return rs


def reify_formula(semantics: Semantics, formula: Formula) -> tuple[ReifiedRuleSet, Formula]:
    rs = ReifiedRuleSet(semantics)
    return rs, rs.rewrite(formula)


# ---------------------------------------------------------------------------
# inlining


def _cyclic_nodes(graph: dict[str, list[str]]) -> set[str]:
    """Nodes that lie on some cycle of the call graph."""
    g = nx.DiGraph()
    g.add_nodes_from(graph)
    g.add_edges_from((a, b) for a, succ in graph.items() for b in succ if b in graph)
    cyclic: set[str] = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(n, n) for n in comp):
            cyclic.update(comp)
    return cyclic


def _inline_bodies(
    bodies: dict[str, tuple[RelApp, Formula]], roots: list[str], names: NameSupply
) -> tuple[dict[str, Formula], list[str]]:
    """Inline every non-cyclic definition; return new bodies and the kept names."""
    graph = {n: [a.rel for a in relapps_in_order(b)] for n, (_, b) in bodies.items()}
    cyclic = _cyclic_nodes(graph)
    done: dict[str, Formula] = {}

    def inlined(name: str) -> Formula:
        if name not in done:
            head, body = bodies[name]

            def sub(app: RelApp) -> Formula:
                if app.rel in cyclic or app.rel not in bodies or app.co:
                    return app
                callee_head, _ = bodies[app.rel]
                callee = freshen_binders(inlined(app.rel), names)
                mapping = {p.name: a for p, a in zip(callee_head.args, app.args)}  # type: ignore[union-attr]
                return substitute(callee, mapping, names=names)

            done[name] = simplify(map_relapps(body, sub))
        return done[name]

    kept: list[str] = []
    queue = deque(roots)
    while queue:
        n = queue.popleft()
        if n in kept or n not in bodies:
            continue
        kept.append(n)
        queue.extend(a.rel for a in relapps_in_order(inlined(n)))
    return {n: inlined(n) for n in kept}, kept


def inline(ruleset, names: NameSupply | None = None, roots: list[str] | None = None):
    """Inline non-recursive definitions into their callers.

    Accepts a :class:`ReifiedRuleSet` or a list of :class:`FixpointEquation`
    (for the latter, ``roots`` names the relations the goal refers to;
    by default all are kept).
    """
    names = names or NameSupply()
    if isinstance(ruleset, ReifiedRuleSet):
        bodies = {n: (r.head, r.body) for n, r in ruleset.relations.items()}
        new, kept = _inline_bodies(bodies, list(ruleset.roots), names)
        out = ReifiedRuleSet(ruleset.semantics, roots=list(ruleset.roots))
        out.term_ids = dict(ruleset.term_ids)
        out.by_origin = dict(ruleset.by_origin)
        for n in sorted(kept, key=list(ruleset.relations).index):
            r = ruleset.relations[n]
            out.relations[n] = ReifiedRelation(r.name, r.origin, r.term, r.params, new[n])
        return out
    eqs: list[FixpointEquation] = list(ruleset)
    key_name = {eq.key: _eq_name(eq) for eq in eqs}
    by_name = {key_name[eq.key]: eq for eq in eqs}
    renamed = {
        n: (_named_app(eq.head, n), map_relapps(eq.body, lambda a: _named_app(a, key_name.get(a.key, a.rel))))
        for n, eq in by_name.items()
    }
    root_names = [key_name[k] for k in roots] if roots is not None else list(by_name)  # type: ignore[index]
    new, kept = _inline_bodies(renamed, root_names, names)
    back = {n: eq.head for n, eq in by_name.items()}
    result = []
    for n in by_name:
        if n in kept:
            body = map_relapps(new[n], lambda a: _unname(a, back))
            result.append(FixpointEquation(by_name[n].head, by_name[n].fix, body))
    return result


def _eq_name(eq: FixpointEquation) -> str:
    rel, term, co = eq.key
    return f"{'~' if co else ''}{rel}@{term}"


def _named_app(app: RelApp, name: str) -> RelApp:
    return RelApp(name, None, app.args, False)


def _unname(app: RelApp, back: dict[str, RelApp]) -> RelApp:
    h = back.get(app.rel)
    if h is None:
        return app
    return RelApp(h.rel, h.term, app.args, h.co)


__all__ = [
    "HornClause",
    "ReifiedRelation",
    "ReifiedRuleSet",
    "RuleBase",
    "SemanticsRules",
    "clauses_of",
    "expand",
    "inline",
    "phi_of",
    "reify",
    "reify_formula",
    "rules_of",
]
