"""Nested least/greatest fixed points of ordered equation systems."""

from __future__ import annotations

import itertools

import networkx as nx
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from ..core import MU, NU, Exists, FixpointEquation, Forall, Formula, Not, RelApp, sort_of, to_sexpr
from ..core.formula import children, relapps_in_order
from ..transform import nnf
from .domain import FiniteDomain, OracleError
from .evaluator import Evaluator

Key = tuple  # (relation, term or None, complement flag)


class InterpSource:
    """Relation contents held as explicit tuple sets."""

    def __init__(self, domain: FiniteDomain, fix: dict[Key, str]) -> None:
        self.domain = domain
        self.fix = fix
        self.values: dict[Key, frozenset] = {}
        self._index: dict[tuple, tuple[frozenset, dict]] = {}

    def _outside(self, values: tuple) -> bool:
        return any(x is not None and not self.domain.contains(x) for x in values)

    def _get(self, app: RelApp) -> frozenset:
        try:
            return self.values[app.key]
        except KeyError:
            raise OracleError(f"relation {app.display_name} has no equation") from None

    def contains(self, app: RelApp, values: tuple) -> bool:
        rel = self._get(app)
        if self._outside(values):
            return self.fix[app.key] == NU
        return values in rel

    def matching(self, app: RelApp, pattern: tuple) -> Iterator[tuple]:
        rel = self._get(app)
        if self._outside(pattern):
            if self.fix[app.key] == NU:
                pools = [self.domain.values(_sort_of_value(app, i)) if p is None else (p,) for i, p in enumerate(pattern)]
                yield from _product(pools)
            return
        mask = tuple(p is not None for p in pattern)
        if not any(mask):
            yield from rel
            return
        cached = self._index.get((app.key, mask))
        if cached is None or cached[0] is not rel:
            index: dict[tuple, list] = {}
            for t in rel:
                index.setdefault(tuple(x for x, m in zip(t, mask) if m), []).append(t)
            cached = (rel, index)
            self._index[(app.key, mask)] = cached
        yield from cached[1].get(tuple(p for p in pattern if p is not None), ())


def _sort_of_value(app: RelApp, i: int):
    return sort_of(app.args[i])


def _product(pools):
    return itertools.product(*pools)


@dataclass
class Interpretation:
    """Satisfying tuples of every relation in an equation system."""

    domain: FiniteDomain
    equations: list[FixpointEquation]
    values: dict[Key, frozenset] = field(default_factory=dict)

    def get(self, name: str, co: bool = False, term=None) -> frozenset:
        return self.values[(name, term, co)]

    def __getitem__(self, key: Key) -> frozenset:
        return self.values[key]

    def dump(self) -> str:
        lines = []
        for eq in self.equations:
            rows = sorted(self.values[eq.key], key=repr)
            shown = ", ".join("(" + ", ".join(_show(x) for x in t) + ")" for t in rows)
            lines.append(f"{to_sexpr(eq.head)} ={eq.fix}: {len(rows)} tuple(s) {{{shown}}}")
        return "\n".join(lines)


def _show(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    return str(x)


class _System:
    def __init__(self, equations: Sequence[FixpointEquation], domain: FiniteDomain) -> None:
        self.eqs = list(equations)
        keys = [eq.key for eq in self.eqs]
        if len(set(keys)) != len(keys):
            raise OracleError("relation defined twice")
        known = set(keys)
        for eq in self.eqs:
            for a in relapps_in_order(eq.body):
                if a.key not in known:
                    raise OracleError(f"relation {a.display_name} has no equation")
        self.domain = domain
        self.source = InterpSource(domain, {eq.key: eq.fix for eq in self.eqs})
        self.ev = Evaluator(domain, self.source)
        self.blocks: list[list[int]] = []
        for i, eq in enumerate(self.eqs):
            if self.blocks and self.eqs[self.blocks[-1][-1]].fix == eq.fix:
                self.blocks[-1].append(i)
            else:
                self.blocks.append([i])
        self.blocks = [self._ordered(blk) for blk in self.blocks]
        block_of = {eq.key: b for b, blk in enumerate(self.blocks) for i in blk for eq in [self.eqs[i]]}
        self.external: list[list[Key]] = []
        for b in range(len(self.blocks)):
            refs: set[Key] = set()
            for blk in self.blocks[b:]:
                for i in blk:
                    refs.update(a.key for a in relapps_in_order(self.eqs[i].body))
            self.external.append(sorted((k for k in refs if block_of[k] < b), key=repr))
        self.cache: dict[tuple, dict[Key, frozenset]] = {}
        self.top: dict[Key, frozenset] = {}
        # universally flavoured bodies (and nearly full greatest fixed points)
        # are cheaper to refute than to confirm
        self.plan: dict[Key, tuple[Formula, bool]] = {}
        for eq in self.eqs:
            alls, exs = _quantifiers(eq.body)
            if alls > exs or (alls == exs and eq.fix == NU):
                self.plan[eq.key] = (nnf(Not(eq.body)), True)
            else:
                self.plan[eq.key] = (eq.body, False)

    def _ordered(self, block: list[int]) -> list[int]:
        """Block members with dependencies before dependents."""
        idx = {self.eqs[i].key: i for i in block}
        g = nx.DiGraph()
        g.add_nodes_from(block)
        for i in block:
            for a in relapps_in_order(self.eqs[i].body):
                j = idx.get(a.key)
                if j is not None:
                    g.add_edge(j, i)
        cond = nx.condensation(g)
        order = []
        for c in nx.lexicographical_topological_sort(cond, key=lambda c: min(cond.nodes[c]["members"])):
            order.extend(sorted(cond.nodes[c]["members"]))
        return order

    def full(self, eq: FixpointEquation) -> frozenset:
        if eq.key not in self.top:
            self.top[eq.key] = frozenset(self.domain.tuples([p.sort for p in eq.params]))
        return self.top[eq.key]

    def step(self, eq: FixpointEquation) -> frozenset:
        names = [p.name for p in eq.params]
        body, negated = self.plan[eq.key]
        out = set()
        for env in self.ev.gen(body, {}):
            missing = [p for p in eq.params if p.name not in env]
            if not missing:
                out.add(tuple(env[n] for n in names))
                continue
            for vals in self.domain.tuples([p.sort for p in missing]):
                e = {**env, **{p.name: x for p, x in zip(missing, vals)}}
                out.add(tuple(e[n] for n in names))
        return self.full(eq) - out if negated else frozenset(out)

    def solve(self, b: int) -> None:
        if b == len(self.blocks):
            return
        values = self.source.values
        ck = (b, tuple(values[k] for k in self.external[b]))
        hit = self.cache.get(ck)
        if hit is not None:
            values.update(hit)
            self.ev.reset()
            return
        block = [self.eqs[i] for i in self.blocks[b]]
        fix = block[0].fix
        for eq in block:
            values[eq.key] = frozenset() if fix == MU else self.full(eq)
        # chaotic iteration: each member is updated in place, dependencies first
        changed = True
        while changed:
            changed = False
            for eq in block:
                self.ev.reset()
                self.solve(b + 1)
                new = self.step(eq)
                old = values[eq.key]
                if new == old:
                    continue
                if not (old <= new if fix == MU else new <= old):
                    raise OracleError(f"non-monotone iteration for {eq.head.display_name}")
                values[eq.key] = new
                changed = True
        self.ev.reset()
        later = [self.eqs[i].key for blk in self.blocks[b:] for i in blk]
        self.cache[ck] = {k: values[k] for k in later}


def _quantifiers(f: Formula) -> tuple[int, int]:
    alls = exs = 0
    stack = [f]
    while stack:
        g = stack.pop()
        alls += isinstance(g, Forall)
        exs += isinstance(g, Exists)
        stack.extend(children(g))
    return alls, exs


def needed_by(equations: Sequence[FixpointEquation], goal: Formula) -> list[FixpointEquation]:
    """The equations ``goal`` depends on, in their original order.

    The set is closed under body references, so solving it alone gives each
    member the value it has in the whole system.
    """
    table = {eq.key: eq for eq in equations}
    seen: set = set()
    todo = [a.key for a in relapps_in_order(goal)]
    while todo:
        key = todo.pop()
        if key in seen or key not in table:
            continue
        seen.add(key)
        todo.extend(a.key for a in relapps_in_order(table[key].body))
    return [eq for eq in equations if eq.key in seen]


def eval_system(equations: Sequence[FixpointEquation], domain: FiniteDomain) -> Interpretation:
    """Solve the system with the first equation outermost."""
    system = _System(equations, domain)
    system.solve(0)
    return Interpretation(domain, list(equations), dict(system.source.values))


def evaluator_for(interp: Interpretation) -> Evaluator:
    source = InterpSource(interp.domain, {eq.key: eq.fix for eq in interp.equations})
    source.values = dict(interp.values)
    return Evaluator(interp.domain, source)


def holds_in(interp: Interpretation, formula: Formula) -> bool:
    """Truth of a closed formula under ``interp``."""
    return evaluator_for(interp).holds(formula, {})


__all__ = ["Interpretation", "InterpSource", "eval_system", "evaluator_for", "holds_in"]
