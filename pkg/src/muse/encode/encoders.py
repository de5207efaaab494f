"""Turn a (problem, solution) pair into a backend query."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..analysis import (
    NEG,
    POS,
    Polarity,
    chc_like_for,
    ground_occurrences,
    non_recursive_on,
    occurrences,
)
from ..core import (
    MU,
    NU,
    FixpointEquation,
    Formula,
    NameSupply,
    Not,
    Problem,
    RelApp,
    Semantics,
    Solution,
    TermConst,
    instantiate_spec,
    simplify,
)
from ..core.formula import all_var_names, map_relapps, relapps_in_order
from ..transform import (
    HornClause,
    ReifiedRuleSet,
    SemanticsRules,
    TransformError,
    clauses_of,
    dnf_cubes,
    dual_equation,
    eliminate_quantifiers,
    expand,
    inline,
    negate,
    norm,
    reify_formula,
)

SMT, CHC, COCHC, MUCLP = "SMT", "CHC", "COCHC", "MUCLP"


class EncodingError(ValueError):
    """The chosen encoding does not apply to this query."""


@dataclass(frozen=True)
class Optimizations:
    reify: bool = True
    inline: bool = True
    qe: bool = False
    dual_after: bool = False

    @classmethod
    def parse(cls, text: str | None) -> Optimizations:
        """``"reify,inline,qe"``; ``"none"`` switches everything off."""
        if text is None:
            return cls()
        parts = {p.strip() for p in text.split(",") if p.strip()}
        unknown = parts - {"reify", "inline", "qe", "none", "dual-after"}
        if unknown:
            raise ValueError(f"unknown optimization {sorted(unknown)[0]!r}")
        return cls("reify" in parts, "inline" in parts, "qe" in parts, "dual-after" in parts)

    @property
    def names(self) -> list[str]:
        return [n for n, on in (("reify", self.reify), ("inline", self.inline), ("qe", self.qe)) if on]


@dataclass
class EncodedQuery:
    kind: str
    rules: list = field(default_factory=list)  # HornClause or FixpointEquation
    goal: Formula = None  # type: ignore[assignment]
    text: str = ""
    optimizations: tuple[str, ...] = ()
    falsify: bool = False  # backend "valid" means the candidate is invalid
    ruleset: ReifiedRuleSet | None = None


def _prepare(problem: Problem, solution: Solution, opts: Optimizations) -> tuple[Formula, object]:
    """Instantiate the constraint and build the rule base it will be expanded with."""
    psi = instantiate_spec(problem, solution)
    if not opts.reify:
        return psi, SemanticsRules(problem.semantics)
    rs, psi = reify_formula(problem.semantics, psi)
    if opts.inline:
        rs = inline(rs, NameSupply(_all_names(rs, psi)))
    return psi, rs


def _all_names(rs: ReifiedRuleSet, psi: Formula) -> set[str]:
    names = all_var_names(psi)
    for r in rs.relations.values():
        names |= all_var_names(r.body) | {p.name for p in r.params}
    return names


def _app_id(app: RelApp) -> tuple:
    return (app.rel, app.term.term if isinstance(app.term, TermConst) else None)


# ---------------------------------------------------------------------------
# SMT


def smt_formula_of(problem: Problem, solution: Solution, opts: Optimizations = Optimizations()) -> EncodedQuery:
    psi = instantiate_spec(problem, solution)
    for app, term in ground_occurrences(psi):
        if not non_recursive_on(problem.semantics, app.rel, term):
            raise EncodingError(f"{app.rel} is recursive on {term}; use the MUCLP encoding")
    psi, rules = _prepare(problem, solution, opts)
    names = NameSupply(all_var_names(psi))

    def unfold(f: Formula, stack: tuple) -> Formula:
        def step(app: RelApp) -> Formula:
            key = _app_id(app)
            if key in stack:
                raise EncodingError(f"{app.rel} is recursive; use the MUCLP encoding")
            return unfold(expand(rules, app, names), stack + (key,))  # type: ignore[arg-type]

        return map_relapps(f, step)

    goal = simplify(unfold(psi, ()))
    if opts.qe:
        goal = eliminate_quantifiers(goal)
    return EncodedQuery(SMT, [], goal, optimizations=tuple(opts.names))


# ---------------------------------------------------------------------------
# CHC


def _check_polarity(psi: Formula, wanted: Polarity) -> None:
    for app, pol in occurrences(psi):
        if pol is not wanted:
            word = "positive" if wanted is NEG else "negative"
            raise EncodingError(f"spec has {word} occurrence of {app.rel}")


def _check_chc_like(semantics: Semantics, psi: Formula) -> None:
    for app, term in ground_occurrences(psi):
        if not chc_like_for(semantics, app.rel, term):
            raise EncodingError(f"not CHC-like: {app.rel} on {term}")


def _horn_rules(problem: Problem, psi: Formula, rules, opts: Optimizations, names: NameSupply) -> list[HornClause]:
    out: list[HornClause] = []
    seen: set = set()
    queue = deque(relapps_in_order(psi))
    while queue:
        app = queue.popleft()
        key = _app_id(app)
        if key in seen:
            continue
        seen.add(key)
        head, body = rules.definition(app)
        if opts.qe:
            body = eliminate_quantifiers(body)
        try:
            clauses = clauses_of(head, body, names)
        except TransformError as e:
            raise EncodingError(f"not CHC-like: {app.rel} ({e})") from None
        for c in clauses:
            out.append(c)
            queue.extend(relapps_in_order(c.body))
    return out


def chc_of(problem: Problem, solution: Solution, opts: Optimizations = Optimizations()) -> EncodedQuery:
    raw = instantiate_spec(problem, solution)
    _check_polarity(raw, NEG)
    _check_chc_like(problem.semantics, raw)
    psi, rules = _prepare(problem, solution, opts)
    names = NameSupply(all_var_names(psi))
    clauses = _horn_rules(problem, psi, rules, opts, names)
    rs = rules if isinstance(rules, ReifiedRuleSet) else None
    return EncodedQuery(CHC, clauses, psi, optimizations=tuple(opts.names), ruleset=rs)


def query_cubes(query: EncodedQuery) -> list[Formula]:
    """Bodies of the false-headed clauses equivalent to the CHC goal."""
    try:
        return dnf_cubes(Not(query.goal), NameSupply(all_var_names(query.goal)))
    except TransformError as e:
        raise EncodingError(f"query is not in Horn shape ({e})") from None


# ---------------------------------------------------------------------------
# fixed-point equations


def _equations(psi_norm: Formula, rules, opts: Optimizations) -> list[FixpointEquation]:
    """Worklist construction of the equation system reachable from a
    normalized goal; both polarities of every reached relation are defined."""
    found: dict[tuple, FixpointEquation] = {}
    order: list[tuple] = []
    queue: deque[tuple[RelApp, str]] = deque()

    def push(app: RelApp) -> None:
        base = RelApp(app.rel, app.term, app.args, False)
        queue.append((base, MU))
        queue.append((base, NU))

    for app in relapps_in_order(psi_norm):
        push(app)
    while queue:
        app, fix = queue.popleft()
        key = (_app_id(app), fix)
        if key in found:
            continue
        head, body = rules.definition(app)
        if opts.qe:
            body = eliminate_quantifiers(body)
        eq = FixpointEquation(head, MU, norm(body))
        if fix == NU:
            eq = dual_equation(eq)
        found[key] = eq
        order.append(key)
        for a in relapps_in_order(eq.body):
            push(a)

    def rank(key: tuple) -> tuple:
        eq = found[key]
        co_slot = (0 if eq.head.co else 1) if not opts.dual_after else (1 if eq.head.co else 0)
        return (rules.rank(eq.head), co_slot, order.index(key))

    return [found[k] for k in sorted(order, key=rank)]


def muclp_of(problem: Problem, solution: Solution, opts: Optimizations = Optimizations()) -> EncodedQuery:
    psi, rules = _prepare(problem, solution, opts)
    goal = norm(simplify(psi))
    eqs = _equations(goal, rules, opts)
    rs = rules if isinstance(rules, ReifiedRuleSet) else None
    return EncodedQuery(MUCLP, eqs, goal, optimizations=tuple(opts.names), ruleset=rs)


def co_chc_of(problem: Problem, solution: Solution, opts: Optimizations = Optimizations()) -> EncodedQuery:
    """Dual of the CHC encoding: greatest fixed points of the complement
    relations, posed as the falsification of the dual goal."""
    raw = instantiate_spec(problem, solution)
    _check_polarity(raw, POS)
    _check_chc_like(problem.semantics, raw)
    psi, rules = _prepare(problem, solution, opts)
    dual_goal = negate(simplify(psi))
    eqs = [eq for eq in _equations(dual_goal, rules, opts) if eq.fix == NU]
    rs = rules if isinstance(rules, ReifiedRuleSet) else None
    return EncodedQuery(COCHC, eqs, dual_goal, optimizations=tuple(opts.names), falsify=True, ruleset=rs)


ENCODERS = {SMT: smt_formula_of, CHC: chc_of, COCHC: co_chc_of, MUCLP: muclp_of}


def encode(problem: Problem, solution: Solution, kind: str, opts: Optimizations = Optimizations()) -> EncodedQuery:
    from .emit import render

    try:
        query = ENCODERS[kind](problem, solution, opts)
    except TransformError as e:
        raise EncodingError(str(e)) from None
    query.text = render(query, problem.grammar)
    return query


__all__ = [
    "CHC",
    "COCHC",
    "ENCODERS",
    "MUCLP",
    "SMT",
    "EncodedQuery",
    "EncodingError",
    "Optimizations",
    "chc_of",
    "co_chc_of",
    "encode",
    "muclp_of",
    "query_cubes",
    "smt_formula_of",
]
