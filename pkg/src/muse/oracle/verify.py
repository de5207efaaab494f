"""Exact bounded verification and derivation search."""

from __future__ import annotations

from typing import Callable, Iterator, Sequence

from ..core import (
    MU,
    NU,
    BoolConst,
    FixpointEquation,
    Formula,
    IntConst,
    Problem,
    RelApp,
    Solution,
    TermConst,
    Var,
    Verdict,
    instantiate_spec,
)
from ..encode import Optimizations, muclp_of
from ..analysis import BOTH, NEG, POS, occurrences
from ..transform import SemanticsRules, dual_equation, negate
from .domain import FiniteDomain, OracleError
from .evaluator import Evaluator
from .fixpoint import Interpretation, eval_system, holds_in, needed_by

ORACLE_OPTS = Optimizations(reify=True, inline=False)


def oracle_verify(
    problem: Problem,
    solution: Solution,
    domain: FiniteDomain,
    opts: Optimizations = ORACLE_OPTS,
) -> Verdict:
    """Decide the query exactly with every integer ranging over ``domain``."""
    verdict, _ = oracle_run(problem, solution, domain, opts)
    return verdict


def oracle_run(
    problem: Problem, solution: Solution, domain: FiniteDomain, opts: Optimizations = ORACLE_OPTS
) -> tuple[Verdict, Interpretation]:
    query = muclp_of(problem, solution, opts)
    interp = eval_system(needed_by(query.rules, query.goal), domain)
    ok = holds_in(interp, query.goal)
    return Verdict("valid" if ok else "invalid", f"domain {domain}", bounded=True), interp


Definition = Callable[[RelApp], tuple[RelApp, Formula]]


class DerivationSource:
    """Relation membership decided by depth-bounded proof search.

    ``definition`` maps an application to its defining ``(head, body)``.
    """

    def __init__(self, definition: Definition, domain: FiniteDomain) -> None:
        self.definition = definition
        self.domain = domain
        self.memo: dict[tuple, frozenset] = {}

    @classmethod
    def for_problem(cls, problem: Problem, domain: FiniteDomain) -> DerivationSource:
        rules = SemanticsRules(problem.semantics)

        def definition(app: RelApp) -> tuple[RelApp, Formula]:
            if app.co:
                raise OracleError("derivation search needs positive occurrences only")
            return rules.definition(app)

        return cls(definition, domain)

    @classmethod
    def for_equations(cls, equations: Sequence[FixpointEquation], domain: FiniteDomain) -> DerivationSource:
        table = {eq.key: eq for eq in equations}

        def definition(app: RelApp) -> tuple[RelApp, Formula]:
            eq = table.get(app.key)
            if eq is None:
                raise OracleError(f"relation {app.display_name} has no equation")
            if eq.fix != MU:
                raise OracleError("derivation search needs least fixed points only")
            return eq.head, eq.body

        return cls(definition, domain)

    def derive(self, app: RelApp, pattern: tuple, depth: int) -> frozenset:
        if depth <= 0:
            return frozenset()
        key = (app.rel, app.term, pattern, depth)
        if key in self.memo:
            return self.memo[key]
        self.memo[key] = frozenset()  # cycles at equal depth contribute nothing
        head, body = self.definition(app)
        if any(pol in (NEG, BOTH) for _, pol in occurrences(body)):
            raise OracleError("derivation search needs positive occurrences only")
        params = head.args
        env = {p.name: x for p, x in zip(params, pattern) if x is not None}  # type: ignore[union-attr]
        ev = Evaluator(self.domain, _AtDepth(self, depth - 1), bounded=False)
        out = set()
        for e in ev.gen(body, env):
            missing = [p for p in params if p.name not in e]  # type: ignore[union-attr]
            for vals in self.domain.tuples([p.sort for p in missing]):  # type: ignore[union-attr]
                full = {**e, **{p.name: x for p, x in zip(missing, vals)}}  # type: ignore[union-attr]
                out.add(tuple(full[p.name] for p in params))  # type: ignore[union-attr]
        result = frozenset(out)
        self.memo[key] = result
        return result


class _AtDepth:
    def __init__(self, owner: DerivationSource, depth: int) -> None:
        self.owner = owner
        self.depth = depth

    def contains(self, app: RelApp, values: tuple) -> bool:
        return values in self.owner.derive(app, values, self.depth)

    def matching(self, app: RelApp, pattern: tuple) -> Iterator[tuple]:
        return iter(self.owner.derive(app, pattern, self.depth))


def _ground(problem: Problem, solution: Solution, app: RelApp) -> RelApp:
    term = app.term
    if isinstance(term, Var):
        term = TermConst(solution[term.name], problem.synth_nonterminal(term.name))
    if not isinstance(term, TermConst):
        raise OracleError("bounded_derivation needs a term argument")
    for a in app.args:
        if not isinstance(a, (IntConst, BoolConst)):
            raise OracleError("bounded_derivation needs ground arguments")
    return RelApp(app.rel, term, app.args, app.co)


def bounded_derivation(
    problem: Problem,
    solution: Solution,
    app: RelApp,
    depth: int,
    domain: FiniteDomain | None = None,
) -> bool:
    """True iff ``app`` has a derivation tree of height at most ``depth``.

    Arithmetic is exact; ``domain`` only bounds variables that no equality
    or relation determines.
    """
    app = _ground(problem, solution, app)
    src = DerivationSource.for_problem(problem, domain or FiniteDomain(-16, 16))
    values = tuple(a.value for a in app.args)  # type: ignore[union-attr]
    return values in src.derive(app, values, depth)


def derivation_holds(
    problem: Problem, solution: Solution, domain: FiniteDomain, depth: int
) -> bool:
    """Evaluate the instantiated spec with universally quantified integers
    ranging over ``domain`` and relation atoms decided by derivation search
    of height at most ``depth``. Only positive relation occurrences."""
    psi = instantiate_spec(problem, solution)
    if any(pol is not POS for _, pol in occurrences(psi)):
        raise OracleError("derivation check needs positive occurrences only")
    src = DerivationSource.for_problem(problem, domain)
    return Evaluator(domain, _AtDepth(src, depth), bounded=False).holds(psi, {})


def derivation_goal_holds(
    equations: Sequence[FixpointEquation], goal: Formula, domain: FiniteDomain, depth: int
) -> bool:
    """Goal truth with relations decided by derivation search over ``equations``.

    A system made only of greatest fixed points is handled through its dual.
    Quantified integers range over ``domain``; arithmetic is exact.
    """
    if equations and all(eq.fix == NU for eq in equations):
        dual = [dual_equation(eq) for eq in equations]
        return not derivation_goal_holds(dual, negate(goal), domain, depth)
    if any(pol is not POS for _, pol in occurrences(goal)):
        raise OracleError("derivation check needs positive occurrences only")
    src = DerivationSource.for_equations(equations, domain)
    return Evaluator(domain, _AtDepth(src, depth), bounded=False).holds(goal, {})


__all__ = [
    "DerivationSource",
    "bounded_derivation",
    "derivation_goal_holds",
    "derivation_holds",
    "oracle_run",
    "oracle_verify",
]
