"""Negation normal form, complement relations, duals and DNF."""

from __future__ import annotations

from ..core import (
    BOOL,
    MU,
    NU,
    And,
    BoolConst,
    Cmp,
    Exists,
    FixpointEquation,
    Forall,
    Formula,
    Iff,
    Implies,
    NameSupply,
    Not,
    Or,
    RelApp,
    Var,
    conj,
    disj,
    substitute,
)
from ..core.formula import NEGATED_CMP, all_var_names, children, rebuild


class TransformError(ValueError):
    pass


def _nnf(f: Formula, neg: bool, complement: bool) -> Formula:
    match f:
        case RelApp():
            if not neg:
                return f
            if complement:
                return RelApp(f.rel, f.term, f.args, not f.co)
            return Not(f)
        case Not(a):
            return _nnf(a, not neg, complement)
        case And(args):
            parts = [_nnf(a, neg, complement) for a in args]
            return disj(*parts) if neg else conj(*parts)
        case Or(args):
            parts = [_nnf(a, neg, complement) for a in args]
            return conj(*parts) if neg else disj(*parts)
        case Implies(l, r):
            if neg:
                return conj(_nnf(l, False, complement), _nnf(r, True, complement))
            return disj(_nnf(l, True, complement), _nnf(r, False, complement))
        case Iff(l, r):
            pl, nl = _nnf(l, False, complement), _nnf(l, True, complement)
            pr, nr = _nnf(r, False, complement), _nnf(r, True, complement)
            if neg:
                return conj(disj(pl, pr), disj(nl, nr))
            return conj(disj(nl, pr), disj(pl, nr))
        case Forall(v, b):
            body = _nnf(b, neg, complement)
            return Exists(v, body) if neg else Forall(v, body)
        case Exists(v, b):
            body = _nnf(b, neg, complement)
            return Forall(v, body) if neg else Exists(v, body)
        case Cmp(op, l, r):
            return Cmp(NEGATED_CMP[op], l, r) if neg else f
        case BoolConst(v):
            return BoolConst(v != neg)
        case Var(_, sort) if sort == BOOL:
            return Not(f) if neg else f
    raise TransformError(f"not a boolean formula: {f!r}")


def norm(f: Formula) -> Formula:
    """Negation normal form in which negated relation applications become
    applications of the complement relation."""
    return _nnf(f, False, True)


def nnf(f: Formula) -> Formula:
    """Negation normal form that keeps negated relation applications as ``Not``."""
    return _nnf(f, False, False)


def negate(f: Formula) -> Formula:
    return _nnf(f, True, True)


def dual_equation(eq: FixpointEquation) -> FixpointEquation:
    h = eq.head
    head = RelApp(h.rel, h.term, h.args, not h.co)
    return FixpointEquation(head, NU if eq.fix == MU else MU, negate(eq.body))


def erase_existentials(f: Formula, names: NameSupply) -> Formula:
    """Drop existential binders of an NNF formula, renaming each bound
    variable to a fresh name first."""
    match f:
        case Exists(v, b):
            fresh = Var(names.fresh(v.name), v.sort)
            return erase_existentials(substitute(b, {v.name: fresh}, names=names), names)
        case Forall():
            raise TransformError("universal quantifier present")
        case _:
            kids = children(f)
            if not kids or isinstance(f, (RelApp, Cmp)):
                return f
            return rebuild(f, (erase_existentials(k, names) for k in kids))


MAX_CUBES = 4096


def _dnf(f: Formula) -> list[list[Formula]]:
    match f:
        case Or(args):
            return [cube for a in args for cube in _dnf(a)]
        case And(args):
            cubes: list[list[Formula]] = [[]]
            for a in args:
                sub = _dnf(a)
                cubes = [c + s for c in cubes for s in sub]
                if len(cubes) > MAX_CUBES:
                    raise TransformError(f"disjunctive normal form exceeds {MAX_CUBES} cubes")
            return cubes
        case BoolConst(True):
            return [[]]
        case BoolConst(False):
            return []
    return [[f]]


def dnf_cubes(f: Formula, names: NameSupply | None = None) -> list[Formula]:
    """Disjuncts of the DNF of ``f`` after erasing existential quantifiers.

    ``f`` must be free of universal quantifiers and negative relation
    occurrences. Cubes with syntactically complementary literals are dropped.
    """
    from ..analysis import NEG, BOTH, has_universal, occurrences

    if has_universal(f):
        raise TransformError("universal quantifier present")
    if any(p in (NEG, BOTH) for _, p in occurrences(f)):
        raise TransformError("negative relation occurrence present")
    names = names or NameSupply(all_var_names(f))
    g = erase_existentials(nnf(f), names)
    out: list[Formula] = []
    for cube in _dnf(g):
        lits = list(dict.fromkeys(cube))
        seen = set(lits)
        if any(negate(lit) in seen for lit in lits if not isinstance(lit, RelApp)):
            continue
        out.append(conj(*lits))
    return out


def relation_free(f: Formula) -> bool:
    return not any(isinstance(g, RelApp) for g in _walk(f))


def _walk(f: Formula):
    yield f
    for c in children(f):
        yield from _walk(c)


__all__ = [
    "TransformError",
    "dnf_cubes",
    "dual_equation",
    "erase_existentials",
    "negate",
    "nnf",
    "norm",
    "relation_free",
]
