"""Best-effort quantifier elimination by the one-point rule."""

from __future__ import annotations

from ..core import (
    BOOL,
    FALSE,
    TRUE,
    And,
    Cmp,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Var,
    conj,
    disj,
    simplify,
    substitute,
)
from ..core.formula import children, free_vars, rebuild, strip_prefix


def _definition(lit: Formula, v: Var, positive: bool) -> Formula | None:
    """If ``lit`` pins ``v`` to a value (as a conjunct when ``positive``, as a
    disjunct otherwise), return that value."""
    target = "=" if positive else "!="
    match lit:
        case Cmp(op, l, r) if op == target:
            if l == v and v not in free_vars(r):
                return r
            if r == v and v not in free_vars(l):
                return l
        case Not(Cmp("=", l, r)) if not positive:
            return _definition(Cmp("!=", l, r), v, positive)
        case Not(Cmp("!=", l, r)) if positive:
            return _definition(Cmp("=", l, r), v, positive)
    if v.sort == BOOL:
        if lit == v:
            return TRUE if positive else FALSE
        if lit == Not(v):
            return FALSE if positive else TRUE
        if positive and isinstance(lit, Iff):
            for a, b in ((lit.left, lit.right), (lit.right, lit.left)):
                if a == v and v not in free_vars(b):
                    return b
    return None


def _parts(f: Formula, kind: type) -> list[Formula]:
    return list(f.args) if isinstance(f, kind) else [f]


def _one_point(vs: list[Var], body: Formula, existential: bool) -> tuple[list[Var], Formula]:
    changed = True
    while changed:
        changed = False
        for v in list(vs):
            if existential:
                parts = _parts(body, And)
            elif isinstance(body, Implies):
                parts = [Not(p) for p in _parts(body.left, And)] + [body.right]
            else:
                parts = _parts(body, Or)
            for i, lit in enumerate(parts):
                value = _definition(lit, v, existential)
                if value is None:
                    continue
                rest = parts[:i] + parts[i + 1 :]
                body = simplify((conj if existential else disj)(*rest))
                body = simplify(substitute(body, {v.name: value}))
                vs.remove(v)
                changed = True
                break
    used = free_vars(body)
    return [v for v in vs if v in used], body


def _quantify(vs: list[Var], body: Formula, existential: bool) -> Formula:
    if not vs:
        return body
    kind = Exists if existential else Forall
    # distribute over the matching connective, then retry on each piece
    spread = Or if existential else And
    if isinstance(body, spread):
        join = disj if existential else conj
        return join(*(_quantify(list(vs), p, existential) for p in body.args))
    vs, body = _one_point(list(vs), body, existential)
    if not vs:
        return body
    if isinstance(body, spread):
        return _quantify(vs, body, existential)
    out = body
    for v in reversed(vs):
        out = kind(v, out)
    return out


def eliminate_quantifiers(f: Formula) -> Formula:
    """Apply the one-point rule wherever a bound variable has a defining
    equality; drop unused binders. Residual quantifiers are left in place."""
    match f:
        case Exists() | Forall():
            kind = type(f)
            vs, body = strip_prefix(f, kind)
            body = eliminate_quantifiers(body)
            inner, body = strip_prefix(body, kind)
            shadowed = {v.name for v in inner}
            vs = [v for v in vs if v.name not in shadowed] + inner
            return _quantify(vs, body, kind is Exists)
        case _:
            kids = children(f)
            if not kids:
                return f
            return simplify(rebuild(f, (eliminate_quantifiers(k) for k in kids)))


__all__ = ["eliminate_quantifiers"]
