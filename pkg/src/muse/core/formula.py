"""Multi-sorted first-order formulas over linear integer arithmetic and booleans,
extended with applications of semantic relations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Union

from .terms import BOOL, INT, Sort, Term, ValidationError, term_sort


class SortError(ValidationError):
    pass


@dataclass(frozen=True, slots=True)
class IntConst:
    value: int


@dataclass(frozen=True, slots=True)
class BoolConst:
    value: bool


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    sort: Sort


@dataclass(frozen=True, slots=True)
class TermConst:
    term: Term
    nonterminal: str


@dataclass(frozen=True, slots=True)
class IntOp:
    op: str  # "+" (n-ary), "-" (unary or binary), "*" (one side constant)
    args: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Cmp:
    op: str  # "<" "<=" "=" ">=" ">" "!="
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Not:
    arg: Formula


@dataclass(frozen=True, slots=True)
class And:
    args: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Or:
    args: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Implies:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Iff:
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Forall:
    var: Var
    body: Formula


@dataclass(frozen=True, slots=True)
class Exists:
    var: Var
    body: Formula


@dataclass(frozen=True, slots=True)
class RelApp:
    """``rel(term, *args)``; ``term`` is None for relations without a term
    argument (after reification). ``co`` marks the complement relation."""

    rel: str
    term: Union[Var, TermConst, None]
    args: tuple[Formula, ...]
    co: bool = False

    @property
    def key(self) -> tuple[str, Term | None, bool]:
        t = self.term.term if isinstance(self.term, TermConst) else None
        return (self.rel, t, self.co)

    @property
    def display_name(self) -> str:
        return ("~" + self.rel) if self.co else self.rel


Formula = Union[
    IntConst, BoolConst, Var, TermConst, IntOp, Cmp, Not, And, Or, Implies, Iff, Forall, Exists, RelApp
]
Quantifier = (Forall, Exists)

TRUE = BoolConst(True)
FALSE = BoolConst(False)

NEGATED_CMP = {"<": ">=", "<=": ">", "=": "!=", ">=": "<", ">": "<=", "!=": "="}


# ---------------------------------------------------------------------------
# sorts


def sort_of(f: Formula) -> Sort:
    if isinstance(f, (IntConst, IntOp)):
        return INT
    if isinstance(f, Var):
        return f.sort
    if isinstance(f, TermConst):
        return term_sort(f.nonterminal)
    return BOOL


def check_sorts(f: Formula) -> None:
    """Raise :class:`SortError` unless ``f`` is sort-correct."""

    def want(g: Formula, s: Sort) -> None:
        check_sorts(g)
        if sort_of(g) != s:
            raise SortError(f"expected {s} but {to_sexpr(g)} has sort {sort_of(g)}")

    match f:
        case IntOp(op, args):
            for a in args:
                want(a, INT)
            if op == "*" and not (len(args) == 2 and any(isinstance(a, IntConst) for a in args)):
                raise SortError("multiplication must have a constant factor")
        case Cmp(_, l, r):
            want(l, INT)
            want(r, INT)
        case Not(a):
            want(a, BOOL)
        case And(args) | Or(args):
            for a in args:
                want(a, BOOL)
        case Implies(l, r) | Iff(l, r):
            want(l, BOOL)
            want(r, BOOL)
        case Forall(_, b) | Exists(_, b):
            want(b, BOOL)
        case RelApp(_, _, args, _):
            for a in args:
                check_sorts(a)
                if sort_of(a).is_term:
                    raise SortError("relation arguments must be Int or Bool")
        case _:
            pass


# ---------------------------------------------------------------------------
# smart constructors


def conj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.args)
        elif p == TRUE:
            continue
        elif p == FALSE:
            return FALSE
        else:
            flat.append(p)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.args)
        elif p == FALSE:
            continue
        elif p == TRUE:
            return TRUE
        else:
            flat.append(p)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def forall(vars_: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(vars_)):
        body = Forall(v, body)
    return body


def exists(vars_: Iterable[Var], body: Formula) -> Formula:
    for v in reversed(list(vars_)):
        body = Exists(v, body)
    return body


def int_var(name: str) -> Var:
    return Var(name, INT)


def bool_var(name: str) -> Var:
    return Var(name, BOOL)


def strip_prefix(f: Formula, kind: type) -> tuple[list[Var], Formula]:
    """Peel a block of same-kind quantifiers off the top of ``f``."""
    vs: list[Var] = []
    while isinstance(f, kind):
        vs.append(f.var)
        f = f.body
    return vs, f


# ---------------------------------------------------------------------------
# traversal


def children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case IntOp(_, args) | And(args) | Or(args):
            return args
        case Cmp(_, l, r) | Implies(l, r) | Iff(l, r):
            return (l, r)
        case Not(a):
            return (a,)
        case Forall(_, b) | Exists(_, b):
            return (b,)
        case RelApp(_, t, args, _):
            return ((t,) if t is not None else ()) + args
    return ()


def rebuild(f: Formula, kids: Iterable[Formula]) -> Formula:
    kids = tuple(kids)
    match f:
        case IntOp(op, _):
            return IntOp(op, kids)
        case And():
            return And(kids)
        case Or():
            return Or(kids)
        case Cmp(op, _, _):
            return Cmp(op, kids[0], kids[1])
        case Implies():
            return Implies(kids[0], kids[1])
        case Iff():
            return Iff(kids[0], kids[1])
        case Not():
            return Not(kids[0])
        case Forall(v, _):
            return Forall(v, kids[0])
        case Exists(v, _):
            return Exists(v, kids[0])
        case RelApp(rel, t, _, co):
            if t is None:
                return RelApp(rel, None, kids, co)
            return RelApp(rel, kids[0], kids[1:], co)  # type: ignore[arg-type]
    return f


def free_vars(f: Formula) -> frozenset[Var]:
    match f:
        case Var():
            return frozenset((f,))
        case Forall(v, b) | Exists(v, b):
            return free_vars(b) - {v}
        case _:
            out: set[Var] = set()
            for c in children(f):
                out |= free_vars(c)
            return frozenset(out)


def free_var_names(f: Formula) -> frozenset[str]:
    return frozenset(v.name for v in free_vars(f))


def all_var_names(f: Formula) -> set[str]:
    names: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            names.add(g.name)
        elif isinstance(g, Quantifier):
            names.add(g.var.name)
        stack.extend(children(g))
    return names


def relapps(f: Formula) -> Iterator[RelApp]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, RelApp):
            yield g
        stack.extend(reversed(children(g)))


def relapps_in_order(f: Formula) -> list[RelApp]:
    """Relation applications in left-to-right order."""
    out: list[RelApp] = []

    def walk(g: Formula) -> None:
        if isinstance(g, RelApp):
            out.append(g)
        for c in children(g):
            walk(c)

    walk(f)
    return out


def map_relapps(f: Formula, fn: Callable[[RelApp], Formula]) -> Formula:
    """Replace every relation application bottom-up. ``fn`` must return a
    formula whose free variables are among the application's."""
    if isinstance(f, RelApp):
        return fn(f)
    kids = children(f)
    if not kids:
        return f
    new = tuple(map_relapps(k, fn) for k in kids)
    if all(a is b for a, b in zip(new, kids)):
        return f
    return rebuild(f, new)


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in children(f))


# ---------------------------------------------------------------------------
# fresh names and substitution


def base_name(name: str) -> str:
    return name.split("!", 1)[0]


class NameSupply:
    """Deterministic supply of fresh variable names of the form ``base!n``."""

    def __init__(self, avoid: Iterable[str] = ()) -> None:
        self._counter = itertools.count(1)
        self._avoid = set(avoid)

    def avoid(self, names: Iterable[str]) -> None:
        self._avoid.update(names)

    def fresh(self, base: str) -> str:
        stem = base_name(base)
        while True:
            name = f"{stem}!{next(self._counter)}"
            if name not in self._avoid:
                self._avoid.add(name)
                return name


def _local_fresh(base: str, avoid: set[str]) -> str:
    stem = base_name(base)
    for k in itertools.count(1):
        name = f"{stem}!{k}"
        if name not in avoid:
            return name
    raise AssertionError  # pragma: no cover


def substitute(
    f: Formula,
    var: Var | str | Mapping[str, Formula],
    replacement: Formula | None = None,
    names: NameSupply | None = None,
) -> Formula:
    """Capture-avoiding simultaneous substitution.

    Either ``substitute(f, x, t)`` or ``substitute(f, {"x": t, ...})``.
    """
    if isinstance(var, Mapping):
        mapping = dict(var)
    else:
        key = var.name if isinstance(var, Var) else var
        if isinstance(var, Var) and replacement is not None and sort_of(replacement) != var.sort:
            raise SortError(f"cannot substitute {to_sexpr(replacement)} for {var.name}: sort mismatch")
        mapping = {key: replacement}  # type: ignore[dict-item]
    if not mapping:
        return f
    return _subst(f, mapping, names)


def _subst(f: Formula, mapping: dict[str, Formula], names: NameSupply | None) -> Formula:
    match f:
        case Var(name, sort):
            if name in mapping:
                rep = mapping[name]
                if sort_of(rep) != sort:
                    raise SortError(f"cannot substitute {to_sexpr(rep)} for {name}: sort mismatch")
                return rep
            return f
        case IntConst() | BoolConst() | TermConst():
            return f
        case Forall(v, body) | Exists(v, body):
            inner = {k: r for k, r in mapping.items() if k != v.name}
            fv_body = free_var_names(body)
            inner = {k: r for k, r in inner.items() if k in fv_body}
            if not inner:
                return f
            captured = set().union(*(free_var_names(r) for r in inner.values()))
            if v.name in captured:
                if names is not None:
                    new_name = names.fresh(v.name)
                else:
                    avoid = captured | all_var_names(body) | set(inner)
                    new_name = _local_fresh(v.name, avoid)
                nv = Var(new_name, v.sort)
                inner = {**inner, v.name: nv}
                v = nv
            return type(f)(v, _subst(body, inner, names))
        case _:
            return rebuild(f, (_subst(c, mapping, names) for c in children(f)))


def freshen_binders(f: Formula, names: NameSupply) -> Formula:
    """Rename every bound variable to a fresh name from ``names``."""
    match f:
        case Forall(v, body) | Exists(v, body):
            nv = Var(names.fresh(v.name), v.sort)
            body = _subst(body, {v.name: nv}, names)
            return type(f)(nv, freshen_binders(body, names))
        case _:
            kids = children(f)
            if not kids:
                return f
            return rebuild(f, (freshen_binders(c, names) for c in kids))


def alpha_equivalent(f: Formula, g: Formula) -> bool:
    def eq(a: Formula, b: Formula, env_a: dict[str, int], env_b: dict[str, int], depth: int) -> bool:
        if type(a) is not type(b):
            return False
        match a:
            case Var(name, sort):
                assert isinstance(b, Var)
                if sort != b.sort:
                    return False
                ia, ib = env_a.get(name), env_b.get(b.name)
                if ia is None and ib is None:
                    return name == b.name
                return ia == ib
            case Forall(v, body) | Exists(v, body):
                assert isinstance(b, (Forall, Exists))
                if v.sort != b.var.sort:
                    return False
                return eq(body, b.body, {**env_a, v.name: depth}, {**env_b, b.var.name: depth}, depth + 1)
            case IntConst() | BoolConst() | TermConst():
                return a == b
            case IntOp(op, _) | Cmp(op, _, _):
                if op != b.op:  # type: ignore[union-attr]
                    return False
            case RelApp(rel, t, args, co):
                assert isinstance(b, RelApp)
                if rel != b.rel or co != b.co or (t is None) != (b.term is None) or len(args) != len(b.args):
                    return False
        ka, kb = children(a), children(b)
        return len(ka) == len(kb) and all(eq(x, y, env_a, env_b, depth) for x, y in zip(ka, kb))

    return eq(f, g, {}, {}, 0)


# ---------------------------------------------------------------------------
# equivalence-preserving simplification


def simplify(f: Formula) -> Formula:
    """Constant folding and flattening. Never changes meaning."""
    match f:
        case IntOp(op, args):
            args = tuple(simplify(a) for a in args)
            if all(isinstance(a, IntConst) for a in args):
                vals = [a.value for a in args]  # type: ignore[union-attr]
                if op == "+":
                    return IntConst(sum(vals))
                if op == "-":
                    return IntConst(-vals[0] if len(vals) == 1 else vals[0] - vals[1])
                return IntConst(vals[0] * vals[1])
            return IntOp(op, args)
        case Cmp(op, l, r):
            l, r = simplify(l), simplify(r)
            if isinstance(l, IntConst) and isinstance(r, IntConst):
                return BoolConst(eval_cmp(op, l.value, r.value))
            if l == r:
                return BoolConst(op in ("=", "<=", ">="))
            return Cmp(op, l, r)
        case Not(a):
            a = simplify(a)
            if isinstance(a, BoolConst):
                return BoolConst(not a.value)
            if isinstance(a, Not):
                return a.arg
            return Not(a)
        case And(args):
            return conj(*(simplify(a) for a in args))
        case Or(args):
            return disj(*(simplify(a) for a in args))
        case Implies(l, r):
            l, r = simplify(l), simplify(r)
            if l == TRUE:
                return r
            if l == FALSE or r == TRUE:
                return TRUE
            if r == FALSE:
                return simplify(Not(l))
            return Implies(l, r)
        case Iff(l, r):
            l, r = simplify(l), simplify(r)
            if l == r:
                return TRUE
            for a, b in ((l, r), (r, l)):
                if a == TRUE:
                    return b
                if a == FALSE:
                    return simplify(Not(b))
            return Iff(l, r)
        case Forall(v, body) | Exists(v, body):
            body = simplify(body)
            if isinstance(body, BoolConst):
                return body
            return type(f)(v, body)
        case RelApp():
            return rebuild(f, (simplify(c) for c in children(f)))
    return f


def eval_cmp(op: str, a: int, b: int) -> bool:
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == "=":
        return a == b
    if op == ">=":
        return a >= b
    if op == ">":
        return a > b
    if op == "!=":
        return a != b
    raise ValueError(op)


# ---------------------------------------------------------------------------
# printing (s-expression form, parseable by the frontend)

_CMP_TEXT = {"!=": "distinct"}


def to_sexpr(f: Formula) -> str:
    match f:
        case IntConst(v):
            return str(v)
        case BoolConst(v):
            return "true" if v else "false"
        case Var(name, _):
            return name
        case TermConst(t, _):
            return str(t)
        case IntOp(op, args):
            return f"({op} {' '.join(map(to_sexpr, args))})"
        case Cmp(op, l, r):
            return f"({_CMP_TEXT.get(op, op)} {to_sexpr(l)} {to_sexpr(r)})"
        case Not(a):
            return f"(not {to_sexpr(a)})"
        case And(args):
            return f"(and {' '.join(map(to_sexpr, args))})" if args else "true"
        case Or(args):
            return f"(or {' '.join(map(to_sexpr, args))})" if args else "false"
        case Implies(l, r):
            return f"(=> {to_sexpr(l)} {to_sexpr(r)})"
        case Iff(l, r):
            return f"(iff {to_sexpr(l)} {to_sexpr(r)})"
        case Forall() | Exists():
            word = "forall" if isinstance(f, Forall) else "exists"
            vs, body = strip_prefix(f, type(f))
            binders = " ".join(f"({v.name} {sort_text(v.sort)})" for v in vs)
            return f"({word} ({binders}) {to_sexpr(body)})"
        case RelApp(_, t, args, _):
            parts = [f.display_name]
            if t is not None:
                parts.append(to_sexpr(t))
            parts.extend(map(to_sexpr, args))
            return f"({' '.join(parts)})"
    raise TypeError(f"not a formula: {f!r}")


def sort_text(s: Sort) -> str:
    return f"(Term {s.nonterminal})" if s.is_term else s.kind


def _short_repr(self: Formula) -> str:
    return f"F<{to_sexpr(self)}>"


for _cls in (IntConst, BoolConst, Var, TermConst, IntOp, Cmp, Not, And, Or, Implies, Iff, Forall, Exists, RelApp):
    _cls.__repr__ = _short_repr  # type: ignore[method-assign]
