"""Textual emitters: SMT-LIB2 (LIA and HORN) and the canonical μCLP format."""

from __future__ import annotations

import re
from string import Template

from ..core import (
    BOOL,
    INT,
    And,
    BoolConst,
    Cmp,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    IntConst,
    IntOp,
    Not,
    Or,
    RelApp,
    Sort,
    TermConst,
    Var,
    free_vars,
)
from ..core.formula import strip_prefix
from ..core.terms import Grammar, Term
from .encoders import CHC, COCHC, MUCLP, SMT, EncodedQuery, EncodingError, query_cubes

# ---------------------------------------------------------------------------
# SMT-LIB2

_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")
_RESERVED = {"true", "false", "and", "or", "not", "=>", "forall", "exists", "let", "ite", "distinct", "_", "!", "as"}


def quote(name: str) -> str:
    if _SIMPLE.match(name) and name not in _RESERVED:
        return name
    if "|" in name or "\\" in name:
        raise EncodingError(f"symbol {name!r} cannot be written in SMT-LIB2")
    return f"|{name}|"


def datatype_name(nonterminal: str) -> str:
    return quote(f"Tree.{nonterminal}")


def constructor_name(symbol: str) -> str:
    return quote(f"mk.{symbol}")


def smt_sort(s: Sort) -> str:
    return datatype_name(s.nonterminal) if s.is_term else s.kind  # type: ignore[arg-type]


def _smt_term(t: Term) -> str:
    if not t.children:
        return constructor_name(t.symbol)
    return f"({constructor_name(t.symbol)} {' '.join(_smt_term(c) for c in t.children)})"


def smt(f: Formula) -> str:
    match f:
        case IntConst(v):
            return str(v) if v >= 0 else f"(- {-v})"
        case BoolConst(v):
            return "true" if v else "false"
        case Var(name, _):
            return quote(name)
        case TermConst(t, _):
            return _smt_term(t)
        case IntOp(op, args):
            return f"({op} {' '.join(map(smt, args))})"
        case Cmp("!=", l, r):
            return f"(distinct {smt(l)} {smt(r)})"
        case Cmp(op, l, r):
            return f"({op} {smt(l)} {smt(r)})"
        case Not(a):
            return f"(not {smt(a)})"
        case And(args):
            return f"(and {' '.join(map(smt, args))})"
        case Or(args):
            return f"(or {' '.join(map(smt, args))})"
        case Implies(l, r):
            return f"(=> {smt(l)} {smt(r)})"
        case Iff(l, r):
            return f"(= {smt(l)} {smt(r)})"
        case Forall() | Exists():
            word = "forall" if isinstance(f, Forall) else "exists"
            vs, body = strip_prefix(f, type(f))
            binders = " ".join(f"({quote(v.name)} {smt_sort(v.sort)})" for v in vs)
            return f"({word} ({binders}) {smt(body)})"
        case RelApp(_, t, args, co):
            if co:
                raise EncodingError("complement relations have no SMT-LIB2 form")
            parts = [quote(f.rel)] + ([smt(t)] if t is not None else []) + [smt(a) for a in args]
            return f"({' '.join(parts)})"
    raise TypeError(f"not a formula: {f!r}")


def _declare_consts(f: Formula) -> list[str]:
    return [
        f"(declare-const {quote(v.name)} {smt_sort(v.sort)})" for v in sorted(free_vars(f), key=lambda v: v.name)
    ]


def emit_smtlib(query: EncodedQuery) -> str:
    if query.kind != SMT:
        raise EncodingError(f"emit_smtlib needs an SMT query, got {query.kind}")
    lines = [
        "; unsat means the candidate is valid, sat means it is invalid",
        "(set-logic LIA)",
        *_declare_consts(query.goal),
        f"(assert (not {smt(query.goal)}))",
        "(check-sat)",
    ]
    return "\n".join(lines) + "\n"


def _used_nonterminals(query: EncodedQuery) -> list[str]:
    nts: dict[str, None] = {}

    def walk(f: Formula) -> None:
        if isinstance(f, TermConst):
            nts.setdefault(f.nonterminal, None)
        elif isinstance(f, Var) and f.sort.is_term:
            nts.setdefault(f.sort.nonterminal, None)  # type: ignore[arg-type]
        from ..core.formula import children

        for c in children(f):
            walk(c)

    for c in query.rules:
        if c.head is not None:
            walk(c.head)
        walk(c.body)
    walk(query.goal)
    return list(nts)


def declare_datatypes(grammar: Grammar, nonterminals: list[str]) -> list[str]:
    """All datatypes reachable from ``nonterminals``, declared in one block."""
    todo, seen = list(nonterminals), []
    while todo:
        nt = todo.pop(0)
        if nt in seen:
            continue
        seen.append(nt)
        for p in grammar.productions_of(nt):
            todo.extend(p.children)
    if not seen:
        return []
    seen = [n for n in grammar.nonterminals if n in seen]
    heads = " ".join(f"({datatype_name(n)} 0)" for n in seen)
    bodies = []
    for n in seen:
        ctors = []
        for p in grammar.productions_of(n):
            if not p.children:
                ctors.append(f"({constructor_name(p.symbol.name)})")
            else:
                fields = " ".join(
                    f"({quote(f'{p.symbol.name}.{i}')} {datatype_name(c)})" for i, c in enumerate(p.children)
                )
                ctors.append(f"({constructor_name(p.symbol.name)} {fields})")
        bodies.append(f"({' '.join(ctors)})")
    return [f"(declare-datatypes ({heads}) ({' '.join(bodies)}))"]


def _arg_sorts(app: RelApp) -> list[Sort]:
    from ..core import sort_of

    sorts = [sort_of(app.term)] if app.term is not None else []
    return sorts + [sort_of(a) for a in app.args]


def _clause(body: Formula, head: Formula) -> str:
    vs = sorted(free_vars(body) | free_vars(head), key=lambda v: v.name)
    imp = f"(=> {smt(body)} {smt(head)})"
    if not vs:
        return f"(assert {imp})"
    binders = " ".join(f"({quote(v.name)} {smt_sort(v.sort)})" for v in vs)
    return f"(assert (forall ({binders}) {imp}))"


def emit_horn(query: EncodedQuery, grammar: Grammar | None = None) -> str:
    if query.kind != CHC:
        raise EncodingError(f"emit_horn needs a CHC query, got {query.kind}")
    decls: dict[str, list[Sort]] = {}
    for c in query.rules:
        apps = ([c.head] if c.head is not None else []) + [a for a in _apps(c.body)]
        for a in apps:
            if a.co:
                raise EncodingError("clause is not in Horn shape")
            decls.setdefault(a.rel, _arg_sorts(a))
    cubes = query_cubes(query)
    for cube in cubes:
        for a in _apps(cube):
            decls.setdefault(a.rel, _arg_sorts(a))
    lines = ["; sat means the candidate is valid, unsat means it is invalid", "(set-logic HORN)"]
    nts = _used_nonterminals(query)
    if nts:
        if grammar is None:
            raise EncodingError("term-sorted arguments need the grammar to declare datatypes")
        lines += declare_datatypes(grammar, nts)
    for name, sorts in decls.items():
        lines.append(f"(declare-fun {quote(name)} ({' '.join(smt_sort(s) for s in sorts)}) Bool)")
    for c in query.rules:
        lines.append(_clause(c.body, c.head))
    for cube in cubes:
        lines.append(_clause(cube, BoolConst(False)))
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _apps(f: Formula):
    from ..core.formula import relapps_in_order

    return relapps_in_order(f)


# ---------------------------------------------------------------------------
# canonical μCLP text

MUCLP_HEADER = "; muclp-v1"
DEFAULT_TEMPLATE = "{{goal}}\ns.t.\n{{equations}}\n"
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_'!.]*$")
_KEYWORDS = {"forall", "exists", "not", "true", "false", "int", "bool", "mu", "nu"}


def _ident(name: str) -> str:
    if _IDENT.match(name) and name not in _KEYWORDS:
        return name
    raise EncodingError(f"name {name!r} cannot be written in the muclp format")


def rel_ident(app: RelApp) -> str:
    return ("~" if app.co else "") + _ident(app.rel)


def _sort_word(s: Sort) -> str:
    if s == INT:
        return "int"
    if s == BOOL:
        return "bool"
    raise EncodingError("MUCLP emission requires reification")


def muclp(f: Formula) -> str:
    match f:
        case IntConst(v):
            return str(v) if v >= 0 else f"(-{-v})"
        case BoolConst(v):
            return "true" if v else "false"
        case Var(name, _):
            return _ident(name)
        case IntOp("-", (a,)):
            return f"(-{muclp(a)})"
        case IntOp(op, args):
            return "(" + f" {op} ".join(map(muclp, args)) + ")"
        case Cmp(op, l, r):
            return f"({muclp(l)} {op} {muclp(r)})"
        case Not(a):
            return f"(not {muclp(a)})"
        case And(args):
            return "(" + " /\\ ".join(map(muclp, args)) + ")"
        case Or(args):
            return "(" + " \\/ ".join(map(muclp, args)) + ")"
        case Implies(l, r):
            return f"({muclp(l)} => {muclp(r)})"
        case Iff(l, r):
            return f"({muclp(l)} <=> {muclp(r)})"
        case Forall() | Exists():
            word = "forall" if isinstance(f, Forall) else "exists"
            vs, body = strip_prefix(f, type(f))
            binders = ", ".join(f"{_ident(v.name)}: {_sort_word(v.sort)}" for v in vs)
            return f"({word} ({binders}). {muclp(body)})"
        case RelApp(_, t, args, _):
            if t is not None:
                raise EncodingError("MUCLP emission requires reification")
            return f"{rel_ident(f)}({', '.join(map(muclp, args))})"
        case TermConst():
            raise EncodingError("MUCLP emission requires reification")
    raise TypeError(f"not a formula: {f!r}")


def emit_muclp(query: EncodedQuery, template: str | None = None) -> str:
    if query.kind not in (MUCLP, COCHC):
        raise EncodingError(f"emit_muclp needs a MUCLP or COCHC query, got {query.kind}")
    eqs = []
    for eq in query.rules:
        if eq.head.term is not None:
            raise EncodingError("MUCLP emission requires reification")
        params = ", ".join(f"{_ident(p.name)}: {_sort_word(p.sort)}" for p in eq.params)
        eqs.append(f"{rel_ident(eq.head)}({params}): bool ={eq.fix} {muclp(eq.body)};")
    header = [MUCLP_HEADER]
    if query.falsify:
        header.append("; falsification query: a valid goal means the candidate is invalid")
    body = _fill(template or DEFAULT_TEMPLATE, muclp(query.goal), "\n".join(eqs))
    return "\n".join(header) + "\n" + body


def _fill(template: str, goal: str, equations: str) -> str:
    # {{name}} placeholders on top of string.Template's substitution engine
    t = Template(re.sub(r"\{\{(\w+)\}\}", r"${\1}", template.replace("$", "$$")))
    return t.substitute(goal=goal, equations=equations)


def render(query: EncodedQuery, grammar: Grammar | None = None) -> str:
    if query.kind == SMT:
        return emit_smtlib(query)
    if query.kind == CHC:
        return emit_horn(query, grammar)
    return emit_muclp(query)


__all__ = [
    "DEFAULT_TEMPLATE",
    "MUCLP_HEADER",
    "declare_datatypes",
    "emit_horn",
    "emit_muclp",
    "emit_smtlib",
    "muclp",
    "quote",
    "render",
    "smt",
]
