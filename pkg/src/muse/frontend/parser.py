"""Problem and solution files: parsing, validation and printing."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from ..core import (
    BOOL,
    INT,
    SELF,
    TRUE,
    And,
    BoolConst,
    Cmp,
    Exists,
    Forall,
    Formula,
    Grammar,
    Iff,
    Implies,
    IntConst,
    IntOp,
    Not,
    Or,
    Problem,
    Production,
    RankedSymbol,
    RelApp,
    SemanticRelation,
    SemanticRule,
    Semantics,
    Solution,
    Sort,
    Term,
    TermConst,
    ValidationError,
    Var,
    check_term,
    conj,
    sort_of,
    term_sort,
    to_sexpr,
)
from ..core.formula import sort_text
from .sexpr import Atom, Diagnostic, FrontendError, SExpr, SList, SourceSpan, read_all, show


class _Error(Exception):
    def __init__(self, message: str, span: SourceSpan | None) -> None:
        super().__init__(message)
        self.message = message
        self.span = span


@dataclass(frozen=True)
class RelSig:
    """What the formula parser needs to know about a relation symbol."""

    nonterminal: str | None
    sorts: tuple[Sort, ...]


@dataclass
class FormulaContext:
    scope: dict[str, Var]
    relations: Mapping[str, RelSig]
    term_arg: Callable[[SExpr, str, str], Formula] | None = None
    unbound: Callable[[str], str] = lambda name: f"unbound variable {name!r}"
    synth_funs: Mapping[str, str] | None = None


_CMP = {"<": "<", "<=": "<=", "=": "=", ">=": ">=", ">": ">", "distinct": "!=", "!=": "!="}


def _sort_of_atom(sx: SExpr) -> Sort:
    if isinstance(sx, Atom) and sx.text in ("Int", "Bool"):
        return INT if sx.text == "Int" else BOOL
    raise _Error(f"expected a sort (Int or Bool), got {show(sx)}", sx.span)


def _name(sx: SExpr, what: str) -> str:
    if not isinstance(sx, Atom) or sx.is_int():
        raise _Error(f"expected {what}, got {show(sx)}", sx.span)
    text = sx.text
    # "!" is reserved for generated names
    if "#" in text or "!" in text or text.startswith("~") or text.startswith(":"):
        raise _Error(f"invalid {what} {text!r}", sx.span)
    return text


def parse_formula(sx: SExpr, ctx: FormulaContext) -> Formula:
    """Parse a Bool- or Int-valued formula in context ``ctx``."""
    if isinstance(sx, Atom):
        text = sx.text
        if sx.is_int():
            return IntConst(int(text))
        if text in ("true", "false"):
            return BoolConst(text == "true")
        if text in ctx.scope:
            return ctx.scope[text]
        if ctx.synth_funs and text in ctx.synth_funs:
            raise _Error(f"synth-fun {text!r} may only appear as the term argument of a relation", sx.span)
        raise _Error(ctx.unbound(text), sx.span)
    if not sx.items:
        raise _Error("empty expression", sx.span)
    op = sx.head()
    if op is None:
        raise _Error(f"expected an operator, got {show(sx.items[0])}", sx.items[0].span)
    args = sx.items[1:]

    def sub(a: SExpr, sort: Sort) -> Formula:
        f = parse_formula(a, ctx)
        got = sort_of(f)
        if got != sort:
            if isinstance(f, RelApp) and sort == INT:
                raise _Error("relation application used as term", a.span)
            raise _Error(f"expected {sort} but {show(a)} has sort {got}", a.span)
        return f

    def arity(lo: int, hi: int | None = None) -> None:
        hi = lo if hi is None else hi
        if len(args) < lo or (hi >= 0 and len(args) > hi):
            want = str(lo) if lo == hi else f"{lo}+"
            raise _Error(f"'{op}' expects {want} arguments, got {len(args)}", sx.span)

    if op in ("and", "or"):
        parts = tuple(sub(a, BOOL) for a in args)
        if not parts:
            return BoolConst(op == "and")
        if len(parts) == 1:
            return parts[0]
        return And(parts) if op == "and" else Or(parts)
    if op == "not":
        arity(1)
        return Not(sub(args[0], BOOL))
    if op == "=>":
        arity(2, -1)
        parts = [sub(a, BOOL) for a in args]
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Implies(p, out)
        return out
    if op == "iff":
        arity(2)
        return Iff(sub(args[0], BOOL), sub(args[1], BOOL))
    if op in ("forall", "exists"):
        arity(2)
        binders = args[0]
        if not isinstance(binders, SList) or not binders.items:
            raise _Error("expected a non-empty binder list", binders.span)
        vs: list[Var] = []
        for b in binders.items:
            if not isinstance(b, SList) or len(b.items) != 2:
                raise _Error("binder must look like (name Sort)", b.span)
            vs.append(Var(_name(b.items[0], "variable name"), _sort_of_atom(b.items[1])))
        inner = FormulaContext(
            {**ctx.scope, **{v.name: v for v in vs}}, ctx.relations, ctx.term_arg, ctx.unbound, ctx.synth_funs
        )
        body = parse_formula(args[1], inner)
        if sort_of(body) != BOOL:
            raise _Error("quantifier body must be Bool", args[1].span)
        kind = Forall if op == "forall" else Exists
        for v in reversed(vs):
            body = kind(v, body)
        return body
    if op in _CMP:
        arity(2)
        left = parse_formula(args[0], ctx)
        right = parse_formula(args[1], ctx)
        if op in ("=", "distinct", "!=") and sort_of(left) == BOOL and sort_of(right) == BOOL:
            eq = Iff(left, right)
            return eq if op == "=" else Not(eq)
        for a, f in ((args[0], left), (args[1], right)):
            if sort_of(f) != INT:
                if isinstance(f, RelApp):
                    raise _Error("relation application used as term", a.span)
                raise _Error(f"comparison operands must be Int, {show(a)} is {sort_of(f)}", a.span)
        return Cmp(_CMP[op], left, right)
    if op == "+":
        arity(2, -1)
        return IntOp("+", tuple(sub(a, INT) for a in args))
    if op == "-":
        arity(1, 2)
        return IntOp("-", tuple(sub(a, INT) for a in args))
    if op == "*":
        arity(2)
        parts = tuple(sub(a, INT) for a in args)
        if not any(isinstance(p, IntConst) for p in parts):
            raise _Error("multiplication needs a constant factor (linear arithmetic)", sx.span)
        return IntOp("*", parts)
    co = op.startswith("~")
    rel_name = op[1:] if co else op
    if rel_name in ctx.relations:
        sig = ctx.relations[rel_name]
        rest = list(args)
        term: Formula | None = None
        if sig.nonterminal is not None:
            if not rest:
                raise _Error(f"relation {rel_name} needs a term argument", sx.span)
            if ctx.term_arg is None:
                raise _Error(f"relation {rel_name} takes a term argument here", sx.span)
            term = ctx.term_arg(rest.pop(0), rel_name, sig.nonterminal)
        if len(rest) != len(sig.sorts):
            raise _Error(f"relation {rel_name} expects {len(sig.sorts)} arguments, got {len(rest)}", sx.span)
        vals = tuple(sub(a, s) for a, s in zip(rest, sig.sorts))
        return RelApp(rel_name, term, vals, co)  # type: ignore[arg-type]
    raise _Error(f"unknown operator or relation {op!r}", sx.items[0].span)


def parse_term(sx: SExpr, grammar: Grammar) -> Term:
    if isinstance(sx, Atom):
        sym, kids = sx.text, ()
    else:
        if not sx.items or not isinstance(sx.items[0], Atom):
            raise _Error(f"malformed term {show(sx)}", sx.span)
        sym = sx.items[0].text
        kids = sx.items[1:]
    if not grammar.has_symbol(sym):
        raise _Error(f"unknown symbol {sym!r} in term", sx.span)
    prod = grammar.production_of(sym)
    if len(kids) != prod.symbol.rank:
        raise _Error(f"symbol {sym!r} has rank {prod.symbol.rank}, given {len(kids)} children", sx.span)
    return Term(sym, tuple(parse_term(k, grammar) for k in kids))


# ---------------------------------------------------------------------------
# problems


def parse_problem(
    text: str, file: str = "<input>", diagnostics: list[Diagnostic] | None = None
) -> Problem:
    """Parse and validate a problem file. Raises :class:`FrontendError`.

    Warnings are appended to ``diagnostics`` when a list is supplied.
    """
    diags: list[Diagnostic] = []
    try:
        forms = read_all(text, file)
    except FrontendError as exc:
        raise FrontendError(exc.diagnostics) from None

    def err(e: _Error) -> None:
        diags.append(Diagnostic("error", e.message, e.span))

    nonterminals: list[str] = []
    productions: list[Production] = []
    relations: list[SemanticRelation] = []
    order: tuple[str, ...] | None = None
    synth: list[tuple[str, str]] = []
    deferred_rules: list[SList] = []
    constraints: list[SList] = []
    first_span = SourceSpan(file, 1, 1)

    for form in forms:
        try:
            if not isinstance(form, SList) or form.head() is None:
                raise _Error(f"expected a declaration, got {show(form)}", form.span)
            head = form.head()
            items = form.items[1:]
            if head == "nonterminal":
                if len(items) != 1:
                    raise _Error("(nonterminal NAME)", form.span)
                nonterminals.append(_name(items[0], "nonterminal name"))
            elif head == "production":
                if len(items) != 2 or not isinstance(items[1], SList) or not items[1].items:
                    raise _Error("(production LHS (SYMBOL CHILD...))", form.span)
                lhs = _name(items[0], "nonterminal name")
                rhs = items[1]
                sym = rhs.items[0]
                if not isinstance(sym, Atom):
                    raise _Error("production symbol must be an atom", sym.span)
                kids = tuple(_name(k, "nonterminal name") for k in rhs.items[1:])
                productions.append(Production(lhs, RankedSymbol(sym.text, kids, lhs)))
            elif head == "relation":
                relations.append(_parse_relation(form))
            elif head == "order":
                if order is not None:
                    raise _Error("duplicate (order ...) declaration", form.span)
                order = tuple(_name(x, "relation name") for x in items)
            elif head == "synth-fun":
                if len(items) != 3 or not isinstance(items[1], Atom) or items[1].text != ":from":
                    raise _Error("(synth-fun NAME :from NONTERMINAL)", form.span)
                synth.append((_name(items[0], "function name"), _name(items[2], "nonterminal name")))
            elif head == "rule":
                deferred_rules.append(form)
            elif head == "constraint":
                if len(items) != 1:
                    raise _Error("(constraint FORMULA)", form.span)
                constraints.append(form)
            else:
                raise _Error(f"unknown declaration {head!r}", form.span)
        except _Error as e:
            err(e)

    grammar: Grammar | None = None
    try:
        grammar = Grammar(tuple(nonterminals), tuple(productions))
        for nt in grammar.unproductive():
            diags.append(Diagnostic("warning", f"nonterminal {nt} has no productions", first_span))
    except ValidationError as e:
        diags.append(Diagnostic("error", str(e), first_span))
    if grammar is None:
        raise FrontendError(diags)

    rel_by_name: dict[str, SemanticRelation] = {}
    for r in relations:
        if r.name in rel_by_name:
            diags.append(Diagnostic("error", f"relation {r.name} declared twice", first_span))
        if r.nonterminal not in nonterminals:
            diags.append(Diagnostic("error", f"relation {r.name} is for undeclared nonterminal {r.nonterminal}", first_span))
        rel_by_name[r.name] = r
    sigs = {r.name: RelSig(r.nonterminal, r.arg_sorts) for r in relations}

    if order is None:
        order = tuple(rel_by_name)
    elif sorted(order) != sorted(rel_by_name) or len(set(order)) != len(order):
        diags.append(Diagnostic("error", "(order ...) must list every relation exactly once", first_span))
        order = tuple(rel_by_name)

    rules: dict[tuple[str, str], SemanticRule] = {}
    for form in deferred_rules:
        try:
            rule = _parse_rule(form, grammar, rel_by_name, sigs)
            key = (rule.relation, rule.production.symbol.name)
            if key in rules:
                raise _Error(f"duplicate rule for relation {key[0]} on production {key[1]}", form.span)
            rules[key] = rule
        except _Error as e:
            err(e)

    for r in relations:
        for p in grammar.productions_of(r.nonterminal):
            if (r.name, p.symbol.name) not in rules:
                diags.append(
                    Diagnostic("error", f"no rule for relation {r.name} on production {p}", first_span)
                )

    synth_map: dict[str, str] = {}
    for f, nt in synth:
        if nt not in nonterminals:
            diags.append(Diagnostic("error", f"synth-fun {f} ranges over undeclared nonterminal {nt}", first_span))
        if f in synth_map:
            diags.append(Diagnostic("error", f"synth-fun {f} declared twice", first_span))
        synth_map[f] = nt

    spec_parts: list[Formula] = []
    for form in constraints:
        try:
            spec_parts.append(_parse_spec(form.items[1], grammar, sigs, synth_map))
        except _Error as e:
            err(e)

    if any(d.severity == "error" for d in diags):
        raise FrontendError(diags)

    semantics = Semantics(tuple(relations), order, rules)
    from ..analysis import polarity_closure  # local import: analysis depends on core only

    for rel in polarity_closure(semantics):
        diags.append(
            Diagnostic(
                "error",
                f"relation {rel} occurs negatively in its own definition (directly or through other relations)",
                first_span,
            )
        )
    if any(d.severity == "error" for d in diags):
        raise FrontendError(diags)
    if diagnostics is not None:
        diagnostics.extend(diags)
    spec = conj(*spec_parts) if spec_parts else TRUE
    if len(spec_parts) == 1:
        spec = spec_parts[0]
    return Problem(grammar, semantics, tuple(synth), spec)


def _parse_relation(form: SList) -> SemanticRelation:
    items = form.items[1:]
    usage = "(relation NAME :for NONTERMINAL (PARAM SORT ...) [:out (NAME SORT)])"
    if len(items) not in (4, 6) or not isinstance(items[1], Atom) or items[1].text != ":for":
        raise _Error(usage, form.span)
    name = _name(items[0], "relation name")
    nt = _name(items[2], "nonterminal name")
    params = _param_list(items[3])
    out: Var | None = None
    if len(items) == 6:
        if not isinstance(items[4], Atom) or items[4].text != ":out":
            raise _Error(usage, form.span)
        outs = _param_list(items[5])
        if len(outs) != 1:
            raise _Error(":out takes exactly one (NAME SORT) pair", items[5].span)
        out = outs[0]
    names = [v.name for v in params] + ([out.name] if out else [])
    if len(set(names)) != len(names):
        raise _Error(f"relation {name} repeats a parameter name", form.span)
    return SemanticRelation(name, nt, tuple(params), out)


def _param_list(sx: SExpr) -> list[Var]:
    if not isinstance(sx, SList):
        raise _Error("expected a parameter list", sx.span)
    items = list(sx.items)
    if items and all(isinstance(i, SList) for i in items):
        pairs = [tuple(i.items) for i in items]  # type: ignore[union-attr]
    else:
        if len(items) % 2:
            raise _Error("parameter list must alternate NAME SORT", sx.span)
        pairs = [(items[k], items[k + 1]) for k in range(0, len(items), 2)]
    out = []
    for pair in pairs:
        if len(pair) != 2:
            raise _Error("parameter must be NAME SORT", sx.span)
        out.append(Var(_name(pair[0], "parameter name"), _sort_of_atom(pair[1])))
    return out


def _parse_rule(
    form: SList, grammar: Grammar, rels: Mapping[str, SemanticRelation], sigs: Mapping[str, RelSig]
) -> SemanticRule:
    items = form.items[1:]
    if len(items) != 2 or not isinstance(items[0], SList) or len(items[0].items) < 2:
        raise _Error("(rule (RELATION (SYMBOL CHILD...) PARAM...) BODY)", form.span)
    head = items[0]
    rel_name = _name(head.items[0], "relation name")
    if rel_name not in rels:
        raise _Error(f"rule for undeclared relation {rel_name!r}", head.items[0].span)
    rel = rels[rel_name]
    pattern = head.items[1]
    if not isinstance(pattern, SList) or not pattern.items or not isinstance(pattern.items[0], Atom):
        raise _Error("rule head term must look like (SYMBOL CHILD...)", pattern.span)
    sym = pattern.items[0].text
    if not grammar.has_symbol(sym):
        raise _Error(f"unknown symbol {sym!r}", pattern.items[0].span)
    prod = grammar.production_of(sym)
    if prod.lhs != rel.nonterminal:
        raise _Error(f"{sym} is not a production of {rel.nonterminal}", pattern.items[0].span)
    child_names = [_name(c, "child variable") for c in pattern.items[1:]]
    if len(child_names) != prod.symbol.rank:
        raise _Error(f"symbol {sym} has rank {prod.symbol.rank}", pattern.span)
    param_names = [_name(p, "parameter name") for p in head.items[2:]]
    if len(param_names) != len(rel.all_params):
        raise _Error(f"relation {rel_name} has {len(rel.all_params)} parameters", head.span)
    all_names = child_names + param_names
    if len(set(all_names)) != len(all_names):
        raise _Error("rule head repeats a variable name", head.span)
    params = tuple(Var(n, v.sort) for n, v in zip(param_names, rel.all_params))
    children = {n: Var(n, term_sort(nt)) for n, nt in zip(child_names, prod.children)}
    pattern_text = show(pattern)
    self_var = Var(SELF, term_sort(prod.lhs))

    def term_arg(sx: SExpr, target: str, nt: str) -> Formula:
        if isinstance(sx, Atom) and sx.text in children:
            var = children[sx.text]
        elif show(sx) == pattern_text:
            var = self_var
        else:
            raise _Error(
                "relations in a rule body may only be applied to a child term variable "
                f"or to the rule's own term {pattern_text}",
                sx.span,
            )
        if var.sort.nonterminal != nt:
            raise _Error(f"relation {target} is for {nt}, but {show(sx)} derives {var.sort.nonterminal}", sx.span)
        return var

    def unbound(name: str) -> str:
        if name in children:
            return f"term variable {name!r} may only appear as a relation's term argument"
        return (
            f"unbound variable {name!r} in rule for {rel_name} on {sym}: "
            "a rule body may only mention the relation's parameters, bound variables and term variables"
        )

    ctx = FormulaContext({p.name: p for p in params}, sigs, term_arg, unbound)
    body = parse_formula(items[1], ctx)
    if sort_of(body) != BOOL:
        raise _Error("rule body must be Bool", items[1].span)
    return SemanticRule(rel_name, prod, tuple(child_names), params, body)


def _parse_spec(
    sx: SExpr, grammar: Grammar, sigs: Mapping[str, RelSig], synth: Mapping[str, str]
) -> Formula:
    def term_arg(t: SExpr, target: str, nt: str) -> Formula:
        if isinstance(t, Atom) and t.text in synth:
            got = synth[t.text]
            if got != nt:
                raise _Error(f"relation {target} is for {nt}, but {t.text} ranges over {got}", t.span)
            return Var(t.text, term_sort(got))
        term = parse_term(t, grammar)
        if not check_term(grammar, term, nt):
            raise _Error(f"term {term} is not in L({nt})", t.span)
        return TermConst(term, nt)

    ctx = FormulaContext({}, sigs, term_arg, synth_funs=synth)
    spec = parse_formula(sx, ctx)
    if sort_of(spec) != BOOL:
        raise _Error("constraint must be Bool", sx.span)
    return spec


# ---------------------------------------------------------------------------
# solutions


def parse_solution(text: str, problem: Problem, file: str = "<input>") -> Solution:
    diags: list[Diagnostic] = []
    forms = read_all(text, file)
    funs = dict(problem.synth_funs)
    bindings: dict[str, Term] = {}
    for form in forms:
        try:
            if not isinstance(form, SList) or form.head() != "define" or len(form.items) != 3:
                raise _Error("expected (define NAME TERM)", form.span)
            name = _name(form.items[1], "function name")
            if name not in funs:
                raise _Error(f"{name!r} is not a synth-fun of this problem", form.items[1].span)
            if name in bindings:
                raise _Error(f"{name!r} is defined twice", form.span)
            term = parse_term(form.items[2], problem.grammar)
            if not check_term(problem.grammar, term, funs[name]):
                raise _Error(f"{term} is not in L({funs[name]})", form.items[2].span)
            bindings[name] = term
        except _Error as e:
            diags.append(Diagnostic("error", e.message, e.span))
    for name, _ in problem.synth_funs:
        if name not in bindings and not any(d.severity == "error" for d in diags):
            diags.append(Diagnostic("error", f"missing binding for {name}", SourceSpan(file, 1, 1)))
    if diags:
        raise FrontendError(diags)
    return Solution(bindings)


# ---------------------------------------------------------------------------
# printing


def _pattern(rule: SemanticRule) -> str:
    return "(" + " ".join([rule.production.symbol.name, *rule.child_vars]) + ")"


def print_problem(problem: Problem) -> str:
    g, sem = problem.grammar, problem.semantics
    lines = [f"(nonterminal {nt})" for nt in g.nonterminals]
    for p in g.productions:
        lines.append(f"(production {p.lhs} ({' '.join([p.symbol.name, *p.children])}))")
    for r in sem.relations:
        params = " ".join(f"{v.name} {sort_text(v.sort)}" for v in r.params)
        out = f" :out ({r.out.name} {sort_text(r.out.sort)})" if r.out else ""
        lines.append(f"(relation {r.name} :for {r.nonterminal} ({params}){out})")
    lines.append(f"(order {' '.join(sem.order)})")
    for rule in sem.rules.values():
        pattern = _pattern(rule)
        body = to_sexpr(rule.body).replace(SELF, pattern)
        params = " ".join(v.name for v in rule.params)
        head = f"({rule.relation} {pattern}{' ' + params if params else ''})"
        lines.append(f"(rule {head}\n  {body})")
    for f, nt in problem.synth_funs:
        lines.append(f"(synth-fun {f} :from {nt})")
    if problem.spec != TRUE:
        lines.append(f"(constraint {to_sexpr(problem.spec)})")
    return "\n".join(lines) + "\n"


def print_solution(solution: Solution) -> str:
    return "".join(f"(define {name} {term})\n" for name, term in solution.bindings.items())
