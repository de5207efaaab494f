"""Reader for the canonical μCLP text produced by :func:`emit_muclp`."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..core import (
    BOOL,
    INT,
    FALSE,
    MU,
    NU,
    TRUE,
    Cmp,
    Exists,
    FixpointEquation,
    Forall,
    Formula,
    Iff,
    Implies,
    IntConst,
    IntOp,
    Not,
    RelApp,
    Var,
    conj,
    disj,
)


class MuclpSyntaxError(ValueError):
    pass


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<st>s\.t\.)
      | (?P<fix>=mu|=nu)\b
      | (?P<num>\d+)
      | (?P<ident>~?[A-Za-z_][A-Za-z0-9_'!.]*)
      | (?P<op><=>|=>|/\\|\\/|<=|>=|!=|[=<>+\-*(),:;.])
    )""",
    re.VERBOSE,
)


@dataclass
class MuclpSystem:
    goal: Formula
    equations: list[FixpointEquation]


def _tokens(text: str) -> list[str]:
    out: list[str] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise MuclpSyntaxError(f"unexpected character at offset {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        out.append(m.group(m.lastgroup))
    return out


class _Parser:
    def __init__(self, tokens: list[str]) -> None:
        self.toks = tokens
        self.i = 0

    def peek(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise MuclpSyntaxError("unexpected end of input")
        if expected is not None and tok != expected:
            raise MuclpSyntaxError(f"expected {expected!r}, found {tok!r}")
        self.i += 1
        return tok

    # formulas, loosest binding first
    def formula(self, scope: dict[str, Var]) -> Formula:
        if self.peek() in ("forall", "exists"):
            word = self.take()
            self.take("(")
            vs = self.binders(")")
            self.take(")")
            self.take(".")
            inner = {**scope, **{v.name: v for v in vs}}
            body = self.formula(inner)
            for v in reversed(vs):
                body = (Forall if word == "forall" else Exists)(v, body)
            return body
        left = self.implication(scope)
        while self.peek() == "<=>":
            self.take()
            left = Iff(left, self.implication(scope))
        return left

    def implication(self, scope) -> Formula:
        left = self.disjunction(scope)
        if self.peek() == "=>":
            self.take()
            return Implies(left, self.implication(scope))
        return left

    def disjunction(self, scope) -> Formula:
        parts = [self.conjunction(scope)]
        while self.peek() == "\\/":
            self.take()
            parts.append(self.conjunction(scope))
        return parts[0] if len(parts) == 1 else disj(*parts)

    def conjunction(self, scope) -> Formula:
        parts = [self.negation(scope)]
        while self.peek() == "/\\":
            self.take()
            parts.append(self.negation(scope))
        return parts[0] if len(parts) == 1 else conj(*parts)

    def negation(self, scope) -> Formula:
        if self.peek() == "not":
            self.take()
            return Not(self.negation(scope))
        return self.comparison(scope)

    def comparison(self, scope) -> Formula:
        left = self.additive(scope)
        if self.peek() in ("<", "<=", "=", ">=", ">", "!="):
            op = self.take()
            return Cmp(op, left, self.additive(scope))
        return left

    def additive(self, scope) -> Formula:
        left = self.multiplicative(scope)
        while self.peek() in ("+", "-"):
            op = self.take()
            left = IntOp(op, (left, self.multiplicative(scope)))
        return left

    def multiplicative(self, scope) -> Formula:
        left = self.unary(scope)
        while self.peek() == "*":
            self.take()
            left = IntOp("*", (left, self.unary(scope)))
        return left

    def unary(self, scope) -> Formula:
        if self.peek() == "-":
            self.take()
            arg = self.unary(scope)
            if isinstance(arg, IntConst):
                return IntConst(-arg.value)
            return IntOp("-", (arg,))
        return self.atom(scope)

    def atom(self, scope) -> Formula:
        tok = self.take()
        if tok == "(":
            f = self.formula(scope)
            self.take(")")
            return f
        if tok.isdigit():
            return IntConst(int(tok))
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        if self.peek() == "(":
            self.take()
            args: list[Formula] = []
            while self.peek() != ")":
                args.append(self.formula(scope))
                if self.peek() == ",":
                    self.take()
            self.take(")")
            co = tok.startswith("~")
            return RelApp(tok[1:] if co else tok, None, tuple(args), co)
        if tok in scope:
            return scope[tok]
        raise MuclpSyntaxError(f"unbound variable {tok!r}")

    def binders(self, stop: str) -> list[Var]:
        vs: list[Var] = []
        while self.peek() != stop:
            name = self.take()
            self.take(":")
            sort = {"int": INT, "bool": BOOL}.get(self.take())
            if sort is None:
                raise MuclpSyntaxError("sorts are int or bool")
            vs.append(Var(name, sort))
            if self.peek() == ",":
                self.take()
        return vs

    def system(self) -> MuclpSystem:
        goal = self.formula({})
        self.take("s.t.")
        eqs = []
        while self.peek() is not None:
            name = self.take()
            self.take("(")
            params = self.binders(")")
            self.take(")")
            self.take(":")
            self.take("bool")
            fix = self.take()
            if fix not in ("=mu", "=nu"):
                raise MuclpSyntaxError(f"expected =mu or =nu, found {fix!r}")
            body = self.formula({v.name: v for v in params})
            self.take(";")
            co = name.startswith("~")
            head = RelApp(name[1:] if co else name, None, tuple(params), co)
            eqs.append(FixpointEquation(head, MU if fix == "=mu" else NU, body))
        return MuclpSystem(goal, eqs)


def parse_muclp(text: str) -> MuclpSystem:
    # comments are whole lines starting with ';'; elsewhere ';' ends an equation
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith(";")]
    return _Parser(_tokens("\n".join(lines))).system()


__all__ = ["MuclpSyntaxError", "MuclpSystem", "parse_muclp"]
