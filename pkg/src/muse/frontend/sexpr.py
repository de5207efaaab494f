"""A small s-expression reader that keeps source positions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True, slots=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: SourceSpan | None = None

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.severity}: {self.message}"


class FrontendError(ValueError):
    """Input rejected; carries every diagnostic collected so far."""

    def __init__(self, diagnostics: list[Diagnostic]) -> None:
        self.diagnostics = diagnostics
        errors = [d for d in diagnostics if d.severity == "error"] or diagnostics
        super().__init__("\n".join(map(str, errors)))


@dataclass(frozen=True, slots=True)
class Atom:
    text: str
    span: SourceSpan

    def is_int(self) -> bool:
        t = self.text
        return t.isdigit() or (len(t) > 1 and t[0] == "-" and t[1:].isdigit())


@dataclass(frozen=True, slots=True)
class SList:
    items: tuple["SExpr", ...]
    span: SourceSpan

    def head(self) -> str | None:
        return self.items[0].text if self.items and isinstance(self.items[0], Atom) else None


SExpr = Union[Atom, SList]


def read_all(text: str, file: str = "<input>") -> list[SExpr]:
    """Parse every top-level s-expression in ``text``."""
    out: list[SExpr] = []
    stack: list[tuple[SourceSpan, list[SExpr]]] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            stack.append((SourceSpan(file, line, col), []))
            i += 1
            col += 1
            continue
        if ch == ")":
            if not stack:
                raise FrontendError([Diagnostic("error", "unbalanced ')'", SourceSpan(file, line, col))])
            start, items = stack.pop()
            length = (col - start.column + 1) if line == start.line else 1
            node = SList(tuple(items), SourceSpan(file, start.line, start.column, length))
            (stack[-1][1] if stack else out).append(node)
            i += 1
            col += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        tok = text[i:j]
        atom = Atom(tok, SourceSpan(file, line, col, len(tok)))
        (stack[-1][1] if stack else out).append(atom)
        col += j - i
        i = j
    if stack:
        start, _ = stack[-1]
        raise FrontendError([Diagnostic("error", "unclosed '('", start)])
    return out


def show(sx: SExpr) -> str:
    if isinstance(sx, Atom):
        return sx.text
    return "(" + " ".join(show(x) for x in sx.items) + ")"
