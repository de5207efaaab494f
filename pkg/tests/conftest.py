from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from muse import corpus
from muse.core import BOOL, INT, Problem, Solution, TermConst, Var, term_sort
from muse.frontend import FormulaContext, RelSig, parse_formula, parse_problem, parse_solution, parse_term
from muse.frontend.sexpr import Atom, read_all
from muse.oracle import FiniteDomain, Policy

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = Path(__file__).resolve().parent / "golden"
Z3 = shutil.which("z3")

needs_z3 = pytest.mark.skipif(Z3 is None, reason="z3 not on PATH")


def load(sem: str, sol: str | None = None) -> tuple[Problem, Solution | None]:
    problem = parse_problem(corpus.read(sem), sem)
    solution = parse_solution(corpus.read(sol), problem, sol) if sol else None
    return problem, solution


def with_solution(problem: Problem, text: str) -> Solution:
    return parse_solution(text, problem)


def formula(text: str, ints: str = "", bools: str = "", rels: dict | None = None, problem: Problem | None = None):
    """Parse ``text`` with the given free variables.

    ``rels`` maps a term-less relation name to its argument sorts. With
    ``problem``, its relations are available too and their term argument is
    either a variable of the nonterminal's sort or a ground program.
    """
    scope = {n: Var(n, INT) for n in ints.split()} | {n: Var(n, BOOL) for n in bools.split()}
    sigs: dict[str, RelSig] = {n: RelSig(None, tuple(s)) for n, s in (rels or {}).items()}
    term_arg = None
    if problem is not None:
        for r in problem.semantics.relations:
            sigs[r.name] = RelSig(r.nonterminal, tuple(p.sort for p in r.all_params))

        def term_arg(sx, _rel, nt):
            if isinstance(sx, Atom) and not problem.grammar.has_symbol(sx.text):
                return Var(sx.text, term_sort(nt))
            return TermConst(parse_term(sx, problem.grammar), nt)

    (sx,) = read_all(text, "<test>")
    return parse_formula(sx, FormulaContext(scope, sigs, term_arg))


def dom(lo: int, hi: int, policy: str = "stuck") -> FiniteDomain:
    return FiniteDomain(lo, hi, Policy(policy))


@pytest.fixture(scope="session")
def max2():
    return load("max2.sem", "max2.sol")


@pytest.fixture(scope="session")
def loop():
    return load("loop.sem", "loop.sol")


@pytest.fixture(scope="session")
def buchi():
    return load("buchi.sem", "buchi.sol")
