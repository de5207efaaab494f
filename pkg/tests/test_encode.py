import subprocess

import pytest

from muse.analysis import POS, occurrences
from muse.core import FALSE, INT, MU, NU, TRUE, FixpointEquation, Forall, RelApp, alpha_equivalent, relapps
from muse.encode import (
    CHC,
    COCHC,
    MUCLP,
    MUCLP_HEADER,
    SMT,
    EncodedQuery,
    EncodingError,
    Optimizations,
    chc_of,
    co_chc_of,
    emit_horn,
    emit_muclp,
    emit_smtlib,
    encode,
    muclp_of,
    parse_muclp,
    smt_formula_of,
)
from muse.oracle import eval_system, holds_in
from muse.transform import HornClause

from brute import equivalent, holds
from conftest import GOLDEN, Z3, dom, formula, load, needs_z3, with_solution

UNREIFIED = Optimizations(reify=False, inline=False)


def z3(text: str, seconds: int = 60) -> str:
    cmd = [Z3, "-smt2", f"-T:{seconds}", "fp.spacer.global=true", "-in"]
    out = subprocess.run(cmd, input=text, capture_output=True, text=True, timeout=seconds + 30)
    return out.stdout.strip().splitlines()[-1]


# -- SMT ----------------------------------------------------------------------


def test_smt_goal_has_no_relations(max2):
    q = smt_formula_of(*max2)
    assert q.kind == SMT and q.rules == [] and not list(relapps(q.goal))


def _matrix(f, n=3):
    for _ in range(n):
        f = f.body
    return f


def test_smt_goal_matches_expected_query(max2):
    q = smt_formula_of(*max2, Optimizations(reify=True, inline=True, qe=True))
    reference = formula(
        "(forall ((x Int) (y Int) (x' Int)) (iff "
        "(exists ((y' Int)) (and (= y y') (or (and (< x y) (= x' y)) (and (>= x y) (= x' x))))) "
        "(and (or (= x' x) (= x' y)) (<= x x') (<= y x'))))"
    )
    assert equivalent(_matrix(q.goal), _matrix(reference), -3, 3)
    assert holds(q.goal, {}, -3, 3)


def test_smt_broken_candidate_has_countermodel(max2):
    p, _ = max2
    bad = with_solution(p, "(define max2 (Ite (< x y) (x:= x) (x:= y)))")
    q = smt_formula_of(p, bad)
    assert holds(q.goal, {}, -2, 2) is False
    # the countermodel x=0, y=1 falsifies the instantiated body
    assert not holds(_matrix(q.goal), {"x": 0, "y": 1, "x'": 0}, -2, 2)


def test_smt_relation_free_spec_unchanged(max2):
    p, s = max2
    spec = formula("(forall ((x Int)) (<= x (+ x 1)))")
    assert smt_formula_of(p.with_spec(spec), s).goal == spec


def test_smt_rejects_recursion(loop):
    with pytest.raises(EncodingError, match="recursive.*MUCLP"):
        smt_formula_of(*loop)


@needs_z3
@pytest.mark.parametrize("sol,answer", [("max2.sol", "unsat"), ("max2_swapped.sol", "sat")])
def test_smt_script_with_z3(sol, answer):
    assert z3(encode(*load("max2.sem", sol), SMT).text) == answer


@needs_z3
@pytest.mark.parametrize("goal,answer", [(TRUE, "unsat"), (FALSE, "sat")])
def test_smt_constant_goals(goal, answer):
    text = emit_smtlib(EncodedQuery(SMT, [], goal))
    assert z3(text) == answer


# -- CHC ----------------------------------------------------------------------


def test_chc_rules_and_goal(loop):
    q = chc_of(*loop)
    assert q.kind == CHC and len(q.rules) == 2
    assert {c.head.rel for c in q.rules} == {"Sem_L_t0"}


def test_chc_unreified_covers_every_subterm(loop):
    q = chc_of(*loop, UNREIFIED)
    heads = {(c.head.rel, str(c.head.term.term)) for c in q.rules}
    assert ("Sem_L", "(while 0<x (seq x-- (seq y++ y++)))") in heads
    assert ("Sem_S", "y++") in heads and ("Sem_B", "0<x") in heads


def test_chc_rejects_positive_occurrence():
    with pytest.raises(EncodingError, match="positive occurrence of Sem_L"):
        chc_of(*load("loop_total.sem", "loop.sol"))


def test_chc_rejects_non_horn_semantics(buchi):
    p, s = buchi
    negative_only = p.with_spec(formula("(not (Reach strat 0 0))", problem=p))
    with pytest.raises(EncodingError, match="not CHC-like"):
        chc_of(negative_only, s)


def test_chc_true_spec(loop):
    p, s = loop
    q = chc_of(p.with_spec(TRUE), s)
    assert q.rules == [] and q.goal == TRUE


@needs_z3
@pytest.mark.parametrize("sol,answer", [("loop.sol", "sat"), ("loop_triple.sol", "unsat")])
def test_horn_script_with_z3(sol, answer):
    assert z3(encode(*load("loop.sem", sol), CHC).text) == answer


@needs_z3
def test_horn_script_unreified_is_well_formed():
    # spacer does not finish on datatype-sorted predicates; only check that
    # the script is accepted
    q = encode(*load("loop.sem", "loop.sol"), CHC, UNREIFIED)
    assert "declare-datatypes" in q.text
    assert z3(q.text, seconds=2) in ("sat", "timeout", "unknown")


@needs_z3
def test_horn_trivial_systems():
    assert z3(emit_horn(EncodedQuery(CHC, [], TRUE))) == "sat"
    fact = HornClause(RelApp("R", None, (formula("0"), formula("1"))), TRUE)
    goal = formula("(forall ((a Int) (b Int)) (=> (R a b) (distinct b 1)))", rels={"R": (INT, INT)})
    assert z3(emit_horn(EncodedQuery(CHC, [fact], goal))) == "unsat"


# -- co-CHC -------------------------------------------------------------------


def test_cochc_goal_is_dual_of_total_spec():
    q = co_chc_of(*load("loop_total.sem", "loop.sol"))
    assert q.kind == COCHC and q.falsify
    assert all(eq.fix == NU and eq.head.co for eq in q.rules)
    expected = formula(
        "(exists ((x Int) (y' Int)) (and (<= 0 x) (= (* 2 x) y') (~Sem_L_t0 x 0 0 y')))",
        rels={"Sem_L_t0": (INT,) * 4},
    )
    assert alpha_equivalent(q.goal, expected)


def test_cochc_sequence_rule_is_dualized():
    q = co_chc_of(*load("loop_total.sem", "loop.sol"), Optimizations(reify=True, inline=False))
    origin = {n: r.term.symbol for n, r in q.ruleset.relations.items()}
    seqs = [eq for eq in q.rules if origin[eq.head.rel] == "seq"]
    assert seqs
    for eq in seqs:
        assert eq.fix == NU and eq.head.co
        assert isinstance(eq.body, Forall)
        assert [a.co for a in relapps(eq.body)] == [True, True]


def test_cochc_rejects_negative(loop):
    with pytest.raises(EncodingError, match="negative occurrence"):
        co_chc_of(*loop)


def test_cochc_false_spec(loop):
    p, s = loop
    q = co_chc_of(p.with_spec(FALSE), s)
    assert q.rules == [] and q.goal == TRUE  # falsifying a valid dual goal: invalid


# -- muCLP --------------------------------------------------------------------


def test_muclp_buchi_system(buchi):
    q = muclp_of(*buchi)
    kinds = {(eq.head.rel, eq.head.co): eq.fix for eq in q.rules}
    assert kinds[("Buchi_t0", True)] == NU
    assert kinds[("Reach_t0", False)] == MU
    assert q.goal == formula("(~Buchi_t0 0 0)", rels={"Buchi_t0": (INT, INT)})


def test_muclp_hyperproperty_system():
    q = muclp_of(*load("loop_comm.sem", "plus.sol"))
    heads = [(eq.head.rel, eq.head.co, eq.fix) for eq in q.rules]
    assert heads == [("Sem_L_t0", True, NU), ("Sem_L_t0", False, MU)]
    expected = formula(
        "(forall ((x Int) (y Int) (x' Int) (y' Int)) (or (~L x y x' y') (L y x x' y')))",
        rels={"L": (INT,) * 4},
    )
    goal = q.goal
    assert alpha_equivalent(_rename(goal, "Sem_L_t0", "L"), expected)


def _rename(f, old, new):
    from muse.core.formula import map_relapps

    return map_relapps(f, lambda a: RelApp(new if a.rel == old else a.rel, a.term, a.args, a.co))


def test_muclp_chc_translation_is_least_fixpoint(loop):
    q = muclp_of(*loop, Optimizations(reify=True, inline=False))
    mu = [eq for eq in q.rules if not eq.head.co]
    assert all(eq.fix == MU for eq in mu)
    assert all(eq.fix == NU for eq in q.rules if eq.head.co)


def test_muclp_bodies_positive(buchi, loop, max2):
    for pair in (buchi, loop, max2):
        for opts in (Optimizations(), UNREIFIED):
            q = muclp_of(*pair, opts)
            for eq in q.rules:
                assert all(pol is POS for _, pol in occurrences(eq.body))


def test_muclp_complements_first_and_after(loop):
    p, s = load("loop_comm.sem", "plus.sol")
    after = muclp_of(p, s, Optimizations(dual_after=True))
    assert [eq.head.co for eq in after.rules] == [False, True]


def test_muclp_needs_reification(buchi):
    q = muclp_of(*buchi, UNREIFIED)
    with pytest.raises(EncodingError, match="MUCLP emission requires reification"):
        emit_muclp(q)


def test_muclp_text_round_trip(buchi):
    q = encode(*buchi, MUCLP)
    assert q.text.startswith(MUCLP_HEADER + "\n")
    system = parse_muclp(q.text)
    assert [eq.head.key for eq in system.equations] == [eq.head.key for eq in q.rules]
    assert system.goal == q.goal


def test_muclp_template_hook(loop):
    q = encode(*load("loop_comm.sem", "plus.sol"), MUCLP)
    text = emit_muclp(q, "GOAL {{goal}}\nEQS\n{{equations}}\nEND $x\n")
    assert "\nEQS\n" in text and text.endswith("END $x\n")


def _order_goal(sem):
    q = muclp_of(*load(sem, "unit.sol"))
    return holds_in(eval_system(q.rules, dom(-3, 3)), q.goal)


def test_order_example_outcomes():
    assert _order_goal("order_ab.sem") is False
    assert _order_goal("order_ba.sem") is True


def test_identity_least_fixpoint_is_false():
    x = RelApp("X", None, ())
    interp = eval_system([FixpointEquation(x, MU, x)], dom(0, 0))
    assert holds_in(interp, x) is False
    text = emit_muclp(EncodedQuery(MUCLP, [FixpointEquation(x, MU, x)], x))
    assert text == "; muclp-v1\nX()\ns.t.\nX(): bool =mu X();\n"


def test_encode_wraps_transform_errors(buchi):
    with pytest.raises(EncodingError, match="not CHC-like"):
        encode(*buchi, CHC)


def test_optimizations_parse():
    assert Optimizations.parse(None) == Optimizations()
    assert Optimizations.parse("none").names == []
    assert Optimizations.parse("reify,qe").names == ["reify", "qe"]
    with pytest.raises(ValueError):
        Optimizations.parse("fast")


# -- goldens ------------------------------------------------------------------

GOLDENS = [
    ("max2.smt2", "max2.sem", "max2.sol", SMT),
    ("loop.smt2", "loop.sem", "loop.sol", CHC),
    ("loop_total.muclp", "loop_total.sem", "loop.sol", COCHC),
    ("loop_comm.muclp", "loop_comm.sem", "plus.sol", MUCLP),
    ("buchi.muclp", "buchi.sem", "buchi.sol", MUCLP),
]


@pytest.mark.parametrize("golden,sem,sol,kind", GOLDENS)
def test_golden(golden, sem, sol, kind):
    first = encode(*load(sem, sol), kind).text
    second = encode(*load(sem, sol), kind).text
    assert first == second
    assert first == (GOLDEN / golden).read_text()
