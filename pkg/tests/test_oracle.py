import pytest

from muse import corpus
from muse.core import INT, MU, NU, FixpointEquation, IntConst, RelApp, TermConst
from muse.encode import MUCLP, Optimizations, co_chc_of, encode, muclp_of
from muse.oracle import (
    DerivationSource,
    Evaluator,
    FiniteDomain,
    OracleError,
    Policy,
    bounded_derivation,
    derivation_goal_holds,
    derivation_holds,
    eval_system,
    holds_in,
    needed_by,
    oracle_run,
    oracle_verify,
)
from muse.oracle.backend import decide, glue_values, main as backend_main

from brute import holds as brute_holds
from conftest import dom, formula, load, with_solution

X = RelApp("X", None, ())


# -- domains ------------------------------------------------------------------


def test_domain_parse_and_cap():
    d = FiniteDomain.parse("-4..4")
    assert (d.lo, d.hi, d.policy) == (-4, 4, Policy.STUCK)
    assert list(d.values(INT)) == list(range(-4, 5))
    with pytest.raises(OracleError, match="smaller interval"):
        FiniteDomain(-100, 100)
    assert FiniteDomain(0, 99, cap=100).hi == 99
    with pytest.raises(OracleError):
        FiniteDomain(3, 1)
    with pytest.raises(OracleError):
        FiniteDomain.parse("1-3")


def test_clamp_policy_saturates():
    d = dom(-2, 2, "clamp")
    ev = Evaluator(d, source=None)
    assert ev.num(formula("(+ x 5)", "x"), {"x": 1}) == 2
    assert ev.holds(formula("(= (+ x 1) x)", "x"), {"x": 2})
    stuck = Evaluator(dom(-2, 2), source=None)
    assert not stuck.holds(formula("(= (+ x 1) x)", "x"), {"x": 2})


# -- fixed points -------------------------------------------------------------


def test_identity_fixpoints():
    assert eval_system([FixpointEquation(X, MU, X)], dom(0, 0)).get("X") == frozenset()
    assert eval_system([FixpointEquation(X, NU, X)], dom(0, 0)).get("X") == {()}


@pytest.mark.parametrize("sem,full", [("order_ab.sem", False), ("order_ba.sem", True)])
def test_order_example(sem, full):
    q = muclp_of(*load(sem, "unit.sol"))
    interp = eval_system(q.rules, dom(-3, 3))
    expected = {(v,) for v in range(-3, 4)} if full else set()
    assert interp.get("A_t0") == expected


def test_nested_order_matters_for_value_not_just_goal():
    q = muclp_of(*load("order_ab.sem", "unit.sol"))
    interp = eval_system(q.rules, dom(-1, 1))
    assert interp.get("B_t0") == {(-1,), (0,), (1,)}
    assert interp.get("A_t0", co=True) == {(-1,), (0,), (1,)}


def test_eval_is_deterministic(buchi):
    q = muclp_of(*load("buchi.sem", "buchi_stay.sol"))
    a, b = (eval_system(q.rules, dom(-1, 6)) for _ in range(2))
    assert a.values == b.values


@pytest.mark.parametrize("sem,sol,lo,hi", [("loop.sem", "loop.sol", 0, 3), ("buchi.sem", "buchi_stay.sol", -1, 6)])
def test_pruned_system_keeps_values(sem, sol, lo, hi):
    q = muclp_of(*load(sem, sol))
    kept = needed_by(q.rules, q.goal)
    assert 0 < len(kept) < len(q.rules)
    full, part = eval_system(q.rules, dom(lo, hi)), eval_system(kept, dom(lo, hi))
    assert all(part[eq.key] == full[eq.key] for eq in kept)
    assert holds_in(part, q.goal) == holds_in(full, q.goal)


def test_missing_equation_is_an_error():
    with pytest.raises(OracleError, match="no equation"):
        holds_in(eval_system([], dom(0, 1)), X)


def test_assignment_runs_in_interpretation(max2):
    p, s = max2
    spec = formula("(Sem_S (x:= 1) 3 3 1 3)", problem=p)
    verdict, interp = oracle_run(p.with_spec(spec), s, dom(-4, 4))
    assert verdict.kind == "valid" and verdict.bounded
    assert (3, 3, 1, 3) in interp.get("Sem_S_t0")
    assert (3, 3, 3, 3) not in interp.get("Sem_S_t0")


def test_dump_lists_relations():
    _, interp = oracle_run(*load("loop_comm.sem", "plus.sol"), dom(0, 2))
    text = interp.dump()
    assert "=mu" in text and "=nu" in text and "tuple(s)" in text


# -- verdicts over the shipped corpus ----------------------------------------


BOUNDED = [c for c in corpus.CASES if c[3] is not None]


@pytest.mark.parametrize("sem,sol,_unbounded,domain,expected", BOUNDED, ids=[f"{c[0]}-{c[1]}" for c in BOUNDED])
def test_corpus_oracle(sem, sol, _unbounded, domain, expected):
    d = FiniteDomain.parse(domain)
    v = oracle_verify(*load(sem, sol), d)
    assert v.kind == expected and v.bounded


def test_unreified_oracle_agrees(loop):
    v = oracle_verify(*loop, dom(0, 4), Optimizations(reify=False, inline=False))
    assert v.kind == "valid"


# -- derivation search --------------------------------------------------------


@pytest.mark.parametrize("vals,depth,expected", [((3, 0, 0, 6), 10, True), ((3, 0, 0, 5), 30, False), ((3, 0, 0, 6), 0, False)])
def test_bounded_derivation(loop, vals, depth, expected):
    p, s = loop
    app = RelApp("Sem_L", TermConst(s["f"], "L"), tuple(IntConst(v) for v in vals))
    assert bounded_derivation(p, s, app, depth) is expected


def test_bounded_derivation_depth_is_tight(loop):
    p, s = loop
    app = RelApp("Sem_L", TermConst(s["f"], "L"), tuple(IntConst(v) for v in (3, 0, 0, 6)))
    heights = [d for d in range(1, 12) if bounded_derivation(p, s, app, d)]
    assert heights and heights == list(range(heights[0], 12))


def test_total_correctness_by_derivation():
    p, s = load("loop_total.sem", "loop.sol")
    assert derivation_holds(p, s, dom(0, 6), 20)
    bad = with_solution(p, corpus.read("loop_triple.sol"))
    assert not derivation_holds(p, bad, dom(0, 6), 20)


def test_derivation_needs_positive_spec(loop):
    with pytest.raises(OracleError):
        derivation_holds(*loop, dom(0, 3), 5)


def test_eval_agrees_with_derivation_on_least_fixpoints():
    p, _ = load("loop_total.sem")
    s = with_solution(p, "(define f (while 0<x x--))")
    q = muclp_of(p, s, Optimizations(reify=True, inline=False))
    mu = [eq for eq in q.rules if eq.fix == MU]
    d = dom(-2, 4)
    interp = eval_system(mu, d)
    src = DerivationSource.for_equations(mu, d)
    for eq in mu:
        derived = src.derive(eq.head, (None,) * len(eq.params), 12)
        in_domain = {t for t in derived if all(d.contains(v) for v in t)}
        assert interp[eq.key] == in_domain


def test_derivation_goal_dualizes_greatest_fixpoints():
    good = co_chc_of(*load("loop_total.sem", "loop.sol"))
    bad = co_chc_of(*load("loop_total.sem", "loop_triple.sol"))
    assert all(eq.fix == NU for eq in good.rules)
    # falsification goals: false for the valid candidate, true for the broken one
    assert derivation_goal_holds(good.rules, good.goal, dom(0, 5), 20) is False
    assert derivation_goal_holds(bad.rules, bad.goal, dom(0, 5), 20) is True


# -- the bundled command-line backend -----------------------------------------


def test_glue_values():
    assert glue_values(["f", "--domain", "-1..6", "--depth", "3"]) == ["f", "--domain=-1..6", "--depth", "3"]
    assert glue_values(["--domain"]) == ["--domain"]


def test_decide_on_rendered_text():
    text = encode(*load("loop_comm.sem", "plus.sol"), MUCLP).text
    assert decide(text, dom(0, 3)) is True
    assert decide(text, dom(-1, 3)) is False


def test_backend_main(tmp_path, capsys):
    f = tmp_path / "q.muclp"
    f.write_text(encode(*load("order_ba.sem", "unit.sol"), MUCLP).text)
    assert backend_main([str(f), "--domain", "-2..2"]) == 0
    assert capsys.readouterr().out.strip() == "valid"
    f.write_text("garbage(")
    assert backend_main([str(f)]) == 2
    assert capsys.readouterr().out.startswith("unknown:")


# -- evaluator against the reference semantics --------------------------------


@pytest.mark.parametrize(
    "text",
    [
        "(forall ((a Int)) (exists ((b Int)) (= (+ a b) 0)))",
        "(exists ((a Int) (b Int)) (and (= (* 2 a) (+ b 1)) (< b 0)))",
        "(forall ((a Int)) (=> (< a 2) (exists ((c Bool)) (iff c (< a 0)))))",
        "(exists ((a Int)) (and (= (+ a 3) 0) (= a a)))",
    ],
)
def test_evaluator_matches_reference(text):
    f = formula(text)
    for lo, hi in ((-2, 2), (0, 3)):
        assert Evaluator(dom(lo, hi), source=None).holds(f, {}) == brute_holds(f, {}, lo, hi)
