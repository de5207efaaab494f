import pytest

from muse.analysis import occurrences
from muse.core import (
    INT,
    MU,
    And,
    Or,
    NU,
    FALSE,
    TRUE,
    Exists,
    FixpointEquation,
    Forall,
    RelApp,
    Term,
    TermConst,
    Var,
    alpha_equivalent,
    free_vars,
    relapps,
    rule_of,
    to_sexpr,
)
from muse.transform import (
    TransformError,
    dnf_cubes,
    dual_equation,
    eliminate_quantifiers,
    inline,
    negate,
    nnf,
    norm,
    phi_of,
    reify,
    rules_of,
)

from brute import equivalent, models
from conftest import formula

SEQ = Term("seq", (Term("x--"), Term("y++")))


def P(text, problem, ints="x y x' y' r", bools="b"):
    return formula(text, ints, bools, problem=problem)


# -- phi_of -------------------------------------------------------------------


def test_phi_of_leaf(max2):
    p, _ = max2
    assert phi_of(p.semantics, P("(Sem_E 0 x y r)", p)) == P("(= r 0)", p)


def test_phi_of_assignment_has_unique_model(max2):
    p, _ = max2
    body = phi_of(p.semantics, P("(Sem_S (x:= y) 3 7 x' y')", p))
    assert body == P("(and (Sem_E y 3 7 x') (= 7 y'))", p)
    # expand the remaining expression and solve over a window around 7
    inner = next(iter(relapps(body)))
    full = formula(f"(and {to_sexpr(phi_of(p.semantics, inner))} (= 7 y'))", "x' y'")
    assert models(full, 0, 9) == {(7, 7)}


def test_phi_of_condition(loop):
    p, _ = loop
    assert phi_of(p.semantics, P("(Sem_B 0<x x y b)", p)) == P("(iff b (< 0 x))", p)


def test_phi_of_symbolic_term(loop):
    p, _ = loop
    with pytest.raises(TransformError, match="cannot expand symbolic term"):
        phi_of(p.semantics, P("(Sem_B t x y b)", p))


def test_phi_of_freshens_binders(loop):
    p, _ = loop
    body = phi_of(p.semantics, P("(Sem_S (seq x-- y++) x y x' y')", p))
    assert isinstance(body, Exists) and body.var.name != "x''"


# -- norm / dual --------------------------------------------------------------


def test_norm_negated_application(loop):
    p, _ = loop
    assert norm(P("(not (Sem_L f x y x' y'))", p)) == P("(~Sem_L f x y x' y')", p)


def test_norm_implication(loop):
    p, _ = loop
    got = norm(P("(=> (Sem_L f x y x' y') (Sem_L f y x x' y'))", p))
    assert got == P("(or (~Sem_L f x y x' y') (Sem_L f y x x' y'))", p)


def test_norm_relation_free_is_nnf():
    f = formula("(not (and (< x 1) (=> b (= y 0))))", "x y", "b")
    assert norm(f) == nnf(f) == formula("(or (>= x 1) (and b (!= y 0)))", "x y", "b")


def test_norm_removes_negative_occurrences(max2):
    p, _ = max2
    out = norm(p.spec)
    assert all(pol.value == "positive" for _, pol in occurrences(out))
    assert any(a.co for a in relapps(out)) and any(not a.co for a in relapps(out))


def _seq_equation(loop_problem):
    rule = rule_of(loop_problem.semantics, "Sem_S", "seq")
    head = RelApp("Sem_S", TermConst(SEQ, "S"), rule.params)
    return FixpointEquation(head, MU, rule.instantiate_term(SEQ))


def test_dual_of_sequence_rule(loop):
    p, _ = loop
    eq = _seq_equation(p)
    dual = dual_equation(eq)
    assert dual.fix == NU and dual.head.co and dual.head.args == eq.head.args
    expected = P(
        "(forall ((x'' Int) (y'' Int)) (or (~Sem_S x-- x y x'' y'') (~Sem_S y++ x'' y'' x' y')))",
        p,
    )
    assert alpha_equivalent(dual.body, expected)


def test_dual_is_involution(loop):
    p, _ = loop
    eq = _seq_equation(p)
    assert dual_equation(dual_equation(eq)) == eq


def test_dual_of_false():
    head = RelApp("X", None, ())
    dual = dual_equation(FixpointEquation(head, MU, FALSE))
    assert dual == FixpointEquation(RelApp("X", None, (), True), NU, TRUE)


def test_negate_flips_quantifiers():
    x = Var("x", INT)
    assert negate(Forall(x, formula("(< x 0)", "x"))) == Exists(x, formula("(>= x 0)", "x"))


# -- DNF and clauses ----------------------------------------------------------


def test_dnf_distributes():
    a, b, c = (formula(f"(< x {k})", "x") for k in (1, 2, 3))
    cubes = dnf_cubes(And((Or((a, b)), c)))
    assert cubes == [And((a, c)), And((b, c))]


def test_dnf_erases_existentials_freshly():
    f = formula("(exists ((z Int)) (and (R z) (< z 3)))", rels={"R": (INT,)})
    (cube,) = dnf_cubes(f)
    (z,) = free_vars(cube)
    assert z.name != "z" and z.name.startswith("z")
    assert cube == formula(f"(and (R {z.name}) (< {z.name} 3))", z.name, rels={"R": (INT,)})


def test_dnf_rejects_universal():
    with pytest.raises(TransformError):
        dnf_cubes(formula("(forall ((z Int)) (< z x))", "x"))


def test_rules_of_ite_gives_two_clauses(max2):
    p, s = max2
    clauses = rules_of(p.semantics, "Sem_S", s["max2"])
    assert len(clauses) == 2
    guards = [next(a for a in relapps(c.body) if a.rel == "Sem_B").args[-1] for c in clauses]
    assert guards == [TRUE, FALSE]


def test_rules_of_leaf(max2):
    p, _ = max2
    (clause,) = rules_of(p.semantics, "Sem_E", Term("0"))
    assert clause.body == P("(= r 0)", p)


def test_rules_of_loop_matches_rule(loop):
    p, s = loop
    clauses = rules_of(p.semantics, "Sem_L", s["f"])
    assert len(clauses) == 2
    exit_, step = clauses
    assert [a.rel for a in relapps(exit_.body)] == ["Sem_B"]
    assert [a.rel for a in relapps(step.body)] == ["Sem_B", "Sem_S", "Sem_L"]
    assert all(c.head == clauses[0].head for c in clauses)


def test_rules_of_not_chc_like(buchi):
    p, s = buchi
    with pytest.raises(TransformError):
        rules_of(p.semantics, "Reach", s["strat"])


# -- reification and inlining -------------------------------------------------


def test_reify_sequence_three_relations(loop):
    p, _ = loop
    rs = reify(p.semantics, "Sem_S", SEQ)
    assert list(rs.relations) == ["Sem_S_t0", "Sem_S_t1", "Sem_S_t2"]
    t0, t1, t2 = rs.relations.values()
    assert (t1.term, t2.term) == (Term("x--"), Term("y++"))
    assert t1.body == formula("(and (= x' (- x 1)) (= y y'))", "x y x' y'")
    assert t2.body == formula("(and (= x' x) (= y' (+ y 1)))", "x y x' y'")
    expected = formula(
        "(exists ((x'' Int) (y'' Int)) (and (Sem_S_t1 x y x'' y'') (Sem_S_t2 x'' y'' x' y')))",
        "x y x' y'",
        rels={"Sem_S_t1": (INT,) * 4, "Sem_S_t2": (INT,) * 4},
    )
    assert t0.body == expected
    assert all(a.term is None for r in rs.relations.values() for a in relapps(r.body))


def test_reify_leaf(max2):
    p, _ = max2
    rs = reify(p.semantics, "Sem_E", Term("0"))
    (rel,) = rs.relations.values()
    assert rel.body == P("(= r 0)", p)


def test_reify_recursive_program_is_finite(loop):
    p, s = loop
    rs = reify(p.semantics, "Sem_L", s["f"])
    assert len(rs.relations) == 6  # one per (relation, distinct subterm) reached
    loop_rel = rs.relations["Sem_L_t0"]
    assert "Sem_L_t0" in {a.rel for a in relapps(loop_rel.body)}
    # closure: every referenced relation is defined
    for r in rs.relations.values():
        assert {a.rel for a in relapps(r.body)} <= set(rs.relations)


def test_inline_sequence(loop):
    p, _ = loop
    out = inline(reify(p.semantics, "Sem_S", SEQ))
    assert list(out.relations) == ["Sem_S_t0"]
    expected = formula(
        "(exists ((x'' Int) (y'' Int)) (and (= x'' (- x 1)) (= y y'') (= x' x'') (= y' (+ y'' 1))))",
        "x y x' y'",
    )
    assert alpha_equivalent(out.relations["Sem_S_t0"].body, expected)


def test_inline_keeps_recursion(loop):
    p, s = loop
    out = inline(reify(p.semantics, "Sem_L", s["f"]))
    assert list(out.relations) == ["Sem_L_t0"]
    assert {a.rel for a in relapps(out.relations["Sem_L_t0"].body)} == {"Sem_L_t0"}


def test_inline_single_rule_unchanged(max2):
    p, _ = max2
    rs = reify(p.semantics, "Sem_E", Term("0"))
    assert inline(rs).relations == rs.relations


# -- quantifier elimination ---------------------------------------------------


def test_qe_one_point():
    f = formula(
        "(exists ((x'' Int) (y'' Int)) (and (= x'' (- x 1)) (= y'' y) (= x' x'') (= y' (+ y'' 1))))",
        "x y x' y'",
    )
    assert eliminate_quantifiers(f) == formula("(and (= x' (- x 1)) (= y' (+ y 1)))", "x y x' y'")


def test_qe_leaves_undefined_binder():
    f = formula("(exists ((z Int)) (and (> z 0) (> z 1)))")
    assert eliminate_quantifiers(f) == f


def test_qe_drops_unused_binder():
    f = formula("(forall ((z Int)) (< x y))", "x y")
    assert eliminate_quantifiers(f) == formula("(< x y)", "x y")


def test_qe_universal_disequality():
    f = formula("(forall ((z Int)) (or (distinct z (+ x 1)) (< y z)))", "x y")
    out = eliminate_quantifiers(f)
    assert out == formula("(< y (+ x 1))", "x y")
    assert equivalent(f, out, -2, 2)
