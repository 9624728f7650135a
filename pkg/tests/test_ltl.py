from __future__ import annotations

import random

import pytest

from qsim.calculus import builtin
from qsim.ltl import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
    Equiv,
    Eventually,
    Exists,
    Forall,
    FormulaSyntaxError,
    Implies,
    LassoPath,
    Next,
    Not,
    Or,
    PathEvaluator,
    Until,
    Vocabulary,
    depth,
    evaluate_on_lasso,
    expand_quantifiers,
    is_nnf,
    parse,
    pretty,
    subformulas,
    to_nnf,
)
from qsim.specfile import BUNDLED_SPECS, bundled_spec_text, split_sections

from oracles import explicit_holds, random_formula

RCC8 = builtin("rcc8")
VOCAB = Vocabulary({"Q": RCC8}, ("lh", "rh", "b1", "b2"), {"Balls": ("b1", "b2"), "Hands": ("lh", "rh")})


def Q(a, b, *rels):
    return Atom("Q", a, b, frozenset(rels))


def test_parse_always_atom():
    assert parse("G (Q[lh,rh] = disjoint)", VOCAB) == Always(Q("lh", "rh", "disjoint"))


def test_parse_negated_relation_complements():
    f = parse("Q[b1,b2] != meet", VOCAB)
    assert f == Atom("Q", "b1", "b2", frozenset(RCC8.names) - {"meet"})
    assert parse("Q[b1,b2] notin {meet, disjoint}", VOCAB).rels == frozenset(RCC8.names) - {"meet", "disjoint"}
    assert parse("Q[b1,b2] in {meet, disjoint}", VOCAB).rels == {"meet", "disjoint"}


def test_symbolic_relation_names():
    vocab = Vocabulary({"S": builtin("size3")}, ("a", "b"))
    assert parse("S[a,b] = <", vocab) == Atom("S", "a", "b", frozenset({"<"}))
    assert parse("S[a,b] = = -> S[a,b] != >", vocab) == Implies(
        Atom("S", "a", "b", frozenset({"="})), Atom("S", "a", "b", frozenset({"<", "="})))
    assert parse("S[a,b] in {<, >}", vocab).rels == {"<", ">"}


def test_parse_forall_over_set():
    f = parse("forall A in Balls. F (Q[A,lh] = meet)", VOCAB)
    assert f == Forall(("A",), "Balls", Eventually(Q("A", "lh", "meet")))


def test_precedence():
    p, q, r = (Q("lh", "rh", x) for x in ("meet", "disjoint", "overlap"))
    src = "Q[lh,rh] = meet"
    assert parse(f"{src} & X {src} | {src}", VOCAB) == Or(And(p, Next(p)), p)
    assert parse("true -> false -> true") == Implies(TRUE, Implies(FALSE, TRUE))
    assert parse("true <-> false <-> true") == Equiv(Equiv(TRUE, FALSE), TRUE)
    # U binds looser than & and tighter than ->, and groups to the left
    text = "Q[lh,rh] = meet U Q[lh,rh] = disjoint & Q[lh,rh] = overlap U true -> false"
    assert parse(text, VOCAB) == Implies(Until(Until(p, And(q, r)), TRUE), FALSE)
    assert parse("~X F G true") == Not(Next(Eventually(Always(TRUE))))
    assert parse("!true") == Not(TRUE)


@pytest.mark.parametrize("text, line, col, needle", [
    ("Q[b1,b2] = meet &", 1, 18, "expected a formula"),
    ("Q[b1,b2] = mete", 1, 12, "unknown relation"),
    ("R[b1,b2] = meet", 1, 1, "unknown aspect"),
    ("Q[b1,zz] = meet", 1, 6, "unknown object"),
    ("(true", 1, 6, r"expected '\)'"),
    ("true\n  & $", 2, 5, "unexpected character"),
    ("forall x in Nope. true", 1, 13, "unknown object set"),
    ("true true", 1, 6, "unexpected"),
])
def test_parse_errors_carry_positions(text, line, col, needle):
    with pytest.raises(FormulaSyntaxError, match=needle) as info:
        parse(text, VOCAB)
    assert (info.value.line, info.value.column) == (line, col)


def test_bound_variables_accepted_only_in_scope():
    parse("exists x in Hands. Q[x,b1] = meet", VOCAB)
    with pytest.raises(FormulaSyntaxError, match="unknown object"):
        parse("(exists x in Hands. Q[x,b1] = meet) & Q[x,b1] = meet", VOCAB)


def _corpus():
    texts = [
        "G (Q[lh,rh] = disjoint)",
        "forall A in Balls. F (Q[A,lh] = meet)",
        "Q[b1,b2] = meet U Q[b1,b2] = disjoint U true",
        "Q[b1,b2] = meet U (Q[b1,b2] = disjoint U true)",
        "(true -> false) -> true",
        "~(Q[b1,b2] = meet & X Q[b1,b2] = disjoint)",
        "exists x, y in {lh, rh}. x != y & Q[x,y] in {meet, overlap}",
        "G F (Q[lh,b1] = meet <-> ~Q[rh,b1] = meet)",
    ]
    return [(t, VOCAB) for t in texts]


def _spec_formulas():
    from qsim.specfile import load_spec
    out = []
    for name in BUNDLED_SPECS:
        problem = load_spec(name)
        doc = split_sections(bundled_spec_text(name))
        entries = doc.sections["formulas"]
        assert len(entries) == len(problem.formulas)
        out += [(e.text, problem.vocabulary) for e in entries]
    return out


@pytest.mark.parametrize("text, vocab", _corpus() + _spec_formulas())
def test_pretty_parse_round_trip(text, vocab):
    f = parse(text, vocab)
    shown = pretty(f)
    assert parse(shown, vocab) == f
    assert pretty(parse(shown, vocab)) == shown


def test_round_trip_random():
    rng = random.Random(11)
    atoms = [Q("lh", "rh", "meet"), Q("b1", "b2", "meet", "disjoint"), TRUE]
    for _ in range(500):
        f = random_formula(rng, atoms, rng.randint(1, 5))
        assert parse(pretty(f), VOCAB) == f


def test_expand_exists_to_disjunction():
    f = Exists(("A",), ("b1", "b2"), Q("A", "lh", "meet"))
    assert expand_quantifiers(f, VOCAB) == Or(Q("b1", "lh", "meet"), Q("b2", "lh", "meet"))


def test_expand_empty_sets():
    assert expand_quantifiers(Forall(("A",), (), Q("A", "lh", "meet")), VOCAB) == TRUE
    assert expand_quantifiers(Exists(("A",), (), Q("A", "lh", "meet")), VOCAB) == FALSE


def test_expand_pairs_with_guard():
    vocab = Vocabulary({"Q": builtin("dir9")}, ("s", "b1"))
    f = parse("forall a, b in Objects. a != b -> Q[a,b] != samepoint", vocab)
    g = expand_quantifiers(f, vocab)
    rest = frozenset(builtin("dir9").names) - {"samepoint"}
    assert g == And(Atom("Q", "s", "b1", rest), Atom("Q", "b1", "s", rest))


def test_expand_keeps_outer_binding_after_shadowing():
    f = Forall(("x",), ("lh",), And(Forall(("x",), ("rh",), Q("x", "b1", "meet")), Q("x", "b2", "meet")))
    assert expand_quantifiers(f, VOCAB) == And(Q("rh", "b1", "meet"), Q("lh", "b2", "meet"))


def test_nnf_examples():
    meet = Q("lh", "rh", "meet")
    assert to_nnf(Not(Eventually(meet)), VOCAB) == Always(Q("lh", "rh", *(set(RCC8.names) - {"meet"})))
    assert to_nnf(Not(Not(meet)), VOCAB) == meet
    assert to_nnf(Not(Next(meet)), VOCAB) == Next(Q("lh", "rh", *(set(RCC8.names) - {"meet"})))
    assert is_nnf(to_nnf(Not(Until(meet, Not(meet))), VOCAB))
    assert not is_nnf(Implies(meet, meet))


# --------------------------------------------------------------------------
# evaluation

SIZE = builtin("size3")
PAIR_ATOMS = [Atom("S", "a", "b", frozenset(s)) for s in (["<"], ["="], [">"], ["<", "="], ["=", ">"])]


def random_lasso(rng: random.Random, k: int, finite: bool = False) -> LassoPath:
    seq = [rng.choice(SIZE.names) for _ in range(k)]
    states = tuple({"S": {("a", "b"): r, ("b", "a"): SIZE.converse_name(r)}} for r in seq)
    loop = None if finite else rng.randint(1, k)
    return LassoPath(states, loop)


def test_evaluator_examples(cascade):
    one = LassoPath(({"S": {("a", "b"): "<"}},), 1)
    assert evaluate_on_lasso(Always(PAIR_ATOMS[0]), one)
    assert not evaluate_on_lasso(Eventually(PAIR_ATOMS[1]), one)
    finite = LassoPath(one.states, None)
    assert not evaluate_on_lasso(Next(TRUE), finite)
    assert not evaluate_on_lasso(Always(TRUE), finite)
    assert evaluate_on_lasso(Eventually(PAIR_ATOMS[0]), finite)


def test_cascade_satisfies_landing_formula(juggling, cascade):
    landing = juggling.formulas[5]
    assert isinstance(expand_quantifiers(landing, juggling.vocabulary), Always)
    f = expand_quantifiers(landing, juggling.vocabulary)
    assert evaluate_on_lasso(f, cascade.path())


def test_evaluator_index_range():
    one = LassoPath(({"S": {("a", "b"): "<"}},), 1)
    with pytest.raises(IndexError):
        evaluate_on_lasso(TRUE, one, 2)
    with pytest.raises(ValueError):
        LassoPath(one.states, 2)


@pytest.mark.parametrize("finite", [False, True])
def test_evaluator_matches_explicit_positions(finite):
    rng = random.Random(31 + finite)
    for _ in range(1500):
        k = rng.randint(1, 5)
        path = random_lasso(rng, k, finite)
        f = random_formula(rng, PAIR_ATOMS, rng.randint(1, 4))
        ev = PathEvaluator(path)
        for i in range(1, k + 1):
            assert ev(f, i) == explicit_holds(f, path, i), (pretty(f), path.loop_start, i)


def test_nnf_preserves_truth_on_loops():
    rng = random.Random(1000)
    vocab = {"S": SIZE.names}
    for _ in range(1000):
        k = rng.randint(1, 5)
        path = random_lasso(rng, k)
        f = random_formula(rng, PAIR_ATOMS, rng.randint(1, 5))
        g = to_nnf(f, vocab)
        assert is_nnf(g)
        assert evaluate_on_lasso(f, path) == evaluate_on_lasso(g, path), pretty(f)


def test_nnf_needs_loops():
    # the dualities fail at the end of a finite path: X true and its dual
    # X false are both false there
    path = LassoPath(({"S": {("a", "b"): "<"}},), None)
    f = Not(Next(TRUE))
    assert evaluate_on_lasso(f, path)
    assert not evaluate_on_lasso(to_nnf(f, {"S": SIZE.names}), path)


def test_depth_and_subformulas():
    f = Always(Until(TRUE, Next(FALSE)))
    assert depth(f) == 4
    assert subformulas(f) == {f, f.arg, TRUE, Next(FALSE), FALSE}
