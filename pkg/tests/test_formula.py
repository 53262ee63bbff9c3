import pickle

import pytest
from hypothesis import given

from strategies import int_formulas, modal_formulas
from ulip.formula import (
    BOTTOM,
    TOP,
    And,
    Box,
    Implies,
    Not,
    Or,
    ParseError,
    PolaritySet,
    Var,
    depth,
    godel_translate,
    is_polarity_formula,
    parse,
    parse_int,
    polarities,
    render,
    render_int,
    variables,
)

p, q, r = Var("p"), Var("q"), Var("r")


class TestParse:
    def test_conjunction_with_box(self):
        assert parse("p & []q") == And(p, Box(q))

    def test_diamond_is_expanded(self):
        assert parse("<>p") == Not(Box(Not(p)))

    def test_implication_is_right_associative(self):
        assert parse("p -> q -> r") == Implies(p, Implies(q, r))

    def test_precedence(self):
        assert parse("~p & q | r -> p") == Implies(Or(And(Not(p), q), r), p)

    def test_biconditional_sugar(self):
        assert parse("p <-> q") == And(Implies(p, q), Implies(q, p))

    def test_biconditional_binds_loosest(self):
        assert parse("p -> q <-> r") == parse("(p -> q) <-> r")

    def test_constants_and_identifiers(self):
        assert parse("true | false") == Or(TOP, BOTTOM)
        assert parse("x_1 & ab2") == And(Var("x_1"), Var("ab2"))

    def test_prefix_operators_stack(self):
        assert parse("~[]<>p") == Not(Box(Not(Box(Not(p)))))

    @pytest.mark.parametrize(
        "text, position",
        [("p &", 3), ("(p", 2), ("p q", 2), ("", 0), ("p $ q", 2), ("P", 0)],
    )
    def test_syntax_errors_report_position(self, text, position):
        with pytest.raises(ParseError) as info:
            parse(text)
        assert info.value.position == position

    def test_intuitionistic_grammar(self):
        assert parse_int("~p | q") == Or(Implies(p, BOTTOM), q)
        with pytest.raises(ParseError):
            parse_int("[]p")


class TestRender:
    def test_box(self):
        assert render(Box(p)) == "[]p"

    def test_diamond_is_refolded(self):
        assert render(Not(Box(Not(p)))) == "<>p"

    def test_bottom(self):
        assert render(BOTTOM) == "false"

    def test_parenthesizes_left_implication(self):
        f = Implies(Implies(p, q), r)
        assert parse(render(f)) == f

    def test_intuitionistic_negation(self):
        assert render_int(Implies(p, BOTTOM)) == "~p"


class TestPolarities:
    def test_variable(self):
        assert polarities(p) == PolaritySet.of(["p"], [])

    def test_implication(self):
        assert polarities(Implies(p, q)) == PolaritySet.of(["q"], ["p"])

    def test_boxed_negation(self):
        assert polarities(Box(Not(p))) == PolaritySet.of([], ["p"])

    def test_both_polarities(self):
        assert polarities(parse("p <-> q")) == PolaritySet.of(["p", "q"], ["p", "q"])

    def test_constants_have_none(self):
        assert polarities(parse("true -> false")) == PolaritySet()


class TestDepth:
    def test_variable(self):
        assert depth(p) == 0

    def test_nested_boxes(self):
        assert depth(Box(Box(p))) == 2

    def test_max_of_branches(self):
        assert depth(And(Box(p), q)) == 1

    def test_diamond_counts_once(self):
        assert depth(parse("<>[]p")) == 2


class TestPolarityFormula:
    def test_positive_atom(self):
        assert is_polarity_formula(p, PolaritySet.of(["p"], []))

    def test_negated_atom_rejected(self):
        assert not is_polarity_formula(Not(p), PolaritySet.of(["p"], []))

    def test_implication(self):
        assert is_polarity_formula(Implies(p, q), PolaritySet.of(["q"], ["p"]))


class TestGodelTranslation:
    def test_variable(self):
        assert godel_translate(p) == Box(p)

    def test_implication(self):
        assert godel_translate(Implies(p, q)) == Box(Implies(Box(p), Box(q)))

    def test_bottom(self):
        assert godel_translate(BOTTOM) == BOTTOM

    def test_homomorphic_on_lattice(self):
        assert godel_translate(parse_int("p & q | r")) == Or(And(Box(p), Box(q)), Box(r))


class TestSharing:
    def test_deeply_shared_formula_hashes_quickly(self):
        # 60 levels of sharing unfold to a tree with 2**60 leaves
        f = p
        for _ in range(60):
            f = Or(f, f)
        g = p
        for _ in range(60):
            g = Or(g, g)
        assert f == g and hash(f) == hash(g) and len({f, g}) == 1

    def test_pickle_round_trip(self):
        f = parse("[](p & <>q) -> r")
        hash(f)
        g = pickle.loads(pickle.dumps(f))
        assert "_hash" not in vars(g) and g == f and {f: 1}[g] == 1


# ---------------------------------------------------------------- properties


@given(modal_formulas())
def test_round_trip(f):
    assert parse(render(f)) == f


@given(int_formulas())
def test_intuitionistic_round_trip(f):
    assert parse_int(render_int(f)) == f


@given(modal_formulas())
def test_polarity_duality(f):
    assert polarities(Not(f)) == polarities(f).dual()


@given(modal_formulas())
def test_box_preserves_polarities(f):
    assert polarities(Box(f)) == polarities(f)


@given(int_formulas())
def test_translation_preserves_polarities(f):
    assert polarities(godel_translate(f)) == polarities(f)


@given(int_formulas())
def test_translation_is_modal_when_variables_occur(f):
    if variables(f):
        assert depth(godel_translate(f)) >= 1


@given(modal_formulas())
def test_formula_is_a_polarity_formula_for_its_own_polarities(f):
    assert is_polarity_formula(f, polarities(f))
