import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import LS12_EQUIVALENCES, formulas_upto, random_formula
from ulip.decide import (
    LS12_HASSE_EDGES,
    Ls12Class,
    PolarityError,
    classify_ls12,
    countermodel,
    equivalent,
    hasse_closure,
    ls12_implication_order,
    point_space,
    provable,
    satisfiable,
    signature,
)
from ulip.formula import BOTTOM, TOP, Box, Implies, Var, parse
from ulip.kripke import NIP_LOGICS, LogicId, canonical_count, in_class, satisfies

LS12 = LogicId.LS_1_2


class TestSignature:
    def test_triv(self):
        assert signature(LogicId.Triv, ["p"], Var("p")).as_tuple() == (True, False)

    @pytest.mark.parametrize("L", [L for L in LogicId if canonical_count(L, ["p"]) < 2000], ids=lambda L: L.name)
    def test_constants(self, L):
        assert signature(L, ["p"], TOP).all_ones()
        assert signature(L, ["p"], BOTTOM).bits == 0

    def test_rejects_foreign_variables(self):
        with pytest.raises(ValueError):
            signature(LogicId.S5, ["p"], Var("q"))


class TestProvable:
    def test_box_diamond_commute_in_ls12(self):
        assert provable(LS12, parse("[]<>p <-> <>[]p"))

    def test_counterexample_premise_implies_conclusion(self):
        assert provable(LogicId.LP2_1_w, parse("p & [](([]~p) | p) -> [](p | q | []~q)"))

    def test_reflexivity(self):
        assert provable(LogicId.S5, parse("[]p -> p"))

    def test_s5_axiom(self):
        assert provable(LogicId.S5, parse("<>p -> []<>p"))
        assert not provable(LogicId.S4_4, parse("<>p -> []<>p"))

    def test_directedness(self):
        # directedness of the forks fails exactly where there are two final points
        dot2 = parse("<>[]p -> []<>p")
        assert provable(LogicId.GW2, dot2)
        assert not provable(LogicId.GV, dot2)

    def test_countermodel_is_in_class_and_refutes(self):
        f = parse("<>p -> []<>p")
        cm = countermodel(LogicId.GV, f)
        assert cm is not None and in_class(cm.model, LogicId.GV)
        assert not satisfies(cm, f)


class TestEquivalent:
    def test_box_of_conjunction(self):
        assert equivalent(LS12, parse("[](p & []<>p)"), parse("[]p"))

    def test_diamond_of_disjunction(self):
        assert equivalent(LS12, parse("<>(p | []<>p)"), parse("<>p"))

    def test_reflexive(self):
        assert equivalent(LogicId.S5, Var("p"), Var("p"))


class TestClassify:
    def test_box_box(self):
        assert classify_ls12(parse("[][]p")) is Ls12Class.BOX_P

    def test_diamond_box(self):
        assert classify_ls12(parse("<>[]p")) is Ls12Class.BOX_DIA_P

    def test_idempotent_disjunction(self):
        assert classify_ls12(parse("p | p")) is Ls12Class.P

    def test_rejects_negative_occurrence(self):
        with pytest.raises(PolarityError):
            classify_ls12(parse("~p"))

    def test_rejects_other_variables(self):
        with pytest.raises(PolarityError):
            classify_ls12(parse("p & q"))

    @pytest.mark.parametrize("left, right", LS12_EQUIVALENCES)
    def test_equivalence_list(self, left, right):
        assert equivalent(LS12, parse(left), parse(right))
        assert classify_ls12(parse(left)) is classify_ls12(parse(right))


class TestImplicationOrder:
    def test_contains_path(self):
        assert (Ls12Class.BOX_P, Ls12Class.P) in ls12_implication_order()

    def test_p_does_not_imply_box_diamond(self):
        assert (Ls12Class.P, Ls12Class.BOX_DIA_P) not in ls12_implication_order()

    def test_bottom_top(self):
        assert (Ls12Class.BOTTOM, Ls12Class.TOP) in ls12_implication_order()

    def test_matches_diagram(self):
        assert ls12_implication_order() == hasse_closure(LS12_HASSE_EDGES)


def test_eight_classes_at_depth_three():
    space = point_space(LS12, ("p",))
    sigs = {space.signature_int(f) for f in formulas_upto(["p"], 7, 3, ops=("box", "dia", "and", "or"))}
    assert sigs == {space.signature_int(c.formula) for c in Ls12Class}


def test_premise_transfers_downwards():
    premise = parse("p & [](([]~p) | p) -> [](p | q | []~q)")
    assert provable(LogicId.LP2_1_w, premise) and provable(LS12, premise)


# ---------------------------------------------------------------- properties

SMALL = [L for L in LogicId if canonical_count(L, ["p", "q"]) <= 5000]


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(SMALL), st.integers(0, 2**32 - 1))
def test_engine_agrees_with_point_list(L, seed):
    """The folded engine and the literal canonical list decide alike."""
    f = random_formula(random.Random(seed), ["p", "q"], 3, 9)
    assert provable(L, f) == signature(L, ["p", "q"], f).all_ones()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(NIP_LOGICS), st.integers(0, 2**32 - 1))
def test_reflexive_and_t_axiom(L, seed):
    f = random_formula(random.Random(seed), ["p", "q"], 2, 8)
    assert provable(L, Implies(f, f))
    assert provable(L, Implies(Box(f), f))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(LogicId)), st.integers(0, 2**32 - 1))
def test_equivalence_is_an_equivalence(L, seed):
    rng = random.Random(seed)
    sample = [random_formula(rng, ["p"], 2, 5) for _ in range(6)]
    for a in sample:
        assert equivalent(L, a, a)
        for b in sample:
            assert equivalent(L, a, b) == equivalent(L, b, a)
            for c in sample:
                if equivalent(L, a, b) and equivalent(L, b, c):
                    assert equivalent(L, a, c)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(list(LogicId)), st.integers(0, 2**32 - 1))
def test_countermodels_refute(L, seed):
    f = random_formula(random.Random(seed), ["p", "q"], 3, 9)
    cm = countermodel(L, f)
    if cm is None:
        assert provable(L, f)
    else:
        assert in_class(cm.model, L) and not satisfies(cm, f)
        assert satisfiable(L, parse("~(" + str(f) + ")"))
