import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ulip.amalgam import (
    LEMMA_LOGICS,
    NIP_CLAUSES,
    LabeledAmalgam,
    LemmaPremiseError,
    MatchingInstance,
    PremiseError,
    build_amalgam,
    check_matching_lemma,
    cluster_matches,
    lip_failure_report,
    marriage_pick,
    match_report,
    random_lemma_instances,
    random_premise_pairs,
    verify_nip,
)
from ulip.decide import Ls12Class
from ulip.formula import PolaritySet
from ulip.interp import arrow
from ulip.kripke import NIP_LOGICS, Frame, LogicId, Model, clusters, star_model

P = frozenset({"p"})
E = frozenset()
ONLY_P = PolaritySet.of(["p"], [])
BOTH_P = PolaritySet.of(["p"], ["p"])

A, B = ("a0", "a1"), ("b0", "b1")
ALL_PAIRS = [(a, b) for a in A for b in B]


def point(val):
    return Model(Frame(1, frozenset({(0, 0)})), (val,))


class TestClusterMatches:
    def test_identical_points(self):
        m = point(P)
        assert cluster_matches(m, {0}, m, {0}, BOTH_P)

    def test_positive_atom_blocks(self):
        assert not cluster_matches(point(P), {0}, point(E), {0}, ONLY_P)

    def test_both_directions_needed(self):
        m0 = Model(Frame.closed(2, [(0, 1), (1, 0)]), (P, E))
        # every world of m1 is answered, but the p-world of m0 has no partner
        assert not cluster_matches(m0, {0, 1}, point(E), {0}, ONLY_P)
        assert cluster_matches(point(E), {0}, m0, {0, 1}, ONLY_P)

    def test_report_lists_witnesses(self):
        m0 = star_model((E,), [(P, E)])
        m1 = star_model((E,), [(P,), (E,)])
        rep = match_report(m0, m1, BOTH_P)
        assert rep.matched() == set()
        rep = match_report(m1, m0, ONLY_P)
        assert rep.matched() == {(1, 0)}
        (_, _, forth, back), = rep.pairs
        # the single final world of m1 has a partner in the final cluster of m0
        assert set(dict(forth)) == {2} and dict(forth)[2] in {1, 2}
        # every world of that cluster is answered by the same world of m1
        assert dict(back) == {1: 2, 2: 2}


class TestMarriagePick:
    def test_straight(self):
        assert marriage_pick({("a0", "b0"), ("a1", "b1")}) == ("b0", "b1")

    def test_crossed(self):
        assert marriage_pick({("a0", "b1"), ("a1", "b0")}) == ("b1", "b0")

    def test_full(self):
        assert marriage_pick(ALL_PAIRS) == ("b0", "b1")

    def test_rejects_uncovered(self):
        with pytest.raises(PremiseError):
            marriage_pick({("a0", "b0"), ("a1", "b0")})


def _covers(rel):
    return all(any((a, b) in rel for b in B) for a in A) and all(any((a, b) in rel for a in A) for b in B)


def test_lemma_4_5_exhaustive():
    relations = [{ALL_PAIRS[i] for i in range(4) if mask >> i & 1} for mask in range(16)]
    covering = [rel for rel in relations if _covers(rel)]
    # edge covers of the 4-cycle K(2,2): 2 perfect matchings, 4 three-edge sets, the full set
    assert len(covering) == 7
    for rel in covering:
        c, d = marriage_pick(rel)
        assert c != d and ("a0", c) in rel and ("a1", d) in rel
        assert check_matching_lemma("4.5", rel)
    for rel in relations:
        if not _covers(rel):
            with pytest.raises(LemmaPremiseError):
                check_matching_lemma("4.5", rel)


class TestBuildAmalgam:
    def test_triv(self):
        m0, m1 = point(P), point(P)
        a = build_amalgam(LogicId.Triv, m0.at(0), m1.at(0), BOTH_P)
        assert a.frame.world_count == 1 and a.labels() == [(0, 0)]

    def test_gv_roots(self):
        m0 = star_model((E,), [(P,), (E,)])
        m1 = star_model((E,), [(E,), (P,)])
        a = build_amalgam(LogicId.GV, m0.at(0), m1.at(0), BOTH_P)
        assert a.case == "root/root"
        assert a.labels()[a.point] == (0, 0)
        tops = sorted(a.labels()[w] for w in range(3) if w != a.point)
        # the p-top of one model pairs with the p-top of the other
        assert tops == [(1, 2), (2, 1)]
        assert verify_nip(a, LogicId.GV, m0.at(0), m1.at(0), BOTH_P)

    def test_s44_cluster_of_related_pairs(self):
        m0 = star_model((E,), [(P, E)])
        m1 = star_model((P,), [(P, E)])
        a = build_amalgam(LogicId.S4_4, m0.at(0), m1.at(0), ONLY_P)
        assert a.labels()[a.point] == (0, 0)
        final = {a.labels()[w] for w in range(a.frame.world_count) if w != a.point}
        assert final == {(1, 1), (2, 1), (2, 2)}
        assert verify_nip(a, LogicId.S4_4, m0.at(0), m1.at(0), ONLY_P)

    def test_s5_all_pairs(self):
        m0 = Model(Frame.closed(2, [(0, 1), (1, 0)]), (P, E))
        a = build_amalgam(LogicId.S5, m0.at(0), m0.at(0), ONLY_P)
        assert set(a.labels()) == {(0, 0), (1, 0), (1, 1)}

    def test_rejects_premise_violation(self):
        with pytest.raises(PremiseError):
            build_amalgam(LogicId.Triv, point(P).at(0), point(E).at(0), ONLY_P)

    def test_rejects_models_outside_class(self):
        with pytest.raises(PremiseError):
            build_amalgam(LogicId.Triv, star_model((E,), [(E,)]).at(0), point(E).at(0), ONLY_P)

    def test_rejects_logic_without_rank(self):
        m = star_model((E, E), [(E,)])
        with pytest.raises(PremiseError):
            build_amalgam(LogicId.LS_1_2, m.at(0), m.at(0), ONLY_P)

    def test_json(self):
        m0 = star_model((E,), [(P,), (E,)])
        a = build_amalgam(LogicId.GW, m0.at(0), m0.at(0), BOTH_P)
        data = json.loads(json.dumps(a.to_data()))
        assert [w["label"] for w in data["worlds"]] == [list(x) for x in a.labels()]


class TestVerifyNip:
    def setup_method(self):
        self.m0 = star_model((E,), [(P,)])
        self.m1 = star_model((E,), [(P,)])
        self.good = build_amalgam(LogicId.GW2, self.m0.at(0), self.m1.at(0), ONLY_P)

    def check(self, a):
        return verify_nip(a, LogicId.GW2, self.m0.at(0), self.m1.at(0), ONLY_P)

    def test_good(self):
        rep = self.check(self.good)
        assert rep and rep.diagnostic is None
        assert set(rep.clauses) == set(NIP_CLAUSES)

    def test_label_violating_local_transfer(self):
        g = self.good
        top = 1 - g.point
        bad = LabeledAmalgam(g.frame, g.label0[:top] + (1,) + g.label0[top + 1:],
                             g.label1[:top] + (0,) + g.label1[top + 1:], g.point)
        rep = self.check(bad)
        assert not rep.clauses["local"] or not rep.clauses["forth"]
        assert rep.diagnostic

    def test_local_clause_alone(self):
        # a single world labeled by a p-world and a world without p
        m0, m1 = point(P), point(E)
        a = LabeledAmalgam(Frame(1, frozenset({(0, 0)})), (0,), (0,), 0)
        rep = verify_nip(a, LogicId.Triv, m0.at(0), m1.at(0), ONLY_P)
        assert not rep.clauses["local"] and rep.clauses["class"] and rep.clauses["back0"]
        assert "not ->0 related" in rep.diagnostic

    def test_three_chain_is_not_gw2(self):
        frame = Frame.closed(3, [(0, 1), (1, 2)])
        a = LabeledAmalgam(frame, (0, 1, 1), (0, 1, 1), 0)
        rep = self.check(a)
        assert not rep.clauses["class"] and rep.diagnostic.startswith("frame is not")

    def test_wrong_point(self):
        a = LabeledAmalgam(self.good.frame, self.good.label0, self.good.label1, 1 - self.good.point)
        assert not self.check(a).clauses["point"]

    def test_back_condition(self):
        # the root alone misses the top of both models
        a = LabeledAmalgam(Frame(1, frozenset({(0, 0)})), (0,), (0,), 0)
        rep = self.check(a)
        assert not rep.clauses["back0"] and not rep.clauses["back1"]


class TestLemmas:
    @pytest.mark.parametrize("lemma", sorted(LEMMA_LOGICS))
    def test_random_instances(self, lemma):
        results = list(random_lemma_instances(lemma, random.Random(2), 40))
        assert len(results) == 40
        assert all(res for _, res in results)

    def test_lemma_4_2_premise(self):
        m0 = star_model((E,), [(P,)])
        with pytest.raises(LemmaPremiseError):
            check_matching_lemma("4.2", MatchingInstance(m0, 0, m0, 1, ONLY_P))

    def test_lemma_4_4_premise_rank(self):
        m0 = star_model((E,), [(P,)])
        m1 = star_model((E,), [(E,)])
        with pytest.raises(LemmaPremiseError):
            check_matching_lemma("4.4", MatchingInstance(m0, 0, m1, 0, ONLY_P))

    def test_lemma_4_7_witnesses_distinct(self):
        m0 = star_model((E,), [(P, P), (E, E)])
        m1 = star_model((E,), [(E, E), (P, P)])
        res = check_matching_lemma("4.7", MatchingInstance(m0, 0, m1, 0, BOTH_P))
        assert res and res.witnesses == (1, 0)

    def test_lemma_4_6_on_pairs(self):
        m = star_model((E,), [(P, E)])
        res = check_matching_lemma("4.6", MatchingInstance(m, 1, m, 2, BOTH_P))
        (u, v) = res.witnesses
        assert res and u != v

    def test_unknown(self):
        with pytest.raises(ValueError):
            check_matching_lemma("9.9", MatchingInstance(point(E), 0, point(E), 0, ONLY_P))


class TestLipFailure:
    def test_all_clauses(self):
        rep = lip_failure_report()
        assert rep.clauses() == {"a": True, "b": True, "c": True, "d": True, "e": True}
        assert bool(rep)

    def test_survivors(self):
        assert set(lip_failure_report().survivors) == {
            Ls12Class.P, Ls12Class.P_OR_BOX_DIA_P, Ls12Class.DIA_P, Ls12Class.TOP,
        }

    def test_deterministic(self):
        assert lip_failure_report().to_data() == lip_failure_report().to_data()
        assert json.loads(json.dumps(lip_failure_report().to_data()))["clauses"]["e"] is True

    def test_text(self):
        text = lip_failure_report().to_text()
        lines = [ln for ln in text.splitlines() if ln.startswith("(")]
        assert len(lines) == 5 and all(ln.endswith("ok") or ln.endswith("(ok)") for ln in lines)


# ---------------------------------------------------------------- properties


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(NIP_LOGICS), st.integers(0, 2**32 - 1))
def test_amalgam_for_random_premise_pair(L, seed):
    (pm0, pm1, ps), = random_premise_pairs(L, random.Random(seed), 1)
    assert arrow(pm0, pm1, ps, L.nip_rank)
    a = build_amalgam(L, pm0, pm1, ps)
    rep = verify_nip(a, L, pm0, pm1, ps)
    assert rep, rep.diagnostic


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_final_points_related_at_rank_one_match(seed):
    (inst, res), = random_lemma_instances("4.2", random.Random(seed), 1)
    part0 = clusters(inst.m0)
    c0 = part0.blocks[part0.block_of(inst.w0)]
    part1 = clusters(inst.m1)
    c1 = part1.blocks[part1.block_of(inst.w1)]
    assert res and cluster_matches(inst.m0, c0, inst.m1, c1, inst.ps)


def test_marriage_pick_on_integer_sides():
    assert marriage_pick({(0, 11), (1, 10)}, a=(0, 1), b=(10, 11)) == (11, 10)
