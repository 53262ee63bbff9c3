"""Cluster matching, labeled amalgams and the Lyndon interpolation counterexample.

A labeled amalgam of two pointed models is a frame whose worlds carry a pair
of labels, one world of each model.  The two label maps have to be
p-morphisms and every label pair has to be related by the depth-0 arrow.
The builders below follow the case analysis on where the two evaluation
points sit (root or final cluster) for each finite-height class.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Sequence

from .decide import Ls12Class, provable
from .formula import Implies, PolaritySet, parse, render
from .interp import arrow, arrow_relation
from .kripke import (
    Frame,
    LogicId,
    Model,
    PointedModel,
    clusters,
    frame_in_class,
    in_class,
    random_model,
    satisfies,
    star_model,
)


class AmalgamError(RuntimeError):
    """A witness promised by the matching lemmas could not be found."""


class PremiseError(ValueError):
    """The input pair does not satisfy the hypothesis of a construction."""


# ---------------------------------------------------------------- matching


@dataclass(frozen=True)
class MatchReport:
    """Matched pairs of final clusters with the witnesses of both clauses.

    Each entry of ``pairs`` is ``(i, j, forth, back)``: cluster ``i`` of the
    first model matches cluster ``j`` of the second, ``forth`` maps every
    world of cluster ``i`` to a ->0 partner and ``back`` does the same for
    the worlds of cluster ``j``.
    """

    pairs: tuple

    def matched(self) -> set[tuple[int, int]]:
        return {(i, j) for i, j, _, _ in self.pairs}


def _arrow0(m0: Model, m1: Model, ps: PolaritySet) -> list[int]:
    return arrow_relation(m0, m1, ps, 0)


def _match_witnesses(rel0: list[int], c0: Iterable[int], c1: Iterable[int]):
    c0, c1 = sorted(c0), sorted(c1)
    forth, back = {}, {}
    for u0 in c0:
        hit = next((u1 for u1 in c1 if rel0[u0] >> u1 & 1), None)
        if hit is None:
            return None
        forth[u0] = hit
    for u1 in c1:
        hit = next((u0 for u0 in c0 if rel0[u0] >> u1 & 1), None)
        if hit is None:
            return None
        back[u1] = hit
    return forth, back


def cluster_matches(m0: Model, c0: Iterable[int], m1: Model, c1: Iterable[int], ps: PolaritySet) -> bool:
    """Whether every world of ``c0`` has a ->0 partner in ``c1`` and conversely."""
    return _match_witnesses(_arrow0(m0, m1, ps), c0, c1) is not None


def match_report(m0: Model, m1: Model, ps: PolaritySet) -> MatchReport:
    """All matched pairs of final clusters of the two models."""
    rel0 = _arrow0(m0, m1, ps)
    f0, f1 = clusters(m0).final_blocks(), clusters(m1).final_blocks()
    pairs = []
    for i, c0 in enumerate(f0):
        for j, c1 in enumerate(f1):
            w = _match_witnesses(rel0, c0, c1)
            if w is not None:
                pairs.append((i, j, tuple(sorted(w[0].items())), tuple(sorted(w[1].items()))))
    return MatchReport(tuple(pairs))


def _total(relation: set, a: Sequence, b: Sequence) -> bool:
    return all(any((x, y) in relation for y in b) for x in a) and all(
        any((x, y) in relation for x in a) for y in b
    )


def marriage_pick(
    relation: Iterable[tuple[Hashable, Hashable]],
    a: Sequence[Hashable] = ("a0", "a1"),
    b: Sequence[Hashable] = ("b0", "b1"),
) -> tuple[Hashable, Hashable]:
    """Distinct ``c, d`` in ``b`` with ``(a[0], c)`` and ``(a[1], d)`` in the relation.

    Both sides must be covered by the relation.  The straight assignment is
    preferred when it is available; otherwise the crossed one is forced.
    """
    rel = set(relation)
    a0, a1 = a
    b0, b1 = b
    if not _total(rel, a, b):
        raise PremiseError("relation does not cover both sides")
    if (a0, b0) in rel and (a1, b1) in rel:
        return b0, b1
    return b1, b0


# ---------------------------------------------------------------- amalgams


@dataclass(frozen=True)
class LabeledAmalgam:
    """A frame whose worlds are labeled by one world of each input model.

    ``point`` is the distinguished world whose labels are the two
    evaluation points.  Distinct worlds may carry the same label pair.
    """

    frame: Frame
    label0: tuple
    label1: tuple
    point: int
    case: str = ""

    def labels(self) -> list[tuple[int, int]]:
        return list(zip(self.label0, self.label1))

    def to_data(self) -> dict:
        return {
            "worlds": [{"id": i, "label": [a, b]} for i, (a, b) in enumerate(self.labels())],
            "relation": sorted([a, b] for a, b in self.frame.relation),
            "point": self.point,
            "case": self.case,
        }


def _assemble(root: tuple[int, int] | None, finals: Sequence[Sequence[tuple[int, int]]], case: str) -> LabeledAmalgam:
    """Root labeled ``root`` (when given) below the listed final clusters."""
    bottom = (frozenset(),) if root is not None else ()
    m = star_model(bottom, [tuple(frozenset() for _ in c) for c in finals])
    labels = ([root] if root is not None else []) + [pair for c in finals for pair in c]
    return LabeledAmalgam(m.frame, tuple(x for x, _ in labels), tuple(y for _, y in labels), 0, case)


def _where(m: Model, w: int) -> tuple[str, int | None, list[list[int]]]:
    part = clusters(m)
    finals = [sorted(b) for b in part.final_blocks()]
    for k, c in enumerate(finals):
        if w in c:
            return "final", k, finals
    return "root", None, finals


def _join(kind: str, rel0: list[int], c0: Sequence[int], c1: Sequence[int], why: str) -> list[tuple[int, int]]:
    """Final cluster of the amalgam over two matching clusters."""
    w = _match_witnesses(rel0, c0, c1)
    if w is None:
        raise AmalgamError(f"{why}: clusters {list(c0)} and {list(c1)} do not match")
    if kind == "point":
        return [(c0[0], c1[0])]
    if kind == "pair":
        rel = {(u0, u1) for u0 in c0 for u1 in c1 if rel0[u0] >> u1 & 1}
        u1, v1 = marriage_pick(rel, tuple(c0), tuple(c1))
        return [(c0[0], u1), (c0[1], v1)]
    return [(u0, u1) for u0 in c0 for u1 in c1 if rel0[u0] >> u1 & 1]


def _first_match(rel0: list[int], c: Sequence[int], others: Sequence[Sequence[int]], forward: bool) -> int:
    for k, o in enumerate(others):
        pair = (c, o) if forward else (o, c)
        if _match_witnesses(rel0, *pair) is not None:
            return k
    raise AmalgamError(f"no cluster matches {list(c)}")


def _mirror(a: LabeledAmalgam) -> LabeledAmalgam:
    return LabeledAmalgam(a.frame, a.label1, a.label0, a.point, a.case)


def _swap_ps(ps: PolaritySet) -> PolaritySet:
    return ps.dual()


def _build_star(L: LogicId, m0: Model, w0: int, m1: Model, w1: int, ps: PolaritySet) -> LabeledAmalgam:
    shape = L.shape
    rel0 = _arrow0(m0, m1, ps)
    kind = shape.final_kind
    where0, k0, f0 = _where(m0, w0)
    where1, k1, f1 = _where(m1, w1)

    if shape.final_count == "one":
        # one final cluster on each side; the rank-2 premise makes them match
        cluster = _join(kind, rel0, f0[0], f1[0], "final clusters")
        return _assemble((w0, w1), [cluster], f"{where0}/{where1}")

    if where0 == "final" and where1 == "final":
        cluster = _join(kind, rel0, f0[k0], f1[k1], "clusters of the points")
        copies = 2 if shape.final_count == "two" else 1
        return _assemble((w0, w1), [cluster] * copies, "final/final")

    if where0 == "final" and where1 == "root":
        finals = [_join(kind, rel0, f0[k0], c1, "cluster of the first point") for c1 in f1]
        return _assemble((w0, w1), finals, "final/root")

    if where0 == "root" and where1 == "final":
        # mirror image of the previous case: swap the models and dualise P
        flipped = _build_star(L, m1, w1, m0, w0, _swap_ps(ps))
        a = _mirror(flipped)
        return LabeledAmalgam(a.frame, a.label0, a.label1, a.point, "root/final")

    # both points are roots
    if shape.final_count == "two":
        match = {(i, j) for i in range(2) for j in range(2) if _match_witnesses(rel0, f0[i], f1[j]) is not None}
        d0, d1 = marriage_pick(match, (0, 1), (0, 1))
        finals = [_join(kind, rel0, f0[0], f1[d0], "root case"), _join(kind, rel0, f0[1], f1[d1], "root case")]
        return _assemble((w0, w1), finals, "root/root")
    if kind == "point":
        star = [(u0[0], u1[0]) for u0 in f0 for u1 in f1 if rel0[u0[0]] >> u1[0] & 1]
        return _assemble((w0, w1), [[pair] for pair in star], "root/root")
    finals = []
    for c0 in f0:
        finals.append(_join(kind, rel0, c0, f1[_first_match(rel0, c0, f1, True)], "root case"))
    for c1 in f1:
        finals.append(_join(kind, rel0, f0[_first_match(rel0, c1, f0, False)], c1, "root case"))
    return _assemble((w0, w1), finals, "root/root")


def _check_inputs(L: LogicId, pm0: PointedModel, pm1: PointedModel, ps: PolaritySet) -> None:
    if L.nip_rank is None:
        raise PremiseError(f"{L.name} has no amalgam construction")
    for i, pm in enumerate((pm0, pm1)):
        if not in_class(pm.model, L):
            raise PremiseError(f"model {i} is not in class {L.name}")
    if not arrow(pm0, pm1, ps, L.nip_rank):
        raise PremiseError(f"the points are not related by ->{L.nip_rank}")


def build_amalgam(L: LogicId, pm0: PointedModel, pm1: PointedModel, ps: PolaritySet) -> LabeledAmalgam:
    """Labeled amalgam of two pointed models related at the class rank."""
    _check_inputs(L, pm0, pm1, ps)
    m0, m1, w0, w1 = pm0.model, pm1.model, pm0.point, pm1.point
    if L is LogicId.Triv:
        return _assemble(None, [[(w0, w1)]], "single point")
    if L is LogicId.S5:
        rel0 = _arrow0(m0, m1, ps)
        cluster = [(x0, x1) for x0 in range(m0.world_count) for x1 in range(m1.world_count) if rel0[x0] >> x1 & 1]
        a = _assemble(None, [cluster], "cluster of related pairs")
        return LabeledAmalgam(a.frame, a.label0, a.label1, cluster.index((w0, w1)), a.case)
    return _build_star(L, m0, w0, m1, w1, ps)


# ---------------------------------------------------------------- verification


NIP_CLAUSES = ("class", "point", "forth", "back0", "back1", "local")


@dataclass(frozen=True)
class NipReport:
    """Outcome of each amalgam condition, plus the first failure."""

    clauses: dict
    diagnostic: str | None

    def __bool__(self) -> bool:
        return all(self.clauses.values())


def verify_nip(
    amalgam: LabeledAmalgam,
    L: LogicId,
    pm0: PointedModel,
    pm1: PointedModel,
    ps: PolaritySet,
    w_star: int | None = None,
) -> NipReport:
    """Check the six amalgam conditions for the pair (pm0, pm1)."""
    frame = amalgam.frame
    m0, m1 = pm0.model, pm1.model
    w_star = amalgam.point if w_star is None else w_star
    n = frame.world_count
    lab0, lab1 = amalgam.label0, amalgam.label1
    notes: dict[str, str] = {}

    ok_class = frame_in_class(frame, L)
    if not ok_class:
        notes["class"] = f"frame is not a {L.name} frame"

    ok_point = 0 <= w_star < n and lab0[w_star] == pm0.point and lab1[w_star] == pm1.point
    if not ok_point:
        notes["point"] = f"world {w_star} is not labeled ({pm0.point}, {pm1.point})"

    ok_labels = len(lab0) == n and len(lab1) == n
    ok_labels = ok_labels and all(0 <= a < m0.world_count for a in lab0) and all(0 <= b < m1.world_count for b in lab1)

    ok_forth = ok_labels
    if ok_labels:
        for x, y in sorted(frame.relation):
            if not (m0.frame.sees(lab0[x], lab0[y]) and m1.frame.sees(lab1[x], lab1[y])):
                ok_forth = False
                notes["forth"] = f"{x} R* {y} but labels {amalgam.labels()[x]} -> {amalgam.labels()[y]} are unrelated"
                break
    else:
        notes["forth"] = "label maps are not total into the models"

    def back(lab, model, name):
        if not ok_labels:
            notes[name] = "label maps are not total into the models"
            return False
        for x in range(n):
            reached = {lab[y] for y in frame.succ_list(x)}
            missing = set(model.frame.succ_list(lab[x])) - reached
            if missing:
                notes[name] = f"world {x} has no successor labeled {min(missing)}"
                return False
        return True

    ok_back0 = back(lab0, m0, "back0")
    ok_back1 = back(lab1, m1, "back1")

    ok_local = ok_labels
    if ok_labels:
        rel0 = _arrow0(m0, m1, ps)
        for x in range(n):
            if not rel0[lab0[x]] >> lab1[x] & 1:
                ok_local = False
                notes["local"] = f"label pair {amalgam.labels()[x]} of world {x} is not ->0 related"
                break

    clauses = dict(zip(NIP_CLAUSES, (ok_class, ok_point, ok_forth, ok_back0, ok_back1, ok_local)))
    first = next((notes[c] for c in NIP_CLAUSES if not clauses[c]), None)
    return NipReport(clauses, first)


# ---------------------------------------------------------------- matching lemmas


class LemmaPremiseError(ValueError):
    """The instance does not satisfy the hypothesis of the lemma."""


@dataclass(frozen=True)
class MatchingInstance:
    """Two pointed models and the polarity sets compared by the arrow."""

    m0: Model
    w0: int
    m1: Model
    w1: int
    ps: PolaritySet


@dataclass(frozen=True)
class LemmaCheck:
    """Whether the conclusion held, with the witnesses that realize it."""

    lemma: str
    holds: bool
    witnesses: Any = None

    def __bool__(self) -> bool:
        return self.holds


LEMMAS = ("4.2", "4.3", "4.4", "4.5", "4.6", "4.7")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise LemmaPremiseError(msg)


def check_matching_lemma(which: str, instance: MatchingInstance | Iterable) -> LemmaCheck:
    """Test the conclusion of a matching lemma on an instance meeting its hypothesis.

    ``which`` is one of "4.2" (final points related at rank 1), "4.3" (a
    final point and a root at rank 2), "4.4" (two roots at rank 3), "4.5"
    (a relation between two-element sets), "4.6" (matching two-element
    clusters) and "4.7" (two roots of two-cluster models at rank 3).  The
    conclusion is established by direct search, independent of the
    amalgam builders.
    """
    if which == "4.5":
        rel = set(instance)
        a, b = ("a0", "a1"), ("b0", "b1")
        _require(_total(rel, a, b), "relation does not cover both sides")
        hits = [(c, d) for c in b for d in b if c != d and (a[0], c) in rel and (a[1], d) in rel]
        return LemmaCheck(which, bool(hits), hits[0] if hits else None)
    if which not in LEMMAS:
        raise ValueError(f"unknown lemma {which!r}")
    inst = instance
    assert isinstance(inst, MatchingInstance)
    m0, m1, w0, w1, ps = inst.m0, inst.m1, inst.w0, inst.w1, inst.ps
    where0, k0, f0 = _where(m0, w0)
    where1, k1, f1 = _where(m1, w1)
    rel0 = _arrow0(m0, m1, ps)

    def matches(c0, c1):
        return _match_witnesses(rel0, c0, c1) is not None

    if which == "4.2":
        _require(where0 == "final" and where1 == "final", "points must lie in final clusters")
        _require(arrow(m0.at(w0), m1.at(w1), ps, 1), "points are not ->1 related")
        return LemmaCheck(which, matches(f0[k0], f1[k1]), (k0, k1))
    if which == "4.3":
        _require(where0 == "final", "first point must lie in a final cluster")
        _require(clusters(m1).root is not None and where1 == "root", "second point must be a root")
        _require(arrow(m0.at(w0), m1.at(w1), ps, 2), "points are not ->2 related")
        bad = [j for j, c1 in enumerate(f1) if not matches(f0[k0], c1)]
        return LemmaCheck(which, not bad, bad)
    if which == "4.4":
        _require(where0 == "root" and where1 == "root", "both points must be roots")
        _require(clusters(m0).root is not None and clusters(m1).root is not None, "both points must be roots")
        _require(arrow(m0.at(w0), m1.at(w1), ps, 3), "roots are not ->3 related")
        forth = {i: next((j for j, c1 in enumerate(f1) if matches(c0, c1)), None) for i, c0 in enumerate(f0)}
        back = {j: next((i for i, c0 in enumerate(f0) if matches(c0, c1)), None) for j, c1 in enumerate(f1)}
        ok = None not in forth.values() and None not in back.values()
        return LemmaCheck(which, ok, (forth, back))
    if which == "4.6":
        _require(where0 == "final" and where1 == "final", "points must lie in final clusters")
        c0, c1 = f0[k0], f1[k1]
        _require(len(c0) == 2 and len(c1) == 2, "clusters must have two elements")
        _require(matches(c0, c1), "clusters do not match")
        y0, z0 = c0
        hits = [(u, v) for u in c1 for v in c1 if u != v and rel0[y0] >> u & 1 and rel0[z0] >> v & 1]
        return LemmaCheck(which, bool(hits), hits[0] if hits else None)
    # 4.7
    _require(where0 == "root" and where1 == "root", "both points must be roots")
    _require(len(f0) == 2 and len(f1) == 2, "both models need exactly two final clusters")
    _require(arrow(m0.at(w0), m1.at(w1), ps, 3), "roots are not ->3 related")
    hits = [(d0, d1) for d0 in range(2) for d1 in range(2) if d0 != d1 and matches(f0[0], f1[d0]) and matches(f0[1], f1[d1])]
    return LemmaCheck(which, bool(hits), hits[0] if hits else None)


def _random_pair(L: LogicId, vars_: Sequence[str], rng: random.Random, max_worlds: int = 8):
    """Two random models of ``L`` and random polarity sets.

    The second model is often a perturbed copy of the first, which makes
    the arrow premises far more likely to hold.
    """
    m0 = random_model(L, vars_, rng, max_worlds)
    if rng.random() < 0.6:
        val = list(m0.valuation)
        for i in range(len(val)):
            if rng.random() < 0.3:
                val[i] = frozenset(v for v in vars_ if rng.random() < 0.5)
        m1 = Model(m0.frame, tuple(val))
    else:
        m1 = random_model(L, vars_, rng, max_worlds)
    ps = PolaritySet.of([v for v in vars_ if rng.random() < 0.6], [v for v in vars_ if rng.random() < 0.6])
    return m0, m1, ps


def random_premise_pairs(L: LogicId, rng: random.Random, count: int, vars_: Sequence[str] = ("p", "q")):
    """Random (pm0, pm1, ps) with pm0 ->n pm1 at the class rank of ``L``."""
    vars_ = list(vars_)
    found = tries = 0
    while found < count and tries < 400 * count:
        tries += 1
        m0, m1, ps = _random_pair(L, vars_, rng)
        w0 = rng.randrange(m0.world_count)
        row = arrow_relation(m0, m1, ps, L.nip_rank)[w0]
        targets = [y for y in range(m1.world_count) if row >> y & 1]
        if not targets:
            continue
        found += 1
        yield m0.at(w0), m1.at(rng.choice(targets)), ps


LEMMA_LOGICS = {
    "4.2": (LogicId.LP2_w_1, LogicId.S4_4, LogicId.LV_w_1),
    "4.3": (LogicId.LP2_w_1, LogicId.GW, LogicId.LV_2_1),
    "4.4": (LogicId.LP2_w_1, LogicId.GW, LogicId.LP2_2_1),
    "4.6": (LogicId.LP2_2_1, LogicId.LV_2_1, LogicId.LS_2_1),
    "4.7": (LogicId.LV_w_1, LogicId.GV, LogicId.LV_2_1),
}


def random_lemma_instances(lemma: str, rng: random.Random, count: int, vars_: Sequence[str] = ("p", "q")):
    """Random instances meeting the hypothesis of a matching lemma."""
    logics = LEMMA_LOGICS[lemma]
    vars_ = list(vars_)
    found = tries = 0
    while found < count and tries < 400 * count:
        tries += 1
        L = rng.choice(logics)
        m0, m1, ps = _random_pair(L, vars_, rng)
        inst = MatchingInstance(m0, rng.randrange(m0.world_count), m1, rng.randrange(m1.world_count), ps)
        try:
            result = check_matching_lemma(lemma, inst)
        except LemmaPremiseError:
            continue
        found += 1
        yield inst, result



# ---------------------------------------------------------------- Lyndon failure


PREMISE = parse("p & [](([]~p) | p)")
CONCLUSION = parse("[](p | q | []~q)")


def figure_model_left() -> tuple[Model, int]:
    """Two p-worlds in one cluster below a final world without p; the point is 0."""
    p = frozenset({"p"})
    return star_model((p, p), [(frozenset(),)]), 0


def figure_model_right() -> tuple[Model, int]:
    """A cluster of a p-world and an empty world below a final q-world; the point is 0."""
    return star_model((frozenset({"p"}), frozenset()), [(frozenset({"q"}),)]), 0


@dataclass(frozen=True)
class LipFailureReport:
    """The five checks showing that no Lyndon interpolant exists."""

    premise_valid: bool
    left_model_ok: bool
    survivors: tuple
    right_model_ok: bool
    no_interpolant: bool
    details: dict

    def clauses(self) -> dict:
        expected = {Ls12Class.P, Ls12Class.P_OR_BOX_DIA_P, Ls12Class.DIA_P, Ls12Class.TOP}
        return {
            "a": self.premise_valid,
            "b": self.left_model_ok,
            "c": set(self.survivors) == expected,
            "d": self.right_model_ok,
            "e": self.no_interpolant,
        }

    def __bool__(self) -> bool:
        return all(self.clauses().values())

    def to_data(self) -> dict:
        return {
            "premise": render(PREMISE),
            "conclusion": render(CONCLUSION),
            "clauses": self.clauses(),
            "survivors": [c.value for c in self.survivors],
            "details": self.details,
        }

    def to_text(self) -> str:
        c = self.clauses()
        mark = {True: "ok", False: "FAILED"}
        lines = [
            f"premise    : {render(PREMISE)}",
            f"conclusion : {render(CONCLUSION)}",
            f"(a) premise -> conclusion valid over {LogicId.LP2_1_w.name}: {mark[c['a']]}",
            f"(b) left model satisfies the premise and refutes []<>p at its point: {mark[c['b']]}",
            f"(c) classes implied by the premise over {LogicId.LS_1_2.name}: "
            + ", ".join(s.value for s in self.survivors)
            + f" ({mark[c['c']]})",
            f"(d) right model satisfies every survivor and refutes the conclusion: {mark[c['d']]}",
            f"(e) no positive-in-p formula interpolates, for any logic between "
            f"{LogicId.LP2_1_w.name} and {LogicId.LS_1_2.name}: {mark[c['e']]}",
        ]
        return "\n".join(lines)


def lip_failure_report() -> LipFailureReport:
    """Mechanical check that the premise/conclusion pair has no Lyndon interpolant."""
    a = provable(LogicId.LP2_1_w, Implies(PREMISE, CONCLUSION))

    m0, x0 = figure_model_left()
    box_dia_p = parse("[]<>p")
    b = in_class(m0, LogicId.LS_1_2) and satisfies(m0.at(x0), PREMISE) and not satisfies(m0.at(x0), box_dia_p)

    survivors = tuple(c for c in Ls12Class if provable(LogicId.LS_1_2, Implies(PREMISE, c.formula)))

    m1, x1 = figure_model_right()
    d = (
        in_class(m1, LogicId.LS_1_2)
        and all(satisfies(m1.at(x1), c.formula) for c in survivors)
        and not satisfies(m1.at(x1), CONCLUSION)
    )
    e = a and all(not provable(LogicId.LS_1_2, Implies(c.formula, CONCLUSION)) for c in survivors)
    details = {
        "left_model": {"valuation": [sorted(v) for v in m0.valuation], "point": x0},
        "right_model": {"valuation": [sorted(v) for v in m1.valuation], "point": x1},
        "rejected": [c.value for c in Ls12Class if c not in survivors],
    }
    return LipFailureReport(a, b, survivors, d, e, details)
