"""Intermediate logics over finite posets and their modal companions.

Each supported intermediate logic is paired with a modal companion: an
intuitionistic formula is provable exactly when its Goedel translation is
provable in the companion.  The skeleton models (posets obtained from the
companion frames by collapsing clusters) give a direct semantics, used
both as a cross-check and to compute uniform Lyndon interpolants.

Interpolants are built from a directed simulation.  Point x simulates into
y for the polarity pair P when every P-formula true at x is true at y.  The
relation is a greatest fixpoint, and each pair removed from it comes with
a separating formula assembled from the earlier removals.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .decide import provable
from .formula import (
    BOTTOM,
    TOP,
    And,
    Bottom,
    Box,
    Formula,
    Implies,
    Or,
    PolaritySet,
    Top,
    Var,
    conj,
    disj,
    godel_translate,
    is_intuitionistic,
    is_polarity_formula,
    polarities,
    render_int,
    size,
    substitute,
    variables,
)
from .interp import FamilyTooLarge, removal_residue
from .kripke import Frame, LogicId, Model, satisfies, truth_set, valuations


class IntLogicId(enum.Enum):
    Cl_int = ("cl", LogicId.S5, "Cl: classical logic, companion S5")
    LS = ("ls", LogicId.GW2, "LS: the two-element chain, companion GW.2 = Gamma(LS,1,1)")
    LV = ("lv", LogicId.GV, "LV: the three-element fork, companion GV = Gamma(LV,1,1)")
    LP2 = ("lp2", LogicId.GW, "LP2: posets of depth two, companion GW = Gamma(LP2,1,1)")

    def __init__(self, tag, companion, description):
        self.tag = tag
        self.companion = companion
        self.description = description

    @staticmethod
    def from_tag(tag: str) -> "IntLogicId":
        for IL in IntLogicId:
            if IL.tag == tag.lower() or IL.name.lower() == tag.lower():
                return IL
        raise KeyError(f"unknown intermediate logic tag {tag!r}")

    def __repr__(self) -> str:
        return f"IntLogicId.{self.name}"


class IntModelError(ValueError):
    pass


class NotIntuitionistic(ValueError):
    """A modal operator appeared where an intuitionistic formula was expected."""


class TransferNotFound(RuntimeError):
    """No intuitionistic formula has the translation of the modal interpolant."""


# ---------------------------------------------------------------- models


@dataclass(frozen=True)
class IntModel:
    """A finite poset with a persistent valuation.

    ``up[x]`` is the bitmask of the points above x (x included).
    """

    frame: Frame
    valuation: tuple

    def __post_init__(self):
        n = self.frame.world_count
        if len(self.valuation) != n:
            raise IntModelError("valuation must list every point")
        for a, b in self.frame.relation:
            if a != b and (b, a) in self.frame.relation:
                raise IntModelError(f"points {a} and {b} see each other")
            if not self.valuation[a] <= self.valuation[b]:
                raise IntModelError(f"valuation is not persistent from {a} to {b}")

    @property
    def size(self) -> int:
        return self.frame.world_count

    @property
    def up(self) -> tuple:
        return self.frame.successors

    def as_modal(self) -> Model:
        return Model(self.frame, self.valuation)


def int_truth_set(m: IntModel, f: Formula) -> int:
    """Bitmask of the points forcing ``f``."""
    n = m.size
    full = (1 << n) - 1
    up = m.up
    memo: dict[Formula, int] = {}

    def ev(g: Formula) -> int:
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, Var):
            r = sum(1 << i for i, v in enumerate(m.valuation) if g.name in v)
        elif isinstance(g, Bottom):
            r = 0
        elif isinstance(g, Top):
            r = full
        elif isinstance(g, And):
            r = ev(g.left) & ev(g.right)
        elif isinstance(g, Or):
            r = ev(g.left) | ev(g.right)
        elif isinstance(g, Implies):
            bad = ev(g.left) & ~ev(g.right) & full
            r = sum(1 << x for x in range(n) if not up[x] & bad)
        else:
            raise NotIntuitionistic(f"not an intuitionistic formula: {g!r}")
        memo[g] = r
        return r

    return ev(f)


def int_satisfies(m: IntModel, w: int, f: Formula) -> bool:
    return bool(int_truth_set(m, f) >> w & 1)


def _poset(n: int, pairs: Iterable[tuple[int, int]]) -> Frame:
    return Frame.closed(n, pairs)


def _join_models(models: Sequence[IntModel]) -> IntModel:
    """Disjoint union of the listed models."""
    pairs, val, off = [], [], 0
    for m in models:
        pairs.extend((a + off, b + off) for a, b in m.frame.relation)
        val.extend(m.valuation)
        off += m.size
    return IntModel(Frame(off, frozenset(pairs)), tuple(val))


def skeleton_models(IL: IntLogicId, vars_: Iterable[str]) -> list[IntModel]:
    """Rooted skeleton models of the logic over ``vars_``, one per shape up to p-morphism.

    Point models for Cl; a root below one top for LS; a root below two tops
    for LV; a root below a nonempty set of distinct tops for LP2.  The root
    valuation is contained in every top valuation.
    """
    return list(_skeletons(IL, tuple(sorted(set(vars_)))))


@lru_cache(maxsize=None)
def _skeletons(IL: IntLogicId, vars_: tuple) -> tuple:
    vals = valuations(vars_)
    out = []
    if IL is IntLogicId.Cl_int:
        return tuple(IntModel(_poset(1, ()), (v,)) for v in vals)
    for r in vals:
        above = [t for t in vals if r <= t]
        if IL is IntLogicId.LS:
            tops_list = [(t,) for t in above]
        elif IL is IntLogicId.LV:
            tops_list = list(itertools.combinations_with_replacement(above, 2))
        else:
            tops_list = [c for k in range(1, len(above) + 1) for c in itertools.combinations(above, k)]
        for tops in tops_list:
            n = 1 + len(tops)
            out.append(IntModel(_poset(n, [(0, i) for i in range(1, n)]), (r,) + tuple(tops)))
    return tuple(out)


@lru_cache(maxsize=None)
def skeleton_space(IL: IntLogicId, vars_: tuple) -> IntModel:
    """All skeleton models over ``vars_`` as one disjoint union."""
    return _join_models(_skeletons(IL, tuple(sorted(set(vars_)))))


def _require_int(f: Formula) -> None:
    if not is_intuitionistic(f):
        raise NotIntuitionistic("intuitionistic formulas may not contain [] or <>")


def int_valid_on_skeletons(IL: IntLogicId, f: Formula, vars_: Iterable[str] | None = None) -> bool:
    """Direct poset check: ``f`` holds at every point of every skeleton model."""
    _require_int(f)
    space = skeleton_space(IL, tuple(sorted(set(vars_) if vars_ is not None else variables(f))))
    return int_truth_set(space, f) == (1 << space.size) - 1


def int_provable(IL: IntLogicId, f: Formula, cross_check: bool = False) -> bool:
    """Provability via the Goedel translation into the companion.

    With ``cross_check`` the skeleton semantics is consulted as well and a
    disagreement raises AssertionError.
    """
    _require_int(f)
    result = provable(IL.companion, godel_translate(f))
    if cross_check:
        direct = int_valid_on_skeletons(IL, f)
        if direct != result:
            raise AssertionError(f"companion and skeleton semantics disagree on {render_int(f)}")
    return result


def int_equivalent(IL: IntLogicId, a: Formula, b: Formula) -> bool:
    return int_provable(IL, And(Implies(a, b), Implies(b, a)))


# ---------------------------------------------------------------- directed simulation


class _Simulation:
    """Greatest directed simulations for P and its dual on one model.

    ``rel[0][x]`` holds the points y such that every P-formula true at x
    is true at y; ``rel[1]`` is the same for the dual pair.  ``removed``
    records the round in which a pair left the relation.
    """

    def __init__(self, m: IntModel, ps: PolaritySet):
        self.m = m
        self.ps = ps
        n = m.size
        self.up_lists = [[y for y in range(n) if m.up[x] >> y & 1] for x in range(n)]
        atoms = (sorted(ps.positive), sorted(ps.negative))
        self.atoms = atoms
        rel = []
        for kind in (0, 1):
            rows = []
            for x in range(n):
                row = 0
                for y in range(n):
                    if all(p not in m.valuation[x] or p in m.valuation[y] for p in atoms[kind]):
                        row |= 1 << y
                rows.append(row)
            rel.append(rows)
        self.removed: dict[tuple[int, int, int], int] = {}
        for kind in (0, 1):
            for x in range(n):
                for y in range(n):
                    if not rel[kind][x] >> y & 1:
                        self.removed[(kind, x, y)] = 0
        self.history = [rel]
        rnd = 0
        while True:
            rnd += 1
            new = [list(rel[0]), list(rel[1])]
            changed = False
            for kind in (0, 1):
                other = 1 - kind
                for x in range(n):
                    row = rel[kind][x]
                    y_bits = row
                    while y_bits:
                        y = (y_bits & -y_bits).bit_length() - 1
                        y_bits &= y_bits - 1
                        if not self._step_ok(rel, kind, other, x, y):
                            row &= ~(1 << y)
                            self.removed[(kind, x, y)] = rnd
                            changed = True
                    new[kind][x] = row
            if not changed:
                break
            rel = new
            self.history.append(rel)
        self.rel = rel
        self.memo: dict[tuple[int, int, int], Formula] = {}

    def _step_ok(self, rel, kind, other, x, y) -> bool:
        # every upper point of y is answered by an upper point of x in both directions
        ups_x = self.up_lists[x]
        for y2 in self.up_lists[y]:
            if not any(rel[kind][x2] >> y2 & 1 and rel[other][y2] >> x2 & 1 for x2 in ups_x):
                return False
        return True

    def holds(self, kind: int, x: int, y: int) -> bool:
        return bool(self.rel[kind][x] >> y & 1)

    def separator(self, kind: int, x: int, y: int) -> Formula:
        """A formula of polarity ``kind`` true at x and false at y."""
        key = (kind, x, y)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        rnd = self.removed[key]
        m = self.m
        if rnd == 0:
            p = next(p for p in self.atoms[kind] if p in m.valuation[x] and p not in m.valuation[y])
            result: Formula = Var(p)
        else:
            before = self.history[rnd - 1]
            other = 1 - kind
            ups_x = self.up_lists[x]
            y2 = next(
                y2
                for y2 in self.up_lists[y]
                if not any(before[kind][x2] >> y2 & 1 and before[other][y2] >> x2 & 1 for x2 in ups_x)
            )
            premises, conclusions = [], []
            for x2 in ups_x:
                fails_forward = not before[kind][x2] >> y2 & 1
                fails_back = not before[other][y2] >> x2 & 1
                if fails_back and (not fails_forward or self.removed[(other, y2, x2)] <= self.removed[(kind, x2, y2)]):
                    premises.append(self.separator(other, y2, x2))
                else:
                    conclusions.append(self.separator(kind, x2, y2))
            premises = _dedupe(premises)
            conclusions = _dedupe(conclusions)
            result = Implies(conj(premises) if premises else TOP, disj(conclusions) if conclusions else BOTTOM)
        self.memo[key] = result
        return result

    def characteristic(self, x: int) -> Formula:
        """Conjunction of separators from x to every point it does not simulate into."""
        parts = [self.separator(0, x, y) for y in range(self.m.size) if not self.holds(0, x, y)]
        return conj(_dedupe(parts)) if parts else TOP


def _dedupe(items: list[Formula]) -> list[Formula]:
    return sorted(set(items), key=lambda g: (size(g), render_int(g)))


@lru_cache(maxsize=256)
def _simulation(IL: IntLogicId, vars_: tuple, ps: PolaritySet) -> _Simulation:
    return _Simulation(skeleton_space(IL, vars_), ps)


# ---------------------------------------------------------------- families


def int_family(IL: IntLogicId, ps: PolaritySet, vars_: Iterable[str], cap: int = 20000) -> dict[int, Formula]:
    """Fixpoint enumeration of the (P+, P-)-formula classes over the skeleton models.

    Classes for P and for the dual pair are closed together under
    conjunction, disjunction and implication (a dual-class antecedent with
    a P-class consequent) until no new signature appears.  Raises
    FamilyTooLarge once either side passes ``cap`` classes.
    """
    vars_ = tuple(sorted(set(vars_)))
    space = skeleton_space(IL, vars_)
    n = space.size
    full = (1 << n) - 1
    up = space.up
    down = [sum(1 << x for x in range(n) if up[x] >> y & 1) for y in range(n)]

    def imp(a: int, b: int) -> int:
        bad = a & ~b & full
        hit = 0
        while bad:
            y = (bad & -bad).bit_length() - 1
            bad &= bad - 1
            hit |= down[y]
        return full & ~hit

    fams: list[dict[int, Formula]] = [{}, {}]
    sides = (ps, ps.dual())
    for k in (0, 1):
        fams[k][0] = BOTTOM
        fams[k][full] = TOP
        for p in sorted(sides[k].positive & set(vars_)):
            s = int_truth_set(space, Var(p))
            fams[k].setdefault(s, Var(p))
    frontier = [dict(fams[0]), dict(fams[1])]
    while frontier[0] or frontier[1]:
        fresh: list[dict[int, Formula]] = [{}, {}]

        def offer(k: int, s: int, g: Formula) -> None:
            old = fams[k].get(s)
            if old is None and s not in fresh[k]:
                fresh[k][s] = g
            elif s in fresh[k] and size(g) < size(fresh[k][s]):
                fresh[k][s] = g

        for k in (0, 1):
            o = 1 - k
            olds = list(fams[k].items())
            for s1, g1 in frontier[k].items():
                for s2, g2 in olds:
                    offer(k, s1 & s2, And(g1, g2))
                    offer(k, s1 | s2, Or(g1, g2))
            # implications: dual-class antecedent, same-class consequent
            for sa, ga in fams[o].items():
                for sb, gb in frontier[k].items():
                    offer(k, imp(sa, sb), Implies(ga, gb))
            for sa, ga in frontier[o].items():
                for sb, gb in olds:
                    if sb not in frontier[k]:
                        offer(k, imp(sa, sb), Implies(ga, gb))
        for k in (0, 1):
            fams[k].update(fresh[k])
            if len(fams[k]) > cap:
                raise FamilyTooLarge(f"more than {cap} classes")
        frontier = fresh
    return fams[0]


def _small_int_formulas(ps: PolaritySet, vars_: tuple, max_size: int) -> Iterator[Formula]:
    """Polarity-respecting formulas by increasing size (both polarity sides tracked)."""
    by_size: list[list[list[Formula]]] = [[[], []] for _ in range(max_size + 1)]
    sides = (ps, ps.dual())
    for k in (0, 1):
        by_size[1][k] = [BOTTOM, TOP] + [Var(p) for p in sorted(sides[k].positive & set(vars_))]
    yield from by_size[1][0]
    for s in range(3, max_size + 1, 2):
        for k in (0, 1):
            out = []
            for ls in range(1, s - 1, 2):
                rs = s - 1 - ls
                for a in by_size[ls][k]:
                    for b in by_size[rs][k]:
                        out.append(And(a, b))
                        out.append(Or(a, b))
                for a in by_size[ls][1 - k]:
                    for b in by_size[rs][k]:
                        out.append(Implies(a, b))
            by_size[s][k] = out
        yield from by_size[s][0]


def _simplify_by_signature(space: IntModel, target: int, ps: PolaritySet, vars_: tuple, budget: int = 20000) -> Formula | None:
    seen = 0
    for g in _small_int_formulas(ps, vars_, 7):
        seen += 1
        if seen > budget:
            return None
        if int_truth_set(space, g) == target:
            return g
    return None


# ---------------------------------------------------------------- interpolants


def int_strongest_consequence(IL: IntLogicId, f: Formula, ps: PolaritySet, vars_: Iterable[str] | None = None) -> Formula:
    """Strongest (P+, P-)-formula implied by ``f`` over the logic."""
    _require_int(f)
    universe = tuple(sorted(set(vars_) if vars_ is not None else variables(f) | ps.variables()))
    sim = _simulation(IL, universe, ps)
    space = sim.m
    truth = int_truth_set(space, f)
    points = [x for x in range(space.size) if truth >> x & 1]
    minimal: list[int] = []
    for x in points:
        if any(sim.holds(0, a, x) for a in minimal):
            continue
        minimal = [a for a in minimal if not sim.holds(0, x, a)]
        minimal.append(x)
    parts = _dedupe([sim.characteristic(x) for x in minimal])
    if any(isinstance(p, Top) for p in parts):
        return TOP
    return disj(parts) if parts else BOTTOM


def int_uniform_interpolant(IL: IntLogicId, f: Formula, removal: PolaritySet, simplify: bool = True) -> Formula:
    """Uniform Lyndon interpolant of ``f`` with the ``removal`` polarities forgotten."""
    _require_int(f)
    residue = removal_residue(f, removal)
    if is_polarity_formula(f, residue):
        return f
    vars_ = tuple(sorted(variables(f)))
    theta = int_strongest_consequence(IL, f, residue, vars_)
    if simplify and size(theta) > 1:
        space = skeleton_space(IL, vars_)
        small = _simplify_by_signature(space, int_truth_set(space, theta), residue, vars_)
        if small is not None:
            theta = small
    return theta


def int_lyndon_interpolant(IL: IntLogicId, f: Formula, g: Formula, simplify: bool = True) -> Formula:
    """Interpolant of a provable implication respecting shared polarities."""
    from .interp import NotAnImplication

    _require_int(f)
    _require_int(g)
    if not int_provable(IL, Implies(f, g)):
        raise NotAnImplication("the implication is not provable")
    pf, pg = polarities(f), polarities(g)
    removal = PolaritySet(pf.positive - pg.positive, pf.negative - pg.negative)
    return int_uniform_interpolant(IL, f, removal, simplify)


def subst_box(f: Formula) -> Formula:
    """Replace every variable p by []p."""
    return substitute(f, {v: Box(Var(v)) for v in variables(f)})


def transfer_interpolant(IL: IntLogicId, theta_modal: Formula, family_cap: int = 5000) -> Formula:
    """Intuitionistic formula whose translation is equivalent to [] of the boxed substitution.

    The target truth set is read off the skeleton models, which are also
    companion models.  The search looks through the polarity-respecting
    fixpoint family first, then falls back to a disjunction of
    characteristic formulas; the result is confirmed in the companion.
    """
    vars_ = tuple(sorted(variables(theta_modal)))
    target_formula = Box(subst_box(theta_modal))
    space = skeleton_space(IL, vars_)
    target = truth_set(space.as_modal(), target_formula)
    ps = polarities(theta_modal)
    candidates: list[Formula] = []
    small = _simplify_by_signature(space, target, ps, vars_)
    if small is not None:
        candidates.append(small)
    try:
        fam = int_family(IL, ps, vars_, family_cap)
        if target in fam:
            candidates.append(fam[target])
    except FamilyTooLarge:
        pass
    for side in (ps, PolaritySet(frozenset(vars_), frozenset(vars_))):
        sim = _simulation(IL, vars_, side)
        pts = [x for x in range(space.size) if target >> x & 1]
        parts = _dedupe([sim.characteristic(x) for x in pts])
        candidates.append(disj(parts) if parts else BOTTOM)
    for xi in candidates:
        if provable(IL.companion, And(Implies(target_formula, godel_translate(xi)), Implies(godel_translate(xi), target_formula))):
            return xi
    raise TransferNotFound(f"no intuitionistic formula matches the translation over {IL.companion.name}")
