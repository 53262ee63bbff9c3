"""Polarity families, characteristic formulas and uniform Lyndon interpolants.

A (P+, P-)-formula may use the variables of P+ positively and those of P-
negatively.  Pointed models are compared through ``arrow``: every such
formula of depth at most n true at the first point is true at the second.
The relation is computed by a bounded game, and each point also has a
characteristic formula that defines its upward cone.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .decide import StarEngine, point_space, provable, star_engine
from .formula import (
    BOTTOM,
    TOP,
    And,
    Bottom,
    Box,
    Formula,
    Implies,
    Not,
    Or,
    PolaritySet,
    Top,
    Var,
    conj,
    depth,
    diamond,
    disj,
    is_polarity_formula,
    polarities,
    render,
    size,
    subformulas,
    variables,
)
from .kripke import (
    Frame,
    LogicId,
    Model,
    PointedModel,
    cluster_kinds,
    satisfies,
    truth_set,
    valuations,
)


class UnsupportedLogic(ValueError):
    pass


class FamilyTooLarge(RuntimeError):
    """The family enumeration passed its member cap."""


# ---------------------------------------------------------------- the game


def local_arrow(v0: frozenset, v1: frozenset, ps: PolaritySet) -> bool:
    """Depth-0 transfer between two worlds with valuations ``v0`` and ``v1``."""
    for p in ps.positive:
        if p in v0 and p not in v1:
            return False
    for p in ps.negative:
        if p not in v0 and p in v1:
            return False
    return True


def arrow_relation(m0: Model, m1: Model, ps: PolaritySet, n: int) -> list[int]:
    """Row ``x`` is the bitmask of worlds ``y`` of ``m1`` with (m0, x) ->_n (m1, y)."""
    n0, n1 = m0.world_count, m1.world_count
    base = []
    for x in range(n0):
        row = 0
        for y in range(n1):
            if local_arrow(m0.valuation[x], m1.valuation[y], ps):
                row |= 1 << y
        base.append(row)
    rel = base
    succ0 = [m0.frame.succ_list(x) for x in range(n0)]
    succ1 = [m1.frame.succ_list(y) for y in range(n1)]
    for _ in range(n):
        new = []
        for x in range(n0):
            row = 0
            for y in _iter_bits(base[x]):
                # every successor of y is answered by a successor of x
                ok = all(any(rel[x2] >> y2 & 1 for x2 in succ0[x]) for y2 in succ1[y])
                # every successor of x is answered by a successor of y
                if ok:
                    ymask = m1.frame.successors[y]
                    ok = all(rel[x2] & ymask for x2 in succ0[x])
                if ok:
                    row |= 1 << y
            new.append(row)
        if new == rel:
            break
        rel = new
    return rel


def _iter_bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def arrow(pm0: PointedModel, pm1: PointedModel, ps: PolaritySet, n: int) -> bool:
    """Whether every (P+, P-)-formula of depth <= n true at pm0 is true at pm1."""
    rel = arrow_relation(pm0.model, pm1.model, ps, n)
    return bool(rel[pm0.point] >> pm1.point & 1)


# ---------------------------------------------------------------- characteristic formulas

# A type key of level 0 is (positive variables true, negative variables false);
# a key of level k > 0 is (level-0 key, frozenset of level k-1 keys of successors).


def _local_key(val: frozenset, ps: PolaritySet) -> tuple:
    return (frozenset(ps.positive & val), frozenset(ps.negative - val))


def point_keys(m: Model, ps: PolaritySet, n: int) -> list[tuple]:
    """Level-``n`` type key of every world of ``m``."""
    keys = [_local_key(v, ps) for v in m.valuation]
    base = list(keys)
    for _ in range(n):
        keys = [
            (base[x], frozenset(keys[y] for y in m.frame.succ_list(x)))
            for x in range(m.world_count)
        ]
    return keys


class KeyAlgebra:
    """Arrow relation and formula synthesis on type keys of fixed levels."""

    def __init__(self):
        self._arrow: dict = {}
        self._formula: dict = {}

    def local(self, a: tuple, b: tuple) -> bool:
        return a[0] <= b[0] and a[1] <= b[1]

    def arrow(self, a: tuple, b: tuple, level: int) -> bool:
        if level == 0:
            return self.local(a, b)
        k = (a, b, level)
        hit = self._arrow.get(k)
        if hit is not None:
            return hit
        res = self.local(a[0], b[0])
        if res:
            res = all(any(self.arrow(x, y, level - 1) for x in a[1]) for y in b[1])
        if res:
            res = all(any(self.arrow(x, y, level - 1) for y in b[1]) for x in a[1])
        self._arrow[k] = res
        return res

    def formula(self, key: tuple, level: int) -> Formula:
        k = (key, level)
        hit = self._formula.get(k)
        if hit is not None:
            return hit
        if level == 0:
            pos, negfalse = key
            f = conj([Var(p) for p in sorted(pos)] + [Not(Var(q)) for q in sorted(negfalse)])
        else:
            kids = list(key[1])
            lows = self._extremes(kids, level - 1, minimal=True)
            highs = self._extremes(kids, level - 1, minimal=False)
            parts = []
            local = self.formula(key[0], 0)
            if not isinstance(local, Top):
                parts.append(local)
            low_fs = self._sorted(self.formula(c, level - 1) for c in lows)
            if not any(isinstance(g, Top) for g in low_fs):
                parts.append(Box(disj(low_fs)))
            for c in self._sorted(self.formula(c, level - 1) for c in highs):
                if not isinstance(c, Top):
                    parts.append(diamond(c))
            f = conj(parts)
        self._formula[k] = f
        return f

    @staticmethod
    def _sorted(fs: Iterable[Formula]) -> list[Formula]:
        return sorted(set(fs), key=lambda g: (size(g), render(g)))

    def _extremes(self, keys: list, level: int, minimal: bool) -> list:
        """One representative of each extreme class.

        With ``minimal`` the result keeps keys that no other key arrows into
        strictly; otherwise keys that arrow strictly into no other key.
        """
        out: list = []
        for a in keys:
            dominated = False
            for b in keys:
                if a is b or a == b:
                    continue
                if minimal:
                    strict = self.arrow(b, a, level) and not self.arrow(a, b, level)
                else:
                    strict = self.arrow(a, b, level) and not self.arrow(b, a, level)
                if strict:
                    dominated = True
                    break
            if dominated:
                continue
            if any(self.arrow(a, c, level) and self.arrow(c, a, level) for c in out):
                continue
            out.append(a)
        return out


def characteristic_formula(pm: PointedModel, ps: PolaritySet, n: int) -> Formula:
    """A (P+, P-)-formula of depth <= n true exactly at the points pm arrows into."""
    keys = point_keys(pm.model, ps, n)
    return KeyAlgebra().formula(keys[pm.point], n)


# ---------------------------------------------------------------- families


@dataclass
class FormulaFamily:
    """Representatives of the (P+, P-)-formulas of depth <= rank up to L-equivalence."""

    logic: LogicId
    polarity: PolaritySet
    rank: int
    vars: tuple
    members: list = field(default_factory=list)  # list of (Formula, int signature)

    def formulas(self) -> list[Formula]:
        return [f for f, _ in self.members]

    def __len__(self) -> int:
        return len(self.members)


def _better(a: Formula, b: Formula) -> bool:
    return (size(a), render(a)) < (size(b), render(b))


def _lattice_closure(seed: dict[int, Formula], space, cap: int) -> dict[int, Formula]:
    """Close signature->formula pairs under conjunction and disjunction."""
    out = dict(seed)
    frontier = list(out.keys())
    while frontier:
        new: dict[int, Formula] = {}
        existing = list(out.keys())
        for a in frontier:
            fa = out[a]
            for b in existing:
                fb = out[b]
                for s, f in ((a & b, And(fa, fb)), (a | b, Or(fa, fb))):
                    if s in out:
                        continue
                    old = new.get(s)
                    if old is None or _better(f, old):
                        new[s] = f
            if len(out) + len(new) > cap:
                raise FamilyTooLarge(f"family exceeds {cap} members")
        out.update(new)
        frontier = list(new.keys())
    return out


def enumerate_family(
    L: LogicId,
    ps: PolaritySet,
    n: int,
    vars_: Iterable[str] | None = None,
    max_members: int = 20000,
) -> FormulaFamily:
    """Layered enumeration of the rank-n family, deduplicated by L-signature."""
    universe = tuple(sorted(set(vars_) if vars_ is not None else ps.variables()))
    if not ps.variables() <= set(universe):
        raise ValueError("polarity sets must lie inside the variable universe")
    space = point_space(L, universe)
    atoms: dict[int, Formula] = {}

    def add(store: dict, f: Formula):
        s = space.signature_int(f)
        old = store.get(s)
        if old is None or _better(f, old):
            store[s] = f

    add(atoms, BOTTOM)
    add(atoms, TOP)
    for p in sorted(ps.positive):
        add(atoms, Var(p))
    for p in sorted(ps.negative):
        add(atoms, Not(Var(p)))
    layer = _lattice_closure(atoms, space, max_members)
    for _ in range(n):
        seed = dict(atoms)
        full = space.full()
        for s, f in layer.items():
            for sig, g in ((space.box_int(s), Box(f)), (full & ~space.box_int(full & ~s), diamond(f))):
                old = seed.get(sig)
                if old is None or _better(g, old):
                    seed[sig] = g
        layer = _lattice_closure(seed, space, max_members)
    members = sorted(((f, s) for s, f in layer.items()), key=lambda fs: (size(fs[0]), render(fs[0])))
    return FormulaFamily(L, ps, n, universe, members)


def characteristic(pm: PointedModel, fam: FormulaFamily) -> Formula:
    """Conjunction of the family members true at ``pm``; ``true`` if none."""
    true_members = [f for f, _ in fam.members if satisfies(pm, f)]
    true_members = [f for f in true_members if not isinstance(f, Top)]
    return conj(true_members)


def n_implies(
    pm0: PointedModel,
    pm1: PointedModel,
    ps: PolaritySet,
    n: int,
    L: LogicId | None = None,
    family: FormulaFamily | None = None,
) -> bool:
    """Whether pm1 satisfies the rank-n characteristic formula of pm0.

    With ``family`` the characteristic formula is the conjunction of its
    members; otherwise the depth-n characteristic formula is used.
    """
    if family is not None:
        return satisfies(pm1, characteristic(pm0, family))
    return satisfies(pm1, characteristic_formula(pm0, ps, n))


# ---------------------------------------------------------------- candidate types


class _TypeScan:
    """Level-n keys of the canonical points of L where a formula holds.

    Final points are handled cluster by cluster.  A root point's key only
    depends on its valuation and on the set of final point keys below it,
    and whether the formula holds there only depends on which boxed
    subformulas hold at all final points.  Collections of final clusters
    are therefore folded into pairs (box vector, key set) closed under
    (meet, union).
    """

    def __init__(self, L: LogicId, f: Formula, ps: PolaritySet, n: int, vars_: tuple):
        self.L = L
        self.f = f
        self.ps = ps
        self.n = n
        self.vars = vars_
        self.engine: StarEngine = star_engine(L, vars_)

    def scan(self, limit: int = 200000) -> list[tuple]:
        eng = self.engine
        shape = self.L.shape
        if shape.bottom not in (None, "point"):
            raise UnsupportedLogic(f"{self.L.name} has no root point")
        memo, kind_truth = eng._finals(self.f)
        top = memo[self.f]
        found: list[tuple] = []
        chains_of_kind: list[list[tuple]] = []
        for k, c in enumerate(eng.kinds):
            m = _cluster_model(c)
            chain_levels = [point_keys(m, self.ps, j) for j in range(self.n + 1)]
            chains = [tuple(chain_levels[j][i] for j in range(self.n + 1)) for i in range(len(c))]
            chains_of_kind.append(chains)
            start = int(eng.final_starts[k])
            for i in range(len(c)):
                if top[start + i]:
                    found.append(chains[i][self.n])
        if shape.bottom is None:
            return found
        boxed_children = []
        for g in subformulas(self.f):
            if isinstance(g, Box) and g.child not in boxed_children:
                boxed_children.append(g.child)
        chain_ids: dict[tuple, int] = {}
        gens = []
        for k, chains in enumerate(chains_of_kind):
            beta = 0
            for j, ch in enumerate(boxed_children):
                if kind_truth[ch][k]:
                    beta |= 1 << j
            umask = 0
            for chn in chains:
                trunc = chn[: self.n]
                idx = chain_ids.setdefault(trunc, len(chain_ids))
                umask |= 1 << idx
            gens.append((beta, umask))
        combos = _pair_closure(gens, shape.final_count, limit)
        chain_list = [None] * len(chain_ids)
        for ch, i in chain_ids.items():
            chain_list[i] = ch
        betas = sorted({b for b, _ in combos})
        truth = _root_truth(eng, self.f, betas, boxed_children)
        for r_index, r in enumerate(eng.bottoms):
            rval = r[0]
            local = _local_key(rval, self.ps)
            for beta, umask in combos:
                if not truth[(r_index, beta)]:
                    continue
                below = [chain_list[i] for i in _iter_bits(umask)]
                key = local
                for j in range(1, self.n + 1):
                    key = (local, frozenset([key] + [ch[j - 1] for ch in below]))
                found.append(key)
        return found


def _cluster_model(c: tuple) -> Model:
    n = len(c)
    rel = frozenset((a, b) for a in range(n) for b in range(n))
    return Model(Frame(n, rel), c)


def _pair_closure(gens: list[tuple[int, int]], mode: str, limit: int) -> set[tuple[int, int]]:
    uniq = list(dict.fromkeys(gens))
    if mode == "one":
        return set(uniq)
    if mode == "two":
        return {(a[0] & b[0], a[1] | b[1]) for a in uniq for b in uniq}
    out: set = set()
    for g in uniq:
        new = {g}
        for b in out:
            new.add((b[0] & g[0], b[1] | g[1]))
        out |= new
        if len(out) > limit:
            raise FamilyTooLarge(f"more than {limit} root types")
    return out


def _root_truth(eng: StarEngine, f: Formula, betas: list[int], boxed_children: list) -> dict:
    nb = len(betas)
    col = {c: j for j, c in enumerate(boxed_children)}
    beta_cols = {c: np.array([bool(b >> j & 1) for b in betas], dtype=bool) for c, j in col.items()}
    out = {}
    for ri, bottom in enumerate(eng.bottoms):
        val = bottom[0]
        bm: dict = {}
        for g in subformulas(f):
            if isinstance(g, Var):
                m = np.full(nb, g.name in val)
            elif isinstance(g, Bottom):
                m = np.zeros(nb, dtype=bool)
            elif isinstance(g, Top):
                m = np.ones(nb, dtype=bool)
            elif isinstance(g, Not):
                m = ~bm[g.child]
            elif isinstance(g, And):
                m = bm[g.left] & bm[g.right]
            elif isinstance(g, Or):
                m = bm[g.left] | bm[g.right]
            elif isinstance(g, Implies):
                m = ~bm[g.left] | bm[g.right]
            else:
                m = bm[g.child] & beta_cols[g.child]
            bm[g] = m
        res = bm[f]
        for bi, b in enumerate(betas):
            out[(ri, b)] = bool(res[bi])
    return out


# ---------------------------------------------------------------- interpolants


def removal_residue(f: Formula, removal: PolaritySet) -> PolaritySet:
    """Polarities of ``f`` that survive the removal."""
    return polarities(f).minus(removal)


def _minimal_antichain(items: Iterable, arrow) -> list:
    # Incremental sweep: the antichain stays small in practice, so each
    # candidate is compared against a handful of survivors only.
    anti: list = []
    for k in items:
        if any(arrow(a, k) for a in anti):
            continue
        anti = [a for a in anti if not arrow(k, a)]
        anti.append(k)
    return anti


def strongest_consequence(
    L: LogicId,
    f: Formula,
    ps: PolaritySet,
    n: int,
    vars_: Iterable[str] | None = None,
    limit: int = 200000,
) -> Formula:
    """Strongest (P+, P-)-formula of depth <= n implied by ``f`` over L.

    It is the disjunction of the characteristic formulas of the canonical
    points where ``f`` holds, keeping only those not subsumed by another.
    """
    universe = tuple(sorted(set(vars_) if vars_ is not None else variables(f) | ps.variables()))
    engine = star_engine(L, universe)
    if engine.valid(f):
        return TOP
    if engine.valid(Not(f)):
        return BOTTOM
    keys = _TypeScan(L, f, ps, n, universe).scan(limit)
    alg = KeyAlgebra()
    uniq = _minimal_antichain(dict.fromkeys(keys), lambda a, b: alg.arrow(a, b, n))
    parts = KeyAlgebra._sorted(alg.formula(k, n) for k in uniq)
    if any(isinstance(p, Top) for p in parts):
        return TOP
    return disj(parts)


def uniform_interpolant(
    L: LogicId,
    f: Formula,
    removal: PolaritySet,
    simplify: bool = True,
    limit: int = 200000,
) -> Formula:
    """Uniform Lyndon interpolant of ``f`` with the ``removal`` polarities forgotten.

    The result is the strongest consequence of ``f`` over L among the
    (P1+, P1-)-formulas of depth at most the class rank, where P1 are the
    polarities of ``f`` outside ``removal``.
    """
    if L.nip_rank is None:
        raise UnsupportedLogic(f"{L.name} has no interpolation rank")
    n = L.nip_rank
    residue = removal_residue(f, removal)
    if depth(f) <= n and is_polarity_formula(f, residue):
        return f
    theta = strongest_consequence(L, f, residue, n, variables(f), limit)
    if simplify:
        theta = simplify_formula(L, theta, residue, n)
    return theta


def simplify_formula(L: LogicId, f: Formula, ps: PolaritySet, n: int, budget: int = 400) -> Formula:
    """Smallest equivalent formula among a few cheap candidates, else ``f``."""
    candidates = _small_candidates(ps, n, budget)
    engine = star_engine(L, tuple(sorted(variables(f) | ps.positive | ps.negative)))
    # a candidate that disagrees with f on some final point cannot be equivalent
    target = engine._finals(f)[0][f]
    best = f
    for g in candidates:
        if size(g) >= size(best):
            break
        if not np.array_equal(engine._finals(g)[0][g], target):
            continue
        if engine.valid(And(Implies(f, g), Implies(g, f))):
            best = g
            break
    return best


@lru_cache(maxsize=256)
def _small_candidates_cached(pos: frozenset, neg: frozenset, n: int, budget: int) -> tuple:
    atoms: list[Formula] = [BOTTOM, TOP] + [Var(p) for p in sorted(pos)] + [Not(Var(p)) for p in sorted(neg)]
    layer = list(atoms)
    for _ in range(n):
        boxed = [Box(a) for a in layer] + [diamond(a) for a in layer if not isinstance(a, (Top, Bottom))]
        layer = list(dict.fromkeys(layer + boxed))
    pool = list(dict.fromkeys(layer))
    out = list(pool)
    for a, b in itertools.combinations(pool, 2):
        out.append(And(a, b))
        out.append(Or(a, b))
        if len(out) > budget:
            break
    out = [g for g in out if depth(g) <= n]
    out.sort(key=lambda g: (size(g), render(g)))
    return tuple(out[:budget])


def _small_candidates(ps: PolaritySet, n: int, budget: int) -> tuple:
    return _small_candidates_cached(ps.positive, ps.negative, n, budget)


class NotAnImplication(ValueError):
    pass


def lyndon_interpolant(L: LogicId, f: Formula, g: Formula, simplify: bool = True) -> Formula:
    """Interpolant of a valid implication respecting both polarity bounds."""
    if not provable(L, Implies(f, g)):
        raise NotAnImplication(f"{render(f)} -> {render(g)} is not valid in {L.name}")
    removal = polarities(f).minus(polarities(g))
    return uniform_interpolant(L, f, removal, simplify=simplify)


# ---------------------------------------------------------------- classical case


TruthAssignment = Mapping[str, bool]


@dataclass(frozen=True)
class MergeContext:
    """Six variable sets, pairwise disjoint within each polarity."""

    pos0: frozenset = frozenset()
    pos1: frozenset = frozenset()
    pos2: frozenset = frozenset()
    neg0: frozenset = frozenset()
    neg1: frozenset = frozenset()
    neg2: frozenset = frozenset()

    def is_disjoint(self) -> bool:
        for a, b in ((self.pos0, self.pos1), (self.pos0, self.pos2), (self.pos1, self.pos2)):
            if a & b:
                return False
        for a, b in ((self.neg0, self.neg1), (self.neg0, self.neg2), (self.neg1, self.neg2)):
            if a & b:
                return False
        return True

    def middle(self) -> PolaritySet:
        return PolaritySet(self.pos1, self.neg1)

    def left(self) -> PolaritySet:
        return PolaritySet(self.pos0 | self.pos1, self.neg0 | self.neg1)

    def right(self) -> PolaritySet:
        return PolaritySet(self.pos1 | self.pos2, self.neg1 | self.neg2)


class MergeError(ValueError):
    pass


def assignment_arrow(v0: TruthAssignment, v1: TruthAssignment, ps: PolaritySet) -> bool:
    """Depth-0 transfer between truth assignments."""
    true0 = frozenset(p for p, b in v0.items() if b)
    true1 = frozenset(p for p, b in v1.items() if b)
    return local_arrow(true0, true1, ps)


def assignment_model(v: TruthAssignment) -> PointedModel:
    """A truth assignment as a one-world reflexive model."""
    val = frozenset(p for p, b in v.items() if b)
    return PointedModel(Model(Frame(1, frozenset({(0, 0)})), (val,)), 0)


def _index(p: str, sets: Sequence[frozenset]) -> int | None:
    for i, s in enumerate(sets):
        if p in s:
            return i
    return None


# (positive index, negative index) -> which assignment(s) decide V*(p)
_MERGE_RULES = {
    (0, 0): "v0", (0, 1): "v0", (0, 2): "v0 or v1", (0, None): "v0",
    (1, 0): "v0", (1, 1): "v1", (1, 2): "v1", (1, None): "v0",
    (2, 0): "v0 and v1", (2, 1): "v1", (2, 2): "v1", (2, None): "v1",
    (None, 0): "v0", (None, 1): "v1", (None, 2): "v1", (None, None): "v0",
}


def merge_assignments(v0: TruthAssignment, v1: TruthAssignment, ctx: MergeContext) -> dict:
    """Assignment sitting between v0 and v1 for the outer polarity sets."""
    if not ctx.is_disjoint():
        raise MergeError("the polarity sets must be pairwise disjoint")
    universe = set(v0) | set(v1)
    v0 = {p: bool(v0.get(p, False)) for p in universe}
    v1 = {p: bool(v1.get(p, False)) for p in universe}
    if not n_implies(assignment_model(v0), assignment_model(v1), ctx.middle(), 0):
        raise MergeError("the assignments violate the depth-0 premise")
    pos = (ctx.pos0, ctx.pos1, ctx.pos2)
    neg = (ctx.neg0, ctx.neg1, ctx.neg2)
    out = {}
    for p in sorted(universe):
        rule = _MERGE_RULES[(_index(p, pos), _index(p, neg))]
        if rule == "v0":
            out[p] = v0[p]
        elif rule == "v1":
            out[p] = v1[p]
        elif rule == "v0 or v1":
            out[p] = v0[p] or v1[p]
        else:
            out[p] = v0[p] and v1[p]
    return out


def _classical_table(f: Formula, vars_: Sequence[str]) -> int:
    rows = 0
    for i, val in enumerate(valuations(vars_)):
        if satisfies(assignment_model({p: p in val for p in vars_}), f):
            rows |= 1 << i
    return rows


def cl_family(ps: PolaritySet, vars_: Sequence[str]) -> dict[int, Formula]:
    """Depth-0 (P+, P-)-formulas up to truth-table equivalence."""
    full = (1 << (1 << len(vars_))) - 1
    seed: dict[int, Formula] = {}
    atoms = [BOTTOM, TOP] + [Var(p) for p in sorted(ps.positive)] + [Not(Var(p)) for p in sorted(ps.negative)]
    for a in atoms:
        s = _classical_table(a, vars_)
        if s not in seed or _better(a, seed[s]):
            seed[s] = a
    out = dict(seed)
    frontier = list(out)
    while frontier:
        new: dict[int, Formula] = {}
        for a in frontier:
            for b in list(out):
                for s, g in ((a & b, And(out[a], out[b])), (a | b, Or(out[a], out[b]))):
                    if s not in out and (s not in new or _better(g, new[s])):
                        new[s] = g
        out.update(new)
        frontier = list(new)
    assert all(0 <= s <= full for s in out)
    return out


def cl_uniform_interpolant(f: Formula, removal: PolaritySet) -> Formula:
    """Classical uniform Lyndon interpolant of a box-free formula."""
    if depth(f) != 0:
        raise ValueError("the classical interpolant needs a formula without boxes")
    residue = removal_residue(f, removal)
    vars_ = sorted(variables(f))
    table = _classical_table(f, vars_)
    family = cl_family(residue, vars_)
    implied = [(s, g) for s, g in family.items() if table & ~s == 0]
    meet = (1 << (1 << len(vars_))) - 1
    for s, _ in implied:
        meet &= s
    if meet in family:
        return family[meet]
    return conj(g for _, g in sorted(implied, key=lambda sg: (size(sg[1]), render(sg[1]))))
