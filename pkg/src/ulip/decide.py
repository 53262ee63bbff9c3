"""Semantic decision procedures over the canonical models of each class.

Two evaluators are provided.  ``PointSpace`` evaluates a formula at every
point of the literal canonical list and yields its signature.  ``StarEngine``
decides validity without listing the models: truth at a final point only
depends on its own cluster, and truth at the bottom of a model only depends
on the bottom cluster and, for each boxed subformula, whether it holds at
all final points.  The reachable vectors of the latter are the meets of the
per-cluster vectors, which keeps the classes with unboundedly many final
clusters tractable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .formula import (
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
    diamond,
    iff,
    parse,
    polarities,
    render,
    subformulas,
    variables,
)
from .kripke import (
    LogicId,
    Model,
    PointedModel,
    Shape,
    bottom_kinds,
    canonical_count,
    cluster_kinds,
    iter_canonical,
    star_model,
)


def _evaluate(f: Formula, var_arrays: dict, n: int, box) -> np.ndarray:
    memo: dict = {}
    for g in subformulas(f):
        if isinstance(g, Var):
            arr = var_arrays.get(g.name)
            m = arr if arr is not None else np.zeros(n, dtype=bool)
        elif isinstance(g, Bottom):
            m = np.zeros(n, dtype=bool)
        elif isinstance(g, Top):
            m = np.ones(n, dtype=bool)
        elif isinstance(g, Not):
            m = ~memo[g.child]
        elif isinstance(g, And):
            m = memo[g.left] & memo[g.right]
        elif isinstance(g, Or):
            m = memo[g.left] | memo[g.right]
        elif isinstance(g, Implies):
            m = ~memo[g.left] | memo[g.right]
        elif isinstance(g, Box):
            m = box(memo[g.child])
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = m
    return memo[f]


class PointSpace:
    """Every point of a list of star-shaped models, laid out in one array.

    Each model is a bottom cluster (possibly absent) that sees a list of
    final clusters.  Points are numbered model by model, then by world.
    """

    def __init__(self, descriptions: Iterable[tuple[tuple, Sequence[tuple]]], vars_: Iterable[str]):
        self.vars = tuple(sorted(vars_))
        self.descriptions = []
        cluster_starts = []
        model_starts = []
        is_bottom = []
        cluster_id = []
        model_id = []
        world_vals = []
        w = 0
        for mi, (bottom, finals) in enumerate(descriptions):
            self.descriptions.append((bottom, tuple(finals)))
            model_starts.append(w)
            parts = ([bottom] if bottom else []) + list(finals)
            for pi, part in enumerate(parts):
                cluster_starts.append(w)
                cid = len(cluster_starts) - 1
                bot = bool(bottom) and pi == 0
                for v in part:
                    world_vals.append(v)
                    is_bottom.append(bot)
                    cluster_id.append(cid)
                    model_id.append(mi)
                    w += 1
        self.size = w
        self.cluster_starts = np.array(cluster_starts, dtype=np.int64)
        self.model_starts = np.array(model_starts, dtype=np.int64)
        self.is_bottom = np.array(is_bottom, dtype=bool)
        self.not_bottom = ~self.is_bottom
        self.cluster_id = np.array(cluster_id, dtype=np.int64)
        self.model_id = np.array(model_id, dtype=np.int64)
        self.var_arrays = {
            v: np.array([v in val for val in world_vals], dtype=bool) for v in self.vars
        }
        self.world_of = []
        for bottom, finals in self.descriptions:
            count = len(bottom) + sum(len(c) for c in finals)
            self.world_of.extend(range(count))

    def box(self, x: np.ndarray) -> np.ndarray:
        cluster_all = np.logical_and.reduceat(x, self.cluster_starts)[self.cluster_id]
        finals_all = np.logical_and.reduceat(x | self.is_bottom, self.model_starts)[self.model_id]
        return cluster_all & (self.not_bottom | finals_all)

    def evaluate(self, f: Formula) -> np.ndarray:
        return _evaluate(f, self.var_arrays, self.size, self.box)

    def to_int(self, x: np.ndarray) -> int:
        return int.from_bytes(np.packbits(x, bitorder="little").tobytes(), "little")

    def from_int(self, s: int) -> np.ndarray:
        nbytes = (self.size + 7) // 8
        raw = np.frombuffer(s.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.size].astype(bool)

    def box_int(self, s: int) -> int:
        return self.to_int(self.box(self.from_int(s)))

    def signature_int(self, f: Formula) -> int:
        return self.to_int(self.evaluate(f))

    def full(self) -> int:
        return (1 << self.size) - 1

    def pointed(self, index: int) -> PointedModel:
        bottom, finals = self.descriptions[int(self.model_id[index])]
        return PointedModel(star_model(bottom, finals), self.world_of[index])

    def model(self, mi: int) -> Model:
        bottom, finals = self.descriptions[mi]
        return star_model(bottom, finals)


@lru_cache(maxsize=64)
def point_space(L: LogicId, vars_: tuple) -> PointSpace:
    return PointSpace(iter_canonical(L, vars_), vars_)


@dataclass(frozen=True)
class Signature:
    """Truth values over the canonical pointed models, bit ``i`` for point ``i``."""

    bits: int
    length: int

    def __getitem__(self, i: int) -> bool:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return bool(self.bits >> i & 1)

    def __len__(self) -> int:
        return self.length

    def as_tuple(self) -> tuple:
        return tuple(self[i] for i in range(self.length))

    def all_ones(self) -> bool:
        return self.bits == (1 << self.length) - 1


def signature(L: LogicId, vars_: Iterable[str], f: Formula) -> Signature:
    key = tuple(sorted(set(vars_)))
    missing = variables(f) - set(key)
    if missing:
        raise ValueError(f"formula mentions variables outside the universe: {sorted(missing)}")
    space = point_space(L, key)
    return Signature(space.signature_int(f), space.size)


# ---------------------------------------------------------------- star engine


def _and_closure(gens: Sequence[int], mode: str) -> dict[int, tuple]:
    """Reachable meets of generator vectors with one witness each.

    ``mode`` is "one" (single generators), "two" (meets of two, possibly
    equal) or "many" (meets of any nonempty collection).
    """
    first: dict[int, int] = {}
    for i, g in enumerate(gens):
        first.setdefault(g, i)
    uniq = list(first.items())
    if mode == "one":
        return {g: (i,) for g, i in uniq}
    if mode == "two":
        out: dict[int, tuple] = {}
        for a, (g, i) in enumerate(uniq):
            for h, j in uniq[a:]:
                out.setdefault(g & h, (i, j))
        return out
    items: dict[int, tuple] = {}
    for g, i in uniq:
        new = {g: (i,)} if g not in items else {}
        for b, w in items.items():
            m = b & g
            if m not in items and m not in new:
                new[m] = w + (i,)
        items.update(new)
    return items


class StarEngine:
    """Validity over all canonical models of ``L`` without enumerating them."""

    def __init__(self, L: LogicId, vars_: Iterable[str]):
        self.logic = L
        self.vars = tuple(sorted(set(vars_)))
        shape: Shape = L.shape
        self.shape = shape
        self.kinds = cluster_kinds(shape.final_kind, self.vars)
        self.bottoms = bottom_kinds(shape, self.vars) if shape.bottom is not None else []
        starts = []
        vals = []
        cid = []
        for k, c in enumerate(self.kinds):
            starts.append(len(vals))
            for v in c:
                vals.append(v)
                cid.append(k)
        self.final_starts = np.array(starts, dtype=np.int64)
        self.final_cid = np.array(cid, dtype=np.int64)
        self.final_vals = vals
        self.final_var = {v: np.array([v in x for x in vals], dtype=bool) for v in self.vars}

    def _finals(self, f: Formula):
        n = len(self.final_vals)
        kind_truth: dict = {}

        def box(x):
            per_kind = np.logical_and.reduceat(x, self.final_starts)
            return per_kind[self.final_cid]

        memo: dict = {}
        for g in subformulas(f):
            if isinstance(g, Var):
                arr = self.final_var.get(g.name)
                m = arr if arr is not None else np.zeros(n, dtype=bool)
            elif isinstance(g, Bottom):
                m = np.zeros(n, dtype=bool)
            elif isinstance(g, Top):
                m = np.ones(n, dtype=bool)
            elif isinstance(g, Not):
                m = ~memo[g.child]
            elif isinstance(g, And):
                m = memo[g.left] & memo[g.right]
            elif isinstance(g, Or):
                m = memo[g.left] | memo[g.right]
            elif isinstance(g, Implies):
                m = ~memo[g.left] | memo[g.right]
            else:
                per_kind = np.logical_and.reduceat(memo[g.child], self.final_starts)
                kind_truth[g.child] = per_kind
                m = per_kind[self.final_cid]
            memo[g] = m
        return memo, kind_truth

    def refute(self, f: Formula) -> PointedModel | None:
        """A canonical pointed model falsifying ``f``, or None if ``f`` is valid."""
        memo, kind_truth = self._finals(f)
        top = memo[f]
        bottom0 = self.bottoms[0] if self.bottoms else ()
        if not top.all():
            idx = int(np.argmin(top))
            k = int(self.final_cid[idx])
            offset = idx - int(self.final_starts[k])
            finals = [self.kinds[k]] * (2 if self.shape.final_count == "two" else 1)
            return PointedModel(star_model(bottom0, finals), len(bottom0) + offset)
        if self.shape.bottom is None:
            return None
        boxed = [g for g in subformulas(f) if isinstance(g, Box)]
        children = []
        for g in boxed:
            if g.child not in children:
                children.append(g.child)
        col = {c: j for j, c in enumerate(children)}
        gens = []
        for k in range(len(self.kinds)):
            mask = 0
            for c, j in col.items():
                if kind_truth[c][k]:
                    mask |= 1 << j
            gens.append(mask)
        closure = _and_closure(gens, self.shape.final_count)
        betas = list(closure.keys())
        beta_cols = {
            c: np.array([bool(b >> j & 1) for b in betas], dtype=bool) for c, j in col.items()
        }
        nb = len(betas)
        for bottom in self.bottoms:
            size = len(bottom)
            var_rows = {
                v: np.array([[v in x] * nb for x in bottom], dtype=bool) for v in self.vars
            }
            bm: dict = {}
            for g in subformulas(f):
                if isinstance(g, Var):
                    m = var_rows.get(g.name)
                    if m is None:
                        m = np.zeros((size, nb), dtype=bool)
                elif isinstance(g, Bottom):
                    m = np.zeros((size, nb), dtype=bool)
                elif isinstance(g, Top):
                    m = np.ones((size, nb), dtype=bool)
                elif isinstance(g, Not):
                    m = ~bm[g.child]
                elif isinstance(g, And):
                    m = bm[g.left] & bm[g.right]
                elif isinstance(g, Or):
                    m = bm[g.left] | bm[g.right]
                elif isinstance(g, Implies):
                    m = ~bm[g.left] | bm[g.right]
                else:
                    row = bm[g.child].all(axis=0) & beta_cols[g.child]
                    m = np.broadcast_to(row, (size, nb))
                bm[g] = m
            res = bm[f]
            if not res.all():
                flat = int(np.argmin(res))
                point, bi = divmod(flat, nb)
                finals = [self.kinds[i] for i in closure[betas[bi]]]
                if self.shape.final_count == "two" and len(finals) == 1:
                    finals = finals * 2
                return PointedModel(star_model(bottom, finals), point)
        return None

    def valid(self, f: Formula) -> bool:
        return self.refute(f) is None


@lru_cache(maxsize=64)
def star_engine(L: LogicId, vars_: tuple) -> StarEngine:
    return StarEngine(L, vars_)


def _engine_for(L: LogicId, f: Formula, vars_: Iterable[str] | None = None) -> StarEngine:
    key = tuple(sorted(set(vars_) if vars_ is not None else variables(f)))
    return star_engine(L, key)


def countermodel(L: LogicId, f: Formula) -> PointedModel | None:
    """First falsifying canonical pointed model found, or None when valid."""
    return _engine_for(L, f).refute(f)


def provable(L: LogicId, f: Formula) -> bool:
    return _engine_for(L, f).valid(f)


def equivalent(L: LogicId, a: Formula, b: Formula) -> bool:
    return provable(L, iff(a, b))


def implies(L: LogicId, a: Formula, b: Formula) -> bool:
    return provable(L, Implies(a, b))


def satisfiable(L: LogicId, f: Formula, vars_: Iterable[str] | None = None) -> bool:
    return not _engine_for(L, f, vars_).valid(Not(f))


# ---------------------------------------------------------------- eight classes


_P = Var("p")


class Ls12Class(enum.Enum):
    """The eight positive-in-p formulas up to equivalence over a two-cluster below a point."""

    BOTTOM = "false"
    BOX_P = "[]p"
    P_AND_BOX_DIA_P = "p & []<>p"
    BOX_DIA_P = "[]<>p"
    P = "p"
    P_OR_BOX_DIA_P = "p | []<>p"
    DIA_P = "<>p"
    TOP = "true"

    @property
    def formula(self) -> Formula:
        return parse(self.value)

    def __str__(self) -> str:
        return self.value


# Hasse arrows of the implication order among the eight classes
LS12_HASSE_EDGES = (
    (Ls12Class.BOTTOM, Ls12Class.BOX_P),
    (Ls12Class.BOX_P, Ls12Class.P_AND_BOX_DIA_P),
    (Ls12Class.P_AND_BOX_DIA_P, Ls12Class.P),
    (Ls12Class.P_AND_BOX_DIA_P, Ls12Class.BOX_DIA_P),
    (Ls12Class.P, Ls12Class.P_OR_BOX_DIA_P),
    (Ls12Class.BOX_DIA_P, Ls12Class.P_OR_BOX_DIA_P),
    (Ls12Class.P_OR_BOX_DIA_P, Ls12Class.DIA_P),
    (Ls12Class.DIA_P, Ls12Class.TOP),
)


class PolarityError(ValueError):
    pass


def _ls12_table() -> dict[int, Ls12Class]:
    space = point_space(LogicId.LS_1_2, ("p",))
    table = {}
    for c in Ls12Class:
        table[space.signature_int(c.formula)] = c
    if len(table) != 8:
        raise AssertionError("the eight representatives are not pairwise inequivalent")
    return table


def classify_ls12(f: Formula) -> Ls12Class:
    """Representative equivalent to ``f``, which must be positive in ``p`` only."""
    pol = polarities(f)
    if not pol.positive <= {"p"} or pol.negative:
        raise PolarityError(f"{render(f)} is not a positive formula in p alone")
    table = _ls12_table()
    sig = point_space(LogicId.LS_1_2, ("p",)).signature_int(f)
    try:
        return table[sig]
    except KeyError:
        raise AssertionError(f"{render(f)} matches none of the eight representatives") from None


def ls12_implication_order() -> set[tuple[Ls12Class, Ls12Class]]:
    """All pairs (a, b) of representatives with a -> b valid."""
    out = set()
    for a in Ls12Class:
        for b in Ls12Class:
            if provable(LogicId.LS_1_2, Implies(a.formula, b.formula)):
                out.add((a, b))
    return out


def hasse_closure(edges: Iterable[tuple]) -> set[tuple]:
    """Reflexive-transitive closure of a set of arrows over the eight classes."""
    nodes = list(Ls12Class)
    reach = {(a, a) for a in nodes} | set(edges)
    changed = True
    while changed:
        changed = False
        for a, b in list(reach):
            for c, d in list(reach):
                if b == c and (a, d) not in reach:
                    reach.add((a, d))
                    changed = True
    return reach
