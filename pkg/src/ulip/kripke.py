"""Finite reflexive-transitive Kripke frames, models and frame classes."""

from __future__ import annotations

import enum
import itertools
import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .formula import (
    And,
    Bottom,
    Box,
    Formula,
    Implies,
    Not,
    Or,
    Top,
    Var,
    subformulas,
)


class FrameError(ValueError):
    pass


def reflexive_transitive_closure(n: int, pairs: Iterable[tuple[int, int]]) -> frozenset:
    reach = [1 << i for i in range(n)]
    for a, b in pairs:
        reach[a] |= 1 << b
    # Warshall over bitmasks
    for k in range(n):
        bit = 1 << k
        rk = reach[k]
        for i in range(n):
            if reach[i] & bit:
                reach[i] |= rk
    return frozenset((i, j) for i in range(n) for j in range(n) if reach[i] >> j & 1)


@dataclass(frozen=True)
class Frame:
    """A finite set of worlds ``0..world_count-1`` with an S4 relation."""

    world_count: int
    relation: frozenset
    successors: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.world_count
        if n < 1:
            raise FrameError("a frame needs at least one world")
        rel = frozenset((int(a), int(b)) for a, b in self.relation)
        for a, b in rel:
            if not (0 <= a < n and 0 <= b < n):
                raise FrameError(f"pair ({a}, {b}) mentions a world outside 0..{n - 1}")
        succ = [0] * n
        for a, b in rel:
            succ[a] |= 1 << b
        for i in range(n):
            if not succ[i] >> i & 1:
                raise FrameError(f"relation is not reflexive at world {i}")
        for i in range(n):
            for j in _bits(succ[i]):
                if succ[j] & ~succ[i]:
                    raise FrameError(f"relation is not transitive through ({i}, {j})")
        object.__setattr__(self, "relation", rel)
        object.__setattr__(self, "successors", tuple(succ))

    @staticmethod
    def closed(n: int, pairs: Iterable[tuple[int, int]] = ()) -> "Frame":
        return Frame(n, reflexive_transitive_closure(n, pairs))

    def sees(self, a: int, b: int) -> bool:
        return bool(self.successors[a] >> b & 1)

    def succ_list(self, a: int) -> list[int]:
        return list(_bits(self.successors[a]))


def _bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@dataclass(frozen=True)
class Model:
    frame: Frame
    valuation: tuple  # tuple of frozensets, one per world

    def __post_init__(self):
        val = tuple(frozenset(v) for v in self.valuation)
        if len(val) != self.frame.world_count:
            raise FrameError("valuation must list every world")
        object.__setattr__(self, "valuation", val)

    @property
    def world_count(self) -> int:
        return self.frame.world_count

    def variables(self) -> frozenset:
        return frozenset().union(*self.valuation)

    def at(self, point: int) -> "PointedModel":
        return PointedModel(self, point)


@dataclass(frozen=True)
class PointedModel:
    model: Model
    point: int

    def __post_init__(self):
        if not 0 <= self.point < self.model.world_count:
            raise FrameError(f"point {self.point} is not a world of the model")


def truth_set(model: Model, f: Formula) -> int:
    """Bitmask of the worlds of ``model`` where ``f`` holds."""
    n = model.world_count
    full = (1 << n) - 1
    succ = model.frame.successors
    memo: dict[Formula, int] = {}
    for g in subformulas(f):
        if isinstance(g, Var):
            m = 0
            for i, v in enumerate(model.valuation):
                if g.name in v:
                    m |= 1 << i
        elif isinstance(g, Bottom):
            m = 0
        elif isinstance(g, Top):
            m = full
        elif isinstance(g, Not):
            m = full & ~memo[g.child]
        elif isinstance(g, And):
            m = memo[g.left] & memo[g.right]
        elif isinstance(g, Or):
            m = memo[g.left] | memo[g.right]
        elif isinstance(g, Implies):
            m = (full & ~memo[g.left]) | memo[g.right]
        elif isinstance(g, Box):
            c = memo[g.child]
            m = 0
            for i in range(n):
                if succ[i] & ~c == 0:
                    m |= 1 << i
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = m
    return memo[f]


def satisfies(pm: PointedModel, f: Formula) -> bool:
    return bool(truth_set(pm.model, f) >> pm.point & 1)


# ---------------------------------------------------------------- clusters


@dataclass(frozen=True)
class ClusterPartition:
    """Clusters of a frame, listed by smallest member.

    ``root`` is the index of the cluster seeing every world, if there is
    one; ``final`` flags the clusters that see only themselves.
    """

    blocks: tuple  # tuple of frozensets of worlds
    root: int | None
    final: tuple  # tuple of bools

    def block_of(self, world: int) -> int:
        for i, b in enumerate(self.blocks):
            if world in b:
                return i
        raise KeyError(world)

    def final_blocks(self) -> list[frozenset]:
        return [b for b, f in zip(self.blocks, self.final) if f]


def clusters(m: Model | Frame) -> ClusterPartition:
    frame = m.frame if isinstance(m, Model) else m
    n = frame.world_count
    succ = frame.successors
    seen = 0
    blocks = []
    for i in range(n):
        if seen >> i & 1:
            continue
        block = frozenset(j for j in _bits(succ[i]) if succ[j] >> i & 1)
        blocks.append(block)
        for j in block:
            seen |= 1 << j
    full = (1 << n) - 1
    masks = [sum(1 << j for j in b) for b in blocks]
    final = tuple(succ[min(b)] == mk for b, mk in zip(blocks, masks))
    root = None
    for i, b in enumerate(blocks):
        if succ[min(b)] == full:
            root = i
            break
    return ClusterPartition(tuple(blocks), root, final)


# ---------------------------------------------------------------- logics


@dataclass(frozen=True)
class Shape:
    """Frame shape of a class: an optional bottom cluster seeing every final cluster.

    ``bottom`` is None (a lone cluster), "point" (a root), "pair" or "any"
    (an inner cluster); ``final_kind`` bounds the final cluster sizes and
    ``final_count`` is "one", "two" or "many" (at least one).
    """

    bottom: str | None
    final_kind: str
    final_count: str


class LogicId(enum.Enum):
    Triv = ("triv", 0, "Triv: a single reflexive point", Shape(None, "point", "one"))
    S5 = ("s5", 1, "S5: one finite cluster", Shape(None, "any", "one"))
    GW2 = ("gw2", 2, "GW.2 = Gamma(LS,1,1): a two-element chain", Shape("point", "point", "one"))
    LS_2_1 = ("ls21", 2, "Gamma(LS,2,1): a root below a two-element cluster", Shape("point", "pair", "one"))
    S4_4 = ("s44", 2, "S4.4 = Gamma(LS,w,1): a root below one finite cluster", Shape("point", "any", "one"))
    GV = ("gv", 3, "GV = Gamma(LV,1,1): a root below two final points", Shape("point", "point", "two"))
    LV_2_1 = ("lv21", 3, "Gamma(LV,2,1): a root below two two-element clusters", Shape("point", "pair", "two"))
    LV_w_1 = ("lvw1", 3, "Gamma(LV,w,1): a root below two finite clusters", Shape("point", "any", "two"))
    GW = ("gw", 3, "GW = Gamma(LP2,1,1): a root below finitely many final points", Shape("point", "point", "many"))
    LP2_2_1 = ("lp2_21", 3, "Gamma(LP2,2,1): a root below finitely many two-element clusters", Shape("point", "pair", "many"))
    LP2_w_1 = ("lp2_w1", 3, "Gamma(LP2,w,1): a root below finitely many finite clusters", Shape("point", "any", "many"))
    LS_1_2 = ("ls12", None, "Gamma(LS,1,2): a two-element cluster below one final point", Shape("pair", "point", "one"))
    LP2_1_w = ("lp2_1w", None, "Gamma(LP2,1,w): a finite cluster below finitely many final points", Shape("any", "point", "many"))

    def __init__(self, tag, rank, description, shape):
        self.tag = tag
        self.nip_rank = rank
        self.description = description
        self.shape = shape

    @staticmethod
    def from_tag(tag: str) -> "LogicId":
        for L in LogicId:
            if L.tag == tag.lower() or L.name.lower() == tag.lower():
                return L
        raise KeyError(f"unknown logic tag {tag!r}")

    def __repr__(self) -> str:
        return f"LogicId.{self.name}"


NIP_LOGICS = tuple(L for L in LogicId if L.nip_rank is not None)


def _size_ok(kind: str, size: int) -> bool:
    return size == 1 if kind == "point" else size == 2 if kind == "pair" else size >= 1


def frame_in_class(frame: Frame, L: LogicId) -> bool:
    """Whether the frame has the shape of the class ``L``."""
    part = clusters(frame)
    shape = L.shape
    sizes = [len(b) for b in part.blocks]
    if shape.bottom is None:
        return len(part.blocks) == 1 and _size_ok(shape.final_kind, sizes[0])
    finals = [i for i, f in enumerate(part.final) if f]
    inner = [i for i, f in enumerate(part.final) if not f]
    if len(inner) != 1 or part.root != inner[0]:
        return False
    if not _size_ok(shape.bottom, sizes[inner[0]]):
        return False
    count = len(finals)
    if shape.final_count == "one" and count != 1:
        return False
    if shape.final_count == "two" and count != 2:
        return False
    return all(_size_ok(shape.final_kind, sizes[i]) for i in finals)


def in_class(m: Model | Frame, L: LogicId) -> bool:
    frame = m.frame if isinstance(m, Model) else m
    return frame_in_class(frame, L)


def check_pmorphism(f: Mapping[int, int] | Sequence[int], source: Frame, target: Frame) -> bool:
    """Forth and back conditions for a total map between frames."""
    n = source.world_count
    try:
        image = [f[x] for x in range(n)]
    except (KeyError, IndexError):
        return False
    if any(not 0 <= y < target.world_count for y in image):
        return False
    for x in range(n):
        reached = 0
        for y in source.succ_list(x):
            if not target.sees(image[x], image[y]):
                return False
            reached |= 1 << image[y]
        if target.successors[image[x]] & ~reached:
            return False
    return True


# ---------------------------------------------------------------- canonical lists


def valuations(vars_: Iterable[str]) -> list[frozenset]:
    vs = sorted(vars_)
    out = []
    for bits in range(1 << len(vs)):
        out.append(frozenset(v for i, v in enumerate(vs) if bits >> i & 1))
    return out


def _val_key(v: frozenset) -> tuple:
    # fuller valuations first, so the all-true world leads every listing
    return (-len(v), tuple(sorted(v)))


def cluster_kinds(kind: str, vars_: Iterable[str]) -> list[tuple]:
    """Cluster contents allowed by ``kind``, as sorted tuples of valuations.

    Final clusters of unbounded size keep one world per valuation; pairs
    keep duplicates since the shape needs exactly two worlds.
    """
    vals = sorted(valuations(vars_), key=_val_key)
    if kind == "point":
        return [(v,) for v in vals]
    if kind == "pair":
        return [tuple(c) for c in itertools.combinations_with_replacement(vals, 2)]
    out = []
    for r in range(1, len(vals) + 1):
        out.extend(tuple(c) for c in itertools.combinations(vals, r))
    return out


def final_collections(shape: Shape, kinds: list[tuple]) -> Iterator[tuple]:
    """Collections of final clusters for a shape, as tuples of kinds."""
    if shape.final_count == "one":
        for c in kinds:
            yield (c,)
    elif shape.final_count == "two":
        for c in itertools.product(kinds, repeat=2):
            yield c
    else:
        for r in range(1, len(kinds) + 1):
            yield from itertools.combinations(kinds, r)


def bottom_kinds(shape: Shape, vars_: Iterable[str]) -> list[tuple]:
    if shape.bottom is None:
        return [()]
    return cluster_kinds(shape.bottom, vars_)


def star_model(bottom: tuple, finals: Sequence[tuple]) -> Model:
    """Model with a bottom cluster (possibly empty) seeing the listed final clusters."""
    worlds: list[frozenset] = list(bottom)
    bottom_ids = list(range(len(bottom)))
    rel = set()
    cluster_ids = []
    for c in finals:
        ids = list(range(len(worlds), len(worlds) + len(c)))
        worlds.extend(c)
        cluster_ids.append(ids)
    for ids in [bottom_ids] + cluster_ids:
        for a in ids:
            for b in ids:
                rel.add((a, b))
    for a in bottom_ids:
        for ids in cluster_ids:
            for b in ids:
                rel.add((a, b))
    return Model(Frame(len(worlds), frozenset(rel)), tuple(worlds))


def canonical_count(L: LogicId, vars_: Iterable[str]) -> int:
    vars_ = list(vars_)
    shape = L.shape
    k = len(cluster_kinds(shape.final_kind, vars_))
    b = len(bottom_kinds(shape, vars_))
    if shape.final_count == "one":
        return b * k
    if shape.final_count == "two":
        return b * k * k
    return b * ((1 << k) - 1)


def iter_canonical(L: LogicId, vars_: Iterable[str]) -> Iterator[tuple[tuple, tuple]]:
    """Yield (bottom, finals) descriptions of the canonical models."""
    vars_ = sorted(vars_)
    shape = L.shape
    kinds = cluster_kinds(shape.final_kind, vars_)
    for bottom in bottom_kinds(shape, vars_):
        for finals in final_collections(shape, kinds):
            yield bottom, finals


@lru_cache(maxsize=64)
def _canonical(L: LogicId, vars_: tuple) -> tuple:
    return tuple(star_model(b, f) for b, f in iter_canonical(L, vars_))


def canonical_models(L: LogicId, vars_: Iterable[str], limit: int = 200000) -> list[Model]:
    """All canonical models of ``L`` over ``vars_``, within the size bounds.

    Raises ``ResourceWarning`` when the list would exceed ``limit`` models.
    """
    key = tuple(sorted(vars_))
    count = canonical_count(L, key)
    if count > limit:
        raise ResourceWarning(f"{L.name} over {len(key)} variables has {count} canonical models")
    return list(_canonical(L, key))


# ---------------------------------------------------------------- random models


def random_model(L: LogicId, vars_: Sequence[str], rng: random.Random, max_worlds: int = 12) -> Model:
    """A random model in class ``L`` with at most ``max_worlds`` worlds.

    Unlike canonical models, clusters may repeat valuations and the final
    clusters may repeat each other. Each model draws its own chance that a
    cluster carries one valuation throughout, and final clusters try a few
    times to differ from the earlier ones, so that models needing several
    distinct uniform clusters still turn up.
    """
    vars_ = sorted(vars_)
    shape = L.shape
    uniform = rng.choice((0.0, 0.5, 1.0))

    def val():
        return frozenset(v for v in vars_ if rng.random() < 0.5)

    def cluster(s: int) -> tuple:
        if rng.random() < uniform:
            return (val(),) * s
        return tuple(val() for _ in range(s))

    def size_for(kind: str, budget: int) -> int:
        if kind == "point":
            return 1
        if kind == "pair":
            return 2
        return rng.randint(1, max(1, min(budget, 4)))

    for _ in range(100):
        budget = max_worlds
        bottom: tuple = ()
        if shape.bottom is not None:
            s = size_for(shape.bottom, budget - 1)
            bottom = cluster(s)
            budget -= s
        if shape.final_count == "one":
            count = 1
        elif shape.final_count == "two":
            count = 2
        else:
            count = rng.randint(1, max(1, min(5, budget)))
        finals = []
        for _ in range(count):
            s = size_for(shape.final_kind, max(1, budget // max(1, count)))
            c = cluster(s)
            for _ in range(3):
                if set(c) not in [set(d) for d in finals]:
                    break
                c = cluster(s)
            finals.append(c)
            budget -= s
        if budget >= 0:
            return star_model(bottom, finals)
    raise RuntimeError(f"could not fit a {L.name} model into {max_worlds} worlds")


def model_points(m: Model) -> list[PointedModel]:
    return [PointedModel(m, i) for i in range(m.world_count)]


# ---------------------------------------------------------------- JSON


class ModelFormatError(ValueError):
    pass


def model_from_data(data: Mapping) -> Model:
    try:
        n = int(data["worlds"])
        pairs = [(int(a), int(b)) for a, b in data.get("relation", [])]
        closure = bool(data.get("closure", False))
        raw_val = data.get("valuation", {})
        val = [frozenset() for _ in range(n)]
        for key, names in raw_val.items():
            i = int(key)
            if not 0 <= i < n:
                raise ModelFormatError(f"valuation mentions world {i} outside 0..{n - 1}")
            val[i] = frozenset(str(x) for x in names)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model: {exc}") from exc
    try:
        if closure:
            frame = Frame.closed(n, pairs)
        else:
            frame = Frame(n, frozenset(pairs))
    except FrameError as exc:
        raise ModelFormatError(str(exc)) from exc
    return Model(frame, tuple(val))


def model_from_json(text: str) -> Model:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON: {exc}") from exc
    return model_from_data(data)


def model_to_data(m: Model) -> dict:
    return {
        "worlds": m.world_count,
        "relation": sorted([a, b] for a, b in m.frame.relation),
        "closure": False,
        "valuation": {str(i): sorted(v) for i, v in enumerate(m.valuation)},
    }


def model_to_json(m: Model) -> str:
    return json.dumps(model_to_data(m), sort_keys=True)
