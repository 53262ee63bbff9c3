"""Independent enumerators and brute-force oracles shared by the tests.

Nothing here reuses the package's decision procedures: formulas are
generated syntactically, arrows are decided by a direct recursive game,
and frames are listed exhaustively.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from ulip.decide import equivalent
from ulip.formula import (
    BOTTOM,
    TOP,
    And,
    Box,
    Implies,
    Not,
    Or,
    PolaritySet,
    Var,
    depth,
    diamond,
)
from ulip.kripke import Frame, Model, random_model, truth_set


def formulas_upto(vars_, max_size, max_depth, ops=("not", "box", "dia", "and", "or", "imp")):
    """Every formula with at most ``max_size`` constructors and modal depth <= ``max_depth``.

    The diamond counts as a single constructor.
    """
    by_size = {1: [Var(v) for v in vars_] + [TOP, BOTTOM]}
    for s in range(2, max_size + 1):
        out = []
        for f in by_size[s - 1]:
            if "not" in ops:
                out.append(Not(f))
            if depth(f) < max_depth:
                if "box" in ops:
                    out.append(Box(f))
                if "dia" in ops:
                    out.append(diamond(f))
        for a in range(1, s - 1):
            for x in by_size[a]:
                for y in by_size[s - 1 - a]:
                    if "and" in ops:
                        out.append(And(x, y))
                    if "or" in ops:
                        out.append(Or(x, y))
                    if "imp" in ops:
                        out.append(Implies(x, y))
        by_size[s] = out
    return [f for s in sorted(by_size) for f in by_size[s]]


def random_formula(rng: random.Random, vars_, max_depth: int, budget: int = 6, modal: bool = True):
    """A random formula of modal depth at most ``max_depth``."""
    if budget <= 1 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.08:
            return TOP
        if r < 0.16:
            return BOTTOM
        return Var(rng.choice(list(vars_)))
    choices = ["not", "and", "or", "imp"]
    if modal and max_depth > 0:
        choices += ["box", "box", "dia"]
    op = rng.choice(choices)
    if op == "not":
        return Not(random_formula(rng, vars_, max_depth, budget - 1, modal))
    if op == "box":
        return Box(random_formula(rng, vars_, max_depth - 1, budget - 1, modal))
    if op == "dia":
        return diamond(random_formula(rng, vars_, max_depth - 1, budget - 1, modal))
    left = random_formula(rng, vars_, max_depth, budget // 2, modal)
    right = random_formula(rng, vars_, max_depth, budget - budget // 2, modal)
    return {"and": And, "or": Or, "imp": Implies}[op](left, right)


def dedupe_modulo(L, formulas, vars_, rng, probes: int = 40):
    """One representative per L-equivalence class.

    Formulas are first bucketed by their truth sets on random in-class
    models; inside a bucket equivalence is decided exactly.
    """
    models = [random_model(L, list(vars_), rng, 8) for _ in range(probes)]
    buckets: dict = {}
    reps = []
    for f in formulas:
        key = tuple(truth_set(m, f) for m in models)
        bucket = buckets.setdefault(key, [])
        if any(equivalent(L, f, g) for g in bucket):
            continue
        bucket.append(f)
        reps.append(f)
    return reps


def all_polarity_sets(vars_):
    subsets = [frozenset(c) for k in range(len(vars_) + 1) for c in itertools.combinations(sorted(vars_), k)]
    return [PolaritySet(a, b) for a in subsets for b in subsets]


def game_arrow(m0: Model, x: int, m1: Model, y: int, ps: PolaritySet, n: int) -> bool:
    """The depth-n transfer relation straight from its recursive characterisation."""

    @lru_cache(maxsize=None)
    def go(a: int, b: int, k: int) -> bool:
        va, vb = m0.valuation[a], m1.valuation[b]
        if any(p in va and p not in vb for p in ps.positive):
            return False
        if any(p not in va and p in vb for p in ps.negative):
            return False
        if k == 0:
            return True
        sa = [c for c in range(m0.world_count) if (a, c) in m0.frame.relation]
        sb = [d for d in range(m1.world_count) if (b, d) in m1.frame.relation]
        # boxes travel from a to b: every successor of b is answered below a
        if not all(any(go(c, d, k - 1) for c in sa) for d in sb):
            return False
        # diamonds travel from a to b: every successor of a is answered below b
        return all(any(go(c, d, k - 1) for d in sb) for c in sa)

    return go(x, y, n)


def all_frames(n: int):
    """Every reflexive transitive relation on ``n`` labelled worlds."""
    others = [(a, b) for a in range(n) for b in range(n) if a != b]
    for mask in range(1 << len(others)):
        rel = {(i, i) for i in range(n)} | {others[i] for i in range(len(others)) if mask >> i & 1}
        if all((a, d) in rel for a, b in rel for c, d in rel if b == c):
            yield Frame(n, frozenset(rel))


# the sixteen equivalences used to close the eight classes under box and diamond
LS12_EQUIVALENCES = [
    ("[]false", "false"), ("<>false", "false"),
    ("[][]p", "[]p"), ("<>[]p", "[]<>p"),
    ("[](p & []<>p)", "[]p"), ("<>(p & []<>p)", "[]<>p"),
    ("[]p", "[]p"), ("<>p", "<>p"),
    ("[][]<>p", "[]<>p"), ("<>[]<>p", "[]<>p"),
    ("[](p | []<>p)", "[]<>p"), ("<>(p | []<>p)", "<>p"),
    ("[]<>p", "[]<>p"), ("<><>p", "<>p"),
    ("[]true", "true"), ("<>true", "true"),
]

