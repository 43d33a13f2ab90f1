"""Random expressions for property checks."""

from __future__ import annotations

import random

from .coeff import Coeff
from .expr import GExpr


def random_word(rng: random.Random, gens: list, deg: int, max_len: int = 4,
                allow_levels: bool = True, tries: int = 200) -> tuple | None:
    """A word of generators with total form degree ``deg`` (None if none found)."""
    for _ in range(tries):
        k = rng.randint(1, max_len)
        w = []
        for _ in range(k):
            g = rng.choice(gens)
            if allow_levels and rng.random() < 0.25:
                g = g.raised()
            w.append(g)
        if sum(g.deg for g in w) == deg:
            return tuple(w)
    return None


def random_local(rng: random.Random, ctx, gens: list, terms: int = 2, max_len: int = 4,
                 allow_levels: bool = True) -> GExpr:
    """Random integrated single-trace functional (possibly zero after normalisation)."""
    raw = []
    for _ in range(terms):
        w = random_word(rng, gens, ctx.n, max_len, allow_levels)
        if w is not None:
            raw.append((Coeff.const(rng.choice([-2, -1, 1, 2, 3])), (), (w,), None))
    return GExpr.build(ctx, raw, integrated=True)


def random_form(rng: random.Random, ctx, gens: list, terms: int = 3, max_len: int = 3,
                matrix: bool = True) -> GExpr:
    """Random un-integrated expression (matrix word or single trace)."""
    raw = []
    for _ in range(terms):
        k = rng.randint(1, max_len)
        w = tuple(rng.choice(gens) for _ in range(k))
        c = Coeff.const(rng.choice([-2, -1, 1, 2]))
        raw.append((c, (), (), w) if matrix else (c, (), (w,), None))
    return GExpr.build(ctx, raw)
