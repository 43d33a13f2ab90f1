"""Component backend for gl(N) (default N = 2) with trivial background.

Every matrix generator X becomes N^2 scalar generators ``X_ij`` of the same
bigrading; traces are expanded into index sums.  The antibracket is recomputed
from scalar derivatives, independently of the matrix-level code, pairing
``phi_ij`` with ``phi+_ji`` (the trace form).
"""

from __future__ import annotations

import itertools

from .expr import Context, GExpr, bracket, differential, integrate_top, trace, wedge
from .grading import Generator, koszul


def component(g: Generator, i: int, j: int) -> Generator:
    return Generator(f"{g.name}_{i}{j}", g.base_deg, g.gh, g.kind, False, g.level, g.strand)


def _component_of(g: Generator):
    """Inverse of :func:`component`: ``(matrix generator, i, j)``."""
    name, _, ij = g.name.rpartition("_")
    return Generator(name, g.base_deg, g.gh, g.kind, True, g.level, g.strand), int(ij[0]), int(ij[1])


def _trace_terms(word: tuple, N: int):
    k = len(word)
    for idx in itertools.product(range(N), repeat=k):
        yield tuple(component(g, idx[p], idx[(p + 1) % k]) for p, g in enumerate(word))


def to_components(x: GExpr, N: int = 2) -> GExpr:
    """Expand traces into scalar components (open matrix words are rejected)."""
    ctx = x.ctx
    raw = []
    for m in x:
        if m.word is not None:
            raise TypeError("component expansion needs trace-closed expressions")
        c = m.coeff.substitute({"N": N})
        factors = [list(_trace_terms(t, N)) for t in m.traces]
        for choice in itertools.product(*factors):
            sc = m.scalars + tuple(g for part in choice for g in part)
            raw.append((c, sc, (), None))
    return GExpr.build(ctx, raw, integrated=x.integrated)


def _grade(seq):
    return sum(g.deg for g in seq), sum(g.gh for g in seq)


def scalar_derivative(F: GExpr, x: Generator, side: str) -> GExpr:
    """Derivative of an integrated scalar functional with respect to level-0 ``x``."""
    ctx = F.ctx
    out = GExpr.zero(ctx)
    rd, rg = x.deg, x.gh
    for m in F:
        if m.traces or m.word is not None:
            raise TypeError("scalar functional expected")
        sc = m.scalars
        for p, g in enumerate(sc):
            if g.base != x:
                continue
            P, R = sc[:p], sc[p + 1:]
            rest = GExpr.build(ctx, [(m.coeff, P + R, (), None)])
            if g.level == 0:
                s = koszul(*_grade(P), rd, rg) if side == "right" else koszul(rd, rg, *_grade(R))
                out = out + (rest.scale(-1) if s else rest)
            elif g.level == 1:
                if side == "right":
                    s = koszul(*_grade(P), rd + 1, rg) + 1 + rd
                else:
                    s = koszul(rd + 1, rg, *_grade(R)) + 1 + _grade(P + R)[0]
                d = differential(rest)
                out = out + (d.scale(-1) if s & 1 else d)
    return out


def component_antibracket(F: GExpr, G: GExpr, table, N: int = 2) -> GExpr:
    """BV bracket of component functionals (outputs of :func:`to_components`)."""
    n = F.ctx.n
    total = GExpr.zero(F.ctx)
    for e in table:
        phi, phip = e.field, e.antifield
        sgn = -1 if (phi.deg * (n + 1)) % 2 else 1
        for i in range(N):
            for j in range(N):
                f_ij, p_ji = component(phi, i, j), component(phip, j, i)
                t1 = wedge(scalar_derivative(F, f_ij, "left"), scalar_derivative(G, p_ji, "right"))
                t2 = wedge(scalar_derivative(F, p_ji, "left"), scalar_derivative(G, f_ij, "right"))
                total = total + t1 - t2.scale(sgn)
    return integrate_top(total)


def residual_norm(x: GExpr) -> float:
    """Sum of absolute values of the (rational) coefficients."""
    total = 0.0
    for m in x:
        for c in m.coeff.terms.values():
            total += abs(float(c))
    return total


def structure_bracket_check(n: int = 3, N: int = 2) -> GExpr:
    """[a,[a,a]] for an odd algebra-valued a, expanded in components (must vanish)."""
    ctx = Context(n)
    a = GExpr.gen(ctx, Generator("a", 1, 0, "field"))
    x = bracket(a, bracket(a, a))
    y = GExpr.gen(ctx, Generator("y", 0, 0, "field"))
    return to_components(trace(wedge(x, y)), N)
