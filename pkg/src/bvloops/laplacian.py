"""Formal BV Laplacian on products of local functionals.

A :class:`MultiLocal` is a sum of products ``F_1 ... F_m`` of integrated
single-point monomials ("points").  Points commute with the Koszul sign of
their ghost numbers only; inside a point the full bigraded sign applies.

Contractions use the completeness relation of the trace form on gl(N)::

    Tr(P T_a Q T^a R) = (-1)^{eps(P,Q)} Tr(Q) Tr(P R)
    Tr(P T_a R) Tr(P' T^a R') = Tr(P R' P' R) (after the Koszul reordering)

Coincident points are handled formally: a differentiated occurrence never
contracts with a partner at the same point, and occurrences on different
strands never contract.  Traces of the adjoint action are not dropped by hand;
for gl(N) they cancel between the two orderings of a commutator, which the
tests check.  The contraction sign is normalised so that
``Delta(FG) = Delta(F) G + (-1)^gh(F) F Delta(G) + (-1)^gh(F) (F, G)``.
"""

from __future__ import annotations

from typing import Iterable

from .coeff import Coeff
from .expr import Context, GExpr, differential, mono_sort_key
from .grading import Generator, koszul


def _grade(seq) -> tuple[int, int]:
    d = g = 0
    for x in seq:
        d += x.deg
        g += x.gh
    return d, g


def _point_gh(point) -> int:
    return sum(_grade(t)[1] for t in point[1])


def _point_sort_key(point):
    return mono_sort_key(point)


class MultiLocal:
    """Immutable canonical sum of products of local monomials."""

    __slots__ = ("ctx", "_terms")

    def __init__(self, ctx: Context, terms: dict | None = None):
        self.ctx = ctx
        self._terms = {k: c for k, c in (terms or {}).items() if not c.is_zero()}

    @classmethod
    def build(cls, ctx: Context, raw: Iterable) -> "MultiLocal":
        """From ``(coeff, [point, ...])`` pairs; points are local monomial keys."""
        acc: dict = {}
        for coeff, points in raw:
            r = _sort_points(list(points))
            if r is None:
                continue
            sign, key = r
            c = -coeff if sign else coeff
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        return cls(ctx, acc)

    @classmethod
    def from_local(cls, F: GExpr) -> "MultiLocal":
        if not F.integrated:
            raise TypeError("expected an integrated expression")
        return cls.build(F.ctx, [(m.coeff, [m.key]) for m in F])

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: [_point_sort_key(p) for p in kv[0]])

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "MultiLocal") -> "MultiLocal":
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out[k] + c if k in out else c
        return MultiLocal(self.ctx, out)

    def __neg__(self) -> "MultiLocal":
        return MultiLocal(self.ctx, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "MultiLocal") -> "MultiLocal":
        return self + (-other)

    def scale(self, c) -> "MultiLocal":
        c = Coeff.coerce(c)
        return MultiLocal(self.ctx, {k: v * c for k, v in self._terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiLocal) and self._terms == other._terms

    def __repr__(self) -> str:
        parts = []
        for pts, c in self.items():
            parts.append(f"{c} " + " ".join(
                "∫" + "".join("Tr(" + " ".join(g.label() for g in t) + ")" for t in p[1])
                for p in pts))
        return "MultiLocal(" + " + ".join(parts) + ")" if parts else "MultiLocal(0)"


def _sort_points(points: list):
    sign = 0
    keys = [_point_sort_key(p) for p in points]
    ghs = [_point_gh(p) for p in points]
    idx = list(range(len(points)))
    for i in range(1, len(idx)):
        j = i
        while j > 0 and keys[idx[j - 1]] > keys[idx[j]]:
            sign ^= (ghs[idx[j - 1]] * ghs[idx[j]]) & 1
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if keys[a] == keys[b] and ghs[a] & 1:
            return None
    return sign, tuple(points[i] for i in idx)


def product(*factors) -> MultiLocal:
    """Product of local functionals and/or multi-local expressions."""
    items = [MultiLocal.from_local(f) if isinstance(f, GExpr) else f for f in factors]
    ctx = items[0].ctx
    raw = [(Coeff.const(1), [])]
    for it in items:
        raw = [(c * ci, pts + list(k)) for c, pts in raw for k, ci in it._terms.items()]
    return MultiLocal.build(ctx, raw)


def _normalize_point(ctx: Context, coeff: Coeff, traces) -> list:
    """Canonical (coeff, point) pairs of one integrated point."""
    e = GExpr.build(ctx, [(coeff, (), tuple(traces), None)], integrated=True)
    return [(m.coeff, m.key) for m in e]


def _species_sign(phi: Generator, n: int) -> int:
    # normalisation of the contraction so that Delta(FG) reproduces the bracket
    return ((n + 1) * phi.gh) & 1


def _contract_point(ctx: Context, traces: tuple, i: int, j: int, table) -> list:
    """Contract flattened occurrences i < j of one point.

    Returns ``(sign, traces, adjacent)`` triples.
    """
    flat = [(ti, p, g) for ti, t in enumerate(traces) for p, g in enumerate(t)]
    tu, pu, u = flat[i]
    tv, pv, v = flat[j]
    before_u = [f[2] for f in flat[:i]]
    between = [f[2] for f in flat[:j] if f is not flat[i]]
    s = koszul(*_grade([u]), *_grade(before_u))
    s ^= koszul(*_grade([v]), *_grade(between))
    # components pulled out in the order (u, v); normalise to (field, antifield)
    if u.kind == "antifield":
        s ^= koszul(u.deg, u.gh, v.deg, v.gh)
        phi = v
    else:
        phi = u
    s ^= _species_sign(phi.base, ctx.n)
    if tu == tv:
        t = traces[tu]
        P, Q, R = t[:pu], t[pu + 1:pv], t[pv + 1:]
        s ^= koszul(*_grade(P), *_grade(Q))
        new = traces[:tu] + (Q, P + R) + traces[tu + 1:]
        return [(s, new, len(Q) == 0)]
    t1, t2 = traces[tu], traces[tv]
    P, R = t1[:pu], t1[pu + 1:]
    P2, R2 = t2[:pv], t2[pv + 1:]
    mid = [g for t in traces[tu + 1:tv] for g in t]
    s ^= koszul(*_grade(P2 + R2), *_grade(mid))
    s ^= koszul(*_grade(R), *_grade(P2 + R2))
    s ^= koszul(*_grade(P2), *_grade(R2))
    merged = P + R2 + P2 + R
    new = traces[:tu] + (merged,) + traces[tu + 1:tv] + traces[tv + 1:]
    return [(s, new, False)]


def _partners(u: Generator, v: Generator, table) -> bool:
    if u.strand != v.strand:
        return False
    if u.level or v.level:
        return False
    try:
        return table.partner(u) == v.base and u.kind != v.kind
    except KeyError:
        return False


def _self_terms(ctx: Context, coeff: Coeff, point, table) -> list:
    """Contractions of partner pairs inside one point: (coeff, traces)."""
    traces = point[1]
    flat = [g for t in traces for g in t]
    out = []
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            if not _partners(flat[i], flat[j], table):
                continue
            for s, new, _ in _contract_point(ctx, traces, i, j, table):
                out.append((-coeff if s else coeff, new))
    return out


def _undifferentiate(ctx: Context, point, idx: int):
    """Integrate by parts at a single-trace point so occurrence ``idx`` is undifferentiated.

    Yields ``(sign, trace)`` with the occurrence moved to the front at level 0.
    """
    (t,) = point[1]
    u = t[idx]
    P, R = t[:idx], t[idx + 1:]
    s = koszul(*_grade(P), *_grade((u,) + R))
    rest = R + P
    if u.level == 0:
        return [(s, (u,) + rest)]
    base = u.base if u.strand is None else u.base.on_strand(u.strand)
    s ^= 1 ^ (base.deg & 1)
    rest_e = GExpr.build(ctx, [(Coeff.const(1), (), (), rest)])
    out = []
    for m in differential(rest_e):
        sm = s ^ (1 if m.coeff.constant_value() < 0 else 0)
        if abs(m.coeff.constant_value()) != 1 or not m.coeff.is_constant():
            raise ValueError("unexpected coefficient in integration by parts")
        out.append((sm, (base,) + m.word))
    return out


def laplacian(x: MultiLocal | GExpr, table) -> MultiLocal:
    """Formal Delta by direct contraction of every partner pair."""
    if isinstance(x, GExpr):
        x = MultiLocal.from_local(x)
    ctx = x.ctx
    raw = []
    for pts, coeff in x._terms.items():
        pts = list(pts)
        ghs = [_point_gh(p) for p in pts]
        for a, pa in enumerate(pts):
            # Delta has ghost number 1 and passes the points before it
            sa = sum(ghs[:a]) & 1
            for c, new in _self_terms(ctx, coeff, pa, table):
                for cn, key in _normalize_point(ctx, c, new):
                    raw.append((-cn if sa else cn, pts[:a] + [key] + pts[a + 1:]))
            for b in range(a + 1, len(pts)):
                raw.extend(_cross_terms(ctx, coeff, pts, a, b, ghs, table))
    return MultiLocal.build(ctx, raw)


def _cross_terms(ctx: Context, coeff: Coeff, pts: list, a: int, b: int, ghs, table) -> list:
    pa, pb = pts[a], pts[b]
    if pa[0] or pb[0] or len(pa[1]) != 1 or len(pb[1]) != 1:
        raise TypeError("cross contractions need single-trace points")
    # move point b next to point a
    s0 = (sum(ghs[:a]) + ghs[b] * sum(ghs[a + 1:b])) & 1
    rest = pts[:a] + pts[a + 1:b] + pts[b + 1:]
    out = []
    ta, tb = pa[1][0], pb[1][0]
    for i, u in enumerate(ta):
        for j, v in enumerate(tb):
            ub, vb = Generator(u.name, u.base_deg, u.gh, u.kind, u.algebra_valued, 0, u.strand), \
                Generator(v.name, v.base_deg, v.gh, v.kind, v.algebra_valued, 0, v.strand)
            if not _partners(ub, vb, table):
                continue
            for s1, t1 in _undifferentiate(ctx, pa, i):
                for s2, t2 in _undifferentiate(ctx, pb, j):
                    # u is now first in t1; rotate it to the end
                    r1 = t1[1:] + t1[:1]
                    s = s0 ^ s1 ^ s2 ^ koszul(*_grade(t1[:1]), *_grade(t1[1:]))
                    # the second integral passes an n-form when the antifield comes first
                    s ^= (ctx.n * (u.kind == "antifield")) & 1
                    traces = (r1, t2)
                    for sc, new, _ in _contract_point(ctx, traces, len(r1) - 1, len(r1), table):
                        c = coeff if not (s ^ sc) else -coeff
                        for cn, key in _normalize_point(ctx, c, new):
                            out.append((cn, [key] + rest))
    return out


def formal_laplacian(F: GExpr, table) -> GExpr:
    """Delta of a single local functional, as an integrated expression."""
    ml = laplacian(F, table)
    raw = []
    for pts, c in ml._terms.items():
        (p,) = pts
        raw.append((c, p[0], p[1], None))
    return GExpr.build(F.ctx, raw, integrated=True)
