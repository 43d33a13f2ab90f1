"""Canonical expressions in the bigraded algebra and their basic operations.

Monomials are products ``s_1 ... s_p  Tr(w_1) ... Tr(w_q)  v`` of scalar
generators, traces of matrix words and (optionally) one open matrix word.
Matrix-valued generators never commute with each other, so brackets are
expanded as graded commutators in the free associative algebra; cyclicity of
traces, ad-invariance of the trace pairing and Jacobi then hold identically.

Every swap of homogeneous factors a, b costs ``(-1)^(deg a deg b + gh a gh b)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Mapping

from .coeff import Coeff, ONE
from .grading import Generator, koszul


class ContextError(ValueError):
    """Operands live in different dimension contexts."""


@dataclass(frozen=True)
class Context:
    n: int
    label: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")


def _grading(seq) -> tuple[int, int]:
    d = g = 0
    for x in seq:
        d += x.deg
        g += x.gh
    return d, g


def _sort_scalars(gens) -> tuple[int, tuple] | None:
    lst = list(gens)
    sign = 0
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1].key > lst[j].key:
            a, b = lst[j - 1], lst[j]
            sign ^= koszul(a.deg, a.gh, b.deg, b.gh)
            lst[j - 1], lst[j] = b, a
            j -= 1
    for a, b in zip(lst, lst[1:]):
        if a.key == b.key and (a.deg + a.gh) & 1:
            return None
    return sign, tuple(lst)


def _canon_trace(word: tuple) -> tuple[int, tuple] | None:
    k = len(word)
    if k <= 1:
        return 0, tuple(word)
    degs = [g.deg for g in word]
    ghs = [g.gh for g in word]
    td, tg = sum(degs), sum(ghs)
    best = None
    pd = pg = 0
    for r in range(k):
        # Tr(P Q) = (-1)^{eps(P,Q)} Tr(Q P) with P = word[:r]
        s = koszul(pd, pg, td - pd, tg - pg)
        cand = word[r:] + word[:r]
        ckey = tuple(g.key for g in cand)
        if best is None or ckey < best[2]:
            best = (s, cand, ckey)
        elif ckey == best[2] and s != best[0]:
            return None
        pd += degs[r]
        pg += ghs[r]
    return best[0], best[1]


def _trace_key(t: tuple) -> tuple:
    return tuple(g.key for g in t)


def canonicalize(scalars, traces, word, n: int) -> tuple[int, int, tuple] | None:
    """Return ``(sign, n_empty_traces, key)`` or None when the monomial vanishes."""
    allgens = list(scalars)
    for t in traces:
        allgens.extend(t)
    if word is not None:
        allgens.extend(word)
    deg = 0
    for g in allgens:
        if g.deg > n:
            return None
        deg += g.deg
    if deg > n:
        return None
    res = _sort_scalars(scalars)
    if res is None:
        return None
    sign, sc = res
    empties = 0
    ctr = []
    for t in traces:
        if not t:
            empties += 1
            continue
        r = _canon_trace(tuple(t))
        if r is None:
            return None
        sign ^= r[0]
        ctr.append(r[1])
    # sort the trace factors
    grads = [_grading(t) for t in ctr]
    keys = [_trace_key(t) for t in ctr]
    idx = list(range(len(ctr)))
    for i in range(1, len(idx)):
        j = i
        while j > 0 and keys[idx[j - 1]] > keys[idx[j]]:
            a, b = grads[idx[j - 1]], grads[idx[j]]
            sign ^= koszul(a[0], a[1], b[0], b[1])
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if keys[a] == keys[b] and (grads[a][0] + grads[a][1]) & 1:
            return None
    tr = tuple(ctr[i] for i in idx)
    w = tuple(word) if word is not None else None
    return sign, empties, (sc, tr, w)


def mono_sort_key(key) -> tuple:
    sc, tr, w = key
    return (tuple(g.key for g in sc), tuple(_trace_key(t) for t in tr),
            (0,) if w is None else (1,) + tuple(g.key for g in w))


@dataclass(frozen=True)
class Monomial:
    coeff: Coeff
    scalars: tuple
    traces: tuple
    word: tuple | None

    @property
    def generators(self) -> list:
        out = list(self.scalars)
        for t in self.traces:
            out.extend(t)
        if self.word is not None:
            out.extend(self.word)
        return out

    @property
    def deg(self) -> int:
        return sum(g.deg for g in self.generators)

    @property
    def gh(self) -> int:
        return sum(g.gh for g in self.generators)

    @property
    def total(self) -> int:
        return self.deg + self.gh

    @property
    def key(self):
        return (self.scalars, self.traces, self.word)

    @property
    def is_matrix(self) -> bool:
        return self.word is not None


N_PARAM = "N"


class GExpr:
    """Immutable canonical formal sum of monomials.

    ``integrated`` marks expressions under the integral over the closed
    manifold; those are additionally normalised modulo total derivatives.
    """

    __slots__ = ("ctx", "_terms", "integrated")

    def __init__(self, ctx: Context, terms: Mapping | None = None, integrated: bool = False):
        self.ctx = ctx
        self._terms = {k: c for k, c in (terms or {}).items() if not c.is_zero()}
        self.integrated = integrated

    # construction ------------------------------------------------------
    @classmethod
    def build(cls, ctx: Context, raw: Iterable, integrated: bool = False) -> "GExpr":
        """Build from ``(coeff, scalars, traces, word)`` tuples, canonicalising each."""
        acc: dict = {}
        n = ctx.n
        for coeff, scalars, traces, word in raw:
            if isinstance(coeff, (int, Fraction)):
                if coeff == 0:
                    continue
                coeff = Coeff.const(coeff)
            elif coeff.is_zero():
                continue
            r = canonicalize(scalars, traces, word, n)
            if r is None:
                continue
            sign, empties, key = r
            c = -coeff if sign else coeff
            if empties:
                c = c * Coeff.param(N_PARAM, empties)
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        out = cls(ctx, acc, integrated)
        if integrated:
            out = _ibp_normalize(out)
        return out

    @classmethod
    def zero(cls, ctx: Context, integrated: bool = False) -> "GExpr":
        return cls(ctx, {}, integrated)

    @classmethod
    def gen(cls, ctx: Context, g: Generator, coeff=1) -> "GExpr":
        c = Coeff.coerce(coeff)
        if g.algebra_valued:
            return cls.build(ctx, [(c, (), (), (g,))])
        return cls.build(ctx, [(c, (g,), (), None)])

    @classmethod
    def scalar(cls, ctx: Context, coeff=1) -> "GExpr":
        return cls.build(ctx, [(Coeff.coerce(coeff), (), (), None)])

    @classmethod
    def identity(cls, ctx: Context, coeff=1) -> "GExpr":
        return cls.build(ctx, [(Coeff.coerce(coeff), (), (), ())])

    # access ------------------------------------------------------------
    def __iter__(self) -> Iterator[Monomial]:
        for key in sorted(self._terms, key=mono_sort_key):
            sc, tr, w = key
            yield Monomial(self._terms[key], sc, tr, w)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, key) -> Coeff:
        return self._terms.get(key, Coeff())

    def _check(self, other: "GExpr"):
        if self.ctx != other.ctx:
            raise ContextError(f"context mismatch: n={self.ctx.n} vs n={other.ctx.n}")

    # linear structure ----------------------------------------------------
    def __add__(self, other: "GExpr") -> "GExpr":
        if isinstance(other, int) and other == 0:
            return self
        self._check(other)
        if self.integrated != other.integrated:
            raise TypeError("cannot add integrated and local expressions")
        out = dict(self._terms)
        for k, c in other._terms.items():
            prev = out.get(k)
            out[k] = c if prev is None else prev + c
        return GExpr(self.ctx, out, self.integrated)

    __radd__ = __add__

    def __neg__(self) -> "GExpr":
        return GExpr(self.ctx, {k: -c for k, c in self._terms.items()}, self.integrated)

    def __sub__(self, other: "GExpr") -> "GExpr":
        return self + (-other)

    def scale(self, c) -> "GExpr":
        c = Coeff.coerce(c)
        return GExpr(self.ctx, {k: v * c for k, v in self._terms.items()}, self.integrated)

    def __mul__(self, c) -> "GExpr":
        if isinstance(c, GExpr):
            return wedge(self, c)
        return self.scale(c)

    def __rmul__(self, c) -> "GExpr":
        return self.scale(c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GExpr):
            return NotImplemented
        return (self.ctx == other.ctx and self.integrated == other.integrated
                and self._terms == other._terms)

    def __hash__(self):
        return hash((self.ctx, self.integrated, frozenset(self._terms.items())))

    def map_coeffs(self, fn: Callable[[Coeff], Coeff]) -> "GExpr":
        return GExpr(self.ctx, {k: fn(c) for k, c in self._terms.items()}, self.integrated)

    def filter(self, pred: Callable[[Monomial], bool]) -> "GExpr":
        keep = {m.key: m.coeff for m in self if pred(m)}
        return GExpr(self.ctx, keep, self.integrated)

    # grading queries -----------------------------------------------------
    def degrees(self) -> set:
        return {(m.deg, m.gh) for m in self}

    def homogeneous_part(self, deg: int | None = None, gh: int | None = None) -> "GExpr":
        return self.filter(lambda m: (deg is None or m.deg == deg) and (gh is None or m.gh == gh))

    def generators(self) -> set:
        out = set()
        for m in self:
            out.update(m.generators)
        return out

    def __repr__(self) -> str:
        from .serialize import to_text
        return to_text(self)


# products ----------------------------------------------------------------

def _mono_product(ka, kb):
    """Raw product of two canonical monomial keys; returns (sign, sc, tr, word)."""
    sa, ta, wa = ka
    sb, tb, wb = kb
    sign = 0
    if wa is not None:
        d1, g1 = _grading(wa)
        d2, g2 = _grading(sb)
        for t in tb:
            d, g = _grading(t)
            d2 += d
            g2 += g
        sign ^= koszul(d1, g1, d2, g2)
    if ta and sb:
        d1 = g1 = 0
        for t in ta:
            d, g = _grading(t)
            d1 += d
            g1 += g
        d2, g2 = _grading(sb)
        sign ^= koszul(d1, g1, d2, g2)
    if wa is None and wb is None:
        w = None
    else:
        w = (wa or ()) + (wb or ())
    return sign, sa + sb, ta + tb, w


def _key_grading(key) -> tuple[int, int]:
    sc, tr, w = key
    d, g = _grading(sc)
    for t in tr:
        dd, gg = _grading(t)
        d += dd
        g += gg
    if w is not None:
        dd, gg = _grading(w)
        d += dd
        g += gg
    return d, g


def _local(a: GExpr, b: GExpr):
    a._check(b)
    if a.integrated or b.integrated:
        raise TypeError("products of integrated expressions are not local")


def wedge(a: GExpr, b: GExpr) -> GExpr:
    _local(a, b)
    raw = []
    for ka, ca in a._terms.items():
        for kb, cb in b._terms.items():
            s, sc, tr, w = _mono_product(ka, kb)
            c = ca * cb
            raw.append((-c if s else c, sc, tr, w))
    return GExpr.build(a.ctx, raw)


def dot(a: GExpr, b: GExpr) -> GExpr:
    """Shifted product ``a . b = (-1)^(gh a deg b) a ^ b`` applied monomial-pairwise."""
    _local(a, b)
    raw = []
    for ka, ca in a._terms.items():
        ga = _key_grading(ka)[1]
        for kb, cb in b._terms.items():
            db = _key_grading(kb)[0]
            s, sc, tr, w = _mono_product(ka, kb)
            s ^= (ga * db) & 1
            c = ca * cb
            raw.append((-c if s else c, sc, tr, w))
    return GExpr.build(a.ctx, raw)


def _require_algebra(x: GExpr):
    for key in x._terms:
        if key[2] is None:
            raise TypeError("bracket requires algebra-valued operands")


def bracket(a: GExpr, b: GExpr) -> GExpr:
    """Graded commutator ``[a,b] = a b - (-1)^(deg deg + gh gh) b a``."""
    _local(a, b)
    _require_algebra(a)
    _require_algebra(b)
    raw = []
    for ka, ca in a._terms.items():
        da, ga = _key_grading(ka)
        for kb, cb in b._terms.items():
            db, gb = _key_grading(kb)
            c = ca * cb
            s, sc, tr, w = _mono_product(ka, kb)
            raw.append((-c if s else c, sc, tr, w))
            s, sc, tr, w = _mono_product(kb, ka)
            s ^= 1 ^ koszul(da, ga, db, gb)
            raw.append((-c if s else c, sc, tr, w))
    return GExpr.build(a.ctx, raw)


def dot_bracket(a: GExpr, b: GExpr) -> GExpr:
    """``[a,b]. = (-1)^(gh a deg b) [a,b]``, graded w.r.t. total degree."""
    _local(a, b)
    _require_algebra(a)
    _require_algebra(b)
    raw = []
    for ka, ca in a._terms.items():
        da, ga = _key_grading(ka)
        for kb, cb in b._terms.items():
            db, gb = _key_grading(kb)
            pre = (ga * db) & 1
            c = ca * cb
            s, sc, tr, w = _mono_product(ka, kb)
            s ^= pre
            raw.append((-c if s else c, sc, tr, w))
            s, sc, tr, w = _mono_product(kb, ka)
            s ^= 1 ^ koszul(da, ga, db, gb) ^ pre
            raw.append((-c if s else c, sc, tr, w))
    return GExpr.build(a.ctx, raw)


def trace(x: GExpr) -> GExpr:
    raw = []
    for (sc, tr, w), c in x._terms.items():
        if w is None:
            raise TypeError("trace of a scalar expression")
        raw.append((c, sc, tr + (w,), None))
    return GExpr.build(x.ctx, raw, x.integrated)


def pairing(a: GExpr, b: GExpr) -> GExpr:
    """Trace pairing ``<a, b> = Tr(a b)``."""
    return trace(wedge(a, b))


def dot_pairing(a: GExpr, b: GExpr) -> GExpr:
    """Shifted pairing ``<a, b>. = (-1)^(gh a deg b) Tr(a b)``."""
    return trace(dot(a, b))


# differential ---------------------------------------------------------------

def _d_mono(key, n: int):
    """Raw terms of the background covariant derivative of one monomial."""
    sc, tr, w = key
    out = []
    pre = 0

    def bump(g):
        if g.kind == "parameter":
            return None
        if g.kind == "transport":
            raise ValueError("transport segments are differentiated by the loop calculus")
        if g.level >= 1:
            return None  # flat background: D^2 = 0
        g2 = g.raised()
        if g2.deg > n:
            return None
        return g2

    for i, g in enumerate(sc):
        g2 = bump(g)
        if g2 is not None:
            out.append((pre & 1, sc[:i] + (g2,) + sc[i + 1:], tr, w))
        pre += g.deg
    for j, t in enumerate(tr):
        for i, g in enumerate(t):
            g2 = bump(g)
            if g2 is not None:
                nt = t[:i] + (g2,) + t[i + 1:]
                out.append((pre & 1, sc, tr[:j] + (nt,) + tr[j + 1:], w))
            pre += g.deg
    if w is not None:
        for i, g in enumerate(w):
            g2 = bump(g)
            if g2 is not None:
                out.append((pre & 1, sc, tr, w[:i] + (g2,) + w[i + 1:]))
            pre += g.deg
    return out


def differential(x: GExpr, mode: str = "wedge") -> GExpr:
    """Background covariant derivative ``d_{A0}``.

    The operator is a derivation of form degree one.  With ``mode="wedge"``
    its Leibniz sign is ``(-1)^deg`` for wedge products; with ``mode="dot"``
    the same operator obeys Leibniz with ``(-1)^total`` for dot products, so
    both modes return the same expression and the tag only records which
    product structure the caller is reasoning in.
    """
    if mode not in ("wedge", "dot"):
        raise ValueError(f"unknown Leibniz mode {mode!r}")
    if x.integrated:
        return GExpr.zero(x.ctx, integrated=True)
    raw = []
    for key, c in x._terms.items():
        for s, sc, tr, w in _d_mono(key, x.ctx.n):
            raw.append((-c if s else c, sc, tr, w))
    return GExpr.build(x.ctx, raw)


# substitution ---------------------------------------------------------------

def _raise_levels(e: GExpr, level: int) -> GExpr:
    for _ in range(level):
        e = differential(e)
    return e


def rewrite(x: GExpr, image: Callable[[Generator], "GExpr | None"]) -> GExpr:
    """Replace every occurrence ``g`` with ``image(g)`` (None keeps ``g``)."""
    ctx = x.ctx
    cache: dict = {}

    def img(g: Generator) -> GExpr:
        if g not in cache:
            e = image(g)
            cache[g] = GExpr.gen(ctx, g) if e is None else e
        return cache[g]

    total = GExpr.zero(ctx)
    for (sc, tr, w), c in x._terms.items():
        acc = GExpr.scalar(ctx, c)
        for g in sc:
            acc = wedge(acc, img(g))
        for t in tr:
            inner = GExpr.identity(ctx)
            for g in t:
                inner = wedge(inner, img(g))
            acc = wedge(acc, trace(inner))
        if w is not None:
            inner = GExpr.identity(ctx)
            for g in w:
                inner = wedge(inner, img(g))
            acc = wedge(acc, inner)
        total = total + acc
    if x.integrated:
        return integrate_top(total)
    return total


def substitute(x: GExpr, mapping: Mapping[Generator, GExpr]) -> GExpr:
    """Replace generators (matched on their level-0 base) by expressions.

    Differentiated occurrences are replaced by the derivative of the image.
    Unmapped generators and strand-labelled occurrences are kept.
    """
    def image(g: Generator):
        b = g.base
        if g.strand is None and b in mapping:
            return _raise_levels(mapping[b], g.level)
        return None
    return rewrite(x, image)


def set_zero(x: GExpr, pred: Callable[[Generator], bool]) -> GExpr:
    """Drop every monomial containing a generator selected by ``pred``."""
    def keep(m: Monomial) -> bool:
        return not any(pred(g) for g in m.generators)
    return x.filter(keep)


# integration ------------------------------------------------------------------

def integrate_top(x: GExpr) -> GExpr:
    """Integral over the closed n-manifold: keeps form degree n, normalises mod d-exact."""
    if x.integrated:
        return x
    raw = []
    for (sc, tr, w), c in x._terms.items():
        d = _key_grading((sc, tr, w))[0]
        if d != x.ctx.n:
            continue
        if w is not None:
            raise TypeError("cannot integrate an algebra-valued form; take a trace first")
        raw.append((c, sc, tr, None))
    return GExpr.build(x.ctx, raw, integrated=True)


def _ibp_class(key):
    sc, tr, w = key
    if w is not None or len(tr) > 1:
        return None
    levels = sum(g.level for g in sc) + sum(g.level for t in tr for g in t)
    if levels == 0:
        return None
    sbase = tuple(sorted((g.base for g in sc), key=lambda g: g.key))
    tbase = tuple(sorted((g.base for g in tr[0]), key=lambda g: g.key)) if tr else None
    return sbase, tbase, levels


def _multiset_perms(items: tuple) -> list:
    seen = set()
    out = []
    for p in itertools.permutations(range(len(items))):
        word = tuple(items[i] for i in p)
        k = tuple(g.key for g in word)
        if k not in seen:
            seen.add(k)
            out.append(word)
    return out


@lru_cache(maxsize=None)
def _exact_reducer(n: int, cls) -> dict:
    """Echelon basis (pivot -> row) of the d-exact top forms in one monomial class."""
    sbase, tbase, levels = cls
    ctx = Context(n)
    words = _multiset_perms(tbase) if tbase is not None else [None]
    seen = set()
    primitives = []
    for word in words:
        slots = list(sbase) + (list(word) if word is not None else [])
        for raise_at in itertools.combinations(range(len(slots)), levels - 1):
            gens = [g.raised() if i in raise_at else g for i, g in enumerate(slots)]
            sc = tuple(gens[:len(sbase)])
            tr = (tuple(gens[len(sbase):]),) if word is not None else ()
            r = canonicalize(sc, tr, None, n)
            if r is None or r[2] in seen:
                continue
            seen.add(r[2])
            primitives.append(r[2])
    pivots: dict = {}
    for key in primitives:
        row: dict = {}
        for s, sc, tr, w in _d_mono(key, n):
            r = canonicalize(sc, tr, w, n)
            if r is None:
                continue
            sign = s ^ r[0]
            row[r[2]] = row.get(r[2], 0) + (-1 if sign else 1)
        row = {k: Fraction(v) for k, v in row.items() if v}
        while row:
            hit = [k for k in row if k in pivots]
            if not hit:
                break
            for k in hit:
                f = row.get(k)
                if not f:
                    continue
                for kk, vv in pivots[k].items():
                    row[kk] = row.get(kk, 0) - f * vv
                row = {kk: vv for kk, vv in row.items() if vv}
        if not row:
            continue
        p = max(row, key=mono_sort_key)
        inv = 1 / row[p]
        pivots[p] = {k: v * inv for k, v in row.items()}
    return pivots


def _ibp_normalize(x: GExpr) -> GExpr:
    """Normal form modulo total derivatives (Stokes on a closed manifold)."""
    n = x.ctx.n
    terms = dict(x._terms)
    by_class: dict = {}
    for key in terms:
        cls = _ibp_class(key)
        if cls is not None:
            by_class.setdefault(cls, []).append(key)
    for cls in by_class:
        piv = _exact_reducer(n, cls)
        if not piv:
            continue
        while True:
            cand = [k for k in terms if k in piv and not terms[k].is_zero()]
            if not cand:
                break
            k = max(cand, key=mono_sort_key)
            f = terms.pop(k)
            for kk, vv in piv[k].items():
                if kk == k:
                    continue
                prev = terms.get(kk)
                delta = f * (-vv)
                terms[kk] = delta if prev is None else prev + delta
            terms = {kk: vv for kk, vv in terms.items() if not vv.is_zero()}
    return GExpr(x.ctx, terms, integrated=True)


def exact_part_removed(x: GExpr) -> GExpr:
    return _ibp_normalize(x)
