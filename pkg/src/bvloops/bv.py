"""BV field content, superfields, action and antibracket for BF theory in dimension n."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable

from .coeff import Coeff
from .expr import (Context, GExpr, bracket, differential, dot_bracket, dot_pairing,
                   integrate_top, rewrite, set_zero, trace, wedge)
from .grading import Generator, antifield_grading, koszul


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


@dataclass(frozen=True)
class FieldEntry:
    field: Generator
    antifield: Generator


class FieldTable:
    """Fields A, B, c, tau_1..tau_{n-2} and their antifields."""

    def __init__(self, n: int):
        if n < 3:
            raise ValueError(f"BF field table needs n >= 3, got {n}")
        self.n = n
        fields = [Generator("A", 1, 0, "field"), Generator("B", n - 2, 0, "field"),
                  Generator("c", 0, 1, "ghost")]
        fields += [Generator(f"tau{k}", n - 2 - k, k, "ghost") for k in range(1, n - 1)]
        entries = []
        for f in fields:
            g = antifield_grading(n, f.base_deg, f.gh)
            entries.append(FieldEntry(f, Generator(f.name + "+", g.deg, g.gh, "antifield")))
        self.entries = tuple(entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, name: str) -> Generator:
        for e in self.entries:
            if e.field.name == name:
                return e.field
            if e.antifield.name == name:
                return e.antifield
        raise KeyError(name)

    @property
    def generators(self) -> list:
        out = []
        for e in self.entries:
            out += [e.field, e.antifield]
        return out

    def partner(self, g: Generator) -> Generator:
        b = g.base
        for e in self.entries:
            if e.field == b:
                return e.antifield
            if e.antifield == b:
                return e.field
        raise KeyError(g.name)

    def is_antifield(self, g: Generator) -> bool:
        return g.kind == "antifield"


@dataclass(frozen=True)
class BVContext:
    n: int
    backend: str = "abstract"

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"dimension n must be >= 3, got {self.n}")
        if self.backend not in ("abstract", "gl2"):
            raise ValueError(f"unknown backend {self.backend!r}")

    @cached_property
    def ctx(self) -> Context:
        return Context(self.n)

    @cached_property
    def table(self) -> FieldTable:
        return FieldTable(self.n)

    def g(self, name: str, coeff=1) -> GExpr:
        return GExpr.gen(self.ctx, self.table[name], coeff)


@dataclass
class SuperField:
    total: int
    components: dict = field(default_factory=dict)  # form degree -> GExpr

    @property
    def expr(self) -> GExpr:
        out = None
        for d in sorted(self.components):
            out = self.components[d] if out is None else out + self.components[d]
        return out

    def check_total(self) -> bool:
        return all(m.deg + m.gh == self.total
                   for comp in self.components.values() for m in comp)


def build_superfields(bv: BVContext) -> tuple[SuperField, SuperField]:
    """Return ``(a, B)``: the superconnection minus A0, and the super B-field."""
    n = bv.n
    A = SuperField(total=1)
    B = SuperField(total=n - 2)
    A.components[0] = bv.g("c", _sign(n + 1))
    A.components[1] = bv.g("A")
    A.components[2] = bv.g("B+", _sign(n))
    for k in range(1, n - 1):
        A.components[k + 2] = bv.g(f"tau{k}+", _sign(n * (k + 1) + k * (k - 1) // 2))
    for k in range(1, n - 1):
        B.components[n - 2 - k] = bv.g(f"tau{k}", _sign(k * (k - 1) // 2))
    B.components[n - 2] = bv.g("B")
    B.components[n - 1] = bv.g("A+", _sign(n))
    B.components[n] = bv.g("c+")
    return A, B


def supercurvature(bv: BVContext, a: SuperField | GExpr) -> GExpr:
    x = a.expr if isinstance(a, SuperField) else a
    return differential(x) + dot_bracket(x, x).scale(Fraction(1, 2))


def covariant_super(bv: BVContext, a: GExpr, y: GExpr) -> GExpr:
    """``d_A y = d_{A0} y + [a, y].``"""
    return differential(y) + dot_bracket(a, y)


def bv_action(bv: BVContext) -> GExpr:
    a, B = build_superfields(bv)
    return integrate_top(dot_pairing(B.expr, supercurvature(bv, a)))


def classical_action(bv: BVContext) -> GExpr:
    """``int <B, F_A>`` with ``F_A = d_{A0} A + A ^ A`` (A the fluctuation)."""
    A = bv.g("A")
    F = differential(A) + wedge(A, A)
    return integrate_top(trace(wedge(bv.g("B"), F)))


# functional derivatives -------------------------------------------------------

def _check_local(F: GExpr):
    if not F.integrated:
        raise UnsupportedExpression("antibracket operands must be integrated local functionals")
    for m in F:
        if m.scalars or len(m.traces) != 1:
            raise UnsupportedExpression("only single-trace local functionals are supported")


class UnsupportedExpression(TypeError):
    pass


def _grade(seq):
    d = g = 0
    for x in seq:
        d += x.deg
        g += x.gh
    return d, g


def derivative(F: GExpr, phi: Generator, side: str) -> GExpr:
    """Functional derivative of ``F = int Tr(...)`` with respect to ``phi``.

    ``side="right"`` gives Y with ``d/dt F(phi + t rho) = int Tr(rho Y)``;
    ``side="left"`` gives Y with ``d/dt F(phi + t rho) = int Tr(Y rho)``.
    The result is an (un-integrated) matrix-valued form.
    """
    _check_local(F)
    ctx = F.ctx
    rd, rg = phi.deg, phi.gh
    out = GExpr.zero(ctx)
    for m in F:
        (word,) = m.traces
        for i, g in enumerate(word):
            if g.base != phi.base:
                continue
            P, R = word[:i], word[i + 1:]
            pd, pg = _grade(P)
            qd, qg = _grade(R)
            rest = GExpr.build(ctx, [(m.coeff, (), (), R + P)])
            if g.level == 0:
                if side == "right":
                    s = koszul(pd, pg, rd + qd, rg + qg)
                else:
                    s = koszul(pd + rd, pg + rg, qd, qg)
                out = out + rest.scale(_sign(s))
            elif g.level == 1:
                dd = rd + 1
                if side == "right":
                    s = koszul(pd, pg, dd + qd, rg + qg) + 1 + rd
                else:
                    s = koszul(pd + dd, pg + rg, qd, qg) + 1 + (pd + qd)
                out = out + differential(rest).scale(_sign(s))
    return out


def antibracket_local(F: GExpr, G: GExpr, table: FieldTable | None = None) -> tuple[GExpr, int]:
    """Un-integrated integrand of ``(F, G)`` and the number of raw derivative products."""
    F._check(G)
    _check_local(F)
    _check_local(G)
    n = F.ctx.n
    table = table or FieldTable(n)
    total = GExpr.zero(F.ctx)
    raw = 0
    for e in table:
        phi, phip = e.field, e.antifield
        l1, r1 = derivative(F, phi, "left"), derivative(G, phip, "right")
        l2, r2 = derivative(F, phip, "left"), derivative(G, phi, "right")
        raw += len(l1) * len(r1) + len(l2) * len(r2)
        total = total + trace(wedge(l1, r1)) - trace(wedge(l2, r2)).scale(_sign(phi.deg * (n + 1)))
    return total, raw


def antibracket(F: GExpr, G: GExpr, table: FieldTable | None = None) -> GExpr:
    """BV bracket of two local functionals."""
    return integrate_top(antibracket_local(F, G, table)[0])


# derivations --------------------------------------------------------------------

def apply_derivation(x: GExpr, images, op_deg: int, op_gh: int) -> GExpr:
    """Extend ``g -> images(g)`` to a derivation of bidegree ``(op_deg, op_gh)``.

    ``images`` maps a level-0 generator to its image (or None for zero).  The
    operator must commute with the background derivative, so a differentiated
    occurrence maps to the derivative of the image.
    """
    ctx = x.ctx
    cache: dict = {}

    def image(g: Generator):
        if g not in cache:
            img = images(g.base)
            if img is not None:
                for _ in range(g.level):
                    img = differential(img)
            cache[g] = img
        return cache[g]

    total = GExpr.zero(ctx)
    for m in x:
        slots = [("s", i, g) for i, g in enumerate(m.scalars)]
        for ti, t in enumerate(m.traces):
            slots += [("t", ti, i, g) for i, g in enumerate(t)]
        if m.word is not None:
            slots += [("w", i, g) for i, g in enumerate(m.word)]
        pd = pg = 0
        for slot in slots:
            g = slot[-1]
            img = image(g)
            if img is not None and not img.is_zero():
                s = _sign(op_deg * pd + op_gh * pg)
                total = total + _replace_slot(ctx, m, slot, img).scale(s)
            pd += g.deg
            pg += g.gh
    if x.integrated:
        return integrate_top(total)
    return total


def _replace_slot(ctx, m, slot, img: GExpr) -> GExpr:
    """Monomial m with the generator at ``slot`` replaced by ``img`` (no sign)."""
    one = GExpr.scalar(ctx, m.coeff)

    def g(x):
        return GExpr.gen(ctx, x)

    acc = one
    for i, x in enumerate(m.scalars):
        acc = wedge(acc, img if slot[0] == "s" and slot[1] == i else g(x))
    for ti, t in enumerate(m.traces):
        inner = GExpr.identity(ctx)
        for i, x in enumerate(t):
            if slot[0] == "t" and slot[1] == ti and slot[2] == i:
                inner = wedge(inner, img)
            else:
                inner = wedge(inner, g(x))
        acc = wedge(acc, trace(inner))
    if m.word is not None:
        inner = GExpr.identity(ctx)
        for i, x in enumerate(m.word):
            if slot[0] == "w" and slot[1] == i:
                inner = wedge(inner, img)
            else:
                inner = wedge(inner, g(x))
        acc = wedge(acc, inner)
    return acc


def bv_image(S: GExpr, g: Generator, table: FieldTable) -> GExpr:
    """``delta_BV g = (S, g)`` for a level-0 field or antifield generator."""
    n = table.n
    if g.kind == "antifield":
        return derivative(S, table.partner(g), "left")
    phip = table.partner(g)
    return derivative(S, phip, "left").scale(-_sign(g.deg * (n + 1)))


class BVOperator:
    """``delta_BV = (S_BV, .)`` acting on local expressions as a (0,1) derivation."""

    def __init__(self, bv: BVContext, S: GExpr | None = None):
        self.bv = bv
        self.S = S if S is not None else bv_action(bv)
        self._images = {}

    def image(self, g: Generator):
        if g not in self._images:
            try:
                self.bv.table.partner(g)
            except KeyError:
                self._images[g] = None
            else:
                self._images[g] = bv_image(self.S, g, self.bv.table)
        return self._images[g]

    def __call__(self, x: GExpr) -> GExpr:
        return apply_derivation(x, self.image, 0, 1)

    def shifted(self, x: GExpr) -> GExpr:
        """``bold-delta x = (-1)^deg delta_BV x`` applied per homogeneous part."""
        out = GExpr.zero(x.ctx, x.integrated)
        for d in sorted({m.deg for m in x}):
            part = x.filter(lambda m, d=d: m.deg == d)
            out = out + self(part).scale(_sign(d))
        return out


# BRST tower ------------------------------------------------------------------------

def covariant(bv: BVContext, x: GExpr) -> GExpr:
    """``d_A x = d_{A0} x + [A, x]`` with A the fluctuation field."""
    return differential(x) + bracket(bv.g("A"), x)


def brst_images(bv: BVContext) -> dict:
    """The extended BRST operator on A, B, c, tau_k (level-0 generators)."""
    n = bv.n
    g = bv.g
    c = g("c")
    out = {
        bv.table["A"]: covariant(bv, c),
        bv.table["B"]: bracket(g("B"), c) + covariant(bv, g("tau1")),
        bv.table["c"]: bracket(c, c).scale(Fraction(-1, 2)),
    }
    for k in range(1, n - 2):
        out[bv.table[f"tau{k}"]] = (bracket(g(f"tau{k}"), c).scale(_sign(k))
                                   + covariant(bv, g(f"tau{k + 1}")))
    out[bv.table[f"tau{n - 2}"]] = bracket(g(f"tau{n - 2}"), c).scale(_sign(n))
    return out


def brst(bv: BVContext, x: GExpr, images: dict | None = None) -> GExpr:
    images = images if images is not None else brst_images(bv)
    return apply_derivation(x, images.get, 0, 1)


CURVATURE = Generator("F_A", 2, 0, "field")


def curvature_form(bv: BVContext, x: GExpr) -> GExpr:
    """Rewrite every ``d_{A0} A`` as ``F_A - A ^ A``."""
    ctx = x.ctx
    A = bv.g("A")
    F = GExpr.gen(ctx, CURVATURE)
    repl = F - wedge(A, A)

    def image(g: Generator):
        if g.base == bv.table["A"] and g.level == 1 and g.strand is None:
            return repl
        return None
    return rewrite(x, image)


def on_shell(x: GExpr) -> GExpr:
    return set_zero(x, lambda g: g.base == CURVATURE)


def antifields_to_zero(x: GExpr) -> GExpr:
    return set_zero(x, lambda g: g.kind == "antifield")
