"""Component expansion of the generalized Wilson loops.

A term of an :class:`ObservableSeries` is a pair ``(points, insertions)``:
``points`` is a product of integrated interaction monomials (keys of
:class:`~bvloops.laplacian.MultiLocal`), ``insertions`` the matrix words placed
at ``t_1 < ... < t_k`` between background transports inside ``Tr_rho``.  The
LM form degree of a term is the total form degree of its insertions minus
``k`` (fiber integration over the simplex); negative degrees are pruned.

Terms are bucketed by ``(order, gh, LM-degree)``.  ``order`` is the weighted
degree in the coupling parameters: one per ``B``-slot and two per interaction
vertex (``kappa^2 S_3``, ``mu_r O_{r+1}``).  Truncation ``K`` bounds both the
number of insertions and the order.

Interaction vertices always have even ghost number, so they commute with the
insertions without signs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .bv import BVContext, antibracket, build_superfields, bv_action
from .coeff import Coeff
from .expr import GExpr, dot, dot_bracket, dot_pairing, integrate_top, trace
from .laplacian import MultiLocal, formal_laplacian, laplacian, product
from .loops import VanishingInteraction, theorem4_conditions
from .serialize import gen_to_json

I_OVER_HBAR = "i_over_hbar"
IMBEDDING, COMPANION = "imbedding", "companion"


def _word_grade(word) -> tuple[int, int]:
    return sum(g.deg for g in word), sum(g.gh for g in word)


def _point_gh(point) -> int:
    return sum(g.gh for t in point[1] for g in t)


@dataclass(frozen=True)
class Slot:
    """A slot expression with its coupling weight (0 for ``a``, 1 for ``lambda_s B^s``)."""

    label: str
    expr: GExpr
    weight: int


@dataclass
class ObservableSeries:
    n: int
    K: int
    terms: dict = field(default_factory=dict)   # (order, gh, lm) -> {(points, insertions): Coeff}
    raw_words: int = 0

    def add(self, grade: tuple, key: tuple, c: Coeff):
        bucket = self.terms.setdefault(grade, {})
        s = bucket[key] + c if key in bucket else c
        if s.is_zero():
            bucket.pop(key, None)
            if not bucket:
                del self.terms[grade]
        else:
            bucket[key] = s

    def __iter__(self):
        for grade in sorted(self.terms):
            for key, c in self.terms[grade].items():
                yield grade, key, c

    def __len__(self) -> int:
        return sum(len(b) for b in self.terms.values())

    def map_coeffs(self, fn) -> "ObservableSeries":
        out = ObservableSeries(self.n, self.K, raw_words=self.raw_words)
        for grade, key, c in self:
            out.add(grade, key, fn(c))
        return out

    def __add__(self, other: "ObservableSeries") -> "ObservableSeries":
        out = self.map_coeffs(lambda c: c)
        for grade, key, c in other:
            out.add(grade, key, c)
        return out

    def scale(self, c) -> "ObservableSeries":
        c = Coeff.coerce(c)
        return self.map_coeffs(lambda x: x * c)

    def __sub__(self, other: "ObservableSeries") -> "ObservableSeries":
        return self + other.scale(-1)

    def is_zero(self) -> bool:
        return not self.terms

    def canonical(self) -> dict:
        return {(grade, key): c for grade, key, c in self}

    def to_json(self) -> dict:
        out = {}
        for (order, gh, lm), bucket in sorted(self.terms.items()):
            entries = []
            for (points, ins), c in sorted(bucket.items(), key=lambda kv: repr(kv[0])):
                entries.append({
                    "coeff": str(c),
                    "interaction": [[[gen_to_json(g) for g in t] for t in p[1]] for p in points],
                    "insertions": [[gen_to_json(g) for g in w] for w in ins],
                })
            out[f"({order},{gh},{lm})"] = entries
        return {"n": self.n, "K": self.K, "terms": out}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def project_ghost_zero(s: ObservableSeries) -> ObservableSeries:
    """Keep exactly the ghost-number-zero entries."""
    out = ObservableSeries(s.n, s.K, raw_words=s.raw_words)
    for grade, key, c in s:
        if grade[1] == 0:
            out.add(grade, key, c)
    return out


# slots ----------------------------------------------------------------------

def _dot_power(x: GExpr, s: int) -> GExpr:
    out = x
    for _ in range(s - 1):
        out = dot(out, x)
    return out


def _on_strand(x: GExpr, strand: str | None) -> GExpr:
    if strand is None:
        return x
    raw = [(m.coeff, m.scalars, m.traces, tuple(g.on_strand(strand) for g in m.word)) for m in x]
    return GExpr.build(x.ctx, raw)


def slots(bv: BVContext, lambdas: dict, strands: bool = False) -> list:
    a, B = build_superfields(bv)
    out = [Slot("a", _on_strand(a.expr, IMBEDDING if strands else None), 0)]
    for s, lam in sorted(lambdas.items()):
        lam = Coeff.coerce(lam)
        if lam.is_zero():
            continue
        Bs = _on_strand(_dot_power(B.expr, s), COMPANION if strands else None)
        out.append(Slot(f"B^{s}" if s > 1 else "B", Bs.scale(lam), 1))
    return out


def _slot_terms(slot: Slot, keep=None) -> list:
    return [(m.coeff, m.word) for m in slot.expr
            if keep is None or all(keep(g) for g in m.word)]


def raw_word_count(n_slots: int, k: int) -> int:
    return sum(1 for _ in itertools.product(range(n_slots), repeat=k))


def expand_holonomy(bv: BVContext, K: int, lambdas: dict | None = None,
                    strands: bool = False, keep=None,
                    max_order: int | None = None) -> ObservableSeries:
    """Components of ``Tr_rho hol(A0 + a + sum lambda_s B^s)`` with at most K insertions.

    ``keep`` (a predicate on component generators) sets the rejected components
    to zero before expanding; ``max_order`` caps the coupling order (default K).
    """
    if K < 0:
        raise ValueError(f"truncation K must be >= 0, got {K}")
    kappa = Coeff.param("kappa")
    lambdas = {1: kappa} if lambdas is None else lambdas
    sl = slots(bv, lambdas, strands)
    comps = [_slot_terms(s, keep) for s in sl]
    max_order = K if max_order is None else max_order
    out = ObservableSeries(bv.n, K)
    out.add((0, 0, 0), ((), ()), Coeff.const(1))
    for k in range(1, K + 1):
        for choice in itertools.product(range(len(sl)), repeat=k):
            if k == 2:
                out.raw_words += 1
            order = sum(sl[i].weight for i in choice)
            if order > max_order:
                continue
            for picks in itertools.product(*(comps[i] for i in choice)):
                c = Coeff.const(1)
                for ci, _ in picks:
                    c = c * ci
                words = tuple(w for _, w in picks)
                deg = sum(_word_grade(w)[0] for w in words)
                gh = sum(_word_grade(w)[1] for w in words)
                lm = deg - k
                if lm < 0:
                    continue
                out.add((order, gh, lm), ((), words), c)
    return out


# interaction terms ------------------------------------------------------------

def cubic_interaction(bv: BVContext) -> GExpr:
    """``S_3 = 1/6 int <B, [B, B].>.``"""
    _, B = build_superfields(bv)
    x = B.expr
    return integrate_top(dot_pairing(x, dot_bracket(x, x)).scale(Fraction(1, 6)))


def trace_power(bv: BVContext, r: int) -> GExpr:
    """``O_r = 1/r int Tr B^r`` (dot powers)."""
    if r < 1:
        raise ValueError("r must be positive")
    _, B = build_superfields(bv)
    return integrate_top(trace(_dot_power(B.expr, r)).scale(Fraction(1, r)))


def interaction(bv: BVContext, family: str, mus: dict | None = None) -> list:
    """``[(coeff, functional), ...]`` summed inside the exponential."""
    kappa = Coeff.param("kappa")
    if family == "hhat":
        if bv.n % 2 == 0:
            raise VanishingInteraction("S_3 vanishes when B has even total degree")
        return [(kappa * kappa, cubic_interaction(bv))]
    if family == "hhat-odd":
        if bv.n % 2:
            raise ValueError("hhat-odd is the even-dimensional family")
        return [(kappa * kappa, trace_power(bv, 3))]
    if family == "htilde":
        out = []
        for r, mu in sorted((mus or {}).items()):
            mu = Coeff.coerce(mu)
            if mu.is_zero():
                continue
            O = trace_power(bv, r + 1)
            if O.is_zero():
                raise VanishingInteraction(f"O_{r + 1} vanishes in dimension {bv.n}")
            out.append((mu, O))
        return out
    raise ValueError(f"unknown family {family!r}")


def _exponential(bv: BVContext, terms: list, max_power: int) -> list:
    """``[(power, MultiLocal)]`` for ``exp[(i/hbar) sum c F]`` up to ``max_power``."""
    ctx = bv.ctx
    inner = None
    for c, F in terms:
        ml = MultiLocal.from_local(F).scale(c)
        inner = ml if inner is None else inner + ml
    unit = MultiLocal(ctx, {(): Coeff.const(1)})
    out = [(0, unit)]
    if inner is None:
        return out
    ih = Coeff.param(I_OVER_HBAR)
    cur = unit
    for m in range(1, max_power + 1):
        cur = product(cur, inner)
        out.append((m, cur.scale(ih ** m * Coeff.const(Fraction(1, _fact(m))))))
    return out


def _fact(m: int) -> int:
    r = 1
    for i in range(2, m + 1):
        r *= i
    return r


def odd_part(s: ObservableSeries, names) -> ObservableSeries:
    """``(H(lambda) - H(-lambda))/2``."""
    flipped = s.map_coeffs(lambda c: c.substitute({x: -Coeff.param(x) for x in names}))
    return (s - flipped).scale(Fraction(1, 2))


def family_parameters(family: str, n: int, lambdas=None, mus=None):
    kappa = Coeff.param("kappa")
    if family in ("hhat", "hhat-odd"):
        return {1: kappa}, None
    lam = {s + 1: Coeff.coerce(x) for s, x in enumerate(lambdas or [kappa])}
    if mus is None:
        _, req = theorem4_conditions([lam.get(s, Coeff()) for s in range(1, max(lam) + 1)],
                                     "odd" if n % 2 else "even")
        mus = req
    return lam, {r + 1: Coeff.coerce(x) for r, x in enumerate(mus)}


def build_observable(bv: BVContext, family: str, K: int, lambdas=None, mus=None,
                     strands: bool = False, project: bool = True) -> ObservableSeries:
    """``{exp[(i/hbar) interaction] . Tr_rho hol(...)}_0`` truncated at K."""
    n = bv.n
    if family == "hhat" and n % 2 == 0:
        raise VanishingInteraction("S_3 vanishes when B has even total degree")
    lam, mu = family_parameters(family, n, lambdas, mus)
    hol = expand_holonomy(bv, K, lam, strands)
    exp_terms = _exponential(bv, interaction(bv, family, mu), K // 2)
    by_gh: dict = {}
    for grade, key, c in hol:
        by_gh.setdefault(grade[1], []).append((grade, key, c))
    out = ObservableSeries(n, K, raw_words=hol.raw_words)
    for m, ml in exp_terms:
        for pts, cp in ml._terms.items():
            gp = sum(_point_gh(p) for p in pts)
            for gh, items in by_gh.items():
                if project and gh + gp != 0:
                    continue
                for (order, _, lm), (_, ins), c in items:
                    if order + 2 * m > K:
                        continue
                    out.add((order + 2 * m, gh + gp, lm), (pts, ins), c * cp)
    odd_family = family == "hhat-odd" or (family == "htilde" and n % 2 == 0)
    if odd_family:
        names = set()
        for x in lam.values():
            names |= x.params()
        out = odd_part(out, names)
    return project_ghost_zero(out) if project else out


# auxiliary identities -----------------------------------------------------------

def interaction_identities(n: int) -> dict:
    """Ghost number of S_3 or O_3, its BV-closedness and Delta of its square."""
    bv = BVContext(n)
    S = cubic_interaction(bv) if n % 2 else trace_power(bv, 3)
    ghs = sorted({m.gh for m in S})
    S_bv = bv_action(bv)
    br = antibracket(S_bv, S, bv.table)
    lap = formal_laplacian(S, bv.table)
    lap2 = laplacian(product(S, S), bv.table)
    return {
        "ghost-numbers": ghs,
        "expected-ghost-number": 2 * (n - 3),
        "delta-S": len(br),
        "laplacian-S": len(lap),
        "laplacian-S-squared": len(lap2),
    }


def holonomy_contractions(s: ObservableSeries, table) -> int:
    """Number of partner pairs among the insertions that Delta may contract."""
    count = 0
    for _, (pts, ins), _ in s:
        flat = [g for w in ins for g in w]
        for i, u in enumerate(flat):
            for v in flat[i + 1:]:
                if u.strand != v.strand or u.kind == v.kind:
                    continue
                try:
                    if table.partner(u) == v.base:
                        count += 1
                except KeyError:
                    pass
    return count


def antifield_free(s: ObservableSeries) -> ObservableSeries:
    """Entries containing no antifield component (insertions or vertices)."""
    out = ObservableSeries(s.n, s.K, raw_words=s.raw_words)
    for grade, (pts, ins), c in s:
        gens = [g for w in ins for g in w] + [g for p in pts for t in p[1] for g in t]
        if all(g.kind != "antifield" for g in gens):
            out.add(grade, (pts, ins), c)
    return out
