"""Iterated integrals of superfields along a loop and their closedness.

Terms are traces of words ``H s_1 H s_2 ... s_k H`` integrated over the
simplex ``0 < t_1 < ... < t_k < 1``; each slot ``s_i`` is a dot-product word in
the letters ``a`` (the superconnection minus the background) and ``B``.  The
transports only enter through the covariant derivative, so the calculus works
directly on slot words in the Z2-graded dot algebra.

In even dimension ``B`` has even total degree.  Slots carrying powers of
``B`` then also carry an odd unit ``e`` with ``e^2 = 1`` so that every slot is
odd; the observable is split by the parity of the number of ``e``'s, which is
the parity under ``lambda -> -lambda``.  Letters ``e`` are normal ordered to
the far right of the trace, where the trace is the ordinary graded one.

Boundary of the simplex (fiber Stokes with ``d int = int d + (-1)^(|w|-k) int_boundary``)::

    bd(simplex_k) = -F_0 + sum_{i=1}^{k-1} (-1)^(i-1) F_i + (-1)^(k-1) F_k

``F_i`` merges slots ``i`` and ``i+1``; ``F_0`` and ``F_k`` put the first/last slot
at the base point ("based" terms, base slot written first).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .coeff import Coeff

LETTERS = ("a", "B", "e")


def letter_parity(letter: str, n: int) -> int:
    if letter == "B":
        return n % 2
    return 1


def _parity(word, n: int) -> int:
    return sum(letter_parity(x, n) for x in word) & 1


def _fields(word) -> int:
    return sum(1 for x in word if x in ("a", "B"))


@dataclass(frozen=True)
class IteratedTerm:
    """One summand: slots on the simplex, optionally a slot at the base point."""

    slots: tuple
    base: tuple | None = None
    eps: int = 0

    @property
    def k(self) -> int:
        return len(self.slots)

    @property
    def field_count(self) -> int:
        return sum(_fields(s) for s in self.slots) + (_fields(self.base) if self.base else 0)

    def lm_degree(self, degrees: dict) -> int:
        """Form degree on loop space given letter form degrees."""
        return sum(degrees[x] for s in self.slots for x in s) - self.k

    def label(self) -> str:
        body = "".join("[" + "".join(s) + "]" for s in self.slots)
        if self.base is not None:
            body = "<" + "".join(self.base) + ">" + body
        return body + ("e" if self.eps else "")


class LoopSum:
    """Formal sum of iterated terms with coefficients (canonical, e normal ordered)."""

    def __init__(self, n: int, terms: dict | None = None):
        self.n = n
        self.terms = {k: c for k, c in (terms or {}).items() if not c.is_zero()}

    def add(self, slots, base, coeff: Coeff):
        r = normal_order(slots, base, self.n)
        if r is None:
            return
        sign, term = r
        c = -coeff if sign else coeff
        prev = self.terms.get(term)
        s = c if prev is None else prev + c
        if s.is_zero():
            self.terms.pop(term, None)
        else:
            self.terms[term] = s

    def __iter__(self):
        return iter(sorted(self.terms.items(), key=lambda kv: (kv[0].k, kv[0].label())))

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def map_coeffs(self, fn) -> "LoopSum":
        return LoopSum(self.n, {t: fn(c) for t, c in self.terms.items()})

    def filter(self, pred) -> "LoopSum":
        return LoopSum(self.n, {t: c for t, c in self.terms.items() if pred(t, c)})

    def __add__(self, other: "LoopSum") -> "LoopSum":
        out = LoopSum(self.n, dict(self.terms))
        for t, c in other.terms.items():
            out.terms[t] = out.terms[t] + c if t in out.terms else c
        return LoopSum(self.n, out.terms)

    def __neg__(self) -> "LoopSum":
        return self.map_coeffs(lambda c: -c)

    def __sub__(self, other: "LoopSum") -> "LoopSum":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, LoopSum) and self.terms == other.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "LoopSum(0)"
        return "LoopSum(" + " + ".join(f"({c}){t.label()}" for t, c in self) + ")"


def normal_order(slots, base, n: int):
    """Move every ``e`` to the far right (``e^2 = 1``); return ``(sign, term)``."""
    words = ([base] if base is not None else []) + list(slots)
    flat = [x for w in words for x in w]
    sign = 0
    count = 0
    # an e passes every non-e letter to its right
    right = 0
    for x in reversed(flat):
        if x == "e":
            sign ^= right & 1
            count += 1
        else:
            right += letter_parity(x, n)
    strip = [tuple(x for x in w if x != "e") for w in words]
    if any(not w for w in strip):
        return None
    if base is not None:
        return sign, IteratedTerm(tuple(strip[1:]), strip[0], count & 1)
    return sign, IteratedTerm(tuple(strip), None, count & 1)


# ---------------------------------------------------------------------------
# families and their slot content

@dataclass
class Family:
    """Slot content ``a + sum_s lambda_s B^s`` and interaction ``sum_r mu_r B^r`` in delta a."""

    n: int
    lambdas: dict = field(default_factory=dict)   # s -> Coeff
    mus: dict = field(default_factory=dict)       # r -> Coeff
    use_eps: bool = False
    part: str | None = None                        # None, "odd", "even": e-parity filter
    on_shell_classical: bool = False               # slots B only, d_A B = 0, no delta

    def slot_choices(self):
        if self.on_shell_classical:
            return [(("B",), Coeff.const(1))]
        out = [(("a",), Coeff.const(1))]
        for s, lam in sorted(self.lambdas.items()):
            if lam.is_zero():
                continue
            w = ("B",) * s + (("e",) if self.use_eps else ())
            out.append((w, lam))
        return out

    def letter_image(self, letter: str) -> list:
        """``(d + delta)`` of a letter as ``[(coeff, word), ...]``."""
        if self.on_shell_classical:
            return []
        n = self.n
        if letter == "a":
            out = [(Coeff.const(-1), ("a", "a"))]
            for r, mu in sorted(self.mus.items()):
                if not mu.is_zero():
                    out.append((-mu, ("B",) * r))
            return out
        if letter == "B":
            pb = letter_parity("B", n)
            return [(Coeff.const(-1), ("a", "B")), (Coeff.const(-1 if pb else 1), ("B", "a"))]
        return []

    def word_vanishes(self, word) -> bool:
        # classical check: B.B has form degree 2(n-2) > n
        if self.on_shell_classical:
            return sum(1 for x in word if x == "B") >= 2 and 2 * (self.n - 2) > self.n
        return False


def holonomy_series(fam: Family, K: int) -> LoopSum:
    """All slot words with at most K field letters (K = 0 is the background holonomy)."""
    if K < 0:
        raise ValueError("truncation order K must be >= 0")
    out = LoopSum(fam.n)
    choices = fam.slot_choices()
    out.add((), None, Coeff.const(1))

    def rec(prefix, coeff, count):
        for w, c in choices:
            m = count + _fields(w)
            if m > K:
                continue
            slots = prefix + (w,)
            out.add(slots, None, coeff * c)
            rec(slots, coeff * c, m)
    rec((), Coeff.const(1), 0)
    return out


def raw_words(fam: Family, k: int) -> list:
    """Raw k-slot words before canonicalisation (for counting)."""
    return list(itertools.product([w for w, _ in fam.slot_choices()], repeat=k))


def _raw_terms(fam: Family, K: int) -> list:
    """Un-normal-ordered ``(slots, coeff)`` pairs of the holonomy series."""
    out = []
    choices = fam.slot_choices()

    def rec(prefix, coeff, count):
        for w, c in choices:
            m = count + _fields(w)
            if m > K:
                continue
            slots = prefix + (w,)
            out.append((slots, coeff * c))
            rec(slots, coeff * c, m)
    rec((), Coeff.const(1), 0)
    return out


@dataclass
class ClosednessResult:
    residual: LoopSum
    attribution: dict          # IteratedTerm -> list of (source, coeff)

    @property
    def closed(self) -> bool:
        return self.residual.is_zero()

    def face_summary(self) -> dict:
        kinds: dict = {}
        for t in self.residual.terms:
            for src, _ in self.attribution.get(t, []):
                kind = src.split(" ")[0]
                kinds[kind] = kinds.get(kind, 0) + 1
        return kinds


def apply_total_differential(fam: Family, slots: tuple, coeff: Coeff, K: int, sink) -> None:
    """Emit ``(d + delta)`` of one raw iterated term into ``sink(slots, base, coeff, source)``."""
    n = fam.n
    k = len(slots)
    if k == 0:
        return
    # slot action (covariant derivative plus BV variation of the letters)
    before = 0
    for i, w in enumerate(slots):
        for j, x in enumerate(w):
            for c, img in fam.letter_image(x):
                new = w[:j] + img + w[j + 1:]
                if fam.word_vanishes(new):
                    continue
                ns = slots[:i] + (new,) + slots[i + 1:]
                if sum(_fields(s) for s in ns) > K:
                    continue
                cc = coeff * c
                sink(ns, None, -cc if before & 1 else cc, f"slot {i + 1}:{x}")
            before += letter_parity(x, n)
    total = before
    pref = (total - k) & 1
    # codimension-one faces
    c0 = coeff if pref else -coeff          # -F_0 times (-1)^(|w|-k)
    sink(slots[1:], slots[0], c0, "endpoint t_1=0")
    for i in range(1, k):
        merged = slots[i - 1] + slots[i]
        if fam.word_vanishes(merged):
            continue
        s = (pref + i - 1) & 1
        sink(slots[:i - 1] + (merged,) + slots[i + 1:], None, -coeff if s else coeff,
             f"collapse t_{i}=t_{i + 1}")
    # F_k: the last slot moves to the base point; the trace rotation is applied
    # after normal ordering, on e-free parities
    s = (pref + k - 1) & 1
    sink(slots[:-1], ("TAIL",) + slots[-1], -coeff if s else coeff, f"endpoint t_{k}=1")


def _rotate_tail(slots, tail, n: int):
    """Canonical based term for a slot sitting at t = 1 (after the other slots)."""
    words = list(slots) + [tail]
    r = normal_order(tuple(words), None, n)
    if r is None:
        return None
    sign, term = r
    *rest, last = term.slots
    rest_par = sum(_parity(w, n) for w in rest)
    sign ^= (rest_par * _parity(last, n)) & 1
    return sign, IteratedTerm(tuple(rest), last, term.eps)


def verify_closedness(fam: Family, K: int) -> ClosednessResult:
    """Residual of ``(d + delta) H`` at field order <= K, with face attribution."""
    if K < 1:
        raise ValueError("closedness needs K >= 1")
    n = fam.n
    residual = LoopSum(n)
    attribution: dict = {}

    def sink(slots, base, coeff, source):
        if sum(_fields(s) for s in slots) + (_fields(base) if base else 0) > K:
            return
        if base is not None and base[:1] == ("TAIL",):
            r = _rotate_tail(slots, base[1:], n)
        else:
            r = normal_order(slots, base, n)
        if r is None:
            return
        sign, term = r
        if fam.part == "odd" and term.eps == 0 or fam.part == "even" and term.eps == 1:
            return
        c = -coeff if sign else coeff
        prev = residual.terms.get(term)
        s = c if prev is None else prev + c
        if s.is_zero():
            residual.terms.pop(term, None)
        else:
            residual.terms[term] = s
        attribution.setdefault(term, []).append((source, c))

    for slots, coeff in _raw_terms(fam, K):
        apply_total_differential(fam, slots, coeff, K, sink)
    return ClosednessResult(residual, attribution)


# ---------------------------------------------------------------------------
# coefficient conditions

def theorem4_conditions(lambdas, parity: str, mus=None, length: int | None = None):
    """Forced interaction coefficients for slot coefficients ``lambdas``.

    ``lambdas`` is a sequence (index 0 holds lambda_1).  Returns
    ``(admissible, required_mu)`` with ``required_mu[r-1] = mu_r``; when ``mus``
    is given, admissibility also requires it to match.
    """
    lam = [Coeff.coerce(x) for x in lambdas]
    L = len(lam)
    length = length or 2 * L
    get = lambda i: lam[i - 1] if 1 <= i <= L else Coeff()   # noqa: E731
    req = []
    ok = True
    if parity == "odd":
        for l in range(1, L // 2 + 1):
            if not get(2 * l).is_zero():
                ok = False
        for r in range(1, length + 1):
            if r % 2:
                req.append(Coeff())
                continue
            l = r // 2
            req.append(sum((get(2 * i + 1) * get(2 * (l - 1 - i) + 1) for i in range(l)), Coeff()))
    elif parity == "even":
        for r in range(1, length + 1):
            req.append(sum((get(i) * get(r - i) for i in range(1, r)), Coeff()))
    else:
        raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")
    if mus is not None:
        given = [Coeff.coerce(x) for x in mus]
        given += [Coeff()] * (length - len(given))
        ok = ok and all(g == r for g, r in zip(given, req))
    return ok, req


def family_for(kind: str, n: int, lambdas=None, mus=None) -> Family:
    """Named families: hhat (odd n), hhat-odd / h-even-part (even n), htilde."""
    kappa = Coeff.param("kappa")
    if kind in ("hhat", "hhat-odd", "h-even-part"):
        lambdas = lambdas if lambdas is not None else [kappa]
    lam = {s + 1: Coeff.coerce(x) for s, x in enumerate(lambdas or [])}
    parity = "odd" if n % 2 else "even"
    if mus is None:
        _, req = theorem4_conditions([lam.get(s, Coeff()) for s in range(1, max(lam, default=0) + 1)],
                                     parity)
        mus = req
    mu = {r + 1: Coeff.coerce(x) for r, x in enumerate(mus)}
    if kind == "hhat":
        if n % 2 == 0:
            raise VanishingInteraction("the cubic term S_3 vanishes when B has even total degree")
        return Family(n, lam, mu)
    if kind in ("hhat-odd", "h-even-part"):
        if n % 2:
            raise ValueError(f"{kind} is the even-dimensional family, got n = {n}")
        return Family(n, lam, mu, use_eps=True, part="odd" if kind == "hhat-odd" else "even")
    if kind == "htilde":
        if n % 2:
            return Family(n, lam, mu)
        return Family(n, lam, mu, use_eps=True, part="odd")
    raise ValueError(f"unknown family {kind!r}")


class VanishingInteraction(ValueError):
    """The requested interaction term is identically zero in this dimension."""


def classical_family(n: int) -> Family:
    """Slots ``B`` only, on shell (``F_A = 0``, ``d_A B = 0``), no BV variation."""
    return Family(n, on_shell_classical=True)


def classical_check(n: int, k: int) -> ClosednessResult:
    """``d h_k`` for the classical k-slot term (residual restricted to k slots)."""
    fam = classical_family(n)
    residual = LoopSum(n)
    attribution: dict = {}

    def sink(slots, base, coeff, source):
        if base is not None and base[:1] == ("TAIL",):
            r = _rotate_tail(slots, base[1:], n)
        else:
            r = normal_order(slots, base, n)
        if r is None:
            return
        sign, term = r
        c = -coeff if sign else coeff
        prev = residual.terms.get(term)
        s = c if prev is None else prev + c
        if s.is_zero():
            residual.terms.pop(term, None)
        else:
            residual.terms[term] = s
        attribution.setdefault(term, []).append((source, c))

    apply_total_differential(fam, ("B",) * 0 + tuple(("B",) for _ in range(k)), Coeff.const(1),
                             10 ** 6, sink)
    return ClosednessResult(residual, attribution)
