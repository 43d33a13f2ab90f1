"""Exact polynomial coefficients in formal parameters.

A :class:`Coeff` is a finite sum of rational multiples of monomials in named
formal parameters (``kappa``, ``hbar``, ``lambda1``, ...).  Instances are
immutable and hashable so they can sit inside canonical expression keys.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

Number = Union[int, Fraction]
PowerProduct = tuple  # tuple of (name, exponent) sorted by name


def _mul_pp(a: PowerProduct, b: PowerProduct) -> PowerProduct:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for name, e in b:
        out[name] = out.get(name, 0) + e
    return tuple(sorted(out.items()))


class Coeff:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[PowerProduct, Number] | None = None):
        clean = {}
        if terms:
            for pp, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[pp] = clean.get(pp, 0) + c
            clean = {k: v for k, v in clean.items() if v}
        self._terms = clean
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def const(cls, value: Number) -> "Coeff":
        return cls({(): value})

    @classmethod
    def param(cls, name: str, power: int = 1) -> "Coeff":
        if power == 0:
            return cls.const(1)
        return cls({((name, power),): 1})

    @classmethod
    def coerce(cls, value) -> "Coeff":
        if isinstance(value, Coeff):
            return value
        if isinstance(value, str):
            return cls.param(value)
        return cls.const(value)

    # queries -----------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(pp == () for pp in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def params(self) -> set:
        return {name for pp in self._terms for name, _ in pp}

    def degree_in(self, names: Iterable[str]) -> int:
        names = set(names)
        if not self._terms:
            return 0
        return max(sum(e for n, e in pp if n in names) for pp in self._terms)

    # arithmetic --------------------------------------------------------
    def __add__(self, other) -> "Coeff":
        other = Coeff.coerce(other)
        out = dict(self._terms)
        for pp, c in other._terms.items():
            out[pp] = out.get(pp, 0) + c
        return Coeff(out)

    __radd__ = __add__

    def __neg__(self) -> "Coeff":
        return Coeff({pp: -c for pp, c in self._terms.items()})

    def __sub__(self, other) -> "Coeff":
        return self + (-Coeff.coerce(other))

    def __rsub__(self, other) -> "Coeff":
        return Coeff.coerce(other) - self

    def __mul__(self, other) -> "Coeff":
        if isinstance(other, (int, Fraction)):
            if other == 1:
                return self
            return Coeff({pp: c * other for pp, c in self._terms.items()})
        other = Coeff.coerce(other)
        out: dict = {}
        for pa, ca in self._terms.items():
            for pb, cb in other._terms.items():
                pp = _mul_pp(pa, pb)
                out[pp] = out.get(pp, 0) + ca * cb
        return Coeff(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Coeff":
        out = Coeff.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        try:
            other = Coeff.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # transformations ---------------------------------------------------
    def substitute(self, values: Mapping[str, "Coeff | Number"]) -> "Coeff":
        out = Coeff()
        for pp, c in self._terms.items():
            term = Coeff.const(c)
            for name, e in pp:
                if name in values:
                    term = term * (Coeff.coerce(values[name]) ** e)
                else:
                    term = term * Coeff.param(name, e)
            out = out + term
        return out

    def truncate(self, names: Iterable[str], max_degree: int) -> "Coeff":
        names = set(names)
        return Coeff({pp: c for pp, c in self._terms.items()
                      if sum(e for n, e in pp if n in names) <= max_degree})

    def part_of_degree(self, names: Iterable[str], degree: int) -> "Coeff":
        names = set(names)
        return Coeff({pp: c for pp, c in self._terms.items()
                      if sum(e for n, e in pp if n in names) == degree})

    def odd_part(self, names: Iterable[str]) -> "Coeff":
        """Part that is odd under simultaneous sign flip of ``names``."""
        names = set(names)
        return Coeff({pp: c for pp, c in self._terms.items()
                      if sum(e for n, e in pp if n in names) % 2 == 1})

    def even_part(self, names: Iterable[str]) -> "Coeff":
        names = set(names)
        return Coeff({pp: c for pp, c in self._terms.items()
                      if sum(e for n, e in pp if n in names) % 2 == 0})

    def evaluate(self, values: Mapping[str, float]) -> float:
        total = 0.0
        for pp, c in self._terms.items():
            v = float(c)
            for name, e in pp:
                v *= values[name] ** e
            total += v
        return total

    # text --------------------------------------------------------------
    def sort_key(self):
        return tuple(sorted((pp, c.numerator, c.denominator) for pp, c in self._terms.items()))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for pp, c in sorted(self._terms.items()):
            mono = "*".join(name if e == 1 else f"{name}^{e}" for name, e in pp)
            cs = str(c)
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{cs}*{mono}")
        s = "+".join(parts).replace("+-", "-")
        return s

    def __repr__(self) -> str:
        return f"Coeff({self})"

    @classmethod
    def parse(cls, text: str) -> "Coeff":
        """Inverse of ``str``: sums of ``q*name^e*...`` terms."""
        text = text.strip()
        if text == "0":
            return cls()
        out = cls()
        i = 0
        tokens = []
        buf = ""
        for ch in text:
            if ch in "+-" and buf and not buf.endswith("^") and not buf.endswith("*"):
                tokens.append(buf)
                buf = ch
            else:
                buf += ch
        if buf:
            tokens.append(buf)
        for tok in tokens:
            sign = 1
            if tok[0] in "+-":
                sign = -1 if tok[0] == "-" else 1
                tok = tok[1:]
            term = cls.const(sign)
            for factor in tok.split("*"):
                if not factor:
                    continue
                if factor[0].isdigit():
                    term = term * Fraction(factor)
                else:
                    name, _, e = factor.partition("^")
                    term = term * cls.param(name, int(e) if e else 1)
            out = out + term
            i += 1
        return out


ZERO = Coeff()
ONE = Coeff.const(1)
