"""Connection fixtures: a small line-oriented language for matrix-valued forms.

::

    # comment
    n = 3
    N = 2
    A[0][1][2] = 0.1*x1*x2 - x3      # entry (0,1) of the dx3 component of A
    B[1][1][1] = sin(x3)             # entry (1,1) of the dx1 component of B
    flat = true

Matrix indices are 0-based; form directions are 1-based and match ``x1..xn``.
``B`` takes ``n - 2`` direction indices and is antisymmetrized.  Right-hand
sides are polynomials or elementary functions of ``x1..xn`` (parsed by sympy).
"""

from __future__ import annotations

import itertools
import re
import tokenize
from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr

from .numeric import ConnectionSample


class FixtureError(ValueError):
    def __init__(self, line: int, col: int, msg: str, source: str = "<fixture>"):
        super().__init__(f"{source}:{line}:{col}: {msg}")
        self.line, self.col = line, col


_ASSIGN = re.compile(r"^(\s*)([A-Za-z_]\w*)((?:\[[^\]]*\])*)\s*=\s*(.*?)\s*$")
_INDEX = re.compile(r"\[([^\]]*)\]")
_ALLOWED_FUNCS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "sqrt": sp.sqrt, "pi": sp.pi}


@dataclass
class Fixture:
    n: int = 3
    N: int = 2
    A: dict = field(default_factory=dict)   # (i, j, k) -> sympy expr
    B: dict = field(default_factory=dict)   # (i, j, k1..k_{n-2}) -> sympy expr
    flags: dict = field(default_factory=dict)

    def symbols(self):
        return sp.symbols(" ".join(f"x{i + 1}" for i in range(self.n)))

    def _array_fn(self, entries: dict, form_rank: int, antisym: bool):
        xs = self.symbols()
        n, N = self.n, self.N
        shape = (n,) * form_rank + (N, N)
        items = []
        for key, ex in entries.items():
            i, j, dirs = key[0], key[1], key[2:]
            f = sp.lambdify(xs, ex, "numpy")
            items.append((i, j, dirs, f))

        def fn(x):
            out = np.zeros(shape)
            for i, j, dirs, f in items:
                v = float(f(*x))
                if not antisym:
                    out[dirs + (i, j)] += v
                    continue
                for perm in itertools.permutations(range(len(dirs))):
                    sign = _sign(perm)
                    out[tuple(dirs[p] for p in perm) + (i, j)] += sign * v
            return out

        return fn

    def connection(self) -> ConnectionSample:
        A = self._array_fn(self.A, 1, False)
        B = self._array_fn(self.B, self.n - 2, True) if self.B else None
        return ConnectionSample(self.n, self.N, A, B,
                                flat=self.flags.get("flat", False),
                                covariantly_closed=self.flags.get("covariantly_closed", False))

    def form_callables(self) -> dict:
        """``{"A": fn, "B": fn}`` returning component arrays (used for symbolic instantiation)."""
        out = {"A": self._array_fn(self.A, 1, False)}
        if self.B:
            out["B"] = self._array_fn(self.B, self.n - 2, True)
        return out


def _sign(p) -> int:
    s = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def parse_fixture(text: str, source: str = "<fixture>") -> Fixture:
    fx = Fixture()
    pending = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _ASSIGN.match(line)
        if not m:
            col = len(raw) - len(raw.lstrip()) + 1
            raise FixtureError(ln, col, "expected 'name = value' or 'A[i][j][k] = expr'", source)
        indent, name, idx, rhs = m.groups()
        rhs_col = raw.index(rhs, len(indent) + len(name) + len(idx)) + 1 if rhs else len(raw) + 1
        if not rhs:
            raise FixtureError(ln, rhs_col, "missing right-hand side", source)
        if not idx:
            if name in ("n", "N"):
                if not rhs.isdigit():
                    raise FixtureError(ln, rhs_col, f"{name} must be a positive integer", source)
                setattr(fx, name, int(rhs))
            elif name in ("flat", "covariantly_closed"):
                if rhs not in ("true", "false"):
                    raise FixtureError(ln, rhs_col, "flag must be true or false", source)
                fx.flags[name] = rhs == "true"
            else:
                raise FixtureError(ln, len(indent) + 1, f"unknown setting {name!r}", source)
            continue
        if name not in ("A", "B"):
            raise FixtureError(ln, len(indent) + 1, f"unknown form {name!r} (expected A or B)", source)
        indices = []
        pos = len(indent) + len(name)
        for im in _INDEX.finditer(idx):
            tok = im.group(1).strip()
            if not re.fullmatch(r"\d+", tok):
                raise FixtureError(ln, pos + im.start() + 2, f"index {tok!r} is not an integer", source)
            indices.append((int(tok), pos + im.start() + 2))
        pending.append((ln, name, indices, rhs, rhs_col))
    xs = fx.symbols()
    local = {str(s): s for s in (xs if isinstance(xs, tuple) else (xs,))}
    local.update(_ALLOWED_FUNCS)
    for ln, name, indices, rhs, rhs_col in pending:
        want = 3 if name == "A" else 2 + fx.n - 2
        if len(indices) != want:
            raise FixtureError(ln, indices[0][1] if indices else rhs_col,
                               f"{name} needs {want} indices, got {len(indices)}", source)
        for p, (v, col) in enumerate(indices):
            if p < 2 and not 0 <= v < fx.N:
                raise FixtureError(ln, col, f"matrix index {v} out of range 0..{fx.N - 1}", source)
            if p >= 2 and not 1 <= v <= fx.n:
                raise FixtureError(ln, col, f"direction {v} out of range 1..{fx.n}", source)
        for cpos, ch in enumerate(rhs):
            if not (ch.isalnum() or ch in " _.+-*/()^"):
                raise FixtureError(ln, rhs_col + cpos, f"unexpected character {ch!r}", source)
        try:
            ex = parse_expr(rhs.replace("^", "**"), local_dict=local, evaluate=True)
        except (SyntaxError, TypeError, ValueError, sp.SympifyError, tokenize.TokenError) as e:
            off = getattr(e, "offset", None)
            col = rhs_col + (off - 1 if off else 0)
            raise FixtureError(ln, col, f"cannot parse expression: {rhs}", source) from None
        extra = ex.free_symbols - set(local.values())
        if extra:
            bad = sorted(str(s) for s in extra)[0]
            raise FixtureError(ln, rhs_col + rhs.find(bad), f"unknown symbol {bad!r}", source)
        key = (indices[0][0], indices[1][0]) + tuple(v - 1 for v, _ in indices[2:])
        target = fx.A if name == "A" else fx.B
        target[key] = target.get(key, 0) + ex
    return fx
