"""Text (S-expression) and JSON forms of canonical expressions.

Text grammar::

    expr  := (sum mono*) | (int (sum mono*))
    mono  := (mono "<coeff>" part*)
    part  := (s gen*) | (tr gen*) | (w gen*) | (· gen*)
    gen   := name(base_deg,gh;kind,m|s,level[,strand])

A ``(· ...)`` part is a dot-product word; it is accepted on input and stored
as the equivalent wedge word.
"""

from __future__ import annotations

import json
import re

from .coeff import Coeff
from .expr import Context, GExpr
from .grading import Generator

_GEN_RE = re.compile(
    r"(?P<name>[^\s()]+)\((?P<deg>-?\d+),(?P<gh>-?\d+);(?P<kind>\w+),(?P<mat>[ms]),(?P<level>\d+)(?:,(?P<strand>\w+))?\)")


def gen_to_text(g: Generator) -> str:
    s = f"{g.name}({g.base_deg},{g.gh};{g.kind},{'m' if g.algebra_valued else 's'},{g.level}"
    if g.strand:
        s += "," + g.strand
    return s + ")"


def _mono_text(m) -> str:
    parts = [f'"{m.coeff}"']
    if m.scalars:
        parts.append("(s " + " ".join(gen_to_text(g) for g in m.scalars) + ")")
    for t in m.traces:
        parts.append("(tr " + " ".join(gen_to_text(g) for g in t) + ")")
    if m.word is not None:
        parts.append("(w" + "".join(" " + gen_to_text(g) for g in m.word) + ")")
    return "(mono " + " ".join(parts) + ")"


def to_text(e: GExpr) -> str:
    body = "(sum" + "".join(" " + _mono_text(m) for m in e) + ")"
    return f"(int {body})" if e.integrated else body


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()" :
            tokens.append(ch)
            i += 1
        elif ch == '"':
            j = text.index('"', i + 1)
            tokens.append(("str", text[i + 1:j]))
            i = j + 1
        else:
            m = _GEN_RE.match(text, i)
            if m:
                tokens.append(("gen", m))
                i = m.end()
                continue
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def _gen_from_match(m) -> Generator:
    return Generator(m["name"], int(m["deg"]), int(m["gh"]), kind=m["kind"],
                     algebra_valued=m["mat"] == "m", level=int(m["level"]),
                     strand=m["strand"])


def from_text(text: str, ctx: Context) -> GExpr:
    tokens = _tokenize(text)
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            raise ParseError(f"expected {tok!r} at token {pos}")
        pos += 1

    integrated = False
    expect("(")
    if tokens[pos] == "int":
        integrated = True
        pos += 1
        expect("(")
    if tokens[pos] != "sum":
        raise ParseError("expected 'sum'")
    pos += 1
    raw = []
    while tokens[pos] == "(":
        pos += 1
        if tokens[pos] != "mono":
            raise ParseError("expected 'mono'")
        pos += 1
        tok = tokens[pos]
        if not (isinstance(tok, tuple) and tok[0] == "str"):
            raise ParseError("expected quoted coefficient")
        coeff = Coeff.parse(tok[1])
        pos += 1
        scalars, traces, word = (), [], None
        while tokens[pos] == "(":
            pos += 1
            tag = tokens[pos]
            pos += 1
            gens = []
            while isinstance(tokens[pos], tuple) and tokens[pos][0] == "gen":
                gens.append(_gen_from_match(tokens[pos][1]))
                pos += 1
            expect(")")
            if tag == "s":
                scalars = tuple(gens)
            elif tag == "tr":
                traces.append(tuple(gens))
            elif tag == "w":
                word = tuple(gens)
            elif tag == "·":
                # a1 . a2 . ... = prod_{i<j} (-1)^{gh a_i deg a_j} a1 ^ a2 ^ ...
                s = 0
                for i in range(len(gens)):
                    for j in range(i + 1, len(gens)):
                        s ^= (gens[i].gh * gens[j].deg) & 1
                if s:
                    coeff = -coeff
                word = tuple(gens)
            else:
                raise ParseError(f"unknown product tag {tag!r}")
        expect(")")
        raw.append((coeff, scalars, tuple(traces), word))
    expect(")")
    if integrated:
        expect(")")
    return GExpr.build(ctx, raw, integrated=integrated)


def gen_to_json(g: Generator) -> dict:
    d = {"name": g.name, "deg": g.base_deg, "gh": g.gh, "kind": g.kind,
         "algebra_valued": g.algebra_valued, "level": g.level}
    if g.strand:
        d["strand"] = g.strand
    return d


def gen_from_json(d: dict) -> Generator:
    return Generator(d["name"], d["deg"], d["gh"], kind=d["kind"],
                     algebra_valued=d["algebra_valued"], level=d["level"],
                     strand=d.get("strand"))


def to_json(e: GExpr) -> dict:
    terms = []
    for m in e:
        terms.append({
            "coeff": str(m.coeff),
            "scalars": [gen_to_json(g) for g in m.scalars],
            "traces": [[gen_to_json(g) for g in t] for t in m.traces],
            "word": None if m.word is None else [gen_to_json(g) for g in m.word],
            "grading": [m.deg, m.gh],
        })
    return {"n": e.ctx.n, "integrated": e.integrated, "terms": terms}


def from_json(data: dict | str) -> GExpr:
    if isinstance(data, str):
        data = json.loads(data)
    ctx = Context(data["n"])
    raw = []
    for t in data["terms"]:
        raw.append((Coeff.parse(t["coeff"]),
                    tuple(gen_from_json(g) for g in t["scalars"]),
                    tuple(tuple(gen_from_json(g) for g in tr) for tr in t["traces"]),
                    None if t["word"] is None else tuple(gen_from_json(g) for g in t["word"])))
    return GExpr.build(ctx, raw, integrated=data["integrated"])
