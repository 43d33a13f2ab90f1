"""Hypothesis strategies shared by the test modules."""

from hypothesis import strategies as st

from bvloops.coeff import Coeff
from bvloops.expr import Context, GExpr
from bvloops.grading import Generator

N = 4
CTX = Context(N)

POOL = [
    Generator("A", 1, 0, "field"),
    Generator("B", 2, 0, "field"),
    Generator("c", 0, 1, "ghost"),
    Generator("t", 1, 1, "ghost"),
    Generator("u", 0, 2, "ghost"),
    Generator("A+", 3, -1, "antifield"),
    Generator("c+", 4, -2, "antifield"),
]
SCALARS = [Generator("x", 1, 0, "field", False), Generator("y", 0, 1, "ghost", False),
           Generator("z", 2, 1, "field", False)]

gens = st.sampled_from(POOL)
small_int = st.sampled_from([-3, -2, -1, 1, 2, 5])


@st.composite
def leveled(draw):
    g = draw(gens)
    if draw(st.integers(0, 3)) == 0:
        g = g.raised()
    return g


@st.composite
def matrix_expr(draw, max_terms=3, max_len=3):
    raw = []
    for _ in range(draw(st.integers(1, max_terms))):
        w = tuple(draw(st.lists(leveled(), min_size=1, max_size=max_len)))
        raw.append((Coeff.const(draw(small_int)), (), (), w))
    return GExpr.build(CTX, raw)


@st.composite
def _homogeneous_matrix(draw, max_len=3):
    w = tuple(draw(st.lists(leveled(), min_size=1, max_size=max_len)))
    return GExpr.build(CTX, [(Coeff.const(draw(small_int)), (), (), w)])


@st.composite
def _scalar_mono(draw):
    gs = tuple(draw(st.lists(st.sampled_from(SCALARS), min_size=1, max_size=2)))
    return GExpr.build(CTX, [(Coeff.const(draw(small_int)), gs, (), None)])


@st.composite
def trace_expr(draw, max_terms=2, max_len=4):
    raw = []
    for _ in range(draw(st.integers(1, max_terms))):
        w = tuple(draw(st.lists(leveled(), min_size=1, max_size=max_len)))
        raw.append((Coeff.const(draw(small_int)), (), (w,), None))
    return GExpr.build(CTX, raw)


def nonzero(strategy):
    return strategy.filter(lambda e: not e.is_zero())


def homogeneous_matrix(max_len=3):
    return nonzero(_homogeneous_matrix(max_len))


def scalar_mono():
    return nonzero(_scalar_mono())
