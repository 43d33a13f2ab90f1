from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvloops.coeff import Coeff
from bvloops.expr import (Context, ContextError, GExpr, bracket, differential, dot,
                          dot_bracket, integrate_top, pairing, trace, wedge)
from bvloops.grading import Generator, Grading, antifield_grading, koszul
from bvloops.gl2 import structure_bracket_check, to_components

from strategies import CTX, homogeneous_matrix, matrix_expr, scalar_mono, trace_expr

ctx3 = Context(3)
A = Generator("A", 1, 0, "field")
c = Generator("c", 0, 1, "ghost")
B = Generator("B", 1, 0, "field")


def g(x, ctx=ctx3, coeff=1):
    return GExpr.gen(ctx, x, coeff)


def total(e):
    (m,) = list(e)
    return m.deg + m.gh


def test_grading_total_and_koszul():
    assert Grading(2, -1).total == 1
    assert koszul(1, 0, 1, 0) == 1
    assert koszul(0, 1, 1, 0) == 0
    assert antifield_grading(3, 1, 0) == Grading(2, -1)


def test_transport_generator_must_be_trivially_graded():
    Generator("H", 0, 0, "transport")
    with pytest.raises(ValueError):
        Generator("H", 1, 0, "transport")


def test_ghost_and_connection_commute():
    sc = Generator("cs", 0, 1, "ghost", False)
    As = Generator("As", 1, 0, "field", False)
    assert wedge(g(sc), g(As)) == wedge(g(As), g(sc))


def test_odd_scalar_squares_to_zero():
    As = Generator("As", 1, 0, "field", False)
    assert wedge(g(As), g(As)).is_zero()


def test_top_degree_truncation():
    x = Generator("x", 2, 0, "field", False)
    y = Generator("y", 2, 0, "field", False)
    assert wedge(g(x), g(y)).is_zero()
    assert differential(differential(g(B))).is_zero()


def test_context_mismatch():
    with pytest.raises(ContextError):
        wedge(g(A), g(A, Context(4)))


def test_dot_examples():
    assert dot(g(A), g(B)) == wedge(g(A), g(B))
    assert dot(g(c), g(A)) == -wedge(g(c), g(A))


def test_dot_bracket_self_pairing():
    # total degree odd: symmetric, kept; total degree even: antisymmetry forces zero
    x = Generator("x", 1, 1, "ghost")
    y = Generator("y", 0, 1, "ghost")
    assert not dot_bracket(g(y), g(y)).is_zero()
    assert dot_bracket(g(x), g(x)).is_zero()
    assert not dot_bracket(g(x), g(y)).is_zero()


def test_jacobi_for_odd_element():
    a = g(A) + g(c)
    assert not dot_bracket(a, a).is_zero()
    assert dot_bracket(a, dot_bracket(a, a)).is_zero()
    assert structure_bracket_check(3).is_zero()


def test_bracket_requires_algebra_values():
    s = Generator("s", 0, 0, "field", False)
    with pytest.raises(TypeError):
        dot_bracket(g(s), g(A))


def test_plain_bracket_when_ghost_free():
    assert dot_bracket(g(A), g(B)) == bracket(g(A), g(B))


def test_integral_examples():
    y = Generator("y", 2, 0, "field")
    assert integrate_top(trace(differential(wedge(g(A), g(y))))).is_zero()
    assert integrate_top(trace(wedge(g(A), g(B)))).is_zero()
    # ad-invariance: <[a,b],c> = <a,[b,c]>
    a, b, cc = g(A), g(B), g(Generator("C", 1, 0, "field"))
    lhs = integrate_top(pairing(bracket(a, b), cc))
    rhs = integrate_top(pairing(a, bracket(b, cc)))
    assert lhs == rhs
    assert to_components(lhs) == to_components(rhs)


def test_cyclic_rotation_sign():
    x = Generator("x", 1, 0, "field")
    y = Generator("y", 2, 0, "field")
    # Tr(x y) = (-1)^{1*2} Tr(y x)
    assert trace(wedge(g(x), g(y))) == trace(wedge(g(y), g(x)))
    assert trace(wedge(g(A), g(B))) == -trace(wedge(g(B), g(A)))


@given(matrix_expr(), matrix_expr(), matrix_expr())
@settings(max_examples=60, deadline=None)
def test_products_are_bilinear_and_associative(a, b, c_):
    assert wedge(wedge(a, b), c_) == wedge(a, wedge(b, c_))
    assert dot(dot(a, b), c_) == dot(a, dot(b, c_))
    assert wedge(a + b, c_) == wedge(a, c_) + wedge(b, c_)
    assert dot(a, b + c_) == dot(a, b) + dot(a, c_)


@given(scalar_mono(), scalar_mono())
@settings(max_examples=100, deadline=None)
def test_dot_total_degree_commutativity(a, b):
    ta, tb = total(a), total(b)
    assert dot(a, b) == dot(b, a).scale(-1 if (ta * tb) % 2 else 1)


@given(homogeneous_matrix(), homogeneous_matrix())
@settings(max_examples=80, deadline=None)
def test_dot_bracket_antisymmetry(a, b):
    ta, tb = total(a), total(b)
    s = 1 if (ta * tb) % 2 else -1
    assert dot_bracket(a, b) == dot_bracket(b, a).scale(s)


@given(homogeneous_matrix(2), homogeneous_matrix(2), homogeneous_matrix(2))
@settings(max_examples=50, deadline=None)
def test_dot_bracket_jacobi(a, b, c_):
    ta, tb, tc = total(a), total(b), total(c_)
    sign = lambda e: -1 if e % 2 else 1  # noqa: E731
    lhs = dot_bracket(a, dot_bracket(b, c_))
    rhs = dot_bracket(dot_bracket(a, b), c_) + dot_bracket(b, dot_bracket(a, c_)).scale(sign(ta * tb))
    assert lhs == rhs


@given(homogeneous_matrix(), homogeneous_matrix())
@settings(max_examples=50, deadline=None)
def test_leibniz_both_modes(a, b):
    da = -1 if list(a)[0].deg % 2 else 1
    ta = -1 if total(a) % 2 else 1
    assert differential(wedge(a, b)) == wedge(differential(a), b) + wedge(a, differential(b)).scale(da)
    assert differential(dot(a, b), "dot") == dot(differential(a), b) + dot(a, differential(b)).scale(ta)


@given(matrix_expr())
@settings(max_examples=200, deadline=None)
def test_differential_squares_to_zero(a):
    assert differential(differential(a)).is_zero()
    for m in differential(a):
        assert 0 <= m.deg <= CTX.n


@given(trace_expr())
@settings(max_examples=80, deadline=None)
def test_canonical_form_is_idempotent(e):
    raw = [(m.coeff, m.scalars, m.traces, m.word) for m in e]
    assert GExpr.build(e.ctx, raw) == e


@given(homogeneous_matrix(4))
@settings(max_examples=80, deadline=None)
def test_trace_invariant_under_rotation(a):
    (m,) = list(a)
    w = m.word
    for r in range(1, len(w)):
        head, tail = w[:r], w[r:]
        dh, gh_ = sum(x.deg for x in head), sum(x.gh for x in head)
        dt, gt = sum(x.deg for x in tail), sum(x.gh for x in tail)
        s = koszul(dh, gh_, dt, gt)
        rot = GExpr.build(a.ctx, [(m.coeff.__neg__() if s else m.coeff, (), (tail + head,), None)])
        assert rot == trace(a)


def test_coefficients_are_exact():
    k = Coeff.param("kappa")
    e = g(A).scale(k * Fraction(1, 3))
    assert str(list(e)[0].coeff) == "1/3*kappa"
    assert (e - e).is_zero()
