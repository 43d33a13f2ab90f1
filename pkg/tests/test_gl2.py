import pytest

from bvloops import gl2
from bvloops.bv import BVContext, bv_action
from bvloops.expr import Context, GExpr, integrate_top, trace, wedge
from bvloops.grading import Generator

ctx = Context(3)
X = Generator("X", 1, 0, "field")
Y = Generator("Y", 2, 0, "field")


def test_trace_expands_to_index_sum():
    t = trace(wedge(GExpr.gen(ctx, X), GExpr.gen(ctx, Y)))
    assert len(gl2.to_components(t)) == 4
    assert len(gl2.to_components(t, N=3)) == 9


def test_open_word_rejected():
    with pytest.raises(TypeError):
        gl2.to_components(GExpr.gen(ctx, X))


def test_structure_constants_satisfy_jacobi():
    assert gl2.structure_bracket_check(3, 2).is_zero()
    assert gl2.structure_bracket_check(4, 3).is_zero()


@pytest.mark.parametrize("n", [3, 4])
def test_master_equation_in_components(n):
    bv = BVContext(n, "gl2")
    Sc = gl2.to_components(bv_action(bv))
    assert gl2.residual_norm(gl2.component_antibracket(Sc, Sc, bv.table)) < 1e-12


def test_broken_action_is_detected():
    bv = BVContext(3, "gl2")
    S = bv_action(bv)
    extra = integrate_top(trace(wedge(wedge(bv.g("A"), bv.g("c")), bv.g("A+"))))
    assert not extra.is_zero()
    Sc = gl2.to_components(S + extra.scale(3))
    assert gl2.residual_norm(gl2.component_antibracket(Sc, Sc, bv.table)) > 0.5
