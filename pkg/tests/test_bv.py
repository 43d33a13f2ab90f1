import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvloops import gl2
from bvloops.bv import (CURVATURE, BVContext, BVOperator, FieldTable, antibracket, antifields_to_zero,
                        brst, brst_images, build_superfields, bv_action, classical_action,
                        covariant_super, curvature_form, on_shell, supercurvature)
from bvloops.expr import GExpr, bracket, differential, dot
from bvloops.randexpr import random_local
from bvloops.serialize import to_text


def superpoly(rng, bv):
    a, B = (f.expr for f in build_superfields(bv))
    pieces = [a, B, differential(a), differential(B)]
    out = None
    for _ in range(rng.randint(1, 2)):
        t = rng.choice(pieces)
        if rng.random() < 0.5:
            t = dot(t, rng.choice(pieces))
        t = t.scale(rng.choice([-2, -1, 1, 3]))
        out = t if out is None else out + t
    return out


def test_low_dimension_rejected():
    with pytest.raises(ValueError):
        BVContext(2)
    with pytest.raises(ValueError):
        FieldTable(1)
    with pytest.raises(ValueError):
        BVContext(3, "su2")


def test_superfields_n3():
    bv = BVContext(3)
    a, B = build_superfields(bv)
    assert to_text(B.expr) == to_text(bv.g("tau1") + bv.g("B") - bv.g("A+") + bv.g("c+"))
    assert to_text(a.expr) == to_text(bv.g("c") + bv.g("A") - bv.g("B+") + bv.g("tau1+"))


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_superfield_total_degrees(n):
    a, B = build_superfields(BVContext(n))
    assert a.total == 1 and a.check_total()
    assert B.total == n - 2 and B.check_total()
    assert len(a.components) == n + 1 and len(B.components) == n + 1


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_action_has_ghost_number_zero(n):
    assert {m.gh for m in bv_action(BVContext(n))} == {0}


def test_action_reduces_to_classical_bf():
    bv = BVContext(4)
    assert antifields_to_zero(bv_action(bv)) == classical_action(bv)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_master_equation(n):
    S = bv_action(BVContext(n))
    assert antibracket(S, S).is_zero()


@pytest.mark.parametrize("n", [3, 4])
def test_shifted_variations(n):
    bv = BVContext(n)
    op = BVOperator(bv)
    a, B = build_superfields(bv)
    s = -1 if n % 2 else 1
    assert op.shifted(a.expr) == supercurvature(bv, a).scale(s)
    assert op.shifted(B.expr) == covariant_super(bv, a.expr, B.expr).scale(s)


@pytest.mark.parametrize("n", [3, 4])
def test_shifted_squares_and_anticommutes_with_d(n):
    bv = BVContext(n)
    op = BVOperator(bv)
    rng = random.Random(11 * n)
    for _ in range(10):
        x = superpoly(rng, bv)
        d = op.shifted(x)
        assert op.shifted(d).is_zero()
        assert (op.shifted(differential(x)) + differential(d)).is_zero()


@pytest.mark.parametrize("n", [3, 4, 5])
def test_brst_tower(n):
    bv = BVContext(n)
    op = BVOperator(bv)
    images = brst_images(bv)
    for g, img in images.items():
        red = antifields_to_zero(op(bv.g(g.name)))
        assert to_text(red) == to_text(img)
        assert on_shell(curvature_form(bv, brst(bv, img, images))).is_zero()


def test_brst_square_off_shell():
    bv = BVContext(3)
    images = brst_images(bv)
    assert curvature_form(bv, brst(bv, images[bv.table["B"]], images)).is_zero()
    bv = BVContext(4)
    images = brst_images(bv)
    sq = curvature_form(bv, brst(bv, images[bv.table["B"]], images))
    assert sq == bracket(GExpr.gen(bv.ctx, CURVATURE), bv.g("tau2"))
    assert on_shell(sq).is_zero()


@given(st.integers(0, 10_000), st.sampled_from([3, 4]))
@settings(max_examples=40, deadline=None)
def test_antibracket_symmetry_and_components(seed, n):
    rng = random.Random(seed)
    bv = BVContext(n)
    gens = bv.table.generators
    F = random_local(rng, bv.ctx, gens, 2, 3, False)
    G = random_local(rng, bv.ctx, gens, 2, 3, False)
    if F.is_zero() or G.is_zero():
        return
    gF = {m.gh for m in F}
    gG = {m.gh for m in G}
    if len(gF) != 1 or len(gG) != 1:
        return
    gf, gg = gF.pop(), gG.pop()
    lhs = antibracket(F, G)
    rhs = antibracket(G, F).scale(-((-1) ** ((gf + 1) * (gg + 1))))
    assert lhs == rhs
    comp = gl2.component_antibracket(gl2.to_components(F), gl2.to_components(G), bv.table)
    assert gl2.residual_norm(comp - gl2.to_components(lhs)) < 1e-12
