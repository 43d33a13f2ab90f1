import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvloops.coeff import Coeff
from bvloops.loops import (Family, VanishingInteraction, classical_check, family_for,
                           holonomy_series, normal_order, raw_words, theorem4_conditions,
                           verify_closedness)

P = [Coeff.param(f"l{i}") for i in range(1, 4)]
kappa = Coeff.param("kappa")


def poly_square(coeffs, length):
    # oracle: square the generating polynomial sum_i c_i x^i
    p = np.polynomial.polynomial.polymul([0] + list(coeffs), [0] + list(coeffs))
    out = [int(x) for x in p[1:length + 1]]
    return out + [0] * (length - len(out))


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=6))
@settings(max_examples=150, deadline=None)
def test_even_parity_is_a_convolution(lam):
    ok, req = theorem4_conditions(lam, "even", length=12)
    assert ok
    assert [int(c.evaluate({})) for c in req] == poly_square(lam, 12)


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=6))
@settings(max_examples=150, deadline=None)
def test_odd_parity_squares_the_odd_part(lam):
    odd = [x if i % 2 == 0 else 0 for i, x in enumerate(lam)]
    ok, req = theorem4_conditions(odd, "odd", length=12)
    assert ok
    assert [int(c.evaluate({})) for c in req] == poly_square(odd, 12)
    if any(x for i, x in enumerate(lam) if i % 2):
        assert not theorem4_conditions(lam, "odd")[0]


def test_single_lambda_gives_kappa_squared():
    ok, req = theorem4_conditions([kappa], "odd")
    assert ok and req == [Coeff(), kappa * kappa]
    assert theorem4_conditions([kappa], "odd", mus=[0, kappa * kappa])[0]
    assert not theorem4_conditions([kappa], "odd", mus=[0, kappa])[0]


def test_bad_parity_rejected():
    with pytest.raises(ValueError):
        theorem4_conditions([1], "mixed")


def test_series_truncation():
    fam = family_for("hhat", 3)
    with pytest.raises(ValueError):
        holonomy_series(fam, -1)
    assert len(holonomy_series(fam, 0)) == 1
    assert len(raw_words(fam, 2)) == 4


def test_family_errors():
    with pytest.raises(VanishingInteraction):
        family_for("hhat", 4)
    with pytest.raises(ValueError):
        family_for("hhat-odd", 5)
    with pytest.raises(ValueError):
        family_for("nope", 3)


def test_unit_moves_right_with_sign():
    sign, term = normal_order((("B", "e"), ("a",)), None, 4)
    assert sign == 1 and term.slots == (("B",), ("a",)) and term.eps == 1
    sign, term = normal_order((("a",), ("B", "e")), None, 4)
    assert sign == 0 and term.eps == 1
    assert normal_order((("e",), ("a",)), None, 4) is None


@pytest.mark.parametrize("kind,n", [("hhat", 3), ("hhat", 5), ("hhat-odd", 4), ("hhat-odd", 6)])
def test_families_close(kind, n):
    assert verify_closedness(family_for(kind, n), 3).closed


def test_even_part_fails_at_endpoints():
    res = verify_closedness(family_for("h-even-part", 4), 3)
    assert not res.closed
    assert set(res.face_summary()) == {"endpoint"}


def test_general_odd_lambda():
    assert verify_closedness(family_for("htilde", 5, [P[0], 0, P[2]]), 4).closed
    assert not verify_closedness(family_for("htilde", 5, [P[0], P[1]], mus=[0, P[0] * P[0]]), 4).closed


def test_general_even_lambda():
    assert verify_closedness(family_for("htilde", 4, P), 4).closed
    wrong = [0, P[0] * P[0], P[0] * P[1]]
    assert not verify_closedness(family_for("htilde", 4, P[:2], mus=wrong), 4).closed
    assert not verify_closedness(family_for("htilde", 4, [P[0]], mus=[0, 0]), 3).closed


def test_zero_interaction_family():
    fam = Family(3)
    assert verify_closedness(fam, 3).closed


@pytest.mark.parametrize("n,expect", [(3, [0, 1, 2, 3]), (4, [0, 2, 2, 4]), (5, [0] * 4),
                                      (6, [0, 1, 0, 1]), (7, [0] * 4)])
def test_classical_terms(n, expect):
    assert [len(classical_check(n, k).residual) for k in range(1, 5)] == expect
