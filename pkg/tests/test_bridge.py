import numpy as np
import pytest

from bvloops.bridge import classical_h1_series, symbolic_h1, truncation_order
from bvloops.fixtures import parse_fixture
from bvloops.numeric import LoopCurve, iterated_integral

FIXTURE = """n = 3
N = 2
A[0][1][1] = 0.1*x2
A[1][0][2] = -0.05*x1*x3 + 0.02
A[0][0][3] = 0.08*sin(x1)
B[0][0][1] = x2^2
B[1][0][3] = cos(x2)
B[1][1][2] = -x3
"""

loop = LoopCurve.from_function(
    lambda t: np.array([np.cos(2 * np.pi * t), 0.8 * np.sin(2 * np.pi * t), 0.3 * np.cos(4 * np.pi * t)]),
    256)


def test_word_count():
    words = classical_h1_series(4)
    assert len(words) == 1 + 2 + 3 + 4
    assert all(sum(w[0].name == "B" for w in ins) == 1 for ins, _ in words)


def test_symbolic_matches_transport():
    fx = parse_fixture(FIXTURE)
    assert abs(symbolic_h1(loop, fx.form_callables()) - iterated_integral(loop, fx.connection(), 1)) < 1e-10


def test_truncation_grows_with_field_strength():
    fx = parse_fixture(FIXTURE)
    f = fx.form_callables()
    big = {"A": lambda x: 20 * f["A"](x), "B": f["B"]}
    assert truncation_order(loop, big, 1e-8) > truncation_order(loop, f, 1e-8)
    with pytest.raises(ValueError):
        symbolic_h1(loop, big)
