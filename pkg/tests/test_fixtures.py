import numpy as np
import pytest

from bvloops.fixtures import FixtureError, parse_fixture

GOOD = """# gl(2) test connection
n = 3
N = 2
A[0][1][1] = 0.1*x2
A[1][0][2] = -0.05*x1*x3 + 0.02
A[0][0][3] = 0.08*sin(x1)
B[0][1][2] = 0.5 + x1^2   # trailing comment
"""


def test_parse_and_evaluate():
    fx = parse_fixture(GOOD)
    conn = fx.connection()
    x = np.array([0.3, -0.4, 2.0])
    A = conn.A(x)
    assert A.shape == (3, 2, 2)
    assert A[0, 0, 1] == pytest.approx(0.1 * -0.4)
    assert A[2, 0, 0] == pytest.approx(0.08 * np.sin(0.3))
    assert conn.B(x)[1, 0, 1] == pytest.approx(0.5 + 0.09)


def test_two_form_is_antisymmetrized():
    fx = parse_fixture("n = 4\nN = 1\nB[0][0][1][3] = x2\n")
    B = fx.connection().B(np.array([0.0, 2.0, 0.0, 0.0]))
    assert B[0, 2, 0, 0] == 2.0 and B[2, 0, 0, 0] == -2.0 and B[0, 0, 0, 0] == 0.0


def test_flat_flag_checked():
    with pytest.raises(Exception):
        parse_fixture("N = 1\nA[0][0][1] = x2\nflat = true\n").connection()
    parse_fixture("N = 1\nA[0][0][1] = x1\nflat = true\n").connection()


@pytest.mark.parametrize("text,line,col", [
    ("A[0][1] = x1", 1, 3),
    ("n = 3\nA[0][5][1] = 1", 2, 6),
    ("A[0][1][1] = x1 $ 2", 1, 17),
    ("A[0][1][1] = y7", 1, 14),
    ("foo = 2", 1, 1),
    ("A[0][1][1] = (x1", 1, 14),
    ("A[0][x][1] = 1", 1, 6),
    ("flat = yes", 1, 8),
    ("garbage", 1, 1),
])
def test_errors_carry_positions(text, line, col):
    with pytest.raises(FixtureError) as e:
        parse_fixture(text, "f.fx")
    assert (e.value.line, e.value.col) == (line, col)
    assert str(e.value).startswith(f"f.fx:{line}:{col}:")
