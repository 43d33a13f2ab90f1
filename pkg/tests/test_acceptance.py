"""One test per acceptance criterion; each records a PASS/FAIL line (shown in the summary)."""

import itertools
import json
import random
import time

import numpy as np
from click.testing import CliRunner
from scipy.linalg import expm

from bvloops.bridge import symbolic_h1
from bvloops.bv import (CURVATURE, BVContext, BVOperator, brst, brst_images, build_superfields,
                        curvature_form)
from bvloops.cli import main
from bvloops.coeff import Coeff
from bvloops.expr import differential, dot
from bvloops.fixtures import parse_fixture
from bvloops.loops import family_for, theorem4_conditions, verify_closedness
from bvloops.numeric import (LoopCurve, axis_fixture, gl2_basis, holonomy, hopf_framed_circle,
                             iterated_integral, linking_integral, pure_gauge, random_deformation)
from bvloops.observables import build_observable
from bvloops.reports import (brst_tower_check, closedness_report, onshell_report,
                             verify_superfield_variations)


def test_master_equation(acceptance):
    runner = CliRunner()
    worst, slowest, ok = 0.0, 0.0, True
    for n in range(3, 7):
        t0 = time.perf_counter()
        r = runner.invoke(main, ["verify-master", "--n", str(n), "--backend", "gl2"])
        dt = time.perf_counter() - t0
        doc = json.loads(r.stdout)
        (me,) = [x for x in doc["reports"] if x["identity"] == "master-equation"]
        empty = me["residual-expression"]["terms"] == []
        worst, slowest = max(worst, me["residual-norm"]), max(slowest, dt)
        ok &= r.exit_code == 0 and empty and me["residual-norm"] < 1e-12 and dt < 300
    acceptance(1, ok, f"verify-master n=3..6, max gl(2) norm {worst:.1e}, max {slowest:.1f}s/dim")
    assert ok


def _superpoly(rng, a, B):
    pieces = [a, B, differential(a), differential(B)]
    out = None
    for _ in range(rng.randint(1, 2)):
        t = rng.choice(pieces)
        if rng.random() < 0.5:
            t = dot(t, rng.choice(pieces))
        t = t.scale(rng.choice([-2, -1, 1, 3]))
        out = t if out is None else out + t
    return out


def test_superfield_variations(acceptance):
    ok, count = True, 0
    for n in range(3, 7):
        ok &= verify_superfield_variations(n).passed
        bv = BVContext(n)
        op = BVOperator(bv)
        a, B = (f.expr for f in build_superfields(bv))
        rng = random.Random(n)
        for _ in range(50):
            x = _superpoly(rng, a, B)
            d = op.shifted(x)
            ok &= op.shifted(d).is_zero()
            ok &= (op.shifted(differential(x)) + differential(d)).is_zero()
            count += 1
    acceptance(2, ok, f"superfield variations n=3..6, delta^2 and [delta, d] on {count} polynomials")
    assert ok


def test_brst_reduction(acceptance):
    ok = True
    for n in range(3, 7):
        bv = BVContext(n)
        ok &= brst_tower_check(n).passed
        images = brst_images(bv)
        for img in images.values():
            sq = curvature_form(bv, brst(bv, img, images))
            ok &= all(any(g.base == CURVATURE for g in m.generators) for m in sq)
    acceptance(3, ok, "antifield-free delta_BV = BRST tower; delta_BRST^2 proportional to F_A")
    assert ok


def test_closedness(acceptance):
    cases = [("hhat", 5), ("hhat", 7), ("hhat-odd", 4), ("hhat-odd", 6)]
    ok, slowest = True, 0.0
    for fam, n in cases:
        for K in (1, 2, 3):
            t0 = time.perf_counter()
            rep = closedness_report(fam, n, K)
            slowest = max(slowest, time.perf_counter() - t0)
            ok &= rep.passed and rep.extra["residual-terms"] == []
    rep = closedness_report("h-even-part", 4, 3)
    faces = rep.extra["face-summary"]
    ok &= rep.extra["residual-terms"] != [] and set(faces) == {"endpoint"} and slowest < 600
    acceptance(4, ok, f"closed for {len(cases)} families at K<=3; n=4 even part leaves "
                      f"{faces.get('endpoint', 0)} endpoint-face terms")
    assert ok


def _brute_square(lam, length):
    out = [0] * length
    for i, j in itertools.product(range(1, len(lam) + 1), repeat=2):
        if i + j <= length:
            out[i + j - 1] += lam[i - 1] * lam[j - 1]
    return out


def test_coefficient_conditions(acceptance):
    kappa = Coeff.param("kappa")
    L = [Coeff.param(f"l{i}") for i in range(1, 4)]
    ok = verify_closedness(family_for("htilde", 5, [L[0], 0, L[2]]), 4).closed
    ok &= not verify_closedness(family_for("htilde", 5, [L[0], L[1]], mus=[0, L[0] * L[0]]), 4).closed
    ok &= verify_closedness(family_for("htilde", 4, L), 4).closed
    ok &= not verify_closedness(family_for("htilde", 4, L[:2], mus=[0, L[0] * L[0], 0]), 4).closed
    _, req = theorem4_conditions([kappa], "odd")
    ok &= req[1] == kappa * kappa
    for n, K in ((3, 3), (5, 2)):
        bv = BVContext(n)
        ok &= (build_observable(bv, "htilde", K, [kappa]).canonical()
               == build_observable(bv, "hhat", K).canonical())
    rng = random.Random(4)
    trials = 0
    for length in range(1, 7):
        for _ in range(40):
            lam = [rng.randint(-5, 5) for _ in range(length)]
            _, req = theorem4_conditions(lam, "even", length=2 * length)
            ok &= [int(c.evaluate({})) for c in req] == _brute_square(lam, 2 * length)
            trials += 1
    acceptance(5, ok, f"both parities close; mu_2 = kappa^2 matches the cubic vertex; "
                      f"convolution vs brute force on {trials} prefixes")
    assert ok


def test_on_shell_terms(acceptance):
    reps = {n: onshell_report(n) for n in range(3, 8)}
    ok = all(reps[n].passed for n in (5, 6, 7))
    six = reps[6].extra["per-k"]
    ok &= not six["2"]["closed"] and not six["4"]["closed"]
    ok &= all(reps[n].extra["per-k"][k]["closed"] for n in (5, 7) for k in "1234")
    ok &= six["1"]["closed"] and six["3"]["closed"]
    acceptance(6, ok, "d h_k = 0 on shell for odd n>3 (k<=4), even n>4 (odd k<=3); "
                      "even k fails at n=6")
    assert ok


def _fixture_text(rng):
    lines = ["n = 3", "N = 2"]
    funcs = ["x1", "x2", "x3", "x1*x2", "sin(x3)", "cos(x1)", "x2^2"]
    for form, count, scale in (("A", 4, 0.08), ("B", 4, 0.8)):
        for m in range(count):
            i, j, k = rng.integers(0, 2), rng.integers(0, 2), rng.integers(1, 4)
            j = i if form == "B" and m == 0 else j
            c0, c1 = rng.normal(size=2) * scale
            lines.append(f"{form}[{i}][{j}][{k}] = {c0:.4f} + {c1:.4f}*{rng.choice(funcs)}")
    return "\n".join(lines) + "\n"


def test_numerics(acceptance):
    t0 = time.perf_counter()
    T = gl2_basis()
    curve = LoopCurve.from_function(
        lambda t: np.array([np.cos(2 * np.pi * t) * (1 + 0.2 * np.sin(6 * np.pi * t)),
                            np.sin(2 * np.pi * t), 0.3 * np.sin(4 * np.pi * t)]), 256)
    pg = pure_gauge(lambda x: np.sin(x[0]) * x[1], lambda x: np.cos(x[2] + x[0]),
                    lambda x: np.array([np.cos(x[0]) * x[1], np.sin(x[0]), 0]),
                    lambda x: -np.sin(x[2] + x[0]) * np.array([1, 0, 1]), T[1] + T[2], T[0] - T[3])
    gauge = float(np.max(np.abs(holonomy(curve, pg) - np.eye(2))))

    link = linking_integral(hopf_framed_circle()).value

    S = np.array([[0.0, 1], [-1, 0]])
    g = lambda x: expm(0.3 * x[2] * S) @ expm(0.1 * x[0] * T[1])  # noqa: E731
    dg = lambda x: np.array([g(x) @ (0.1 * T[1]), 0 * T[0], 0.3 * S @ g(x)])  # noqa: E731
    P0 = np.array([[0.2, 0.1], [0, -0.3]])
    conn = axis_fixture(np.array([[0.1, 0.3], [-0.2, 0.05]]), np.array([[0.4, -0.1], [0.3, 0.2]]),
                        lambda x: P0 * np.sin(x[2]) + T[1] * x[0] * x[1],
                        lambda x: np.array([T[1] * x[1], T[1] * x[0], P0 * np.cos(x[2])]), g, dg)
    base = LoopCurve.from_function(
        lambda t: np.array([1.5 * np.cos(2 * np.pi * t), np.sin(2 * np.pi * t),
                            0.2 * np.sin(2 * np.pi * t)]), 256)
    h0 = iterated_integral(base, conn, 1)
    rng = np.random.default_rng(12)
    drift = max(abs(iterated_integral(base.deformed(random_deformation(rng, 3), 0.05), conn, 1) - h0)
                for _ in range(10))

    bridge = 0.0
    for s in range(5):
        frng = np.random.default_rng(100 + s)
        fx = parse_fixture(_fixture_text(frng), f"fixture-{s}")
        a, b, c = frng.uniform(0.6, 1.4, size=3)
        loop = LoopCurve.from_function(
            lambda t: np.array([a * np.cos(2 * np.pi * t), b * np.sin(2 * np.pi * t),
                                c * np.sin(4 * np.pi * t) + 0.5]), 256)
        num = iterated_integral(loop, fx.connection(), 1)
        bridge = max(bridge, abs(symbolic_h1(loop, fx.form_callables()) - num))
    total = time.perf_counter() - t0

    ok = gauge < 1e-9 and abs(link - 1) < 1e-3 and drift < 1e-4 and bridge < 1e-6 and total < 300
    acceptance(7, ok, f"pure gauge {gauge:.1e}, linking {link:.6f}, h1 drift {drift:.1e}, "
                      f"symbolic vs numeric {bridge:.1e}, {total:.0f}s")
    assert ok
