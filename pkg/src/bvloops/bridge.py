"""Instantiate symbolic loop observables with concrete gl(N) data (n = 3)."""

from __future__ import annotations

import math

import numpy as np

from .bv import BVContext
from .numeric import DEFAULT, LoopCurve, NumericConfig, chen_word_integral
from .observables import expand_holonomy, project_ghost_zero


def classical_h1_series(K: int):
    """Antifield- and ghost-free kappa^1 part of the holonomy series at n = 3."""
    bv = BVContext(3)
    keep = lambda g: g.kind == "field" and g.gh == 0   # noqa: E731
    s = project_ghost_zero(expand_holonomy(bv, K, keep=keep, max_order=1))
    return [(ins, c) for (order, _, _), (_, ins), c in s if order == 1]


def truncation_order(curve: LoopCurve, forms: dict, tol: float, samples: int = 512) -> int:
    """Smallest K whose omitted words (length > K) are bounded by ``tol``.

    With ``a = oint |A(gamma')|`` and ``b = oint |B(gamma')|`` (operator norms) the
    length-j words of h_1 sum to at most ``N b a^(j-1) / (j-1)!``.
    """
    t = np.arange(samples) / samples
    vel, pos = curve.derivative(t), curve(t)
    a = np.mean([np.linalg.norm(np.tensordot(v, forms["A"](x), axes=1), 2) for v, x in zip(vel, pos)])
    b = np.mean([np.linalg.norm(np.tensordot(v, forms["B"](x), axes=1), 2) for v, x in zip(vel, pos)])
    N = np.asarray(forms["A"](pos[0])).shape[-1]
    K, term = 1, N * b          # bound for the words of length K + 1, times e^a for the tail
    while term * math.exp(a) >= tol:
        term *= a / K
        K += 1
    return K


def symbolic_h1(curve: LoopCurve, forms: dict, K: int | None = None, tol: float = 1e-8,
                K_max: int = 18, config: NumericConfig = DEFAULT) -> float:
    """``h_1`` from the symbolic series: sum of Chen integrals of the words ``A..A B A..A``.

    ``forms`` maps ``"A"`` and ``"B"`` to callables ``x -> (3, N, N)``; the
    background is trivial so ``A`` is the full connection.  Without ``K`` the
    truncation is chosen by :func:`truncation_order` for the given ``tol``.
    """
    if K is None:
        K = truncation_order(curve, forms, tol)
        if K > K_max:
            raise ValueError(f"connection too large: {K} insertions needed for tol {tol:g}")
    total = 0.0
    for ins, c in classical_h1_series(K):
        names = [w[0].name for w in ins]
        val = c.evaluate({"kappa": 1.0})
        total += val * chen_word_integral(curve, [forms[x] for x in names], config=config)
    return total
