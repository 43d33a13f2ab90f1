"""Numerical evaluation on R^n with trivial bundle.

Conventions: ``H|_s^t`` transports from ``gamma(t)`` to ``gamma(s)`` and solves
``dH/dt = H A(gamma'(t))`` with ``H|_s^s = 1``; ``hol = H|_0^1`` is therefore
the inverse of the usual path-ordered exponential.  Connections are given by
components ``A_k`` (``A = A_k dx^k``) with curvature ``F = dA + A^A``.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.integrate import solve_ivp


class DataError(ValueError):
    """Non-finite or malformed numerical input."""


class FramingError(ValueError):
    """The framing companion is not separated from the curve."""


@dataclass(frozen=True)
class NumericConfig:
    rk4_steps: int = 2048
    gl_points: int = 32
    panels: int = 16
    framing_eps: float = 0.05        # times the curve diameter
    fd_step: float = 1e-4
    fd_flat_step: float = 1e-3       # 4th-order stencil for curvature checks
    flat_tol: float = 1e-8
    closure_tol: float = 1e-12
    link_points: int = 512
    cheb_degree: int = 96


DEFAULT = NumericConfig()


# curves ---------------------------------------------------------------------

@dataclass
class LoopCurve:
    """Closed curve sampled at ``t_j = j/M`` (``j = 0..M``, last sample repeats the first)."""

    points: np.ndarray
    framing: np.ndarray | None = None
    name: str = "loop"
    closure_tol: float = DEFAULT.closure_tol
    _coef: np.ndarray = field(init=False, repr=False)
    _fcoef: np.ndarray | None = field(init=False, repr=False, default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or len(pts) < 4:
            raise DataError("curve samples must be an (M+1, n) array with M >= 3")
        if not np.all(np.isfinite(pts)):
            raise DataError("non-finite curve samples")
        if np.max(np.abs(pts[0] - pts[-1])) > self.closure_tol:
            raise DataError("curve is not closed: first and last samples differ")
        self.points = pts
        self._coef = np.fft.rfft(pts[:-1], axis=0) / (len(pts) - 1)
        if self.framing is not None:
            fr = np.asarray(self.framing, dtype=float)
            if fr.shape != pts.shape or not np.all(np.isfinite(fr)):
                raise DataError("framing samples must match the curve samples")
            norms = np.linalg.norm(fr[:-1], axis=1)
            if np.min(norms) < 1e-12:
                raise DataError("framing vanishes")
            tang = self.derivative(np.arange(len(pts) - 1) / (len(pts) - 1))
            cosang = np.abs(np.sum(fr[:-1] * tang, axis=1)) / (norms * np.linalg.norm(tang, axis=1))
            if np.max(cosang) > 1 - 1e-9:
                raise DataError("framing is tangent to the curve")
            self.framing = fr
            self._fcoef = np.fft.rfft(fr[:-1], axis=0) / (len(pts) - 1)
        self.check_imbedded()

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def samples(self) -> int:
        return len(self.points) - 1

    @classmethod
    def from_function(cls, f: Callable, samples: int = 256, framing: Callable | None = None,
                      name: str = "loop") -> "LoopCurve":
        t = np.arange(samples + 1) / samples
        pts = np.array([f(x) for x in t])
        pts[-1] = pts[0]
        fr = None
        if framing is not None:
            fr = np.array([framing(x) for x in t])
            fr[-1] = fr[0]
        return cls(pts, fr, name)

    def _eval(self, coef: np.ndarray, t, order: int) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        M = self.samples
        k = np.arange(coef.shape[0])
        w = np.ones(len(k))
        w[1:] = 2.0
        if M % 2 == 0:
            w[-1] = 1.0
        phase = np.exp(2j * np.pi * np.outer(t, k))
        fac = (2j * np.pi * k) ** order
        return np.real(phase @ (coef * (w * fac)[:, None]))

    def __call__(self, t) -> np.ndarray:
        return self._eval(self._coef, t, 0)

    def derivative(self, t, order: int = 1) -> np.ndarray:
        return self._eval(self._coef, t, order)

    def frame(self, t) -> np.ndarray:
        if self._fcoef is None:
            raise FramingError("curve has no framing")
        v = self._eval(self._fcoef, t, 0)
        return v / np.linalg.norm(v, axis=1)[:, None]

    def diameter(self) -> float:
        p = self.points[:-1]
        return float(np.max(np.linalg.norm(p[:, None] - p[None], axis=-1)))

    def check_imbedded(self):
        p = self.points[:-1]
        M = len(p)
        d = np.linalg.norm(p[:, None] - p[None], axis=-1)
        idx = np.arange(M)
        gap = np.abs(idx[:, None] - idx[None])
        gap = np.minimum(gap, M - gap)
        mask = gap > 1
        if mask.any() and np.min(d[mask]) <= 0.0:
            raise DataError("curve self-intersects")

    def companion(self, eps: float | None = None, config: NumericConfig = DEFAULT) -> "LoopCurve":
        eps = config.framing_eps * self.diameter() if eps is None else eps
        t = np.arange(self.samples + 1) / self.samples
        pts = self(t) + eps * self.frame(t)
        pts[-1] = pts[0]
        return LoopCurve(pts, None, self.name + "-companion")

    def deformed(self, field_fn: Callable, amplitude: float) -> "LoopCurve":
        t = np.arange(self.samples + 1) / self.samples
        pts = self(t) + amplitude * np.array([field_fn(x) for x in t])
        pts[-1] = pts[0]
        return LoopCurve(pts, self.framing, self.name + "-deformed")


def write_curve_csv(curve: LoopCurve, path: str):
    n = curve.n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + [f"nu{i + 1}" for i in range(n)])
        fr = curve.framing if curve.framing is not None else np.zeros_like(curve.points)
        for j, p in enumerate(curve.points):
            w.writerow([repr(j / curve.samples)] + [repr(float(x)) for x in p]
                       + [repr(float(x)) for x in fr[j]])


def read_curve_csv(path: str, name: str | None = None) -> LoopCurve:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty curve file")
    header = rows[0]
    n = (len(header) - 1) // 2
    expect = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"nu{i + 1}" for i in range(n)]
    if header != expect:
        raise DataError(f"{path}:1: header must be {','.join(expect)}")
    data = []
    for ln, row in enumerate(rows[1:], start=2):
        try:
            data.append([float(x) for x in row])
        except ValueError as e:
            raise DataError(f"{path}:{ln}: {e}") from None
        if len(row) != len(header):
            raise DataError(f"{path}:{ln}: expected {len(header)} columns")
    arr = np.array(data)
    t = arr[:, 0]
    if not np.allclose(np.diff(t), 1.0 / (len(t) - 1), atol=1e-9) or abs(t[0]) > 1e-12:
        raise DataError(f"{path}: t must be a uniform grid on [0, 1]")
    pts, fr = arr[:, 1:n + 1], arr[:, n + 1:]
    framing = fr if np.any(fr) else None
    return LoopCurve(pts, framing, name or path)


# connections ------------------------------------------------------------------

@dataclass
class ConnectionSample:
    """Matrix-valued forms on R^n.

    ``A(x)`` returns shape ``(n, N, N)``; ``B(x)`` returns ``(n,)*(n-2) + (N, N)``,
    totally antisymmetric in the form indices.
    """

    n: int
    N: int
    A: Callable
    B: Callable | None = None
    flat: bool = False
    covariantly_closed: bool = False

    def __post_init__(self):
        if self.flat or self.covariantly_closed:
            self.validate(np.zeros(self.n) + 0.3)

    def A_along(self, curve: LoopCurve, t) -> np.ndarray:
        x = curve(t)[0]
        v = curve.derivative(t)[0]
        a = np.asarray(self.A(x))
        if not np.all(np.isfinite(a)):
            raise DataError("non-finite connection sample")
        return np.tensordot(v, a, axes=1)

    def B_along(self, curve: LoopCurve, t, vectors: Sequence[np.ndarray] = ()) -> np.ndarray:
        """``B(gamma', v_1, ..., v_{n-3})`` at ``gamma(t)``."""
        if self.B is None:
            return np.zeros((self.N, self.N))
        x = curve(t)[0]
        out = np.asarray(self.B(x))
        for v in [curve.derivative(t)[0]] + [np.asarray(v, dtype=float) for v in vectors]:
            out = np.tensordot(v, out, axes=1)
        return out

    def curvature(self, x, h: float = DEFAULT.fd_flat_step) -> np.ndarray:
        n = self.n
        dA = np.zeros((n, n, self.N, self.N))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            dA[k] = (-np.asarray(self.A(x + 2 * e)) + 8 * np.asarray(self.A(x + e))
                     - 8 * np.asarray(self.A(x - e)) + np.asarray(self.A(x - 2 * e))) / (12 * h)
        A = np.asarray(self.A(x))
        F = np.zeros_like(dA)
        for k in range(n):
            for l in range(n):
                F[k, l] = dA[k, l] - dA[l, k] + A[k] @ A[l] - A[l] @ A[k]
        return F

    def covariant_derivative_B(self, x, h: float = DEFAULT.fd_flat_step) -> np.ndarray:
        """``(d_A B)_{kl}`` for a 1-form B (n = 3)."""
        if self.n != 3:
            raise NotImplementedError("covariant closedness check is implemented for n = 3")
        n = self.n
        dB = np.zeros((n, n, self.N, self.N))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            dB[k] = (-np.asarray(self.B(x + 2 * e)) + 8 * np.asarray(self.B(x + e))
                     - 8 * np.asarray(self.B(x - e)) + np.asarray(self.B(x - 2 * e))) / (12 * h)
        A, B = np.asarray(self.A(x)), np.asarray(self.B(x))
        out = np.zeros_like(dB)
        for k in range(n):
            for l in range(n):
                out[k, l] = (dB[k, l] - dB[l, k] + A[k] @ B[l] - B[l] @ A[k]
                             - A[l] @ B[k] + B[k] @ A[l])
        return out

    def validate(self, x, tol: float = DEFAULT.flat_tol):
        x = np.asarray(x, dtype=float)
        if self.flat:
            r = float(np.max(np.abs(self.curvature(x))))
            if r > tol:
                raise DataError(f"connection flagged flat has |F| = {r:.3e} at {x}")
        if self.covariantly_closed and self.B is not None and self.n == 3:
            r = float(np.max(np.abs(self.covariant_derivative_B(x))))
            if r > tol:
                raise DataError(f"B flagged covariantly closed has |d_A B| = {r:.3e} at {x}")


# transport ------------------------------------------------------------------

def _rk4(conn: ConnectionSample, curve: LoopCurve, H: np.ndarray, s: float, t: float,
         steps: int) -> np.ndarray:
    h = (t - s) / steps
    for i in range(steps):
        u = s + i * h
        k1 = H @ conn.A_along(curve, u)
        k2 = (H + 0.5 * h * k1) @ conn.A_along(curve, u + 0.5 * h)
        k3 = (H + 0.5 * h * k2) @ conn.A_along(curve, u + 0.5 * h)
        k4 = (H + h * k3) @ conn.A_along(curve, u + h)
        H = H + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(H)):
        raise DataError("transport diverged")
    return H


def parallel_transport(curve: LoopCurve, conn: ConnectionSample, s: float = 0.0, t: float = 1.0,
                       steps: int | None = None, config: NumericConfig = DEFAULT) -> np.ndarray:
    """``H|_s^t``: transport from ``gamma(t)`` to ``gamma(s)`` (fixed-step RK4)."""
    if not (0.0 <= s <= t <= 1.0):
        raise ValueError(f"need 0 <= s <= t <= 1, got s={s}, t={t}")
    steps = steps or max(1, int(round(config.rk4_steps * (t - s))))
    return _rk4(conn, curve, np.eye(conn.N), s, t, steps)


def holonomy(curve: LoopCurve, conn: ConnectionSample, steps: int | None = None,
             config: NumericConfig = DEFAULT) -> np.ndarray:
    return parallel_transport(curve, conn, 0.0, 1.0, steps, config)


def conventional_holonomy(curve: LoopCurve, conn: ConnectionSample,
                          rtol: float = 1e-12) -> np.ndarray:
    """Usual path-ordered exponential ``dU/dt = -A U`` (adaptive scipy integrator)."""
    N = conn.N

    def rhs(t, y):
        U = y.reshape(N, N)
        return (-conn.A_along(curve, t) @ U).ravel()

    sol = solve_ivp(rhs, (0.0, 1.0), np.eye(N).ravel(), method="DOP853", rtol=rtol, atol=rtol)
    return sol.y[:, -1].reshape(N, N)


# iterated integrals ------------------------------------------------------------

@dataclass
class _Grid:
    nodes: np.ndarray          # all quadrature nodes, ascending
    weights: np.ndarray
    panel_of: np.ndarray
    local: np.ndarray          # (m, m) cumulative integration matrix on [-1, 1] -> scaled
    edges: np.ndarray
    m: int


def _grid(panels: int, m: int) -> _Grid:
    x, w = np.polynomial.legendre.leggauss(m)
    # cumulative matrix: integral from panel start to node i of the interpolant
    V = np.polynomial.legendre.legvander(x, m - 1)
    Vinv = np.linalg.inv(V)
    local = np.zeros((m, m))
    for j in range(m):
        c = Vinv[:, j]
        ci = np.polynomial.legendre.legint(c, lbnd=-1)
        local[:, j] = np.polynomial.legendre.legval(x, ci)
    edges = np.linspace(0.0, 1.0, panels + 1)
    nodes, weights, pan = [], [], []
    for p in range(panels):
        a, b = edges[p], edges[p + 1]
        nodes.append(a + (b - a) * (x + 1) / 2)
        weights.append((b - a) / 2 * w)
        pan.append(np.full(m, p))
    return _Grid(np.concatenate(nodes), np.concatenate(weights), np.concatenate(pan),
                 local, edges, m)


def _transport_cache(curve, conn, grid: _Grid, config: NumericConfig) -> np.ndarray:
    """``H|_0^t`` at every node; RK4 restarted from the cached panel boundaries."""
    sub = max(1, config.rk4_steps // (len(grid.edges) - 1) // (grid.m + 1))
    out = np.empty((len(grid.nodes), conn.N, conn.N))
    H = np.eye(conn.N)
    for p in range(len(grid.edges) - 1):
        t = grid.edges[p]
        Hp = H
        for i in range(grid.m):
            idx = p * grid.m + i
            Hp = _rk4(conn, curve, Hp, t, grid.nodes[idx], sub)
            t = grid.nodes[idx]
            out[idx] = Hp
        H = _rk4(conn, curve, Hp, t, grid.edges[p + 1], sub)
    return out, H


def _cumulative(grid: _Grid, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integral of ``f`` (sampled at the nodes) from 0 to every node, and over [0, 1]."""
    m = grid.m
    out = np.empty_like(f)
    acc = np.zeros(f.shape[1:])
    for p in range(len(grid.edges) - 1):
        sl = slice(p * m, (p + 1) * m)
        h = (grid.edges[p + 1] - grid.edges[p]) / 2
        out[sl] = acc + h * np.tensordot(grid.local, f[sl], axes=1)
        acc = acc + np.tensordot(grid.weights[sl], f[sl], axes=1)
    return out, acc


def iterated_integral(curve: LoopCurve, conn: ConnectionSample, k: int, rho: Callable | None = None,
                      vectors: Sequence | None = None, config: NumericConfig = DEFAULT,
                      panels: int | None = None):
    """``int_{Delta_k} Tr_rho[H|_0^{t_1} B_1 H ... B_k H|_{t_k}^1]``.

    For n = 3 the result is a number.  For n > 3, ``vectors`` is a list of
    test-direction sets; each set holds ``k(n-3)`` callables ``t -> R^n``
    (deformation fields along the loop) and the result has one entry per set.
    ``rho`` maps gl(N) matrices to representation matrices (default: identity).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = conn.n
    if n == 3:
        return _iterated(curve, conn, k, rho, [()] * k, config, panels)
    if vectors is None:
        raise ValueError("n > 3 needs test directions on the loop space")
    out = []
    m = n - 3
    for vs in vectors:
        if len(vs) != k * m:
            raise ValueError(f"expected {k * m} test directions, got {len(vs)}")
        total = 0.0
        # distribute the directions over the k insertions (antisymmetrized)
        for perm in itertools.permutations(range(k * m)):
            blocks = [perm[i * m:(i + 1) * m] for i in range(k)]
            if any(list(b) != sorted(b) for b in blocks):
                continue
            sign = _perm_sign(perm)
            total += sign * _iterated(curve, conn, k, rho,
                                      [tuple(vs[j] for j in b) for b in blocks], config, panels)
        out.append(total)
    return np.array(out)


def _perm_sign(p) -> int:
    p = list(p)
    s = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def _iterated(curve, conn, k, rho, vecs, config, panels):
    grid = _grid(panels or config.panels, config.gl_points)
    H0, H1 = _transport_cache(curve, conn, grid, config)
    Hinv = np.linalg.inv(H0)
    N = conn.N
    G = H0  # G_0(t) = H|_0^t
    for j in range(k):
        f = np.empty((len(grid.nodes), N, N))
        for i, t in enumerate(grid.nodes):
            v = [fn(t) for fn in vecs[j]]
            f[i] = G[i] @ conn.B_along(curve, t, v) @ Hinv[i]
        J, Jtot = _cumulative(grid, f)
        G = J @ H0 if j < k - 1 else None
    M = Jtot @ H1
    if rho is not None:
        M = rho(M)
    return float(np.real(np.trace(M)))


def iterated_integral_ode(curve: LoopCurve, conn: ConnectionSample, k: int,
                          rtol: float = 1e-12) -> float:
    """Oracle: block upper-triangular transport ``dX/dt = X M(t)`` (n = 3)."""
    N = conn.N
    size = (k + 1) * N

    def Mt(t):
        M = np.zeros((size, size))
        A = conn.A_along(curve, t)
        B = conn.B_along(curve, t)
        for i in range(k + 1):
            M[i * N:(i + 1) * N, i * N:(i + 1) * N] = A
            if i < k:
                M[i * N:(i + 1) * N, (i + 1) * N:(i + 2) * N] = B
        return M

    def rhs(t, y):
        X = y.reshape(N, size)
        return (X @ Mt(t)).ravel()

    y0 = np.zeros((N, size))
    y0[:, :N] = np.eye(N)
    sol = solve_ivp(rhs, (0.0, 1.0), y0.ravel(), method="DOP853", rtol=rtol, atol=rtol * 1e-2)
    X = sol.y[:, -1].reshape(N, size)
    return float(np.trace(X[:, k * N:]))


def chen_word_integral(curve: LoopCurve, forms: Sequence[Callable], degree: int | None = None,
                       config: NumericConfig = DEFAULT) -> float:
    """``int_{Delta_k} Tr[w_1(t_1) ... w_k(t_k)]`` for matrix 1-forms and trivial transport.

    Chebyshev spectral cumulative integration, independent of the Gauss-Legendre
    panels used by :func:`iterated_integral`.
    """
    deg = degree or config.cheb_degree
    x = np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    t = (x + 1) / 2
    vel = curve.derivative(t)
    pos = curve(t)
    vals = [np.einsum("ik,ikab->iab", vel, np.array([f(p) for p in pos])) for f in forms]
    N = vals[0].shape[-1] if vals else 1
    acc = np.broadcast_to(np.eye(N), (deg + 1, N, N)).copy()
    total = None
    for j, w in enumerate(vals):
        g = np.einsum("iab,ibc->iac", acc, w)
        coef = C.chebfit(x, g.reshape(deg + 1, -1), deg)
        icoef = C.chebint(coef, lbnd=-1) / 2
        acc = C.chebval(x, icoef).T.reshape(deg + 1, N, N)
        if j == len(vals) - 1:
            total = C.chebval(1.0, icoef).reshape(N, N)
    return float(np.trace(total))


# fixtures -------------------------------------------------------------------

def gl2_basis() -> list:
    return [np.array([[1.0, 0], [0, 0]]), np.array([[0, 1.0], [0, 0]]),
            np.array([[0, 0], [1.0, 0]]), np.array([[0, 0], [0, 1.0]])]


def _expm(X: np.ndarray) -> np.ndarray:
    from scipy.linalg import expm
    return expm(X)


def pure_gauge(f: Callable, h: Callable, df: Callable, dh: Callable,
               T1: np.ndarray, T2: np.ndarray, n: int = 3) -> ConnectionSample:
    """``A = g^-1 dg`` for ``g = exp(f T1) exp(h T2)``."""
    def g_parts(x):
        return _expm(f(x) * T1), _expm(h(x) * T2)

    def A(x):
        E1, E2 = g_parts(x)
        E2i = np.linalg.inv(E2)
        gradf, gradh = np.asarray(df(x)), np.asarray(dh(x))
        # g^-1 dg = E2^-1 T1 E2 df + T2 dh
        base = E2i @ T1 @ E2
        return np.array([base * gradf[k] + T2 * gradh[k] for k in range(n)])

    return ConnectionSample(n, T1.shape[0], A, None, flat=True)


def _theta_form(x) -> np.ndarray:
    r2 = x[0] ** 2 + x[1] ** 2
    return np.array([-x[1] / r2, x[0] / r2, 0.0])


def axis_fixture(Y: np.ndarray, X: np.ndarray, Phi: Callable, dPhi: Callable,
                 g: Callable, dg: Callable) -> ConnectionSample:
    """Flat A and covariantly closed B on R^3 minus the z-axis.

    ``A' = Y dtheta`` and ``B' = X dtheta + d_{A'} Phi`` (constant Y, X), gauge
    rotated by ``g``: ``A = g^-1 A' g + g^-1 dg``, ``B = g^-1 B' g``.
    """
    def A(x):
        G, Gi, dG = g(x), np.linalg.inv(g(x)), dg(x)
        th = _theta_form(x)
        return np.array([Gi @ (Y * th[k]) @ G + Gi @ dG[k] for k in range(3)])

    def B(x):
        G, Gi = g(x), np.linalg.inv(g(x))
        th = _theta_form(x)
        P, dP = Phi(x), dPhi(x)
        return np.array([Gi @ (X * th[k] + dP[k] + th[k] * (Y @ P - P @ Y)) @ G
                         for k in range(3)])

    return ConnectionSample(3, Y.shape[0], A, B, flat=True, covariantly_closed=True)


def random_deformation(rng: np.random.Generator, n: int, modes: int = 3) -> Callable:
    """Smooth periodic vector field ``t -> R^n`` with unit-scale Fourier coefficients."""
    a = rng.normal(size=(modes, n))
    b = rng.normal(size=(modes, n))
    ks = np.arange(1, modes + 1)

    def field_fn(t):
        c = np.cos(2 * np.pi * ks * t) / ks ** 2
        s = np.sin(2 * np.pi * ks * t) / ks ** 2
        return c @ a + s @ b

    return field_fn


# linking ----------------------------------------------------------------------

@dataclass(frozen=True)
class LinkingResult:
    value: float
    integer: int
    deviation: float
    min_distance: float


def gauss_linking(c1: LoopCurve, c2: LoopCurve, points: int | None = None,
                  config: NumericConfig = DEFAULT) -> LinkingResult:
    """``(1/4pi) oint oint (x - y).(dx x dy)/|x - y|^3`` by periodic trapezoid rule."""
    if c1.n != 3 or c2.n != 3:
        raise ValueError("the Gauss integral needs curves in R^3")
    M = points or config.link_points
    t = np.arange(M) / M
    x, dx = c1(t), c1.derivative(t)
    y, dy = c2(t), c2.derivative(t)
    r = x[:, None, :] - y[None, :, :]
    dist = np.linalg.norm(r, axis=-1)
    mind = float(dist.min())
    if mind < 1e-9:
        raise FramingError("companion meets the curve")
    cross = np.cross(dx[:, None, :], dy[None, :, :])
    integrand = np.sum(r * cross, axis=-1) / dist ** 3
    val = float(integrand.sum() / M ** 2 / (4 * np.pi))
    k = int(round(val))
    return LinkingResult(val, k, val - k, mind)


def linking_integral(curve: LoopCurve, eps: float | None = None, points: int | None = None,
                     config: NumericConfig = DEFAULT) -> LinkingResult:
    """Linking number of the curve with its framing companion."""
    comp = curve.companion(eps, config)
    res = gauss_linking(curve, comp, points, config)
    if res.min_distance < 0.5 * (eps if eps is not None else config.framing_eps * curve.diameter()):
        raise FramingError("framing companion comes too close to the curve")
    return res


def circle(radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> Callable:
    c = np.asarray(center, dtype=float)
    return lambda t: c + radius * np.array([math.cos(2 * math.pi * t), math.sin(2 * math.pi * t), 0.0])


def hopf_framed_circle(samples: int = 256, twists: int = 1) -> LoopCurve:
    """Unit circle whose framing winds ``twists`` times around it."""
    def f(t):
        return np.array([math.cos(2 * math.pi * t), math.sin(2 * math.pi * t), 0.0])

    def nu(t):
        radial = np.array([math.cos(2 * math.pi * t), math.sin(2 * math.pi * t), 0.0])
        ez = np.array([0.0, 0.0, 1.0])
        a = 2 * math.pi * twists * t
        return math.cos(a) * radial - math.sin(a) * ez

    return LoopCurve.from_function(f, samples, nu, name=f"framed-circle-{twists}")
