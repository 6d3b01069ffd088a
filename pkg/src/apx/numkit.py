"""Self-contained numerical kernel.

Adaptive Runge-Kutta integration, bracketed root finding, composite Simpson
quadrature, radix-2 FFT, symmetric tridiagonal eigensolver, 2x2 eigenpairs
and exact polynomial calculus.  Everything downstream builds on these
routines, so they are written against explicit accuracy contracts and are
pure (no shared mutable state).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BracketError, DivergedError


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial stored as ascending-degree coefficients.

    Trailing zero coefficients are stripped on construction so that
    ``degree == len(coeffs) - 1`` holds and comparisons are canonical.
    """

    coeffs: tuple = (0.0,)

    def __post_init__(self):
        c = [float(v) for v in self.coeffs] or [0.0]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((0.0,))
        return Polynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0.0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0.0] * (n - len(other.coeffs))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def scale(self, s: float) -> "Polynomial":
        return Polynomial(tuple(s * c for c in self.coeffs))

    def allclose(self, other: "Polynomial", tol: float = 1e-12) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0.0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0.0] * (n - len(other.coeffs))
        return all(abs(x - y) <= tol for x, y in zip(a, b))


def poly_diff(p: Polynomial) -> Polynomial:
    """Exact derivative of ``p``."""
    return p.derivative()


def poly_eval(p: Polynomial, x):
    """Evaluate ``p`` at ``x`` (Horner)."""
    return p(x)


# ---------------------------------------------------------------------------
# grids and ODE systems


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n + 1`` nodes on [x0, x1]."""

    x0: float
    x1: float
    n: int

    def __post_init__(self):
        if not self.x1 > self.x0:
            raise ValueError("grid requires x1 > x0")
        if self.n < 1:
            raise ValueError("grid requires n >= 1")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.n + 1)

    @property
    def spacing(self) -> float:
        return (self.x1 - self.x0) / self.n


@dataclass
class OdeSystem:
    """First-order vector ODE ``y' = rhs(t, y, params)``."""

    dim: int
    rhs: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class Trajectory:
    """Accepted integration steps: times ``t`` and states ``y`` (steps x dim)."""

    t: np.ndarray
    y: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]


# Dormand-Prince 5(4): the fifth-order solution is propagated, the embedded
# fourth-order difference drives the step controller.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = _DP_B5 - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)


def solve_ode(f, t0: float, t1: float, y0, tol: float = 1e-9,
              max_steps: int = 10_000_000) -> Trajectory:
    """Adaptive embedded 4(5) pair with PI step control on ``y' = f(t, y)``.

    The error estimate is scaled relative to ``max(|y|, |y_new|)`` per
    component (vanishing components are compared absolutely against the
    step's own update), which keeps the global relative error on smooth
    exponentials within a small multiple of ``tol``.  Both endpoints are
    hit exactly.
    """
    if t1 == t0:
        raise ValueError("t1 must differ from t0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    t = float(t0)
    y = np.array(y0, dtype=float).reshape(-1)
    direction = 1.0 if t1 > t0 else -1.0
    h = direction * min(abs(t1 - t0) / 100.0, 0.1)
    ts = [t]
    ys = [y.copy()]
    k = [None] * 7
    k[0] = np.asarray(f(t, y), dtype=float)
    prev_err = 1.0
    steps = 0
    while (t1 - t) * direction > 0:
        if (t + h - t1) * direction > 0:
            h = t1 - t
        for i in range(1, 7):
            yi = y + h * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
            k[i] = np.asarray(f(t + _DP_C[i] * h, yi), dtype=float)
        y5 = y + h * sum(b * k[j] for j, b in enumerate(_DP_B5) if b)
        err_vec = h * sum(e * k[j] for j, e in enumerate(_DP_E) if e)
        # relative per component, with a norm-proportional floor so that
        # components pinned at zero by the dynamics do not stall the step
        floor = 1e-6 * max(float(np.max(np.abs(y))), float(np.max(np.abs(y5))))
        scale = tol * (np.maximum(np.abs(y), np.abs(y5)) + floor)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(err_vec == 0.0, 0.0, np.abs(err_vec) / scale)
        ratio = np.where(np.isfinite(ratio), ratio, 1e16)
        err = float(np.sqrt(np.mean(np.square(ratio))))
        if err <= 1.0:
            t = t + h
            y = y5
            ts.append(t)
            ys.append(y.copy())
            k[0] = k[6]  # FSAL
            fac = 5.0 if err == 0.0 else 0.9 * err ** -0.14 * prev_err ** 0.08
            prev_err = max(err, 1e-10)
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h = h * min(5.0, max(0.2, fac))
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            raise DivergedError(f"step size underflow at t={t:.6g}", last_t=t)
        steps += 1
        if steps > max_steps:
            raise DivergedError(f"step budget exhausted at t={t:.6g}", last_t=t)
    return Trajectory(t=np.array(ts), y=np.array(ys))


def integrate_ivp(sys: OdeSystem, t0: float, t1: float, y0, tol: float = 1e-9) -> Trajectory:
    """Integrate an :class:`OdeSystem` from ``t0`` to ``t1``."""
    y0 = np.asarray(y0, dtype=float)
    if y0.size != sys.dim:
        raise ValueError(f"y0 has length {y0.size}, expected {sys.dim}")
    params = np.asarray(sys.params, dtype=float)
    return solve_ode(lambda t, y: sys.rhs(t, y, params), t0, t1, y0, tol)


# ---------------------------------------------------------------------------
# root finding


def find_root(f, bracket, tol: float = 1e-12) -> float:
    """Bracketed root: bisection down to a short interval, then safeguarded
    Newton with a numerical derivative.

    Robust near steep features (tan poles) because the Newton polish never
    leaves the bracket.
    """
    a, b = float(bracket[0]), float(bracket[1])
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise BracketError(f"no sign change on [{a:.6g}, {b:.6g}]")
    width_goal = max(min(1e-6, abs(b - a)), tol)
    while abs(b - a) > width_goal:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    x = 0.5 * (a + b)
    for _ in range(60):
        fx = f(x)
        if fx == 0.0:
            return x
        if fa * fx < 0:
            b, fb = x, fx
        else:
            a, fa = x, fx
        step = 1e-7 * max(1.0, abs(x))
        dfx = (f(x + step) - f(x - step)) / (2.0 * step)
        x_new = x - fx / dfx if dfx != 0.0 else 0.5 * (a + b)
        if not (min(a, b) < x_new < max(a, b)):
            x_new = 0.5 * (a + b)
        if abs(x_new - x) <= tol * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


# ---------------------------------------------------------------------------
# quadrature


def quad(f, a: float, b: float, n: int = 2048) -> float:
    """Composite Simpson rule with ``n`` panels (n even), exact through
    cubics on each panel."""
    if n < 2 or n % 2:
        raise ValueError("n must be an even integer >= 2")
    x = np.linspace(a, b, n + 1)
    try:
        fx = np.asarray(f(x), dtype=float)
        if fx.shape != x.shape:
            raise ValueError
    except Exception:
        fx = np.array([float(f(v)) for v in x])
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((b - a) / (3.0 * n) * np.dot(w, fx))


@functools.lru_cache(maxsize=32)
def _gauss_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gauss_quad(f, a: float, b: float, order: int = 48, panels: int = 1) -> float:
    """Composite Gauss-Legendre quadrature (used for phase integrals)."""
    x, w = _gauss_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        xs = mid + half * x
        try:
            fx = np.asarray(f(xs), dtype=float)
            if fx.shape != xs.shape:
                raise ValueError
        except Exception:
            fx = np.array([float(f(v)) for v in xs])
        total += half * float(np.dot(w, fx))
    return total


# ---------------------------------------------------------------------------
# 2x2 eigenpairs


@dataclass
class Eig2:
    """Eigenvalues (sorted by real part desc, then imag desc) and unit
    eigenvectors (columns) of a 2x2 real matrix."""

    values: np.ndarray
    vectors: np.ndarray


def eig2(m) -> Eig2:
    """Closed-form eigenpairs of a real 2x2 matrix."""
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise ValueError("eig2 expects a 2x2 matrix")
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    tr = a + d
    disc = complex((a - d) ** 2 + 4.0 * b * c)
    root = np.sqrt(disc)
    lam = np.array([(tr + root) / 2.0, (tr - root) / 2.0])
    order = sorted(range(2), key=lambda i: (-lam[i].real, -lam[i].imag))
    lam = lam[order]
    vecs = np.zeros((2, 2), dtype=complex)
    for i, lv in enumerate(lam):
        # rows of (M - lam I) are both proportional to the left annihilator;
        # pick the candidate with the larger norm for accuracy
        v1 = np.array([b, lv - a])
        v2 = np.array([lv - d, c])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        nv = np.linalg.norm(v)
        if nv == 0.0:  # multiple of identity
            v = np.array([1.0, 0.0]) if i == 0 else np.array([0.0, 1.0])
            nv = 1.0
        vecs[:, i] = v / nv
    return Eig2(values=lam, vectors=vecs)


# ---------------------------------------------------------------------------
# symmetric tridiagonal eigensolver


def _sturm_counts(d: np.ndarray, e2: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Number of eigenvalues below each shift (Sturm sequence count)."""
    m = shifts.size
    count = np.zeros(m, dtype=np.int64)
    q = np.full(m, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for i in range(d.size):
            q = d[i] - shifts - (e2[i] / q if i else 0.0)
            q = np.where(np.isnan(q), -1e-300, q)
            q = np.where(np.abs(q) < 1e-300, -1e-300, q)
            count += q < 0
    return count


def _tridiag_solve_pivot(d, e, rhs):
    """Solve (T) w = rhs for tridiagonal T with partial pivoting."""
    n = d.size
    a = np.zeros(n)  # subdiag of working rows
    b = d.astype(float).copy()
    c = np.r_[e.astype(float), 0.0].copy()
    f = np.zeros(n)  # fill-in two above diagonal
    x = rhs.astype(float).copy()
    low = np.r_[e.astype(float), 0.0]
    for i in range(n - 1):
        if abs(low[i]) > abs(b[i]):
            # swap row i and i+1
            b[i], low[i] = low[i], b[i]
            c[i], b[i + 1] = b[i + 1], c[i]
            f[i], c[i + 1] = c[i + 1], f[i]
            x[i], x[i + 1] = x[i + 1], x[i]
        if b[i] == 0.0:
            b[i] = 1e-300
        m = low[i] / b[i]
        b[i + 1] -= m * c[i]
        c[i + 1] -= m * f[i]
        x[i + 1] -= m * x[i]
    w = np.zeros(n)
    if b[-1] == 0.0:
        b[-1] = 1e-300
    w[-1] = x[-1] / b[-1]
    if n >= 2:
        w[-2] = (x[-2] - c[-2] * w[-1]) / (b[-2] if b[-2] else 1e-300)
    for i in range(n - 3, -1, -1):
        w[i] = (x[i] - c[i] * w[i + 1] - f[i] * w[i + 2]) / (b[i] if b[i] else 1e-300)
    return w


def eig_sym_tridiag(diag, off, vectors: bool = False, value_range=None):
    """Eigenvalues (ascending) of a symmetric tridiagonal matrix by bisection
    on Sturm counts; eigenvectors on request via inverse iteration.

    ``value_range=(lo, hi)`` restricts the computation to eigenvalues in the
    half-open interval (lo, hi]; the default computes the full spectrum.
    Requested eigenvectors satisfy ``|A v - lam v| <= 1e-8 |v|``.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(off, dtype=float)
    n = d.size
    if e.size != n - 1:
        raise ValueError("off-diagonal must have length len(diag) - 1")
    if n == 1:
        vals = d.copy()
        if value_range is not None:
            lo, hi = value_range
            vals = vals[(vals > lo) & (vals <= hi)]
        if vectors:
            return vals, np.ones((1, vals.size))
        return vals
    radius = np.abs(np.r_[0.0, e]) + np.abs(np.r_[e, 0.0])
    gmin = float(np.min(d - radius))
    gmax = float(np.max(d + radius))
    span = max(gmax - gmin, 1e-30)
    gmin -= 1e-12 * span
    gmax += 1e-12 * span
    e2 = np.r_[0.0, e * e]

    if value_range is None:
        first, last = 0, n - 1
    else:
        lo, hi = value_range
        first = int(_sturm_counts(d, e2, np.array([float(lo)]))[0])
        last = int(_sturm_counts(d, e2, np.array([float(hi)]))[0]) - 1
        if last < first:
            empty = np.zeros(0)
            return (empty, np.zeros((n, 0))) if vectors else empty
    targets = np.arange(first + 1, last + 2)  # 1-based eigenvalue indices
    lo_v = np.full(targets.size, gmin)
    hi_v = np.full(targets.size, gmax)
    for _ in range(80):
        mid = 0.5 * (lo_v + hi_v)
        counts = _sturm_counts(d, e2, mid)
        above = counts >= targets
        hi_v = np.where(above, mid, hi_v)
        lo_v = np.where(~above, mid, lo_v)
        if np.max(hi_v - lo_v) <= 1e-15 * max(abs(gmin), abs(gmax), 1.0):
            break
    vals = 0.5 * (lo_v + hi_v)
    if not vectors:
        return vals
    scale = max(abs(gmin), abs(gmax), 1.0)
    vecs = np.zeros((n, vals.size))
    rng = np.random.default_rng(1234)
    for j, lam in enumerate(vals):
        w = rng.normal(size=n)
        w /= np.linalg.norm(w)
        lam_j = lam + 1e-12 * scale
        for _ in range(4):
            w = _tridiag_solve_pivot(d - lam_j, e, w)
            nw = np.linalg.norm(w)
            if not np.isfinite(nw) or nw == 0.0:
                w = rng.normal(size=n)
                nw = np.linalg.norm(w)
            w /= nw
            # orthogonalize against close previous vectors (clustered pairs)
            for p in range(j - 1, -1, -1):
                if abs(vals[p] - lam) > 1e-6 * scale:
                    break
                w -= np.dot(vecs[:, p], w) * vecs[:, p]
            w /= np.linalg.norm(w)
            res = _tridiag_apply(d, e, w) - lam_j * w
            if np.linalg.norm(res) <= 1e-10 * scale:
                break
        # one Rayleigh-quotient polish of the eigenvalue
        vals[j] = float(np.dot(w, _tridiag_apply(d, e, w)))
        vecs[:, j] = w
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def _tridiag_apply(d, e, v):
    out = d * v
    out[:-1] += e * v[1:]
    out[1:] += e * v[:-1]
    return out


# ---------------------------------------------------------------------------
# radix-2 FFT


@functools.lru_cache(maxsize=16)
def _fft_plan(n: int):
    stages = []
    m = 2
    while m <= n:
        stages.append((m, np.exp(-2j * np.pi * np.arange(m // 2) / m)))
        m *= 2
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    bits = n.bit_length() - 1
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return stages, rev


def fft(values) -> np.ndarray:
    """Unnormalized forward DFT of a power-of-two-length vector
    (iterative radix-2 Cooley-Tukey)."""
    v = np.asarray(values)
    n = v.size
    if n == 0 or n & (n - 1):
        raise ValueError(f"fft length must be a power of two, got {n}")
    if n == 1:
        return v.astype(complex)
    stages, rev = _fft_plan(n)
    a = v[rev].astype(complex)
    for m, w in stages:
        a = a.reshape(-1, m)
        even = a[:, : m // 2].copy()
        tw = w * a[:, m // 2:]
        a[:, : m // 2] = even + tw
        a[:, m // 2:] = even - tw
        a = a.reshape(n)
    return a


def ifft(values) -> np.ndarray:
    """Inverse of :func:`fft` (so that ``ifft(fft(v)) == v``)."""
    v = np.asarray(values, dtype=complex)
    return np.conj(fft(np.conj(v))) / v.size
