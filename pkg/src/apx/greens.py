"""Delta-function sequences and sifting, two-branch Green's function
construction for second-order problems, solution by quadrature, and the
modified (null-space-aware) Green's function for double-Neumann problems."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import ResonanceError, UnsolvableError
from .numkit import quad


class DeltaKind(Enum):
    STEP = "step"
    ALGEBRAIC = "algebraic"
    GAUSSIAN = "gaussian"
    SINC = "sinc"


@dataclass(frozen=True)
class DeltaSequence:
    """One member of a delta-function family with width parameter xi."""

    kind: DeltaKind
    xi: float

    def __post_init__(self):
        if self.xi <= 0:
            raise ValueError("xi must be positive")

    def __call__(self, x, x0: float = 0.0):
        x = np.asarray(x, dtype=float)
        s = x - x0
        xi = self.xi
        if self.kind is DeltaKind.STEP:
            return np.where(np.abs(s) < xi, 1.0 / (2.0 * xi), 0.0)
        if self.kind is DeltaKind.ALGEBRAIC:
            return 1.0 / (math.pi * xi) / (1.0 + (s / xi) ** 2)
        if self.kind is DeltaKind.GAUSSIAN:
            return np.exp(-((s / xi) ** 2)) / (math.sqrt(math.pi) * xi)
        # sinc family xi/pi * sin^2(s/xi) / s^2, continuous at s = 0
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (xi / math.pi) * np.sin(s / xi) ** 2 / s**2
        return np.where(s == 0.0, 1.0 / (math.pi * xi), val)


def impulse(seq: DeltaSequence, domain, n: int = 16384) -> float:
    """Integral of the sequence member over the domain (exact for the step
    family, composite Simpson otherwise)."""
    x0, x1 = domain
    if seq.kind is DeltaKind.STEP:
        overlap = max(0.0, min(x1, seq.xi) - max(x0, -seq.xi))
        return overlap / (2.0 * seq.xi)
    return quad(lambda x: seq(x), x0, x1, n)


def sift(f, x0: float, seq: DeltaSequence, domain=None, n: int = 16384) -> float:
    """Smoothed point evaluation int f(x) delta_xi(x - x0) dx."""
    if seq.kind is DeltaKind.STEP:
        lo, hi = x0 - seq.xi, x0 + seq.xi
        return quad(lambda x: np.asarray(f(x), dtype=float), lo, hi, 512) / (2.0 * seq.xi)
    if domain is None:
        domain = (x0 - 10.0 * seq.xi, x0 + 10.0 * seq.xi)
    return quad(lambda x: np.asarray(f(x), dtype=float) * seq(x, x0),
                domain[0], domain[1], n)


# ---------------------------------------------------------------------------
# Green's functions


class JumpConvention(Enum):
    """Sign convention for the impulse problem the kernel solves.

    PLUS_LAPLACIAN: the equation is written with a plus leading term
    (u'' + ... = delta), derivative jump +1/p at the impulse.
    SL_MINUS_FORM: the equation is -(p u')' + q u = delta, jump -1/p.
    """

    PLUS_LAPLACIAN = "plus-laplacian"
    SL_MINUS_FORM = "sl-minus-form"


@dataclass
class GreensFunction:
    """Two-branch kernel G(x, xi): ``left`` is valid for x < xi and
    ``right`` for x > xi; ``jump`` gives the derivative jump at x = xi."""

    left: Callable[[np.ndarray, np.ndarray], np.ndarray]
    right: Callable[[np.ndarray, np.ndarray], np.ndarray]
    p: Callable
    jump: Callable[[float], float]
    domain: tuple

    def __call__(self, x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return np.where(x < xi, self.left(x, xi), self.right(x, xi))

    def continuity_gap(self, xi: float) -> float:
        return float(abs(self.left(np.asarray(xi), np.asarray(xi))
                         - self.right(np.asarray(xi), np.asarray(xi))))

    def jump_gap(self, xi: float, h: float = 1e-5) -> float:
        """Defect between the one-sided derivative jump and the declared
        jump, via fourth-order one-sided stencils."""
        xi = float(xi)
        w = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12.0 * h)
        right = sum(wi * self.right(xi + i * h, xi) for i, wi in enumerate(w))
        left = -sum(wi * self.left(xi - i * h, xi) for i, wi in enumerate(w))
        return float(abs((right - left) - self.jump(xi)))


def build_green_sl(p, y1, dy1, y2, dy2, convention: JumpConvention,
                   domain) -> GreensFunction:
    """Assemble the kernel from homogeneous solutions satisfying the left
    (y1) and right (y2) boundary conditions:

        G(x, xi) = y1(x) y2(xi) / (p(xi) W(xi))   for x < xi

    (roles swapped for x > xi), negated for the minus-form convention.
    Raises if p W vanishes anywhere sampled on the interior (resonance:
    a single homogeneous solution satisfies both boundary conditions).
    """
    x0, x1 = domain
    pw = lambda s: np.asarray(p(s)) * (np.asarray(y1(s)) * np.asarray(dy2(s))
                                       - np.asarray(dy1(s)) * np.asarray(y2(s)))
    interior = np.linspace(x0, x1, 66)[1:-1]
    vals = np.abs(pw(interior))
    scale = max(float(np.max(vals)), 1e-300)
    if float(np.min(vals)) < 1e-12 * scale or float(np.max(vals)) == 0.0:
        raise ResonanceError("p W vanishes on the interior; the homogeneous "
                             "problem is resonant")
    sign = 1.0 if convention is JumpConvention.PLUS_LAPLACIAN else -1.0

    def left(x, xi):
        return sign * np.asarray(y1(x)) * np.asarray(y2(xi)) / pw(xi)

    def right(x, xi):
        return sign * np.asarray(y1(xi)) * np.asarray(y2(x)) / pw(xi)

    def jump(xi):
        return sign / float(np.asarray(p(xi)))

    return GreensFunction(left=left, right=right, p=p, jump=jump, domain=domain)


def apply_green(G: GreensFunction, f, n: int = 1024):
    """Solution operator u(x) = int f(xi) G(xi, x) dxi, split at x so each
    half uses the correct branch."""
    x0, x1 = G.domain

    def u(x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(xs)
        for i, xv in enumerate(xs):
            lo = quad(lambda s: np.asarray(f(s)) * G.left(s, xv), x0, xv, n) \
                if xv > x0 else 0.0
            hi = quad(lambda s: np.asarray(f(s)) * G.right(s, xv), xv, x1, n) \
                if xv < x1 else 0.0
            out[i] = lo + hi
        return out if np.ndim(x) else float(out[0])

    return u


def modified_green(l: float):
    """Symmetric modified kernel for u'' = f with u'(0) = u'(l) = 0.

    The kernel solves G_xx = delta(x - xi) - 1/l with the constant removed
    so that <G_m(., xi), 1> = 0; the sign is fixed by requiring the weak
    identity and the exact Neumann solution to hold.  Returns the kernel
    and the normalized constant null mode.
    """
    if l <= 0:
        raise ValueError("l must be positive")

    def left(x, xi):
        x, xi = np.asarray(x, dtype=float), np.asarray(xi, dtype=float)
        return xi - l / 3.0 - (x * x + xi * xi) / (2.0 * l)

    def right(x, xi):
        x, xi = np.asarray(x, dtype=float), np.asarray(xi, dtype=float)
        return x - l / 3.0 - (x * x + xi * xi) / (2.0 * l)

    G = GreensFunction(left=left, right=right, p=lambda s: np.ones_like(np.asarray(s)),
                       jump=lambda xi: 1.0, domain=(0.0, l))
    null_mode = lambda x: np.full_like(np.asarray(x, dtype=float), 1.0 / math.sqrt(l))
    return G, null_mode


def apply_modified(G: GreensFunction, f, n: int = 2048):
    """Solution operator for the double-Neumann problem; rejects forcings
    with a nonzero mean component (undetermined up to a constant)."""
    x0, x1 = G.domain
    mean = quad(lambda x: np.asarray(f(x), dtype=float), x0, x1, n) / math.sqrt(x1 - x0)
    if abs(mean) > 1e-8:
        raise UnsolvableError(f"<f, v> = {mean!r} is nonzero; no solution exists")
    return apply_green(G, f, n // 2)


# ---------------------------------------------------------------------------
# worked catalog


def catalog_example(name: str, l: float = 1.0, k: float = 1.0) -> GreensFunction:
    """Prebuilt kernels: 'ex1' (u'' = f, u(0) = 0, u'(l) = 0), 'cos'
    (u'' + k^2 u = f, Neumann ends), 'radial' ((r u')' = f, finite at 0,
    u(l) = 0), 'sl2' (u'' + 2u = f, u(0) = 0, u(1) + u'(1) = 0) and
    'modified' (double Neumann)."""
    if name == "ex1":
        return build_green_sl(
            p=lambda s: np.ones_like(np.asarray(s, dtype=float)),
            y1=lambda x: np.asarray(x, dtype=float), dy1=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            y2=lambda x: np.ones_like(np.asarray(x, dtype=float)), dy2=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            convention=JumpConvention.PLUS_LAPLACIAN, domain=(0.0, l))
    if name == "cos":
        return build_green_sl(
            p=lambda s: np.ones_like(np.asarray(s, dtype=float)),
            y1=lambda x: np.cos(k * np.asarray(x)), dy1=lambda x: -k * np.sin(k * np.asarray(x)),
            y2=lambda x: np.cos(k * (np.asarray(x) - l)), dy2=lambda x: -k * np.sin(k * (np.asarray(x) - l)),
            convention=JumpConvention.PLUS_LAPLACIAN, domain=(0.0, l))
    if name == "radial":
        return build_green_sl(
            p=lambda s: np.asarray(s, dtype=float),
            y1=lambda r: np.ones_like(np.asarray(r, dtype=float)), dy1=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            y2=lambda r: np.log(np.asarray(r, dtype=float) / l), dy2=lambda r: 1.0 / np.asarray(r, dtype=float),
            convention=JumpConvention.PLUS_LAPLACIAN, domain=(0.0, l))
    if name == "sl2":
        rt2 = math.sqrt(2.0)
        return build_green_sl(
            p=lambda s: np.ones_like(np.asarray(s, dtype=float)),
            y1=lambda x: np.sin(rt2 * np.asarray(x)),
            dy1=lambda x: rt2 * np.cos(rt2 * np.asarray(x)),
            y2=lambda x: np.sin(rt2 * (np.asarray(x) - 1.0)) - rt2 * np.cos(rt2 * (np.asarray(x) - 1.0)),
            dy2=lambda x: rt2 * np.cos(rt2 * (np.asarray(x) - 1.0)) + 2.0 * np.sin(rt2 * (np.asarray(x) - 1.0)),
            convention=JumpConvention.PLUS_LAPLACIAN, domain=(0.0, 1.0))
    if name == "modified":
        return modified_green(l)[0]
    raise KeyError(f"unknown Green's function example {name!r}")
