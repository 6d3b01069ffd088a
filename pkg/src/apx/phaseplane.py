"""Equilibria, Jacobians and linearized classification for small autonomous
systems, plus the model catalog (pendulum, predator-prey, Hopf exemplar,
Lorenz) and their closed-form local solutions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .numkit import OdeSystem, eig2

log = logging.getLogger(__name__)


class Kind(Enum):
    NODAL_SINK = "nodal-sink"
    NODAL_SOURCE = "nodal-source"
    SADDLE = "saddle"
    PROPER_NODE = "proper-node"
    IMPROPER_NODE = "improper-node"
    SPIRAL_STABLE = "spiral-stable"
    SPIRAL_UNSTABLE = "spiral-unstable"
    CENTER = "center"
    DEGENERATE = "degenerate"


class Stability(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    NEUTRALLY_STABLE = "neutrally-stable"
    UNDETERMINED = "undetermined"


@dataclass
class Equilibrium:
    point: np.ndarray
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    kind: Optional[Kind] = None
    stability: Optional[Stability] = None


@dataclass
class ModelCatalogEntry:
    name: str
    system: OdeSystem
    known_equilibria: list
    params: dict


def jacobian(sys: OdeSystem, point) -> np.ndarray:
    """Central finite-difference Jacobian, step 1e-6 * max(1, |x_i|)."""
    x = np.asarray(point, dtype=float)
    params = np.asarray(sys.params, dtype=float)
    jac = np.zeros((sys.dim, sys.dim))
    for i in range(sys.dim):
        h = 1e-6 * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        jac[:, i] = (np.asarray(sys.rhs(0.0, xp, params)) -
                     np.asarray(sys.rhs(0.0, xm, params))) / (2.0 * h)
    return jac


def classify(jac) -> tuple[Kind, Stability]:
    """Classify a 2x2 Jacobian into the five linear phase-plane cases.

    Real-part and equal-root thresholds are scaled by the matrix norm;
    a (near-)zero eigenvalue that is not part of an imaginary pair is
    flagged Degenerate rather than forced into a case.
    """
    jac = np.asarray(jac, dtype=float)
    pair = eig2(jac)
    l1, l2 = pair.values
    scale = max(float(np.linalg.norm(jac)), 1e-300)
    tol = 1e-10 * scale
    if abs(l1.imag) > tol:  # complex pair
        re = l1.real
        if abs(re) < tol:
            return Kind.CENTER, Stability.NEUTRALLY_STABLE
        if re < 0:
            return Kind.SPIRAL_STABLE, Stability.STABLE
        return Kind.SPIRAL_UNSTABLE, Stability.UNSTABLE
    a, b = l1.real, l2.real
    if abs(a) < tol or abs(b) < tol:
        return Kind.DEGENERATE, Stability.UNDETERMINED
    if a * b < 0:
        return Kind.SADDLE, Stability.UNSTABLE
    if abs(a - b) > 1e-7 * scale:  # distinct, same sign
        if a < 0:
            return Kind.NODAL_SINK, Stability.STABLE
        return Kind.NODAL_SOURCE, Stability.UNSTABLE
    # double real root: proper vs improper by rank of (J - lam I)
    lam = 0.5 * (a + b)
    sv = np.linalg.svd(jac - lam * np.eye(2), compute_uv=False)
    rank = int(np.sum(sv > 1e-8 * scale))
    kind = Kind.PROPER_NODE if rank == 0 else Kind.IMPROPER_NODE
    return kind, Stability.STABLE if lam < 0 else Stability.UNSTABLE


def _classified_equilibrium(sys: OdeSystem, x: np.ndarray) -> Equilibrium:
    jac = jacobian(sys, x)
    if sys.dim == 2:
        vals = eig2(jac).values
        kind, stab = classify(jac)
    else:
        vals = np.sort_complex(np.linalg.eigvals(jac))[::-1]
        kind, stab = None, _nd_stability(vals, jac)
    return Equilibrium(point=x, jacobian=jac, eigenvalues=vals, kind=kind, stability=stab)


def _nd_stability(vals, jac) -> Stability:
    tol = 1e-10 * max(float(np.linalg.norm(jac)), 1e-300)
    re = np.real(vals)
    if np.all(re < -tol):
        return Stability.STABLE
    if np.any(re > tol):
        return Stability.UNSTABLE
    return Stability.NEUTRALLY_STABLE


def find_equilibria(sys: OdeSystem, seeds: Sequence) -> list[Equilibrium]:
    """Damped Newton from each seed; merges duplicates within 1e-8 and skips
    seeds that fail to converge in 100 iterations (logged)."""
    params = np.asarray(sys.params, dtype=float)
    found: list[np.ndarray] = []
    for seed in seeds:
        x = np.asarray(seed, dtype=float).copy()
        ok = False
        for _ in range(100):
            r = np.asarray(sys.rhs(0.0, x, params), dtype=float)
            if np.linalg.norm(r) <= 1e-10:
                ok = True
                break
            jac = jacobian(sys, x)
            try:
                step = np.linalg.solve(jac, -r)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(jac, r, rcond=None)[0]
            lam = 1.0
            base = np.linalg.norm(r)
            for _ in range(40):
                trial = x + lam * step
                if np.linalg.norm(sys.rhs(0.0, trial, params)) < base:
                    break
                lam *= 0.5
            x = x + lam * step
        if not ok:
            log.warning("find_equilibria: seed %s did not converge, skipped", seed)
            continue
        if all(np.linalg.norm(x - p) > 1e-8 for p in found):
            found.append(x)
    return [_classified_equilibrium(sys, x) for x in found]


# ---------------------------------------------------------------------------
# model catalog


def pendulum(omega: float = 1.0, gamma: float = 0.0) -> ModelCatalogEntry:
    """x' = y, y' = -omega^2 sin x - gamma y."""
    w2 = omega * omega

    def rhs(t, s, p):
        return np.array([s[1], -w2 * math.sin(s[0]) - gamma * s[1]])

    eq = [np.array([n * math.pi, 0.0]) for n in range(-2, 3)]
    return ModelCatalogEntry(
        name="pendulum",
        system=OdeSystem(dim=2, rhs=rhs),
        known_equilibria=eq,
        params={"omega": omega, "gamma": gamma},
    )


def lotka_volterra(a: float = 1.0, c: float = 1.0, alpha: float = 1.0) -> ModelCatalogEntry:
    """Prey x' = a x - alpha x y, predator y' = -c y + alpha x y."""

    def rhs(t, s, p):
        return np.array([a * s[0] - alpha * s[0] * s[1],
                         -c * s[1] + alpha * s[0] * s[1]])

    eq = [np.array([0.0, 0.0]), np.array([c / alpha, a / alpha])]
    return ModelCatalogEntry(
        name="lotka-volterra",
        system=OdeSystem(dim=2, rhs=rhs),
        known_equilibria=eq,
        params={"a": a, "c": c, "alpha": alpha},
    )


def hopf_exemplar(mu: float = 1.0) -> ModelCatalogEntry:
    """x' = -y + (mu - r^2) x, y' = x + (mu - r^2) y."""

    def rhs(t, s, p):
        r2 = s[0] * s[0] + s[1] * s[1]
        return np.array([-s[1] + (mu - r2) * s[0], s[0] + (mu - r2) * s[1]])

    return ModelCatalogEntry(
        name="hopf",
        system=OdeSystem(dim=2, rhs=rhs),
        known_equilibria=[np.array([0.0, 0.0])],
        params={"mu": mu},
    )


def lorenz(sigma: float = 10.0, b: float = 8.0 / 3.0, r: float = 28.0) -> ModelCatalogEntry:
    def rhs(t, s, p):
        return np.array([sigma * (s[1] - s[0]),
                         r * s[0] - s[1] - s[2] * s[0],
                         -b * s[2] + s[0] * s[1]])

    eq = [np.zeros(3)]
    if r > 1:
        q = math.sqrt(b * (r - 1))
        eq += [np.array([q, q, r - 1]), np.array([-q, -q, r - 1])]
    return ModelCatalogEntry(
        name="lorenz",
        system=OdeSystem(dim=3, rhs=rhs),
        known_equilibria=eq,
        params={"sigma": sigma, "b": b, "r": r},
    )


CATALOG = {
    "pendulum": pendulum,
    "lotka-volterra": lotka_volterra,
    "hopf": hopf_exemplar,
    "lorenz": lorenz,
}


# ---------------------------------------------------------------------------
# closed-form local solutions


def lv_orbit(a: float, c: float, alpha: float, K: float, phi: float, t):
    """Near-center predator-prey orbit: populations a quarter cycle apart.

    x = c/alpha (1 + K cos(sqrt(ac) t + phi)),
    y = a/alpha (1 + sqrt(c/a) K sin(sqrt(ac) t + phi)).
    """
    w = math.sqrt(a * c)
    x = c / alpha + (c / alpha) * K * np.cos(w * np.asarray(t) + phi)
    y = a / alpha + (a / alpha) * math.sqrt(c / a) * K * np.sin(w * np.asarray(t) + phi)
    return x, y


def hopf_radius(mu: float, r0: float, t):
    """Radial solution of r' = mu r - r^3 from r(0) = r0."""
    if r0 < 0:
        raise ValueError("r0 must be nonnegative")
    t = np.asarray(t, dtype=float)
    if r0 == 0.0:
        return np.zeros_like(t) if t.shape else 0.0
    r02 = r0 * r0
    if mu == 0.0:
        r2 = r02 / (1.0 + 2.0 * r02 * t)
    else:
        r2 = mu * r02 / (r02 + (mu - r02) * np.exp(-2.0 * mu * t))
    out = np.sqrt(r2)
    return out if out.shape else float(out)


def lorenz_pitchfork_check(sigma: float, b: float, eps: float):
    """Pitchfork amplitude of the reduced slow flow vs the rescaled Lorenz
    fixed point at r = 1 + eps^2.

    Returns (equilibrium amplitude of the slow flow, (x + y)/(2 eps) at the
    Lorenz fixed point); the two agree identically for eps > 0.
    """
    if b <= 0:
        raise ValueError("b must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    a_star = math.sqrt(b)
    if eps == 0.0:
        return a_star, 0.0
    r = 1.0 + eps * eps
    x = math.sqrt(b * (r - 1.0))
    amplitude = (x + x) / (2.0 * eps)
    return a_star, amplitude
