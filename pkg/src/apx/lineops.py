"""Second-order linear operators: formal adjoints, the conjunct boundary
form, Fredholm solvability, Sturm-Liouville eigenproblems and
eigenfunction-expansion solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BracketError, NoSolutionError
from .numkit import Polynomial, eig_sym_tridiag, find_root, quad


@dataclass(frozen=True)
class OperatorCoeffs:
    """Operator a(x) u'' + b(x) u' + c(x) u with Robin end conditions
    alpha u + beta u' = 0 (bc tuples may be omitted for formal work)."""

    a: Polynomial
    b: Polynomial
    c: Polynomial
    domain: tuple = (0.0, 1.0)
    bc_left: Optional[tuple] = None
    bc_right: Optional[tuple] = None

    def __post_init__(self):
        x0, x1 = self.domain
        xs = np.linspace(x0, x1, 1024)
        if np.any(np.abs(self.a(xs)) == 0.0):
            raise ValueError("leading coefficient a(x) vanishes on the domain")
        for bc in (self.bc_left, self.bc_right):
            if bc is not None and bc[0] == 0.0 and bc[1] == 0.0:
                raise ValueError("boundary condition (0, 0) is not admissible")


def formal_adjoint(op: OperatorCoeffs) -> OperatorCoeffs:
    """Formal adjoint coefficients: (a v)'' - (b v)' + c v expands to
    a v'' + (2a' - b) v' + (a'' - b' + c) v."""
    da = op.a.derivative()
    return OperatorCoeffs(
        a=op.a,
        b=da.scale(2.0) - op.b,
        c=da.derivative() - op.b.derivative() + op.c,
        domain=op.domain,
    )


def is_formally_self_adjoint(op: OperatorCoeffs, tol: float = 1e-12) -> bool:
    adj = formal_adjoint(op)
    return (op.a.allclose(adj.a, tol) and op.b.allclose(adj.b, tol)
            and op.c.allclose(adj.c, tol))


def conjunct(op: OperatorCoeffs, u, du, v, dv, at: float) -> float:
    """Bilinear concomitant J(u, v) = a v u' - (a v)' u + u v b at a point."""
    a = op.a(at)
    ap = op.a.derivative()(at)
    return (a * v(at) * du(at)
            - (ap * v(at) + a * dv(at)) * u(at)
            + u(at) * v(at) * op.b(at))


def inner(f, g, x0: float, x1: float, weight=None, n: int = 2048) -> float:
    """Real inner product <f, g> = int f g (w) dx by composite Simpson."""
    if weight is None:
        return quad(lambda x: np.asarray(f(x)) * np.asarray(g(x)), x0, x1, n)
    return quad(lambda x: np.asarray(weight(x)) * np.asarray(f(x)) * np.asarray(g(x)),
                x0, x1, n)


def fredholm_check(f, nullspace_v, weight, domain, n: int = 2048):
    """Solvability of Lu = f against a normalized adjoint null function.

    Returns (inner product, solvable) where solvable means the projection
    is below 1e-8 in magnitude.
    """
    x0, x1 = domain
    norm = inner(nullspace_v, nullspace_v, x0, x1, weight, n)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"null function is not normalized: |v|^2 = {norm!r}")
    ip = inner(f, nullspace_v, x0, x1, weight, n)
    return ip, abs(ip) < 1e-8


# ---------------------------------------------------------------------------
# Sturm-Liouville eigenproblems


@dataclass(frozen=True)
class DirichletLaplace:
    """-u'' = lambda u on [0, l] with u(0) = u(l) = 0."""

    l: float = 1.0


@dataclass(frozen=True)
class RobinExample:
    """-u'' = lambda u on [0, 1] with u(0) = 0 and u(1) + u'(1) = 0."""

    l: float = 1.0


@dataclass
class EigenSet:
    lambdas: np.ndarray
    weight: Callable
    eigfuncs: list
    norm_constants: np.ndarray
    domain: tuple


def robin_roots(n_max: int, scan_step: float = math.pi / 16.0) -> np.ndarray:
    """First ``n_max`` positive roots of s + tan(s) = 0, one per interval
    ((k - 1/2) pi, (k + 1/2) pi); scans in small steps and brackets sign
    changes while stepping around the tangent poles."""
    f = lambda s: s + math.tan(s)
    roots = []
    k = 1
    while len(roots) < n_max:
        lo = (k - 0.5) * math.pi + 1e-6
        hi = (k + 0.5) * math.pi - 1e-6
        s = lo
        found = None
        while s < hi:
            s2 = min(s + scan_step, hi)
            if f(s) * f(s2) < 0:
                found = find_root(f, (s, s2), tol=1e-14)
                break
            s = s2
        if found is None:
            raise BracketError(f"no root of s + tan s in ({lo:.6g}, {hi:.6g})")
        roots.append(found)
        k += 1
    return np.array(roots)


def sl_eigen(problem, n_max: int) -> EigenSet:
    """Eigenvalues and normalized eigenfunctions for the catalog problems."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if isinstance(problem, DirichletLaplace):
        l = problem.l
        ns = np.arange(1, n_max + 1)
        lambdas = (ns * math.pi / l) ** 2
        const = math.sqrt(2.0 / l)
        funcs = [
            (lambda n: (lambda x: const * np.sin(n * math.pi * np.asarray(x) / l)))(n)
            for n in ns
        ]
        return EigenSet(
            lambdas=lambdas.astype(float),
            weight=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            eigfuncs=funcs,
            norm_constants=np.full(n_max, const),
            domain=(0.0, l),
        )
    if isinstance(problem, RobinExample):
        s = robin_roots(n_max)
        lambdas = s * s
        consts = np.sqrt(2.0 / (1.0 + np.cos(s) ** 2))
        funcs = [
            (lambda sn, cn: (lambda x: cn * np.sin(sn * np.asarray(x))))(sn, cn)
            for sn, cn in zip(s, consts)
        ]
        return EigenSet(
            lambdas=lambdas,
            weight=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            eigfuncs=funcs,
            norm_constants=consts,
            domain=(0.0, problem.l),
        )
    raise TypeError(f"unknown Sturm-Liouville problem {problem!r}")


def robin_fd_eigenvalues(n_grid: int = 2000, count: int = 5) -> np.ndarray:
    """Grid oracle for the Robin problem: second-order finite differences of
    -u'' on [0, 1] with u(0) = 0 and a ghost-node Robin row at x = 1,
    symmetrized by a diagonal similarity transform."""
    h = 1.0 / n_grid
    m = n_grid  # interior nodes 1..n-1 plus the boundary node at x = 1
    diag = np.full(m, 2.0 / h**2)
    off = np.full(m - 1, -1.0 / h**2)
    # Robin row at x = 1: ghost u_{N+1} = u_{N-1} - 2 h u_N makes the row
    # [-2/h^2, (2 + 2h)/h^2]; the diagonal similarity uses sqrt(2) off it.
    diag[-1] = (2.0 + 2.0 * h) / h**2
    off[-1] = -math.sqrt(2.0) / h**2
    return eig_sym_tridiag(diag, off, value_range=(0.0, ((count + 1.5) * math.pi) ** 2))[:count]


# ---------------------------------------------------------------------------
# expansion solver


class ExpansionSolution:
    """Truncated eigenfunction-expansion solution of L u = mu r u + f."""

    def __init__(self, eigs: EigenSet, b: np.ndarray, c: np.ndarray,
                 non_unique: bool, skipped: list):
        self._eigs = eigs
        self.b = b
        self.c = c
        self.non_unique = non_unique
        self.skipped = skipped

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for cn, fn in zip(self.c, self._eigs.eigfuncs):
            if cn != 0.0:
                out = out + cn * fn(x)
        return out


def expansion_solve(eigs: EigenSet, f, mu: float, n_terms: int,
                    quad_n: int = 2048) -> ExpansionSolution:
    """Solve via c_n = <f, u_n> / (lambda_n - mu) over the retained modes.

    A mode with lambda_n within 1e-10 of mu raises if its projection is
    nonzero (no solution); otherwise the mode is dropped and the result is
    flagged non-unique.
    """
    n_terms = min(n_terms, len(eigs.eigfuncs))
    x0, x1 = eigs.domain
    b = np.zeros(n_terms)
    c = np.zeros(n_terms)
    non_unique = False
    skipped = []
    for i in range(n_terms):
        b[i] = inner(f, eigs.eigfuncs[i], x0, x1, None, quad_n)
        gap = eigs.lambdas[i] - mu
        if abs(gap) <= 1e-10:
            if abs(b[i]) > 1e-8:
                raise NoSolutionError(
                    f"mu = {mu!r} hits lambda_{i + 1} with nonzero projection {b[i]!r}")
            non_unique = True
            skipped.append(i)
            continue
        c[i] = b[i] / gap
    return ExpansionSolution(eigs, b, c, non_unique, skipped)
