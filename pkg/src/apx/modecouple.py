"""Square-well waveguide eigenmodes, the resonant two-level coupling
solution and its nonlinear extension, and the full PDE mode-switching
experiment driven by a time-periodic index modulation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numkit import OdeSystem, eig_sym_tridiag, fft, ifft, solve_ode


@dataclass
class WellModes:
    halfwidth: float
    n: int
    x: np.ndarray
    n0: np.ndarray
    lambdas: np.ndarray   # bound-state eigenvalues, ascending, in (-1, 0)
    modes: np.ndarray     # columns normalized to int v^2 dx = 1

    @property
    def h(self) -> float:
        return 2.0 * self.halfwidth / self.n


def index_profile(x: np.ndarray) -> np.ndarray:
    """Square-well index: -1 on |x| < 5, zero elsewhere."""
    return np.where(np.abs(x) < 5.0, -1.0, 0.0)


def well_modes(grid_halfwidth: float = 40.0, n: int = 2048) -> WellModes:
    """Bound modes of -(1/2) v'' + n0(x) v = lambda v on a periodic-ready
    grid (Dirichlet edges; the modes decay exponentially well before them).
    """
    if grid_halfwidth < 20:
        raise ValueError("grid_halfwidth must be >= 20")
    if n < 2000:
        raise ValueError("n must be >= 2000")
    h = 2.0 * grid_halfwidth / n
    x = -grid_halfwidth + h * np.arange(n)
    n0 = index_profile(x)
    diag = 1.0 / h**2 + n0
    off = np.full(n - 1, -0.5 / h**2)
    vals, vecs = eig_sym_tridiag(diag, off, vectors=True,
                                 value_range=(-1.0 + 1e-9, -1e-6))
    vecs = vecs / math.sqrt(h)  # l2-normalized -> integral-normalized
    return WellModes(halfwidth=grid_halfwidth, n=n, x=x, n0=n0,
                     lambdas=vals, modes=vecs)


def project(modes: WellModes, u: np.ndarray) -> np.ndarray:
    """Inner products <u, v_n> on the grid (trapezoid = plain sum here)."""
    return modes.h * (modes.modes.T @ u)


def mode_energies(modes: WellModes, u: np.ndarray) -> np.ndarray:
    return np.abs(project(modes, u)) ** 2


# ---------------------------------------------------------------------------
# two-level dynamics


@dataclass
class TwoLevelState:
    u: complex
    v: complex
    c: float
    Delta: float


def rabi_solution(U0: complex, c: float, Delta: float, t):
    """Closed-form resonantly coupled amplitudes from (u, v)(0) = (U0, 0):

        u = U0 [cos(Omega t) - i Delta/(2 Omega) sin(Omega t)],
        v = U0 [i c / Omega] sin(Omega t),   Omega = sqrt(c^2 + Delta^2/4).

    For c = 0 the transfer vanishes and u just accumulates detuning phase.
    """
    t = np.asarray(t, dtype=float)
    omega = math.sqrt(c * c + Delta * Delta / 4.0)
    if omega == 0.0:
        u = np.full_like(t, U0, dtype=complex)
        v = np.zeros_like(t, dtype=complex)
    else:
        u = U0 * (np.cos(omega * t) - 1j * Delta / (2.0 * omega) * np.sin(omega * t))
        v = U0 * (1j * c / omega) * np.sin(omega * t)
    if t.shape:
        return u, v
    return complex(u), complex(v)


def two_level_rhs(state_vec: np.ndarray, c: float, Delta: float, eps: float,
                  cmat: tuple) -> np.ndarray:
    """Real 4-vector form of the (possibly nonlinear) two-level system
    i u' + c v - (Delta/2) u + eps (c_jj |u|^2 + c_jk |v|^2) u = 0 and its
    partner with the opposite detuning sign."""
    c_jj, c_jk, c_kj, c_kk = cmat
    u = state_vec[0] + 1j * state_vec[1]
    v = state_vec[2] + 1j * state_vec[3]
    au, av = abs(u) ** 2, abs(v) ** 2
    du = 1j * (-Delta / 2.0 * u + c * v + eps * (c_jj * au + c_jk * av) * u)
    dv = 1j * (Delta / 2.0 * v + c * u + eps * (c_kj * au + c_kk * av) * v)
    return np.array([du.real, du.imag, dv.real, dv.imag])


def two_level_flow(state: TwoLevelState, eps: float, cmat: tuple, t: float,
                   tol: float = 1e-11) -> TwoLevelState:
    """Integrate the two-level system to time t from the given state."""
    y0 = np.array([state.u.real, state.u.imag, state.v.real, state.v.imag])
    f = lambda s, y: two_level_rhs(y, state.c, state.Delta, eps, cmat)
    traj = solve_ode(f, 0.0, t, y0, tol)
    y = traj.final
    return TwoLevelState(u=complex(y[0], y[1]), v=complex(y[2], y[3]),
                         c=state.c, Delta=state.Delta)


def rabi_matrix_oracle(U0: complex, c: float, Delta: float, t: float):
    """Independent check: exponentiate the 2x2 generator by diagonalizing
    the Hermitian coupling matrix."""
    A = np.array([[-Delta / 2.0, c], [c, Delta / 2.0]], dtype=float)
    w, V = np.linalg.eigh(A)
    U = V @ np.diag(np.exp(1j * w * t)) @ V.T
    out = U @ np.array([U0, 0.0], dtype=complex)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# PDE switching experiment


@dataclass
class SwitchResult:
    times: np.ndarray
    energies: np.ndarray   # (n_records, n_modes) projections |<u, v_n>|^2
    norm: np.ndarray       # total ||u||^2 per record
    leakage: np.ndarray    # norm - sum of bound-mode energies
    omega: float


def resonant_switch_experiment(modes: WellModes, from_mode: int = 1,
                               to_mode: int = 3, eps: float = 0.2,
                               omega: Optional[float] = None,
                               t_on: float = 0.0, t_off: float = 1000.0,
                               t_end: Optional[float] = None,
                               dt: float = 0.05,
                               record_every: float = 2.0) -> SwitchResult:
    """Split-step evolution of i u_t + (1/2) u_xx - n0 (1 + eps cos(omega t)
    during the forcing window) u = 0 from the ``from_mode`` eigenstate,
    recording bound-mode energy projections.

    The default forcing frequency is the eigenvalue difference
    lambda_from - lambda_to (resonant transfer).
    """
    if eps > 0.3:
        raise ValueError("eps must be <= 0.3 for the two-level reduction")
    if omega is None:
        omega = float(modes.lambdas[from_mode - 1] - modes.lambdas[to_mode - 1])
    if t_end is None:
        t_end = t_off
    n = modes.n
    L = 2.0 * modes.halfwidth
    k = 2.0 * math.pi / L * np.r_[np.arange(0, n // 2), np.arange(-n // 2, 0)]
    kin_half = np.exp(-1j * k**2 * dt / 4.0)
    u = modes.modes[:, from_mode - 1].astype(complex)
    steps = round(t_end / dt)
    rec = max(1, round(record_every / dt))
    times = [0.0]
    energies = [mode_energies(modes, u)]
    norms = [float(modes.h * np.sum(np.abs(u) ** 2))]
    for i in range(1, steps + 1):
        t_mid = (i - 0.5) * dt
        drive = 1.0 + (eps * math.cos(omega * t_mid)
                       if t_on <= t_mid <= t_off else 0.0)
        u = ifft(fft(u) * kin_half)
        u = u * np.exp(-1j * modes.n0 * drive * dt)
        u = ifft(fft(u) * kin_half)
        if i % rec == 0 or i == steps:
            times.append(i * dt)
            energies.append(mode_energies(modes, u))
            norms.append(float(modes.h * np.sum(np.abs(u) ** 2)))
    times = np.array(times)
    energies = np.array(energies)
    norms = np.array(norms)
    leakage = norms - energies.sum(axis=1)
    return SwitchResult(times=times, energies=energies, norm=norms,
                        leakage=leakage, omega=omega)
