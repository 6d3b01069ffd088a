import math

import numpy as np
import pytest

from apx.errors import ResonanceError, UnsolvableError
from apx.greens import (DeltaKind, DeltaSequence, JumpConvention, apply_green,
                        apply_modified, build_green_sl, catalog_example,
                        impulse, modified_green, sift)
from apx.numkit import quad


# ---------------------------------------------------------------------------
# delta sequences


def test_step_impulse_exact():
    seq = DeltaSequence(DeltaKind.STEP, 0.1)
    assert impulse(seq, (-1.0, 1.0)) == pytest.approx(1.0, abs=1e-15)


def test_gaussian_impulse():
    seq = DeltaSequence(DeltaKind.GAUSSIAN, 0.05)
    assert impulse(seq, (-1.0, 1.0)) == pytest.approx(1.0, abs=1e-6)


def test_sinc_impulse_slow_tails():
    seq = DeltaSequence(DeltaKind.SINC, 0.05)
    assert impulse(seq, (-20.0, 20.0)) == pytest.approx(1.0, abs=1e-2)


def test_algebraic_impulse():
    seq = DeltaSequence(DeltaKind.ALGEBRAIC, 0.05)
    # lorentzian tails decay like xi/x: generous domain, fine panels
    assert impulse(seq, (-100.0, 100.0), n=65536) == pytest.approx(1.0, abs=1e-3)


def test_sift_constant_exact_for_step():
    seq = DeltaSequence(DeltaKind.STEP, 0.3)
    c = 2.75
    got = sift(lambda x: np.full_like(np.asarray(x, dtype=float), c), 0.4, seq)
    assert got == pytest.approx(c, abs=1e-13)


def test_sift_odd_function_vanishes():
    for kind in (DeltaKind.STEP, DeltaKind.GAUSSIAN):
        seq = DeltaSequence(kind, 0.05)
        got = sift(lambda x: np.asarray(x, dtype=float), 0.0, seq)
        assert abs(got) < 1e-12, kind


def test_sift_second_order_in_width():
    f = lambda x: np.asarray(x, dtype=float) ** 2
    errs = []
    for xi in (0.1, 0.05, 0.025):
        seq = DeltaSequence(DeltaKind.STEP, xi)
        errs.append(abs(sift(f, 0.5, seq) - 0.25))
    # Richardson slope ~ 2 (error = xi^2 / 3 exactly for the step family)
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=1e-6)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=1e-6)


# ---------------------------------------------------------------------------
# kernel construction


def test_ex1_branches_match_closed_form():
    G = catalog_example("ex1")
    xs = np.linspace(0.05, 0.95, 7)
    for xi in (0.3, 0.7):
        for x in xs:
            expected = -min(x, xi)
            assert G(np.asarray(x), np.asarray(xi)) == pytest.approx(expected, abs=1e-13)


def test_cos_kernel_closed_form():
    k, l = 1.0, 1.0
    G = catalog_example("cos", l=l, k=k)
    x, xi = 0.2, 0.6
    expected = math.cos(k * x) * math.cos(k * (xi - l)) / (k * math.sin(k * l))
    assert G(np.asarray(x), np.asarray(xi)) == pytest.approx(expected, rel=1e-12)


def test_radial_kernel_closed_form():
    G = catalog_example("radial", l=1.0)
    r, rho = 0.3, 0.6
    assert G(np.asarray(r), np.asarray(rho)) == pytest.approx(math.log(rho / 1.0), rel=1e-12)
    assert G(np.asarray(rho), np.asarray(r)) == pytest.approx(math.log(rho / 1.0), rel=1e-12)


def test_resonant_problem_rejected():
    # u'' + pi^2 u with Dirichlet ends: sin(pi x) satisfies both conditions
    k = math.pi
    with pytest.raises(ResonanceError):
        build_green_sl(
            p=lambda s: np.ones_like(np.asarray(s, dtype=float)),
            y1=lambda x: np.sin(k * np.asarray(x)),
            dy1=lambda x: k * np.cos(k * np.asarray(x)),
            y2=lambda x: np.sin(k * (np.asarray(x) - 1.0)),
            dy2=lambda x: k * np.cos(k * (np.asarray(x) - 1.0)),
            convention=JumpConvention.PLUS_LAPLACIAN, domain=(0.0, 1.0))


@pytest.mark.parametrize("name", ["ex1", "cos", "radial", "sl2"])
def test_continuity_and_jump_at_random_points(name):
    G = catalog_example(name)
    x0, x1 = G.domain
    rng = np.random.default_rng(42)
    xis = x0 + (x1 - x0) * (0.02 + 0.96 * rng.random(50))
    for xi in xis:
        assert G.continuity_gap(float(xi)) <= 1e-10
        assert G.jump_gap(float(xi)) <= 1e-8


def test_modified_continuity_and_jump():
    G, _ = modified_green(1.0)
    rng = np.random.default_rng(43)
    for xi in 0.02 + 0.96 * rng.random(50):
        assert G.continuity_gap(float(xi)) <= 1e-10
        assert G.jump_gap(float(xi)) <= 1e-8


def test_sl_minus_form_convention_negates():
    Gp = catalog_example("ex1")
    Gm = build_green_sl(
        p=lambda s: np.ones_like(np.asarray(s, dtype=float)),
        y1=lambda x: np.asarray(x, dtype=float),
        dy1=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        y2=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        dy2=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        convention=JumpConvention.SL_MINUS_FORM, domain=(0.0, 1.0))
    assert Gm(np.asarray(0.3), np.asarray(0.6)) == pytest.approx(
        -Gp(np.asarray(0.3), np.asarray(0.6)))
    assert Gm.jump(0.5) == pytest.approx(-1.0)


# ---------------------------------------------------------------------------
# apply_green


def test_ex1_solution_for_linear_forcing():
    G = catalog_example("ex1")
    u = apply_green(G, lambda s: np.asarray(s, dtype=float))
    closed = lambda x: (x**2 / 2.0 - 0.5) * x - x**3 / 3.0
    for x in np.linspace(0.0, 1.0, 21):
        assert abs(u(float(x)) - closed(float(x))) <= 1e-8


def test_sl2_full_solution():
    G = catalog_example("sl2")
    u = apply_green(G, lambda s: -np.asarray(s, dtype=float))
    rt2 = math.sqrt(2.0)
    denom = math.sin(rt2) + rt2 * math.cos(rt2)
    for x in np.linspace(0.0, 1.0, 41):
        expected = math.sin(rt2 * x) / denom - x / 2.0
        assert abs(u(float(x)) - expected) <= 1e-8


def test_zero_forcing_gives_zero():
    G = catalog_example("cos")
    u = apply_green(G, lambda s: np.zeros_like(np.asarray(s, dtype=float)))
    assert u(0.37) == 0.0


def test_solution_satisfies_bvp_residual_and_bcs():
    G = catalog_example("sl2")
    u = apply_green(G, lambda s: -np.asarray(s, dtype=float))
    xs = np.linspace(0.02, 0.98, 200)
    h = 1e-3
    vals = {}
    for shift in (-2, -1, 0, 1, 2):
        vals[shift] = np.array([u(float(x + shift * h)) for x in xs])
    upp = (-vals[2] + 16 * vals[1] - 30 * vals[0] + 16 * vals[-1] - vals[-2]) / (12 * h * h)
    res = upp + 2.0 * vals[0] - (-xs)
    assert np.max(np.abs(res)) <= 1e-6
    # boundary conditions: u(0) = 0 and u(1) + u'(1) = 0
    assert abs(u(0.0)) <= 1e-8
    du1 = (u(1.0) - u(1.0 - 1e-6)) / 1e-6
    assert abs(u(1.0) + du1) <= 1e-5


def test_weak_identity_against_test_function():
    # int G(x, xi) phi''(x) dx = phi(xi) for phi sharing the BCs (ex1 problem)
    G = catalog_example("ex1")
    phi = lambda x: np.sin(math.pi * np.asarray(x) / 2.0)  # phi(0)=0, phi'(1)=0
    phi_pp = lambda x: -(math.pi / 2.0) ** 2 * np.sin(math.pi * np.asarray(x) / 2.0)
    for xi in (0.25, 0.5, 0.8):
        val = (quad(lambda s: G.left(s, xi) * phi_pp(s), 0.0, xi, 512)
               + quad(lambda s: G.right(s, xi) * phi_pp(s), xi, 1.0, 512))
        assert val == pytest.approx(math.sin(math.pi * xi / 2.0), abs=1e-9)


def test_reciprocity_self_adjoint():
    for name in ("ex1", "cos", "sl2"):
        G = catalog_example(name)
        rng = np.random.default_rng(9)
        for _ in range(20):
            a, b = 0.05 + 0.9 * rng.random(2)
            assert G(np.asarray(a), np.asarray(b)) == pytest.approx(
                G(np.asarray(b), np.asarray(a)), abs=1e-10)


# ---------------------------------------------------------------------------
# modified Green's function


def test_modified_symmetry_random_pairs():
    G, _ = modified_green(1.0)
    rng = np.random.default_rng(17)
    for _ in range(100):
        a, b = rng.random(2)
        assert G(np.asarray(a), np.asarray(b)) == pytest.approx(
            G(np.asarray(b), np.asarray(a)), abs=1e-12)


def test_modified_reproduces_neumann_solution():
    G, _ = modified_green(1.0)
    u = apply_modified(G, lambda x: np.cos(math.pi * np.asarray(x)))
    xs = np.linspace(0.0, 1.0, 101)
    got = np.array([u(float(x)) for x in xs])
    expected = -np.cos(math.pi * xs) / math.pi**2
    gap = (got - got.mean()) - (expected - expected.mean())
    assert np.max(np.abs(gap)) <= 1e-6


def test_modified_rejects_nonzero_mean():
    G, _ = modified_green(1.0)
    with pytest.raises(UnsolvableError):
        apply_modified(G, lambda x: np.ones_like(np.asarray(x, dtype=float)))


def test_modified_weak_identity():
    # int G_m(x, xi) phi''(x) dx = phi(xi) - mean(phi) for phi'(0) = phi'(1) = 0
    G, _ = modified_green(1.0)
    phi = lambda x: np.cos(math.pi * np.asarray(x))
    phi_pp = lambda x: -math.pi**2 * np.cos(math.pi * np.asarray(x))
    for xi in (0.2, 0.5, 0.9):
        val = (quad(lambda s: G.left(s, xi) * phi_pp(s), 0.0, xi, 1024)
               + quad(lambda s: G.right(s, xi) * phi_pp(s), xi, 1.0, 1024))
        assert val == pytest.approx(math.cos(math.pi * xi), abs=1e-9)


def test_modified_null_mode_normalized():
    _, v = modified_green(4.0)
    assert v(np.asarray(1.0)) == pytest.approx(0.5)
