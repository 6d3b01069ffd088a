import math

import numpy as np
import pytest

from apx import patstab
from apx.errors import BlowUpError
from apx.patstab import (CwPlusNoise, FisherKolmogorov, InstabilityType,
                         KuramotoSivashinsky, NlsCw, NoisyUniform,
                         SechOperator, SolitonParams, classify_instability,
                         envelope_residual, envelope_residual_scaled,
                         growth_rate, kmax_band, lpm_spectrum,
                         measure_dominant_k, opo_threshold,
                         sech_operator_apply, simulate,
                         soliton_decay_experiment, wavenumbers)


# ---------------------------------------------------------------------------
# dispersion relations


def test_fk_growth_at_zero():
    assert growth_rate(FisherKolmogorov(mu=1.0), 0.0) == pytest.approx(1.0)


def test_ks_growth_and_kmax():
    m = KuramotoSivashinsky(mu=0.005)
    assert growth_rate(m, 10.0) == pytest.approx(100.0 - 0.005 * 1e4)
    assert kmax_band(m).k_max == pytest.approx(1.0 / math.sqrt(0.01))


def test_nls_band_edge():
    assert growth_rate(NlsCw(mu=1.0, A=1.0), 2.0) == pytest.approx(0.0, abs=1e-14)
    band = kmax_band(NlsCw(mu=1.0, A=1.0))
    assert band.k_max == pytest.approx(math.sqrt(2.0))
    assert band.band == pytest.approx((0.0, 2.0))


def test_ks_band():
    band = kmax_band(KuramotoSivashinsky(mu=0.4))
    assert band.k_max == pytest.approx(1.0 / math.sqrt(0.8))
    assert band.band[1] == pytest.approx(1.0 / math.sqrt(0.4))


def test_fk_shifted_branch_stable():
    m = FisherKolmogorov(mu=1.0, u0=1.0)
    assert not kmax_band(m).unstable
    k = np.linspace(0.0, 3.0, 31)
    assert np.all(growth_rate(m, k) < 0)


def test_growth_is_even_in_k():
    models = [FisherKolmogorov(1.0), KuramotoSivashinsky(0.4), NlsCw(1.0, 1.0)]
    k = np.linspace(0.1, 3.0, 17)
    for m in models:
        assert np.allclose(growth_rate(m, k), growth_rate(m, -k), atol=0.0)


def test_classify_instability_table():
    assert classify_instability(1.0, 0.0) is InstabilityType.TYPE_IS
    assert classify_instability(0.0, 2.0) is InstabilityType.TYPE_IIIO
    assert classify_instability(0.0, 0.0) is InstabilityType.TYPE_IIIS
    assert classify_instability(1.0, 1.0) is InstabilityType.TYPE_IIO


# ---------------------------------------------------------------------------
# simulators


def test_soliton_shape_invariant():
    res = simulate(NlsCw(mu=1.0, A=1.0), SolitonParams(eta=1.0),
                   L=16.0 * math.pi, n=1024, t_end=10.0, dt=1e-3,
                   record_every=1.0)
    x = res.final.x
    expected = 1.0 / np.cosh(x)
    assert np.max(np.abs(np.abs(res.final.values) - expected)) <= 1e-6


def test_nls_norm_conservation():
    res = simulate(NlsCw(mu=1.0, A=1.0), SolitonParams(eta=1.0),
                   L=16.0 * math.pi, n=1024, t_end=10.0, dt=1e-3,
                   record_every=5.0)
    h = res.final.L / res.final.n
    norm_end = h * np.sum(np.abs(res.final.values) ** 2)
    assert norm_end == pytest.approx(2.0, rel=1e-8)  # int sech^2 = 2 eta


@pytest.mark.filterwarnings("ignore:overflow", "ignore:invalid value")
def test_ks_blows_up_for_negative_mu():
    with pytest.raises(BlowUpError):
        simulate(KuramotoSivashinsky(mu=-0.01), NoisyUniform(1e-3),
                 L=8.0 * math.pi, n=256, t_end=5.0, dt=1e-3, record_every=0.1)


def test_real_models_stay_real():
    res = simulate(FisherKolmogorov(mu=1.0), NoisyUniform(1e-3),
                   L=20.0 * math.pi, n=256, t_end=5.0, dt=0.01,
                   record_every=1.0)
    assert np.max(np.abs(np.imag(res.final.values))) <= 1e-10


def test_simulate_validates_inputs():
    with pytest.raises(ValueError):
        simulate(NlsCw(), SolitonParams(), L=10.0, n=100, t_end=1.0)
    with pytest.raises(ValueError):
        simulate(NlsCw(), SolitonParams(), L=10.0, n=128, t_end=-1.0)


# ---------------------------------------------------------------------------
# spectrum measurement


def test_synthetic_growth_recovered():
    # inject exp(sigma t) on one bin of a synthetic series
    L, n = 16.0 * math.pi, 256
    k = wavenumbers(L, n)
    times = np.linspace(0.0, 4.0, 21)
    mags = np.full((times.size, n), 1e-6)
    j = 17
    sigma = 0.8
    mags[:, j] = 1e-3 * np.exp(sigma * times)
    series = patstab.SpectrumSeries(times=times, k=k, mags=mags)
    meas = measure_dominant_k(series, (0.0, 4.0), min_start_mag=1e-7)
    assert meas.k_hat == pytest.approx(abs(k[j]), abs=1e-12)
    assert meas.slope == pytest.approx(sigma, rel=0.01)


def test_saturated_window_flagged():
    L, n = 16.0 * math.pi, 256
    k = wavenumbers(L, n)
    times = np.linspace(0.0, 10.0, 51)
    mags = np.full((times.size, n), 1e-6)
    mags[:, 9] = np.minimum(1e-3 * np.exp(times), 0.5)  # saturates at 0.5
    series = patstab.SpectrumSeries(times=times, k=k, mags=mags)
    meas = measure_dominant_k(series, (8.0, 10.0), min_start_mag=1e-7)
    assert not meas.reliable
    early = measure_dominant_k(series, (0.0, 3.0), min_start_mag=1e-7)
    assert early.reliable


def test_window_validation():
    series = patstab.SpectrumSeries(times=np.linspace(0, 1, 5),
                                    k=wavenumbers(2 * math.pi, 8),
                                    mags=np.ones((5, 8)))
    with pytest.raises(ValueError):
        measure_dominant_k(series, (0.5, 2.0))


# ---------------------------------------------------------------------------
# MI end-to-end (smaller/faster variants of the acceptance runs)


@pytest.fixture(scope="module")
def nls_mi_run():
    return simulate(NlsCw(mu=1.0, A=1.0), CwPlusNoise(1.0, 1e-3, band_factor=1.5),
                    L=16.0 * math.pi, n=1024, t_end=6.5, seed=12345, dt=1e-3,
                    record_every=0.1)


def test_nls_mi_dominant_bin(nls_mi_run):
    meas = measure_dominant_k(nls_mi_run.spectrum, (1.2, 2.7), min_start_mag=3e-4)
    dk = 2.0 * math.pi / (16.0 * math.pi)
    assert abs(meas.k_hat - math.sqrt(2.0)) <= dk + 1e-12
    theory = growth_rate(NlsCw(1.0, 1.0), meas.k_hat)
    assert abs(meas.slope - theory) / theory <= 0.15


def test_ks_mi_dominant_bin():
    res = simulate(KuramotoSivashinsky(mu=0.4), NoisyUniform(1e-3),
                   L=8.0 * math.pi, n=2048, t_end=40.0, seed=12345, dt=0.01,
                   record_every=0.5)
    meas = measure_dominant_k(res.spectrum, (2.0, 7.0), min_start_mag=3e-4)
    dk = 0.25
    k_th = 1.0 / math.sqrt(0.8)
    assert abs(meas.k_hat - k_th) <= dk + 1e-12
    theory = growth_rate(KuramotoSivashinsky(0.4), meas.k_hat)
    assert abs(meas.slope - theory) / theory <= 0.15


def test_fk_mi_zero_adjacent_bin_dominates():
    res = simulate(FisherKolmogorov(mu=1.0), NoisyUniform(1e-3),
                   L=20.0 * math.pi, n=1024, t_end=6.0, seed=12345, dt=0.01,
                   record_every=0.25)
    meas = measure_dominant_k(res.spectrum, (1.25, 2.75), min_start_mag=3e-4)
    assert meas.k_hat == pytest.approx(0.1, abs=1e-9)  # first nonzero bin


def test_spectral_convergence_one_bin():
    # doubling n leaves the measured dominant bin in place
    hats = []
    for n in (512, 1024):
        res = simulate(NlsCw(mu=1.0, A=1.0), CwPlusNoise(1.0, 1e-3),
                       L=16.0 * math.pi, n=n, t_end=4.5, seed=12345, dt=1e-3,
                       record_every=0.25)
        meas = measure_dominant_k(res.spectrum, (1.0, 3.0), min_start_mag=3e-4)
        hats.append(meas.k_hat)
    assert abs(hats[0] - hats[1]) <= 0.125 + 1e-12


@pytest.mark.xfail(strict=True,
                   reason="multi-domain endstate: frozen walls exclude ~45% "
                          "of grid points from the 0.01 neighborhoods of the "
                          "two branches on L = 20 pi (see decisions ledger)")
def test_fk_branch_fraction_claim():
    res = simulate(FisherKolmogorov(mu=1.0), NoisyUniform(1e-3),
                   L=20.0 * math.pi, n=1024, t_end=40.0, seed=12345, dt=0.01,
                   record_every=5.0)
    u = np.real(res.final.values)
    frac = np.mean((np.abs(u - 1.0) < 0.01) | (np.abs(u + 1.0) < 0.01))
    assert frac > 0.99


def test_fk_branch_selection_pointwise():
    # honest version: away from the O(1)-width walls, every point sits on a
    # branch; the two branches are the only attractors seen
    res = simulate(FisherKolmogorov(mu=1.0), NoisyUniform(1e-3),
                   L=20.0 * math.pi, n=1024, t_end=40.0, seed=12345, dt=0.01,
                   record_every=5.0)
    u = np.real(res.final.values)
    on_branch = (np.abs(u - 1.0) < 0.01) | (np.abs(u + 1.0) < 0.01)
    frac = float(np.mean(on_branch))
    assert frac > 0.5
    assert np.max(np.abs(u)) <= 1.01  # never overshoots the branches
    # points off the branches lie on monotone wall profiles connecting them
    walls = np.nonzero(~on_branch)[0]
    assert walls.size < 0.5 * u.size


# ---------------------------------------------------------------------------
# soliton slow flow


@pytest.fixture(scope="module")
def damped_soliton():
    return soliton_decay_experiment(1.0, 0.05, 10.0)


def test_soliton_decay_rate(damped_soliton):
    res = damped_soliton
    assert res.predicted == pytest.approx(-0.1)
    assert abs(res.rate - res.predicted) / abs(res.predicted) <= 0.05


def test_soliton_decay_rate_zero_damping():
    res = soliton_decay_experiment(0.0, 0.05, 5.0)
    assert abs(res.rate) <= 1e-4


@pytest.mark.xfail(strict=True,
                   reason="peak-tracked endpoint ratio carries the O(eps "
                          "gamma) dressing of the damped pulse (~6.5% here); "
                          "the fitted rate is the 5%-accurate quantity "
                          "(see decisions ledger)")
def test_soliton_endpoint_ratio_claim(damped_soliton):
    res = damped_soliton
    assert abs(res.amplitude_ratio - math.exp(-1.0)) / math.exp(-1.0) <= 0.05


def test_soliton_fitted_ratio(damped_soliton):
    res = damped_soliton
    fitted_ratio = math.exp(res.rate * 10.0)
    assert abs(fitted_ratio - math.exp(-1.0)) / math.exp(-1.0) <= 0.05


# ---------------------------------------------------------------------------
# sech-potential spectra


def test_lminus_spectrum():
    spec = lpm_spectrum(SechOperator.L_MINUS)
    assert spec.discrete.size == 1
    assert abs(spec.discrete[0]) <= 1e-3
    assert abs(spec.continuum_edge - (-1.0)) <= 1e-2


def test_lplus_spectrum():
    spec = lpm_spectrum(SechOperator.L_PLUS)
    assert spec.discrete.size == 2
    assert abs(spec.discrete[0]) <= 1e-3
    assert abs(spec.discrete[1] - 3.0) <= 1e-3
    assert abs(spec.continuum_edge - (-1.0)) <= 1e-2


def test_lplus_generalized_mode_identity():
    # L+ (z sech z tanh z - sech z) = -2 sech z; the sign is fixed by direct
    # algebra (s = sech, t = tanh: g'' = 6s^3 - 3s - 6 z s^3 t + z s t, and
    # (6 s^2 - 1) g cancels all but -2s) and confirmed on the grid.  The
    # magnitude matches the printed identity; its sign does not (see ledger).
    z = np.linspace(-15.0, 15.0, 3001)
    f = lambda s: s / np.cosh(s) * np.tanh(s) - 1.0 / np.cosh(s)
    got = sech_operator_apply(SechOperator.L_PLUS, f, z)
    expected = -2.0 / np.cosh(z)
    interior = (np.abs(z) < 12.0)
    rel = np.max(np.abs(got[interior] - expected[interior])) / np.max(np.abs(expected))
    assert rel <= 1e-3


def test_lplus_sech_squared_eigenvalue_sign():
    # grid arbitration of the printed sign: L+ sech^2 = +3 sech^2
    z = np.linspace(-15.0, 15.0, 3001)
    f = lambda s: 1.0 / np.cosh(s) ** 2
    got = sech_operator_apply(SechOperator.L_PLUS, f, z)
    interior = (np.abs(z) < 12.0)
    rel = np.max(np.abs(got[interior] - 3.0 * f(z[interior]))) / 3.0
    assert rel <= 1e-3


# ---------------------------------------------------------------------------
# envelope equation and threshold


def test_envelope_residual_zero_on_solution():
    xi = np.linspace(-10.0, 10.0, 801)
    assert envelope_residual(1.0, xi) <= 1e-12
    assert envelope_residual(0.25, xi) <= 1e-12


def test_envelope_residual_detects_wrong_amplitude():
    xi = np.linspace(-10.0, 10.0, 801)
    res = envelope_residual_scaled(1.0, 1.1, xi)
    assert 0.01 <= res <= 1.0


def test_opo_threshold_values():
    assert opo_threshold(1.0, 0.0, 0.0).abs_S_c == pytest.approx(1.0)
    assert opo_threshold(1.0, 1.0, 0.0).abs_S_c == pytest.approx(math.sqrt(2.0))


def test_opo_stability_flag_and_pump():
    th = opo_threshold(1.0, 0.5, 0.25)
    assert th.signal_stable(0.5 * th.abs_S_c)
    assert not th.signal_stable(1.5 * th.abs_S_c)
    S = 0.5
    pump = th.steady_pump(S)
    assert pump == pytest.approx(S / (1.0 + 0.25j))
