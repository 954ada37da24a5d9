"""Population dynamics, analytic spectrum, FFT spectrum, peak matching."""

import math

import numpy as np
import pytest

from crossmon.dynamics import (
    PeakList,
    Peak,
    TimeSeries,
    analytic_spectrum,
    excited_population,
    fft_spectrum,
    match_peaks,
    population_series,
)
from crossmon.model import (
    CouplingVector,
    DeviceParams,
    DressedStates,
    RotationVector,
    alignment_angles,
    coupled_mode_direction,
    direction_to_angles,
    eigendecompose,
    reduced_hamiltonian,
    rotation_vector_from_angles,
)
from crossmon.validation import random_device

RABI_MIN = 0.058823529411764705     # 1 - 4 rho^2 / (4 rho^2 + dz^2) = 1/17
RABI_FREQ = 0.41231056256176607     # sqrt(4 rho^2 + dz^2) = sqrt(0.17)


def aligned_device(mag=0.1, rho=0.2, theta0=1.0, phi0=0.9, omega0=5.0):
    r = rotation_vector_from_angles(mag, theta0, phi0)
    th, ph = alignment_angles(r)
    return DeviceParams.at_resonance(omega0, r, CouplingVector.from_polar(rho, th, ph))


def perpendicular_device(mag=0.1, rho=0.2, omega0=5.0):
    # coupled-mode direction orthogonal to R: the rotated vector is purely transverse
    r = RotationVector.from_cartesian(0.0, 0.0, mag)
    th, ph = direction_to_angles(np.array([1.0, 0.0, 0.0]))
    device = DeviceParams.at_resonance(omega0, r, CouplingVector.from_polar(rho, th, ph))
    assert abs(np.dot(coupled_mode_direction(th, ph), r.cartesian)) < 1e-15
    return device


def dressed(device):
    return eigendecompose(reduced_hamiltonian(device))


# --- closed-form population --------------------------------------------------

def test_population_is_one_at_t0():
    assert excited_population(dressed(aligned_device()), 0.0) == 1.0


def test_population_constant_without_coupling():
    device = DeviceParams.at_resonance(
        5.0, rotation_vector_from_angles(0.1, 0.4, 0.8), CouplingVector(0.0, 0.0)
    )
    t = np.linspace(0.0, 300.0, 500)
    assert np.allclose(excited_population(dressed(device), t), 1.0, atol=1e-14)


def test_detuned_rabi_minimum_and_frequency():
    d = dressed(aligned_device(mag=0.1, rho=0.2))
    t = np.linspace(0.0, 40.0 * 2.0 * math.pi / RABI_FREQ, 400_001)
    rho_e = excited_population(d, t)
    assert np.min(rho_e) == pytest.approx(RABI_MIN, abs=1e-9)
    peaks = analytic_spectrum(d)
    assert len(peaks.peaks) == 1
    assert peaks.peaks[0].frequency == pytest.approx(RABI_FREQ, abs=1e-12)


def test_population_range_property():
    rng = np.random.default_rng(31)
    for _ in range(25):
        d = dressed(random_device(rng, 5.0))
        values = excited_population(d, np.linspace(0.0, 500.0, 2000))
        assert np.all(values <= 1.0 + 1e-12)
        assert np.all(values >= -1e-12)


# --- sampled series ----------------------------------------------------------

def test_series_single_sample_at_zero_span():
    series = population_series(dressed(aligned_device()), 0.0, 0.1)
    assert len(series.times) == 1
    assert series.values[0] == 1.0


def test_series_oscillates_between_extremes():
    d = dressed(aligned_device(mag=0.1, rho=0.2))
    series = population_series(d, 20.0 * 2.0 * math.pi / RABI_FREQ, 0.01)
    assert np.min(series.values) == pytest.approx(RABI_MIN, abs=1e-6)
    assert np.max(series.values) == pytest.approx(1.0, abs=1e-9)


def test_series_matches_fock_oracle_pointwise():
    from crossmon import hilbert

    device = random_device(np.random.default_rng(77), 5.0)
    d = dressed(device)
    series = population_series(d, 600.0, 0.7)
    basis = hilbert.build_fock_basis(2, sector=1)
    h = hilbert.build_full_hamiltonian(device, basis)
    psi0 = basis.unit_vector((0, 0, hilbert.QUBIT_E))
    traj = hilbert.evolve_state(h, psi0, series.times)
    oracle = np.abs(traj @ psi0.conj()) ** 2
    assert np.max(np.abs(series.values - oracle)) < 1e-10


def test_series_rejects_undersampling_and_names_the_limit():
    d = dressed(aligned_device())
    max_gap = max(abs(g) for _, _, g in d.gap_pairs())
    limit = math.pi / (2.0 * max_gap)
    with pytest.raises(ValueError, match="need dt <"):
        population_series(d, 100.0, limit * 1.01)
    with pytest.raises(ValueError):
        population_series(d, 100.0, -0.1)


# --- analytic spectrum -------------------------------------------------------

def test_aligned_spectrum_has_single_peak():
    peaks = analytic_spectrum(dressed(aligned_device()))
    assert len(peaks.peaks) == 1


def test_perpendicular_spectrum_merges_to_two_peaks():
    device = perpendicular_device(mag=0.1, rho=0.2)
    peaks = analytic_spectrum(dressed(device))
    assert len(peaks.peaks) == 2
    # closed-form oracle for the symmetric transverse case
    omega = math.sqrt(0.1**2 + 0.2**2)
    s = 0.1**2 + 0.2**2
    w_low = (0.1**2) * (0.2**2) / s**2
    w_high = (0.2**4) / (4.0 * s**2)
    assert peaks.peaks[0].frequency == pytest.approx(omega, abs=1e-12)
    assert peaks.peaks[1].frequency == pytest.approx(2.0 * omega, abs=1e-12)
    assert peaks.peaks[0].weight == pytest.approx(w_low, abs=1e-12)
    assert peaks.peaks[1].weight == pytest.approx(w_high, abs=1e-12)


def test_uncoupled_spectrum_is_pure_dc():
    device = DeviceParams.at_resonance(
        5.0, rotation_vector_from_angles(0.1, 0.4, 0.8), CouplingVector(0.0, 0.0)
    )
    peaks = analytic_spectrum(dressed(device))
    assert peaks.peaks == ()
    assert peaks.dc_weight == pytest.approx(1.0, abs=1e-14)


def test_spectrum_normalization_property():
    rng = np.random.default_rng(41)
    for _ in range(50):
        peaks = analytic_spectrum(dressed(random_device(rng, 5.0)))
        total = peaks.dc_weight + 2.0 * float(np.sum(peaks.weights))
        assert abs(total - 1.0) < 1e-12


def test_gauge_invariance_under_rephasing_and_degenerate_remix():
    rng = np.random.default_rng(42)
    device = random_device(rng, 5.0)
    d = dressed(device)
    t = np.linspace(0.0, 300.0, 400)
    base_pop = excited_population(d, t)
    base_peaks = analytic_spectrum(d)

    phases = np.exp(1j * rng.uniform(0, 2 * math.pi, size=3))
    rephased = DressedStates(
        lambdas=d.lambdas.copy(),
        vectors=d.vectors * phases[None, :],
        overlaps=d.overlaps * phases,
    )
    assert np.max(np.abs(excited_population(rephased, t) - base_pop)) < 1e-12
    re_peaks = analytic_spectrum(rephased)
    assert np.allclose(re_peaks.frequencies, base_peaks.frequencies, atol=1e-15)
    assert np.allclose(re_peaks.weights, base_peaks.weights, atol=1e-15)
    assert re_peaks.dc_weight == pytest.approx(base_peaks.dc_weight, abs=1e-15)

    # exact degeneracy: remix the degenerate pair by a random unitary
    mag = 0.15
    r = rotation_vector_from_angles(mag, 0.7, 1.1)
    th, ph = alignment_angles(r)
    cpl = CouplingVector.from_polar(mag, th, ph, radius_is_rms=True)
    deg = eigendecompose(reduced_hamiltonian(DeviceParams.at_resonance(5.0, r, cpl)))
    lam = deg.lambdas
    pairs = [(i, j) for i in range(3) for j in range(i) if abs(lam[i] - lam[j]) < 1e-8]
    assert pairs, "expected a degenerate pair at rms = |R|"
    i, j = pairs[0]
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    u, _ = np.linalg.qr(z)
    vectors = deg.vectors.copy()
    vectors[:, [j, i]] = vectors[:, [j, i]] @ u
    remixed = DressedStates(
        lambdas=deg.lambdas.copy(), vectors=vectors, overlaps=vectors[0, :].copy()
    )
    t_short = np.linspace(0.0, 100.0, 300)
    assert (
        np.max(
            np.abs(
                excited_population(remixed, t_short)
                - excited_population(deg, t_short)
            )
        )
        < 1e-12
    )
    a, b = analytic_spectrum(deg), analytic_spectrum(remixed)
    assert np.allclose(a.frequencies, b.frequencies, atol=1e-9)
    assert np.allclose(a.weights, b.weights, atol=1e-12)
    assert a.dc_weight == pytest.approx(b.dc_weight, abs=1e-12)


# --- FFT spectrum ------------------------------------------------------------

def test_fft_of_constant_series_has_no_peaks():
    times = np.arange(64) * 0.1
    series = TimeSeries(times=times, values=np.full(64, 0.7))
    assert fft_spectrum(series).peaks == ()


def test_fft_rejects_short_series():
    times = np.arange(8) * 0.1
    with pytest.raises(ValueError):
        fft_spectrum(TimeSeries(times=times, values=np.ones(8)))


def test_fft_locates_rabi_peak_within_one_bin():
    d = dressed(aligned_device(mag=0.1, rho=0.2))
    t_max = 20.0 * 2.0 * math.pi / RABI_FREQ
    n = 4096
    series = population_series(d, t_max * (1.0 - 0.5 / n), t_max / n)
    assert len(series.times) == n
    peaks = fft_spectrum(series)
    bin_width = 2.0 * math.pi / (n * series.dt)
    assert len(peaks.peaks) >= 1
    best = min(peaks.peaks, key=lambda p: abs(p.frequency - RABI_FREQ))
    assert abs(best.frequency - RABI_FREQ) < bin_width
    assert best.weight == pytest.approx(np.max(peaks.weights), abs=1e-12)


def test_fft_matches_every_visible_analytic_peak():
    rng = np.random.default_rng(55)
    for _ in range(10):
        device = random_device(rng, 5.0)
        if device.coupling.rho < 0.05:
            continue
        d = dressed(device)
        analytic = analytic_spectrum(d)
        visible = [p for p in analytic.peaks if p.weight >= 1e-3]
        if not visible:
            continue
        n = 8192
        t_max = 3000.0
        series = population_series(d, t_max * (1.0 - 0.5 / n), t_max / n)
        empirical = fft_spectrum(series)
        bin_width = 2.0 * math.pi / (n * series.dt)
        report = match_peaks(
            PeakList(analytic.dc_weight, tuple(visible)),
            empirical,
            tol_freq=2.0 * bin_width,
            tol_weight=0.05,
        )
        assert not report.missed
        assert report.all_weights_ok


def test_fft_hann_window_path():
    d = dressed(aligned_device(mag=0.1, rho=0.2))
    n = 4096
    t_max = 20.0 * 2.0 * math.pi / RABI_FREQ
    series = population_series(d, t_max * (1.0 - 0.5 / n), t_max / n)
    peaks = fft_spectrum(series, window="hann")
    best = min(peaks.peaks, key=lambda p: abs(p.frequency - RABI_FREQ))
    bin_width = 2.0 * math.pi / (n * series.dt)
    assert abs(best.frequency - RABI_FREQ) < bin_width
    analytic = analytic_spectrum(d)
    assert best.weight == pytest.approx(analytic.peaks[0].weight, rel=0.05)


# --- peak matching -----------------------------------------------------------

def test_match_identical_lists():
    peaks = analytic_spectrum(dressed(perpendicular_device()))
    report = match_peaks(peaks, peaks, tol_freq=1e-9, tol_weight=1e-9)
    assert len(report.matched) == len(peaks.peaks)
    assert report.missed == () and report.spurious == ()
    assert all(m.freq_error == 0.0 and m.weight_error == 0.0 for m in report.matched)


def test_match_reports_missing_subthreshold_peak():
    analytic = PeakList(0.5, (Peak(0.3, 0.2), Peak(0.9, 5e-4)))
    empirical = PeakList(0.5, (Peak(0.3001, 0.2),))
    report = match_peaks(analytic, empirical, tol_freq=0.01, tol_weight=0.05)
    assert len(report.matched) == 1
    assert report.missed == (Peak(0.9, 5e-4),)
    assert report.spurious == ()


def test_match_aligned_case_single_pair():
    d = dressed(aligned_device(mag=0.1, rho=0.2))
    analytic = analytic_spectrum(d)
    n = 4096
    t_max = 20.0 * 2.0 * math.pi / RABI_FREQ
    series = population_series(d, t_max * (1.0 - 0.5 / n), t_max / n)
    empirical = fft_spectrum(series)
    bin_width = 2.0 * math.pi / (n * series.dt)
    report = match_peaks(analytic, empirical, 2.0 * bin_width, 0.05)
    assert len(report.matched) == 1
    assert report.missed == ()


def test_match_rejects_bad_tolerances():
    peaks = PeakList(1.0, ())
    with pytest.raises(ValueError):
        match_peaks(peaks, peaks, tol_freq=0.0, tol_weight=0.1)
