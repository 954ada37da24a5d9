"""Excited-state population dynamics and its frequency-domain structure.

The closed form for the population is a sum of cosines at the dressed-state
energy differences, so the spectrum is a finite list of peaks.  The FFT
path provides the empirical counterpart for sampled (possibly noisy) series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DressedStates

__all__ = [
    "TimeSeries",
    "Peak",
    "PeakList",
    "MatchedPeak",
    "MatchReport",
    "excited_population",
    "population_series",
    "analytic_spectrum",
    "fft_spectrum",
    "match_peaks",
]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled population values starting at t = 0."""

    times: np.ndarray
    values: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


@dataclass(frozen=True)
class Peak:
    frequency: float
    weight: float


@dataclass(frozen=True)
class PeakList:
    """Spectral peaks at positive frequencies plus the DC weight.

    For an analytic list the decomposition is exact and
    ``dc_weight + 2 * sum(weights) == 1``.
    """

    dc_weight: float
    peaks: tuple[Peak, ...]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([p.frequency for p in self.peaks])

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.peaks])


def excited_population(d: DressedStates, t):
    """Closed-form qubit excited population at time(s) t.

    rho_e(t) = 1 - sum_{i>j} 4 |c_i|^2 |c_j|^2 sin^2(dlam_ij t / 2);
    equals 1 at t = 0 and stays in [0, 1].
    """
    t_arr = np.asarray(t, dtype=float)
    w = d.weights
    out = np.ones(t_arr.shape)
    for i, j, dlam in d.gap_pairs():
        out = out - 4.0 * w[i] * w[j] * np.sin(0.5 * dlam * t_arr) ** 2
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(out)
    return out


def population_series(d: DressedStates, t_max: float, dt: float) -> TimeSeries:
    """Sample the closed form on t = 0, dt, ..., up to t_max.

    Rejects sampling slower than a factor-two margin above the fastest
    oscillation (dt must stay below pi / (2 max|dlam|)).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_max < 0.0:
        raise ValueError(f"t_max must be nonnegative, got {t_max}")
    max_gap = max((abs(g) for _, _, g in d.gap_pairs()), default=0.0)
    if max_gap > 0.0:
        dt_limit = math.pi / (2.0 * max_gap)
        if dt >= dt_limit:
            raise ValueError(
                f"dt = {dt} undersamples the fastest oscillation "
                f"|dlam| = {max_gap}; need dt < {dt_limit} "
                f"(sampling rate > {1.0 / dt_limit} samples per unit time)"
            )
    count = int(math.floor(t_max / dt)) + 1
    times = np.arange(count) * dt
    return TimeSeries(times=times, values=np.asarray(excited_population(d, times)))


def analytic_spectrum(
    d: DressedStates,
    *,
    merge_tol: float | None = None,
    weight_floor: float = 1e-18,
) -> PeakList:
    """Exact peak list of the population's Fourier decomposition.

    One peak per dressed-state pair at |dlam_ij| with weight |c_i c_j|^2;
    pairs that are degenerate (within ``merge_tol``, default 1e-9 of the
    spectral scale) fold into the DC weight, and coincident frequencies
    merge with summed weights.  Pairs lighter than ``weight_floor`` are
    dropped as unobservable.
    """
    w = d.weights
    scale = float(np.max(np.abs(d.lambdas))) if len(d.lambdas) else 0.0
    tol = merge_tol if merge_tol is not None else 1e-9 * max(scale, 1e-300)
    dc = float(np.sum(w**2))
    raw: list[tuple[float, float]] = []
    for i, j, dlam in d.gap_pairs():
        weight = float(w[i] * w[j])
        freq = abs(dlam)
        if freq <= tol:
            dc += 2.0 * weight
        elif weight >= weight_floor:
            raw.append((freq, weight))
    raw.sort()
    merged: list[list[float]] = []
    for freq, weight in raw:
        if merged and freq - merged[-1][0] <= tol:
            f0, w0 = merged[-1]
            total = w0 + weight
            merged[-1] = [(f0 * w0 + freq * weight) / total, total]
        else:
            merged.append([freq, weight])
    return PeakList(dc_weight=dc, peaks=tuple(Peak(f, wt) for f, wt in merged))


def _hann_mainlobe(delta: float) -> float:
    # normalized Hann amplitude response at fractional bin offset delta
    if abs(abs(delta) - 1.0) < 1e-12:
        return 0.5
    return float(np.sinc(delta)) / (1.0 - delta * delta)


def fft_spectrum(
    series: TimeSeries,
    *,
    rel_threshold: float = 1e-3,
    window: str | None = None,
) -> PeakList:
    """Empirical peak list from the discrete Fourier transform.

    Local maxima of the magnitude spectrum above ``rel_threshold`` of the
    largest bin are reported, with parabolic interpolation refining the
    frequency and a mainlobe-shape correction recovering the weight in the
    same one-sided convention as :func:`analytic_spectrum` (a component
    ``2 w cos(omega t)`` reports weight ``w``).  ``window`` may be ``"hann"``
    for noisy series; the default rectangular window suits finite cosine
    sums.
    """
    x = np.asarray(series.values, dtype=float)
    n = len(x)
    if n < 16:
        raise ValueError(f"need at least 16 samples, got {n}")
    dt = series.dt
    if dt <= 0.0:
        raise ValueError("series must have a positive sample spacing")
    dc = float(x.mean())
    x = x - dc
    if window == "hann":
        win = np.hanning(n)
        gain = float(win.mean())
        x = x * win
    elif window is None:
        gain = 1.0
    else:
        raise ValueError(f"unknown window {window!r}")

    mag = np.abs(np.fft.rfft(x)) / (n * gain)
    if len(mag) < 3 or float(np.max(mag[1:])) == 0.0:
        return PeakList(dc_weight=dc, peaks=())
    threshold = rel_threshold * float(np.max(mag[1:]))
    bin_width = 2.0 * math.pi / (n * dt)

    inner = mag[1:-1]
    is_peak = (inner > mag[:-2]) & (inner >= mag[2:]) & (inner >= threshold)
    peaks = []
    for k in np.nonzero(is_peak)[0] + 1:
        a, b, c = mag[k - 1], mag[k], mag[k + 1]
        denom = a - 2.0 * b + c
        delta = 0.0 if denom == 0.0 else 0.5 * (a - c) / denom
        delta = float(np.clip(delta, -0.5, 0.5))
        freq = (k + delta) * bin_width
        shape = _hann_mainlobe(delta) if window == "hann" else float(np.sinc(delta))
        weight = float(b / abs(shape)) if shape != 0.0 else float(b)
        peaks.append(Peak(freq, weight))
    peaks.sort(key=lambda p: p.frequency)
    return PeakList(dc_weight=dc, peaks=tuple(peaks))


@dataclass(frozen=True)
class MatchedPeak:
    analytic: Peak
    empirical: Peak
    freq_error: float
    weight_error: float
    weight_ok: bool


@dataclass(frozen=True)
class MatchReport:
    matched: tuple[MatchedPeak, ...]
    missed: tuple[Peak, ...]     # analytic peaks with no empirical partner
    spurious: tuple[Peak, ...]   # empirical peaks with no analytic partner

    @property
    def all_weights_ok(self) -> bool:
        return all(m.weight_ok for m in self.matched)


def match_peaks(
    analytic: PeakList,
    empirical: PeakList,
    tol_freq: float,
    tol_weight: float,
) -> MatchReport:
    """Greedy nearest-frequency pairing of two peak lists.

    Pairs within ``tol_freq`` are matched closest-first; each match records
    its frequency and weight residuals and whether the weight agrees within
    ``tol_weight``.  Unpaired analytic peaks are misses, unpaired empirical
    peaks spurious.
    """
    if tol_freq <= 0.0 or tol_weight <= 0.0:
        raise ValueError("tolerances must be positive")
    cand = [
        (abs(pa.frequency - pe.frequency), ia, ie)
        for ia, pa in enumerate(analytic.peaks)
        for ie, pe in enumerate(empirical.peaks)
        if abs(pa.frequency - pe.frequency) <= tol_freq
    ]
    cand.sort()
    used_a: set[int] = set()
    used_e: set[int] = set()
    matched = []
    for dist, ia, ie in cand:
        if ia in used_a or ie in used_e:
            continue
        used_a.add(ia)
        used_e.add(ie)
        pa, pe = analytic.peaks[ia], empirical.peaks[ie]
        dw = pe.weight - pa.weight
        matched.append(
            MatchedPeak(pa, pe, pe.frequency - pa.frequency, dw, abs(dw) <= tol_weight)
        )
    matched.sort(key=lambda m: m.analytic.frequency)
    missed = tuple(p for i, p in enumerate(analytic.peaks) if i not in used_a)
    spurious = tuple(p for i, p in enumerate(empirical.peaks) if i not in used_e)
    return MatchReport(matched=tuple(matched), missed=missed, spurious=spurious)
