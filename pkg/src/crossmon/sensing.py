"""Passive detection pipeline: alignment search, magnitude estimation and
reconstruction of the rotation vector from qubit dynamics alone.

The alignment search only ever sees a scalar objective built from the
oscillation spectrum (the weight left outside the dominant peak), so the
rotation vector enters the search exclusively through observables.  Once
aligned, the magnitude follows from where the spectral gap closes along
the coupling-radius ray, and the direction from inverting the coupled-mode
geometry at the solved angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import dynamics
from .model import (
    CouplingVector,
    DeviceParams,
    coupled_mode_direction,
    direction_to_angles,
    eigendecompose,
    reduced_hamiltonian,
)

__all__ = [
    "AlignmentSearchError",
    "ScanRangeError",
    "GapClosureError",
    "SearchSettings",
    "ScanSettings",
    "NoiseModel",
    "AlignmentSolution",
    "MagnitudeEstimate",
    "SensingResult",
    "hybridization_measure",
    "find_alignment",
    "estimate_magnitude",
    "estimate_R",
]

TWO_PI = 2.0 * math.pi
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class AlignmentSearchError(RuntimeError):
    """Search budget exhausted; carries the best point found so far."""

    def __init__(self, message: str, best: tuple[float, float, float]):
        super().__init__(message)
        self.best = best  # (theta, phi, measure)


class ScanRangeError(ValueError):
    """No interior gap minimum inside the scanned radius range."""

    def __init__(self, message: str, min_gap: float, at_rms: float):
        super().__init__(message)
        self.min_gap = min_gap
        self.at_rms = at_rms


class GapClosureError(RuntimeError):
    """Gap minimum found but it does not close to tolerance."""

    def __init__(self, message: str, min_gap: float, at_rms: float):
        super().__init__(message)
        self.min_gap = min_gap
        self.at_rms = at_rms


@dataclass(frozen=True)
class SearchSettings:
    """Grid-then-refine controls for the alignment search."""

    theta_points: int = 25
    phi_points: int = 49
    refine_tol: float = 1e-9
    refine_sweeps: int = 8
    window_shrink: float = 0.35
    max_evaluations: int = 50_000


@dataclass(frozen=True)
class ScanSettings:
    """Radius scan controls for the gap-closure magnitude estimate."""

    rms_min: float = 0.01
    rms_max: float = 0.5
    points: int = 64
    xtol: float = 1e-10
    closure_tol: float = 1e-6


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian noise on the sampled population, with the series
    and detection settings used for the spectrum-based objective."""

    std: float
    seed: int = 0
    t_max: float = 2000.0
    samples: int = 16384
    fft_threshold: float = 1e-4


@dataclass(frozen=True)
class AlignmentSolution:
    theta: float
    phi: float
    measure: float
    evaluations: int


@dataclass(frozen=True)
class MagnitudeEstimate:
    rms: float
    gap: float
    evaluations: int


@dataclass(frozen=True)
class SensingResult:
    """Outcome of the full pipeline.

    ``r_estimate`` is the canonical-orientation representative (first
    nonzero component among z, x, y made positive): the aligned spectrum is
    identical for antipodal rotation vectors, so only this representative
    is recoverable, which still decides the time-reversal verdict since
    |R_y| is orientation-free.
    """

    aligned_theta: float
    aligned_phi: float
    r_magnitude: float
    r_estimate: tuple[float, float, float]
    r_y_estimate: float
    trs_broken: bool
    trs_threshold: float
    secondary_peak_weight: float
    gap_at_closure: float
    search_evaluations: int
    scan_evaluations: int


# ---------------------------------------------------------------------------
# observable objective
# ---------------------------------------------------------------------------

def hybridization_measure(
    device: DeviceParams, peaks: Optional[dynamics.PeakList] = None
) -> float:
    """Total spectral weight outside the single dominant oscillation peak.

    Zero exactly when one frequency carries the whole signal, which is the
    aligned (bright-state decoupled) situation.  An externally measured
    peak list may be supplied instead of the model spectrum.
    """
    if device.coupling.rho <= 0.0:
        raise ValueError(
            "hybridization measure is undefined at zero coupling strength"
        )
    if peaks is None:
        peaks = dynamics.analytic_spectrum(
            eigendecompose(reduced_hamiltonian(device))
        )
    if not peaks.peaks:
        return 0.0
    w = peaks.weights
    return float(np.sum(w) - np.max(w))


def _with_direction(base: DeviceParams, theta: float, phi: float) -> DeviceParams:
    cpl = CouplingVector.from_polar(base.coupling.rho, theta, phi)
    return replace(base, coupling=cpl)


def _noisy_measure(
    base: DeviceParams, theta: float, phi: float, noise: NoiseModel, rng
) -> float:
    device = _with_direction(base, theta, phi)
    d = eigendecompose(reduced_hamiltonian(device))
    dt = noise.t_max / noise.samples
    series = dynamics.population_series(d, noise.t_max - dt / 2.0, dt)
    values = series.values + rng.normal(0.0, noise.std, size=len(series.values))
    noisy = dynamics.TimeSeries(times=series.times, values=values)
    peaks = dynamics.fft_spectrum(noisy, rel_threshold=noise.fft_threshold)
    return hybridization_measure(device, peaks)


# ---------------------------------------------------------------------------
# derivative-free minimizers
# ---------------------------------------------------------------------------

def _golden_min(
    f: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float, int]:
    """Golden-section minimum of a unimodal function on [a, b]."""
    evals = 0
    h = b - a
    c = b - _INV_PHI * h
    d = a + _INV_PHI * h
    fc, fd = f(c), f(d)
    evals += 2
    while h > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - _INV_PHI * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INV_PHI * h
            fd = f(d)
        evals += 1
    x = 0.5 * (a + b)
    return x, min(fc, fd), evals


def _minimize_direction(
    measure: Callable[[float, float], float], search: SearchSettings
) -> tuple[float, float, float, int]:
    """Coarse grid over directions followed by coordinate golden-section.

    ``measure`` is the only access to the device: the search never sees the
    rotation vector itself.
    """
    evals = 0
    grid_size = search.theta_points * search.phi_points
    if grid_size + 4 > search.max_evaluations:
        raise AlignmentSearchError(
            f"grid of {grid_size} points exceeds budget {search.max_evaluations}",
            (0.0, 0.0, math.inf),
        )
    thetas = np.arange(search.theta_points) * (math.pi / search.theta_points)
    phis = np.arange(search.phi_points) * (TWO_PI / search.phi_points)
    best_val, best_th, best_ph = math.inf, 0.0, 0.0
    for th in thetas:
        for ph in phis:
            val = measure(th, ph)
            evals += 1
            if val < best_val:
                best_val, best_th, best_ph = val, float(th), float(ph)

    th, ph = best_th, best_ph
    w_th = math.pi / search.theta_points
    w_ph = TWO_PI / search.phi_points
    for _ in range(search.refine_sweeps):
        if evals + 200 > search.max_evaluations:
            raise AlignmentSearchError(
                f"refinement exceeded budget {search.max_evaluations}",
                (th, ph, measure(th, ph)),
            )
        th, _, used = _golden_min(
            lambda x: measure(x, ph), th - w_th, th + w_th, search.refine_tol
        )
        evals += used
        ph, _, used = _golden_min(
            lambda x: measure(th, x), ph - w_ph, ph + w_ph, search.refine_tol
        )
        evals += used
        w_th = max(w_th * search.window_shrink, search.refine_tol)
        w_ph = max(w_ph * search.window_shrink, search.refine_tol)
    return th, ph, measure(th, ph), evals + 1


def _canonical_direction(n: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    for component in (n[2], n[0], n[1]):
        if component > tol:
            return n
        if component < -tol:
            return -n
    return n


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------

def find_alignment(
    base: DeviceParams,
    search: SearchSettings = SearchSettings(),
    noise: Optional[NoiseModel] = None,
) -> AlignmentSolution:
    """Locate the coupling direction that leaves a single oscillation peak.

    Returns the canonical representative (coupled-mode polar angle in
    [0, pi], so theta in [0, pi/2]); the antipodal direction minimizes the
    objective equally well and maps to the same physics.
    """
    if base.coupling.rho <= 0.0:
        raise ValueError("alignment search needs a nonzero coupling strength")
    if noise is not None and noise.std > 0.0:
        rng = np.random.default_rng(noise.seed)

        def measure(th, ph):
            return _noisy_measure(base, th, ph, noise, rng)

    else:

        def measure(th, ph):
            return hybridization_measure(_with_direction(base, th, ph))

    th, ph, _, evals = _minimize_direction(measure, search)
    n = _canonical_direction(coupled_mode_direction(th, ph))
    th_c, ph_c = direction_to_angles(n)
    final = measure(th_c, ph_c)
    return AlignmentSolution(theta=th_c, phi=ph_c, measure=final, evaluations=evals + 1)


def estimate_magnitude(
    base: DeviceParams,
    theta: float,
    phi: float,
    scan: ScanSettings = ScanSettings(),
) -> MagnitudeEstimate:
    """Radius at which the smallest spectral gap closes along the aligned ray.

    Scans the rms radius for a bracketed interior minimum, sharpens it by
    golden section, and checks the gap actually closes; at alignment the
    closure radius equals the rotation-vector magnitude.
    """
    if not (0.0 <= scan.rms_min < scan.rms_max):
        raise ValueError(f"invalid scan range [{scan.rms_min}, {scan.rms_max}]")
    if scan.points < 3:
        raise ValueError("scan needs at least 3 points to bracket a minimum")

    def gap_at(rms: float) -> float:
        cpl = CouplingVector.from_polar(rms, theta, phi, radius_is_rms=True)
        lam = np.linalg.eigvalsh(reduced_hamiltonian(replace(base, coupling=cpl)))
        return float(min(lam[1] - lam[0], lam[2] - lam[1]))

    grid = np.linspace(scan.rms_min, scan.rms_max, scan.points)
    gaps = np.array([gap_at(r) for r in grid])
    evals = scan.points
    k = int(np.argmin(gaps))
    if k == 0 or k == scan.points - 1:
        edge = "lower" if k == 0 else "upper"
        raise ScanRangeError(
            f"no interior gap minimum in rms range [{scan.rms_min}, {scan.rms_max}]"
            f" (smallest gap {gaps[k]:.3e} sits at the {edge} edge);"
            " widen the scan range",
            min_gap=float(gaps[k]),
            at_rms=float(grid[k]),
        )
    rms, gap, used = _golden_min(gap_at, float(grid[k - 1]), float(grid[k + 1]), scan.xtol)
    gap = gap_at(rms)
    evals += used + 1
    if gap > scan.closure_tol:
        raise GapClosureError(
            f"gap does not close along the scanned ray: minimum {gap:.3e} at"
            f" rms = {rms:.6g} exceeds tolerance {scan.closure_tol:.1e}"
            " (angles are likely off alignment)",
            min_gap=gap,
            at_rms=rms,
        )
    return MagnitudeEstimate(rms=rms, gap=gap, evaluations=evals)


def estimate_R(
    base: DeviceParams,
    search: SearchSettings = SearchSettings(),
    scan: ScanSettings = ScanSettings(),
    trs_threshold: Optional[float] = None,
    noise: Optional[NoiseModel] = None,
) -> SensingResult:
    """Full pipeline: align, close the gap, reconstruct R, judge symmetry.

    The reconstructed vector is the closure radius times the coupled-mode
    direction at the solved angles; ``trs_broken`` reports whether its y
    component exceeds the threshold (default ``1e-6 * omega0``).
    """
    if trs_threshold is None:
        trs_threshold = 1e-6 * base.omega0
    alignment = find_alignment(base, search, noise)
    magnitude = estimate_magnitude(base, alignment.theta, alignment.phi, scan)
    n = _canonical_direction(coupled_mode_direction(alignment.theta, alignment.phi))
    r_est = magnitude.rms * n
    r_y = float(r_est[1])
    return SensingResult(
        aligned_theta=alignment.theta,
        aligned_phi=alignment.phi,
        r_magnitude=magnitude.rms,
        r_estimate=(float(r_est[0]), r_y, float(r_est[2])),
        r_y_estimate=r_y,
        trs_broken=bool(abs(r_y) > trs_threshold),
        trs_threshold=float(trs_threshold),
        secondary_peak_weight=alignment.measure,
        gap_at_closure=magnitude.gap,
        search_evaluations=alignment.evaluations,
        scan_evaluations=magnitude.evaluations,
    )
