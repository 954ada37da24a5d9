"""Cross-validation of the reduced model against the Fock-space oracle.

Every check here pits two independent computational routes against each
other: exact sector eigenvalues vs the 3x3 model, closed-form population vs
brute-force evolution, algebraic identities of the spin operators, the
gap-closure locus vs the rotation-vector magnitude, and the two routes to
the quantum metric.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

import numpy as np

from . import hilbert
from .config import Config
from .dynamics import analytic_spectrum, excited_population
from .metric import quantum_metric
from .model import (
    CouplingVector,
    DeviceParams,
    RotationVector,
    alignment_angles,
    bright_state_residual,
    eigendecompose,
    reduced_hamiltonian,
)
from .sensing import ScanSettings, estimate_magnitude

__all__ = ["random_device", "validation_report"]


def random_device(
    rng: np.random.Generator,
    omega0: float,
    *,
    r_max: float = 0.5,
    rho_max: float = 0.5,
) -> DeviceParams:
    """Resonant device with uniform rotation-vector direction and coupling."""
    mag = rng.uniform(0.0, r_max)
    theta0 = rng.uniform(0.0, 2.0 * math.pi)
    phi0 = math.acos(rng.uniform(-1.0, 1.0))
    rho = rng.uniform(0.0, rho_max)
    theta = rng.uniform(0.0, math.pi / 2.0)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return DeviceParams.at_resonance(
        omega0,
        RotationVector(mag, theta0, phi0),
        CouplingVector.from_polar(rho, theta, phi),
    )


def _oracle_population(device: DeviceParams, basis, times: np.ndarray) -> np.ndarray:
    h = hilbert.build_full_hamiltonian(device, basis)
    psi0 = basis.unit_vector((0, 0, hilbert.QUBIT_E))
    traj = hilbert.evolve_state(h, psi0, times)
    return np.abs(traj @ psi0.conj()) ** 2


def _commutator_defect(basis) -> float:
    ops = hilbert.spin_operators(basis)
    sx, sy, sz = ops["S_x"], ops["S_y"], ops["S_z"]
    worst = 0.0
    for a, b, c in ((sx, sy, sz), (sy, sz, sx), (sz, sx, sy)):
        defect = a @ b - b @ a - 1j * c
        worst = max(worst, float(np.max(np.abs(defect))))
    return worst


def _leakage(device: DeviceParams, n_max: int, times: np.ndarray) -> float:
    basis = hilbert.build_fock_basis(n_max)
    h = hilbert.build_full_hamiltonian(device, basis)
    psi0 = basis.unit_vector((0, 0, hilbert.QUBIT_E))
    span = [
        basis.index_of(lab)
        for lab in ((0, 0, hilbert.QUBIT_E), (1, 0, hilbert.QUBIT_G), (0, 1, hilbert.QUBIT_G))
    ]
    traj = hilbert.evolve_state(h, psi0, times)
    outside = np.ones(basis.dim, dtype=bool)
    outside[span] = False
    return float(np.sqrt(np.max(np.sum(np.abs(traj[:, outside]) ** 2, axis=1))))


def validation_report(config: Config) -> dict:
    """Seeded oracle-comparison report; deterministic for a fixed config."""
    v = config.validation
    rng = np.random.default_rng(v.seed)
    omega0 = config.device.omega0
    basis1 = hilbert.build_fock_basis(v.n_max, sector=1)

    eig_resid = 0.0
    rho_e_resid = 0.0
    q_vs_var = 0.0
    q_vs_rho2 = 0.0
    for _ in range(v.trials):
        device = random_device(rng, omega0)
        h_full = hilbert.build_full_hamiltonian(device, basis1)
        lam_full = np.linalg.eigvalsh(h_full)
        dressed = eigendecompose(reduced_hamiltonian(device))
        eig_resid = max(eig_resid, float(np.max(np.abs(lam_full - dressed.lambdas))))

        t_end = 1e3 / max(device.coupling.rho, 0.1)
        times = np.linspace(0.0, t_end, v.t_samples)
        closed = np.asarray(excited_population(dressed, times))
        oracle = _oracle_population(device, basis1, times)
        rho_e_resid = max(rho_e_resid, float(np.max(np.abs(closed - oracle))))

        sample = quantum_metric(dressed, device.coupling)
        q_vs_var = max(q_vs_var, abs(sample.Q - sample.energy_variance))
        q_vs_rho2 = max(q_vs_rho2, abs(sample.Q - device.coupling.rho**2))

    # operator algebra and conservation at the configured truncation
    commutator_defect = max(
        _commutator_defect(hilbert.build_fock_basis(v.n_max, sector=n))
        for n in range(1, v.n_max + 1)
    )
    conservation_device = random_device(rng, omega0)
    basis_full = hilbert.build_fock_basis(v.n_max)
    h_full = hilbert.build_full_hamiltonian(conservation_device, basis_full)
    n_op = hilbert.total_excitation_operator(basis_full)
    conservation_defect = float(np.max(np.abs(h_full @ n_op - n_op @ h_full)))
    leak_times = np.linspace(0.0, 500.0, 200)
    leakage = max(
        _leakage(random_device(rng, omega0), v.n_max, leak_times) for _ in range(5)
    )

    # degeneracy locus along the aligned ray: closure radius vs |R|
    locus_resid = 0.0
    locus_gap = 0.0
    bright_resid = 0.0
    dark_overlap = 0.0
    extra_peaks = 0
    for _ in range(v.degeneracy_trials):
        mag = rng.uniform(0.05, 0.4)
        rvec = RotationVector(
            mag, rng.uniform(0.0, 2.0 * math.pi), math.acos(rng.uniform(-1.0, 1.0))
        )
        theta, phi = alignment_angles(rvec)
        device = DeviceParams.at_resonance(
            omega0, rvec, CouplingVector.from_polar(0.3 * mag, theta, phi)
        )
        bright_resid = max(bright_resid, bright_state_residual(device))
        dressed = eigendecompose(reduced_hamiltonian(device))
        dark_overlap = max(dark_overlap, float(np.min(dressed.weights)))
        peaks = analytic_spectrum(dressed)
        if len(peaks.peaks) != 1:
            extra_peaks += 1
        scan = ScanSettings(
            rms_min=0.2 * mag, rms_max=1.8 * mag, points=48, xtol=1e-11
        )
        est = estimate_magnitude(device, theta, phi, scan)
        locus_resid = max(locus_resid, abs(est.rms - mag))
        locus_gap = max(locus_gap, est.gap)

    checks = {
        "sector1_eigenvalue_residual": {"value": eig_resid, "tolerance": 1e-12},
        "population_closed_vs_oracle": {"value": rho_e_resid, "tolerance": 1e-10},
        "metric_vs_energy_variance": {"value": q_vs_var, "tolerance": 1e-12},
        "metric_vs_rho_squared": {"value": q_vs_rho2, "tolerance": 1e-12},
        "spin_commutator_defect": {"value": commutator_defect, "tolerance": 1e-13},
        "excitation_conservation_defect": {
            "value": conservation_defect,
            "tolerance": 1e-13,
        },
        "three_level_leakage": {"value": leakage, "tolerance": 1e-12},
        "gap_closure_radius_vs_magnitude": {"value": locus_resid, "tolerance": 1e-8},
        "gap_at_closure": {"value": locus_gap, "tolerance": 1e-8},
        "bright_residual_at_alignment": {"value": bright_resid, "tolerance": 1e-12},
        "dark_state_overlap": {"value": dark_overlap, "tolerance": 1e-20},
        "aligned_single_peak_misses": {"value": float(extra_peaks), "tolerance": 0.5},
    }
    for entry in checks.values():
        entry["pass"] = bool(entry["value"] <= entry["tolerance"])

    return {
        "trials": v.trials,
        "degeneracy_trials": v.degeneracy_trials,
        "n_max": v.n_max,
        "seed": v.seed,
        "checks": checks,
        "all_pass": bool(all(entry["pass"] for entry in checks.values())),
        "notes": [
            "the gap-closure radius in rms units coincides with |R| "
            "(equivalently rho = sqrt(2) |R|), reconciling the two radius "
            "conventions for the coupling ball",
            "metric components stay bounded with the total pinned at rho^2; "
            "per-pair extrema sharpen but do not diverge as the gap closes",
        ],
    }
