"""Quantum metric: pairwise components, variance identity, sweeps."""

import math

import numpy as np
import pytest

from crossmon.metric import MetricSample, SweepAxis, metric_sweep, quantum_metric
from crossmon.model import (
    CouplingVector,
    DeviceParams,
    RotationVector,
    alignment_angles,
    eigendecompose,
    reduced_hamiltonian,
    rotation_vector_from_angles,
)
from crossmon.validation import random_device


def dressed(device):
    return eigendecompose(reduced_hamiltonian(device))


def test_metric_vanishes_without_coupling():
    device = DeviceParams.at_resonance(
        5.0, rotation_vector_from_angles(0.1, 0.3, 0.7), CouplingVector(0.0, 0.0)
    )
    sample = quantum_metric(dressed(device))
    assert sample.Q == pytest.approx(0.0, abs=1e-15)
    assert sample.components == (0.0, 0.0, 0.0)


def test_metric_equals_energy_variance_and_rho_squared():
    rng = np.random.default_rng(61)
    for _ in range(60):
        device = random_device(rng, 5.0)
        sample = quantum_metric(dressed(device), device.coupling)
        assert abs(sample.Q - sample.energy_variance) < 1e-12
        assert abs(sample.Q - device.coupling.rho**2) < 1e-12
        assert abs(sample.Q - sum(sample.components)) < 1e-15


def test_metric_gauge_invariance_under_rephasing():
    rng = np.random.default_rng(62)
    device = random_device(rng, 5.0)
    d = dressed(device)
    base = quantum_metric(d)
    from crossmon.model import DressedStates

    phases = np.exp(1j * rng.uniform(0, 2 * math.pi, size=3))
    rephased = DressedStates(
        lambdas=d.lambdas.copy(),
        vectors=d.vectors * phases[None, :],
        overlaps=d.overlaps * phases,
    )
    other = quantum_metric(rephased)
    assert other.Q == pytest.approx(base.Q, abs=1e-14)
    assert np.allclose(sorted(other.components), sorted(base.components), atol=1e-14)


def test_single_point_sweep_equals_quantum_metric():
    device = random_device(np.random.default_rng(63), 5.0)
    cpl = device.coupling
    axes = [
        SweepAxis("rho", cpl.rho, cpl.rho, 1),
        SweepAxis("theta", cpl.theta, cpl.theta, 1),
        SweepAxis("phi", cpl.phi, cpl.phi, 1),
    ]
    [sample] = metric_sweep(device, axes)
    direct = quantum_metric(dressed(device), cpl)
    assert sample.Q == pytest.approx(direct.Q, abs=1e-14)
    assert np.allclose(sample.components, direct.components, atol=1e-14)
    assert sample.gap == pytest.approx(direct.gap, abs=1e-14)


def test_sweep_is_row_major_in_axis_order():
    device = random_device(np.random.default_rng(64), 5.0)
    axes = [SweepAxis("theta", 0.0, 1.0, 2), SweepAxis("phi", 0.0, 3.0, 3)]
    samples = metric_sweep(device, axes)
    assert len(samples) == 6
    thetas = [s.coupling.theta for s in samples]
    phis = [s.coupling.phi for s in samples]
    assert np.allclose(thetas, [0, 0, 0, 1, 1, 1], atol=1e-12)
    assert np.allclose(phis, [0, 1.5, 3, 0, 1.5, 3], atol=1e-12)


def test_sweep_radius_kinds_and_validation():
    device = random_device(np.random.default_rng(65), 5.0)
    samples = metric_sweep(device, [SweepAxis("rms", 0.1, 0.2, 3)])
    assert [s.coupling.rms for s in samples] == pytest.approx([0.1, 0.15, 0.2])
    samples = metric_sweep(device, [SweepAxis("rho", 0.1, 0.2, 3)])
    assert [s.coupling.rho for s in samples] == pytest.approx([0.1, 0.15, 0.2])
    with pytest.raises(ValueError):
        metric_sweep(device, [])
    with pytest.raises(ValueError):
        metric_sweep(device, [SweepAxis("rho", 0.1, 0.2, 2), SweepAxis("rms", 0.1, 0.2, 2)])
    with pytest.raises(ValueError):
        metric_sweep(device, [SweepAxis("theta", 0.0, 1.0, 2)] * 2)
    with pytest.raises(ValueError):
        SweepAxis("bogus", 0.0, 1.0, 2)
    with pytest.raises(ValueError):
        SweepAxis("theta", 0.0, 1.0, 1)  # single point must pin start == stop


def test_direction_sweep_extrema_sit_at_alignment_and_refine():
    mag, rho = 0.2, 0.15  # rho < sqrt(2) |R| keeps the level ordering fixed
    r = rotation_vector_from_angles(mag, 0.7, 0.9)
    th_star, ph_star = alignment_angles(r)
    two_pi = 2.0 * math.pi
    # every (theta, phi) in [0, pi] x [0, 2 pi) with the coupled mode along +-R
    parallel = [
        (th_star, ph_star),
        (math.pi - th_star, (ph_star + math.pi) % two_pi),
    ]
    antiparallel = [
        (math.pi / 2.0 - th_star, (ph_star - math.pi) % two_pi),
        (math.pi / 2.0 + th_star, ph_star),
    ]
    device = DeviceParams.at_resonance(
        5.0, r, CouplingVector.from_polar(rho, th_star, ph_star)
    )

    def nearest_distance(theta_grid, phi_grid, k, targets):
        k_theta, k_phi = k
        dists = []
        for tt, tp in targets:
            dphi = (phi_grid[k_phi] - tp + math.pi) % two_pi - math.pi
            dists.append(math.hypot(theta_grid[k_theta] - tt, dphi))
        return min(dists)

    def run(n_theta, n_phi):
        axes = [
            SweepAxis("theta", 0.0, math.pi, n_theta),
            SweepAxis("phi", 0.0, 2.0 * math.pi, n_phi),
        ]
        samples = metric_sweep(device, axes)
        g32 = np.array([s.g_32 for s in samples]).reshape(n_theta, n_phi)
        g21 = np.array([s.g_21 for s in samples]).reshape(n_theta, n_phi)
        g31 = np.array([s.g_31 for s in samples]).reshape(n_theta, n_phi)
        q = np.array([s.Q for s in samples])
        theta_grid = np.linspace(0.0, math.pi, n_theta)
        phi_grid = np.linspace(0.0, 2.0 * math.pi, n_phi)
        return theta_grid, phi_grid, g32, g21, g31, q

    theta_g, phi_g, g32, g21, g31, q = run(101, 101)
    step = math.hypot(theta_g[1] - theta_g[0], phi_g[1] - phi_g[0])
    # total is pinned at rho^2 across the whole direction grid
    assert np.max(np.abs(q - rho**2)) < 1e-12
    # the dominant pair component peaks at one alignment orientation, the
    # component with the relabeled ordering at the other, and the pair
    # involving the decoupled state bottoms out at both
    k32 = np.unravel_index(np.argmax(g32), g32.shape)
    k21 = np.unravel_index(np.argmax(g21), g21.shape)
    assert nearest_distance(theta_g, phi_g, k32, parallel) < step
    assert nearest_distance(theta_g, phi_g, k21, antiparallel) < step
    k31 = np.unravel_index(np.argmin(g31), g31.shape)
    assert nearest_distance(theta_g, phi_g, k31, parallel + antiparallel) < step

    theta_f, phi_f, g32_f, g21_f, _, q_f = run(401, 401)
    fine_step = math.hypot(theta_f[1] - theta_f[0], phi_f[1] - phi_f[0])
    assert np.max(np.abs(q_f - rho**2)) < 1e-12
    k32_f = np.unravel_index(np.argmax(g32_f), g32_f.shape)
    k21_f = np.unravel_index(np.argmax(g21_f), g21_f.shape)
    assert nearest_distance(theta_f, phi_f, k32_f, parallel) < fine_step
    assert nearest_distance(theta_f, phi_f, k21_f, antiparallel) < fine_step


def test_theta_line_sweep_peaks_near_alignment():
    mag, rho = 0.2, 0.15
    r = rotation_vector_from_angles(mag, 0.7, 0.9)
    th_star, ph_star = alignment_angles(r)
    device = DeviceParams.at_resonance(
        5.0, r, CouplingVector.from_polar(rho, th_star, ph_star)
    )
    n = 201
    samples = metric_sweep(device, [SweepAxis("theta", 0.0, math.pi, n)])
    thetas = np.linspace(0.0, math.pi, n)
    g32 = np.array([s.g_32 for s in samples])
    g21 = np.array([s.g_21 for s in samples])
    step = thetas[1] - thetas[0]
    assert abs(thetas[np.argmax(g32)] - th_star) < step
    assert abs(thetas[np.argmax(g21)] - (th_star + math.pi / 2.0)) < step
