"""Quantum metric of the evolving hybrid state and coupling-space sweeps.

The metric splits into one component per dressed-state pair,
``g_ij = dlam_ij^2 |c_i|^2 |c_j|^2``, and its total equals the energy
variance of the initial state, which for |00e> is exactly rho^2 whatever
the coupling direction.  Sweeps therefore probe how the fixed total
redistributes over the pairs as the coupling vector moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .model import CouplingVector, DeviceParams, DressedStates, reduced_hamiltonian

__all__ = ["MetricSample", "SweepAxis", "quantum_metric", "metric_sweep"]

_AXIS_NAMES = ("rho", "rms", "theta", "phi")


@dataclass(frozen=True)
class MetricSample:
    """Metric data at one coupling point.

    Components are indexed by ascending-eigenvalue pairs: g_21 = (2,1),
    g_31 = (3,1), g_32 = (3,2) in 1-based labels.  ``energy_variance`` is
    the independent route to the same total.
    """

    coupling: Optional[CouplingVector]
    Q: float
    g_21: float
    g_31: float
    g_32: float
    gap: float
    energy_variance: float

    @property
    def components(self) -> tuple[float, float, float]:
        return (self.g_21, self.g_31, self.g_32)


def quantum_metric(
    d: DressedStates, coupling: Optional[CouplingVector] = None
) -> MetricSample:
    """Metric components, total, spectral gap and the variance cross-check."""
    lam = d.lambdas
    w = d.weights
    g21 = float((lam[1] - lam[0]) ** 2 * w[1] * w[0])
    g31 = float((lam[2] - lam[0]) ** 2 * w[2] * w[0])
    g32 = float((lam[2] - lam[1]) ** 2 * w[2] * w[1])
    mean = float(np.dot(lam, w))
    var = float(np.dot(lam**2, w) - mean**2)
    gap = float(min(lam[1] - lam[0], lam[2] - lam[1]))
    return MetricSample(
        coupling=coupling,
        Q=g21 + g31 + g32,
        g_21=g21,
        g_31=g31,
        g_32=g32,
        gap=gap,
        energy_variance=var,
    )


@dataclass(frozen=True)
class SweepAxis:
    """One swept coupling coordinate; count = 1 pins the axis at ``start``."""

    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.name not in _AXIS_NAMES:
            raise ValueError(f"axis name must be one of {_AXIS_NAMES}, got {self.name!r}")
        if self.count < 1:
            raise ValueError(f"axis count must be >= 1, got {self.count}")
        if not (np.isfinite(self.start) and np.isfinite(self.stop)):
            raise ValueError(f"axis range must be finite, got [{self.start}, {self.stop}]")
        if self.count == 1 and self.start != self.stop:
            raise ValueError("a single-point axis must have start == stop")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


def _batched_dressed(device: DeviceParams, rho, theta, phi):
    """Eigenvalues and initial-state weights for stacked coupling points.

    Same construction as :func:`crossmon.model.reduced_hamiltonian`, batched:
    conjugate the Pauli form of R by the doublet transform at each point.
    """
    device.require_undriven()
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n = len(rho)

    c, s = np.cos(theta), np.sin(theta)
    ep = np.exp(0.5j * phi)
    em = ep.conj()
    v = np.empty((n, 2, 2), dtype=complex)
    v[:, 0, 0] = c * ep
    v[:, 0, 1] = -s * ep
    v[:, 1, 0] = s * em
    v[:, 1, 1] = c * em

    r = device.R.cartesian
    rtau = np.array(
        [[r[2], r[0] - 1j * r[1]], [r[0] + 1j * r[1], -r[2]]], dtype=complex
    )
    m = np.einsum("nji,jk,nkl->nil", v.conj(), rtau, v)
    rp_x, rp_y, rp_z = m[:, 1, 0].real, m[:, 1, 0].imag, m[:, 0, 0].real

    bz = device.flux_bias
    d = device.omega0 - bz / 2.0
    h = np.zeros((n, 3, 3), dtype=complex)
    h[:, 0, 0] = bz / 2.0
    h[:, 0, 1] = rho
    h[:, 1, 0] = rho
    h[:, 1, 1] = d + rp_z
    h[:, 2, 2] = d - rp_z
    h[:, 1, 2] = rp_x - 1j * rp_y
    h[:, 2, 1] = rp_x + 1j * rp_y
    lam, vec = np.linalg.eigh(h)
    weights = np.abs(vec[:, 0, :]) ** 2
    return lam, weights


def metric_sweep(
    base: DeviceParams, axes: Sequence[SweepAxis]
) -> list[MetricSample]:
    """Evaluate the metric on a row-major grid over coupling coordinates.

    Axis order in ``axes`` sets the nesting (first axis outermost).  Axes
    absent from the grid keep the base device's coupling values.  At most
    one of ``rho``/``rms`` may be swept.
    """
    if not axes:
        raise ValueError("sweep grid must have at least one axis")
    names = [ax.name for ax in axes]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate sweep axes in {names}")
    if "rho" in names and "rms" in names:
        raise ValueError("sweep either rho or rms, not both")

    base_cpl = base.coupling
    grids = [ax.values() for ax in axes]
    mesh = np.meshgrid(*grids, indexing="ij")
    flat = {name: m.reshape(-1) for name, m in zip(names, mesh)}
    total = mesh[0].size if mesh else 0

    if "rho" in flat:
        rho = flat["rho"]
    elif "rms" in flat:
        rho = flat["rms"] * math.sqrt(2.0)
    else:
        rho = np.full(total, base_cpl.rho)
    theta = flat.get("theta", np.full(total, base_cpl.theta))
    phi = flat.get("phi", np.full(total, base_cpl.phi))
    if np.any(rho < 0.0):
        raise ValueError("coupling radius must be nonnegative over the sweep")

    lam, w = _batched_dressed(base, rho, theta, phi)
    d21 = lam[:, 1] - lam[:, 0]
    d31 = lam[:, 2] - lam[:, 0]
    d32 = lam[:, 2] - lam[:, 1]
    g21 = d21**2 * w[:, 1] * w[:, 0]
    g31 = d31**2 * w[:, 2] * w[:, 0]
    g32 = d32**2 * w[:, 2] * w[:, 1]
    mean = np.einsum("ni,ni->n", lam, w)
    var = np.einsum("ni,ni->n", lam**2, w) - mean**2
    gap = np.minimum(d21, d32)

    samples = []
    for k in range(total):
        cpl = CouplingVector.from_polar(float(rho[k]), float(theta[k]), float(phi[k]))
        samples.append(
            MetricSample(
                coupling=cpl,
                Q=float(g21[k] + g31[k] + g32[k]),
                g_21=float(g21[k]),
                g_31=float(g31[k]),
                g_32=float(g32[k]),
                gap=float(gap[k]),
                energy_variance=float(var[k]),
            )
        )
    return samples
