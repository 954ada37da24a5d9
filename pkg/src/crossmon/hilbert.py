"""Truncated two-mode Fock space with a qubit: the brute-force oracle.

Operators are dense complex matrices in a deterministic basis ordering so
that emitted matrices are bit-reproducible.  Evolution goes through the
spectral decomposition, which is exact for a time-independent Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .model import DeviceParams

__all__ = [
    "QUBIT_G",
    "QUBIT_E",
    "FockBasis",
    "build_fock_basis",
    "spin_operators",
    "transmon_operators",
    "total_excitation_operator",
    "build_full_hamiltonian",
    "evolve_state",
]

QUBIT_G, QUBIT_E = 0, 1

Label = tuple[int, int, int]  # (n_a, n_b, q) with q in {QUBIT_G, QUBIT_E}


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Ordered list of |n_a, n_b, q> labels, optionally restricted to a
    single total-excitation sector N = n_a + n_b + [q = e].

    Ordering is lexicographic in (N, n_a, n_b, q), which makes index lookup
    a bijection independent of construction details.
    """

    n_max: int
    sector: Optional[int]
    states: tuple[Label, ...]
    _index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, label: Label) -> int:
        return self._index[label]

    def unit_vector(self, label: Label) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        vec[self._index[label]] = 1.0
        return vec


def build_fock_basis(n_max: int, sector: Optional[int] = None) -> FockBasis:
    """Enumerate the basis for photon truncation ``n_max`` per mode.

    Unsectored size is ``2 (n_max+1)^2``.  A sector keeps only labels with
    ``n_a + n_b + [q = e] == sector``.
    """
    if not isinstance(n_max, int) or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max!r}")
    if sector is not None and (not isinstance(sector, int) or sector < 0):
        raise ValueError(f"sector must be a nonnegative integer, got {sector!r}")
    labels = [
        (na, nb, q)
        for na in range(n_max + 1)
        for nb in range(n_max + 1)
        for q in (QUBIT_G, QUBIT_E)
    ]
    if sector is not None:
        labels = [lab for lab in labels if sum(lab) == sector]
        if not labels:
            raise ValueError(
                f"sector {sector} is empty at truncation n_max = {n_max}"
            )
    labels.sort(key=lambda lab: (sum(lab), lab[0], lab[1], lab[2]))
    states = tuple(labels)
    return FockBasis(
        n_max=n_max,
        sector=sector,
        states=states,
        _index={lab: i for i, lab in enumerate(states)},
    )


def _operator(
    basis: FockBasis,
    action: Callable[[Label], Iterable[tuple[complex, Label]]],
) -> np.ndarray:
    """Assemble a dense matrix from a per-label action.

    Target labels outside the basis (truncation or sector boundary) are
    dropped, so truncated operators are exact on every closed block.
    """
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, lab in enumerate(basis.states):
        for amp, new in action(lab):
            row = basis._index.get(new)
            if row is not None:
                mat[row, col] += amp
    return mat


def spin_operators(basis: FockBasis) -> dict[str, np.ndarray]:
    """Two-mode (Schwinger) spin operators S_x, S_y, S_z plus the photon
    number S_0, restricted to the basis.

    S_x = (a'b + b'a)/2, S_y = (a'b - b'a)/(2i), S_z = (a'a - b'b)/2; the
    S_y sign is fixed by the cyclic algebra [S_x, S_y] = i S_z.
    """

    def s_plus(lab):  # a'b
        na, nb, q = lab
        if nb >= 1:
            yield math.sqrt((na + 1) * nb), (na + 1, nb - 1, q)

    def s_minus(lab):  # b'a
        na, nb, q = lab
        if na >= 1:
            yield math.sqrt(na * (nb + 1)), (na - 1, nb + 1, q)

    sp = _operator(basis, s_plus)
    sm = _operator(basis, s_minus)
    s_x = (sp + sm) / 2.0
    s_y = (sp - sm) / 2.0j
    s_z = np.diag([(na - nb) / 2.0 for na, nb, _ in basis.states]).astype(complex)
    s_0 = np.diag([float(na + nb) for na, nb, _ in basis.states]).astype(complex)
    return {"S_x": s_x, "S_y": s_y, "S_z": s_z, "S_0": s_0}


def transmon_operators(basis: FockBasis) -> dict[str, np.ndarray]:
    """Qubit raising/lowering and sigma_z = |e><e| - |g><g| on the basis."""

    def raise_q(lab):
        na, nb, q = lab
        if q == QUBIT_G:
            yield 1.0, (na, nb, QUBIT_E)

    sigma_plus = _operator(basis, raise_q)
    sigma_minus = sigma_plus.conj().T
    sigma_z = np.diag(
        [1.0 if q == QUBIT_E else -1.0 for _, _, q in basis.states]
    ).astype(complex)
    return {"sigma_plus": sigma_plus, "sigma_minus": sigma_minus, "sigma_z": sigma_z}


def total_excitation_operator(basis: FockBasis) -> np.ndarray:
    """Conserved total excitation number n_a + n_b + [q = e]."""
    return np.diag([float(sum(lab)) for lab in basis.states]).astype(complex)


def build_full_hamiltonian(device: DeviceParams, basis: FockBasis) -> np.ndarray:
    """Exact device Hamiltonian on the truncated Fock basis.

    ``H = omega0 S_0 + R . (2 S) + B . sigma / 2 + H_exchange`` where the
    exchange term ``(g_a e^{i phi/2} a' + g_b e^{-i phi/2} b') sigma- + h.c.``
    trades a qubit excitation for a photon.  The photonic factor of two and
    qubit factor of one half put the one-photon doublet splitting at +-|R|
    and the bare qubit splitting at B_z, matching the reduced model.
    """
    spin = spin_operators(basis)
    qubit = transmon_operators(basis)
    r = device.R.cartesian
    b = device.b_vector
    cpl = device.coupling

    h = device.omega0 * spin["S_0"]
    h = h + 2.0 * (r[0] * spin["S_x"] + r[1] * spin["S_y"] + r[2] * spin["S_z"])
    sigma_x = qubit["sigma_plus"] + qubit["sigma_minus"]
    sigma_y = -1j * (qubit["sigma_plus"] - qubit["sigma_minus"])
    h = h + 0.5 * (b[0] * sigma_x + b[1] * sigma_y + b[2] * qubit["sigma_z"])

    ga_phase = cpl.g_a * complex(math.cos(cpl.phi / 2.0), math.sin(cpl.phi / 2.0))
    gb_phase = cpl.g_b * complex(math.cos(cpl.phi / 2.0), -math.sin(cpl.phi / 2.0))

    def excite_photon(lab):  # (g_a e^{i phi/2} a' + g_b e^{-i phi/2} b') sigma-
        na, nb, q = lab
        if q != QUBIT_E:
            return
        yield ga_phase * math.sqrt(na + 1), (na + 1, nb, QUBIT_G)
        yield gb_phase * math.sqrt(nb + 1), (na, nb + 1, QUBIT_G)

    half = _operator(basis, excite_photon)
    return h + half + half.conj().T


def evolve_state(
    h: np.ndarray, psi0: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """Trajectory psi(t_k) = e^{i t_k H} psi0 via eigendecomposition.

    Returns an array of shape (len(times), dim).  Norm is preserved to
    machine precision; observables built from overlaps with psi0 do not
    depend on the sign of the exponent.
    """
    h = np.asarray(h, dtype=complex)
    psi0 = np.asarray(psi0, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * scale:
        raise ValueError("Hamiltonian must be Hermitian")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("psi0 must be normalized to 1")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    lam, vec = np.linalg.eigh(h)
    coeff = vec.conj().T @ psi0
    phases = np.exp(1j * np.outer(times, lam))
    return (phases * coeff) @ vec.T
