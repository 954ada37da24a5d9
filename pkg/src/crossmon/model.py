"""Reduced three-level model of the transmon / cross-resonator device.

The device couples a flux-biased transmon to two orthogonal resonator modes
(a, b) whose interaction with a sample is summarized by a three-component
rotation vector R acting on the one-photon doublet.  With the qubit
initially excited and no drive, the dynamics stay inside the span of
{|00e>, |10g>, |01g>}, and after rotating the photonic doublet into the
coupled/decoupled mode pair the Hamiltonian is a 3x3 Hermitian matrix.

Conventions used throughout (and by the Fock-space oracle in
:mod:`crossmon.hilbert`):

* the one-photon doublet splits by +-|R| (Bloch-vector normalization), so
  the decoupled spectrum at zero coupling is ``omega0 - Bz/2 +- |R|``;
* the bare qubit splitting is ``Bz`` (levels at ``+-Bz/2``);
* ``R = |R| (cos(theta0) sin(phi0), sin(theta0) sin(phi0), cos(phi0))``,
  i.e. ``phi0`` is the angle from the z axis and ``theta0`` the azimuth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

__all__ = [
    "UnsupportedConfigurationError",
    "RotationVector",
    "MaterialResponse",
    "CouplingVector",
    "DeviceParams",
    "DressedStates",
    "rotation_vector_from_angles",
    "rotation_vector_from_material",
    "coupling_from_amplitudes",
    "rotate_R",
    "rotate_cartesian",
    "coupled_mode_direction",
    "direction_to_angles",
    "alignment_angles",
    "reduced_hamiltonian",
    "eigendecompose",
    "bright_state_residual",
    "degeneracy_gap",
]

TWO_PI = 2.0 * math.pi

_TAU_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_TAU_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_TAU_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class UnsupportedConfigurationError(ValueError):
    """Raised when an operation is asked for outside its validity domain."""


# ---------------------------------------------------------------------------
# rotation vector
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RotationVector:
    """Cross-resonator rotation vector in magnitude/angle form.

    ``phi0`` is measured from the z axis, ``theta0`` in the x-y plane.
    A nonzero y component signals broken time-reversal symmetry.
    """

    magnitude: float
    theta0: float = 0.0
    phi0: float = 0.0

    def __post_init__(self):
        if not (self.magnitude >= 0.0):
            raise ValueError(f"magnitude must be >= 0, got {self.magnitude}")

    @property
    def cartesian(self) -> np.ndarray:
        m, t, p = self.magnitude, self.theta0, self.phi0
        return m * np.array(
            [math.cos(t) * math.sin(p), math.sin(t) * math.sin(p), math.cos(p)]
        )

    @property
    def rx(self) -> float:
        return float(self.cartesian[0])

    @property
    def ry(self) -> float:
        return float(self.cartesian[1])

    @property
    def rz(self) -> float:
        return float(self.cartesian[2])

    @classmethod
    def from_cartesian(cls, rx: float, ry: float, rz: float) -> "RotationVector":
        mag = math.sqrt(rx * rx + ry * ry + rz * rz)
        if mag == 0.0:
            return cls(0.0, 0.0, 0.0)
        transverse = math.hypot(rx, ry)
        phi0 = math.atan2(transverse, rz)
        theta0 = math.atan2(ry, rx) if transverse > 0.0 else 0.0
        return cls(mag, theta0, phi0)


def rotation_vector_from_angles(
    magnitude: float, theta0: float, phi0: float
) -> RotationVector:
    """Build a :class:`RotationVector`; rejects negative magnitudes."""
    return RotationVector(magnitude, theta0, phi0)


@dataclass(frozen=True)
class MaterialResponse:
    """Linear proxy from sample response terms to the rotation vector.

    The transverse/longitudinal terms enter the in-plane (x) and axial (z)
    components, while the Hall term alone feeds R_y.  The proportionality
    coefficients are user-supplied; the defaults of 1.0 carry no physical
    calibration.
    """

    real_susceptibility: float = 0.0
    mode_split: float = 0.0
    geometric_coupling: float = 0.0
    hall: float = 0.0
    k_x: float = 1.0
    k_y: float = 1.0
    k_z: float = 1.0


def rotation_vector_from_material(m: MaterialResponse) -> RotationVector:
    """Map a material response onto R: TRS is broken iff the Hall term is nonzero."""
    rx = m.k_x * (m.real_susceptibility + m.geometric_coupling)
    rz = m.k_z * (m.real_susceptibility + m.mode_split)
    ry = m.k_y * m.hall
    return RotationVector.from_cartesian(rx, ry, rz)


# ---------------------------------------------------------------------------
# coupling vector
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingVector:
    """Qubit-mode couplings (g_a, g_b) with relative phase phi.

    Derived geometry: ``theta = atan2(g_b, g_a)``, ``rho = sqrt(ga^2+gb^2)``
    and ``rms = rho / sqrt(2)``.  Amplitude-based construction keeps both
    couplings nonnegative (theta in [0, pi/2]); polar construction admits
    any theta so that sweeps and searches can cover the full sphere of
    coupled-mode directions.
    """

    g_a: float
    g_b: float
    phi: float = 0.0

    @property
    def theta(self) -> float:
        if self.g_a == 0.0 and self.g_b == 0.0:
            return 0.0
        return math.atan2(self.g_b, self.g_a)

    @property
    def rho(self) -> float:
        return math.hypot(self.g_a, self.g_b)

    @property
    def rms(self) -> float:
        return self.rho / math.sqrt(2.0)

    @classmethod
    def from_polar(
        cls,
        radius: float,
        theta: float,
        phi: float = 0.0,
        *,
        radius_is_rms: bool = False,
    ) -> "CouplingVector":
        if not (radius >= 0.0):
            raise ValueError(f"coupling radius must be >= 0, got {radius}")
        rho = radius * math.sqrt(2.0) if radius_is_rms else radius
        return cls(rho * math.cos(theta), rho * math.sin(theta), phi)


def coupling_from_amplitudes(g_a: float, g_b: float, phi: float = 0.0) -> CouplingVector:
    """Build a :class:`CouplingVector` from nonnegative coupling strengths."""
    if g_a < 0.0 or g_b < 0.0:
        raise ValueError(f"coupling amplitudes must be >= 0, got ({g_a}, {g_b})")
    return CouplingVector(g_a, g_b, phi)


# ---------------------------------------------------------------------------
# device parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeviceParams:
    """Full experiment description.

    ``drive`` is the complex qubit drive (carried for completeness; the
    reduced model requires it to vanish).  The transmon rotation vector is
    ``B = (Re drive, Im drive, flux_bias)``.
    """

    omega0: float
    flux_bias: float
    R: RotationVector
    coupling: CouplingVector
    drive: complex = 0j

    @classmethod
    def at_resonance(
        cls,
        omega0: float,
        R: RotationVector,
        coupling: CouplingVector,
        drive: complex = 0j,
    ) -> "DeviceParams":
        return cls(omega0, omega0, R, coupling, drive)

    @property
    def b_vector(self) -> np.ndarray:
        return np.array([self.drive.real, self.drive.imag, self.flux_bias])

    def require_undriven(self) -> None:
        if self.drive != 0:
            raise UnsupportedConfigurationError(
                "the reduced three-level model requires a zero qubit drive; "
                f"got drive = {self.drive}"
            )


# ---------------------------------------------------------------------------
# doublet rotation
# ---------------------------------------------------------------------------

def doublet_transform(theta: float, phi: float) -> np.ndarray:
    """Unitary on the one-photon doublet whose columns are the coupled and
    decoupled photonic modes, in the (|10g>, |01g>) basis."""
    c, s = math.cos(theta), math.sin(theta)
    ep = complex(math.cos(phi / 2.0), math.sin(phi / 2.0))
    em = ep.conjugate()
    return np.array([[c * ep, -s * ep], [s * em, c * em]], dtype=complex)


def rotate_cartesian(r: np.ndarray, theta: float, phi: float) -> np.ndarray:
    """Rotate a Cartesian 3-vector by conjugating its Pauli form with the
    doublet transformation; equals the identity at (0, 0)."""
    v = doublet_transform(theta, phi)
    m = v.conj().T @ (r[0] * _TAU_X + r[1] * _TAU_Y + r[2] * _TAU_Z) @ v
    return np.array([m[1, 0].real, m[1, 0].imag, m[0, 0].real])


def rotate_R(R: RotationVector, theta: float, phi: float) -> np.ndarray:
    """Rotation vector seen in the coupled/decoupled mode basis.

    Norm-preserving.  At the alignment angles for ``R`` (see
    :func:`alignment_angles`) the transverse components vanish and the
    decoupled mode drops out of the dynamics.
    """
    return rotate_cartesian(R.cartesian, theta, phi)


def coupled_mode_direction(theta: float, phi: float) -> np.ndarray:
    """Unit vector the coupled photonic mode occupies on the doublet sphere.

    This is the direction that :func:`rotate_cartesian` maps onto +z; the
    rotation vector decouples one mode exactly when it is (anti)parallel
    to this direction.
    """
    s2, c2 = math.sin(2.0 * theta), math.cos(2.0 * theta)
    return np.array([s2 * math.cos(phi), -s2 * math.sin(phi), c2])


def _transverse_residual(angles: np.ndarray, r: np.ndarray) -> np.ndarray:
    rp = rotate_cartesian(r, angles[0], angles[1])
    return rp[:2]


def alignment_angles(R: RotationVector, *, residual_tol: float = 1e-12) -> tuple[float, float]:
    """Angle pair (theta, phi) that zeroes the transverse rotated components.

    Solved by a 2-D root find seeded from the spherical angles of ``R``
    rather than assumed, so the returned pair is correct regardless of
    where ``R`` points.  For ``R = 0`` every pair aligns and (0, 0) is
    returned by convention.
    """
    r = R.cartesian
    mag = float(np.linalg.norm(r))
    if mag == 0.0:
        return 0.0, 0.0
    transverse = math.hypot(r[0], r[1])
    if transverse <= 1e-15 * mag:
        # on-axis: the azimuthal angle is immaterial
        theta = 0.0 if r[2] > 0 else math.pi / 2.0
        return theta, 0.0
    polar = math.acos(max(-1.0, min(1.0, r[2] / mag)))
    azimuth = math.atan2(r[1], r[0])
    guess = np.array([polar / 2.0, (-azimuth) % TWO_PI])
    sol = optimize.root(_transverse_residual, guess, args=(r,), method="hybr", tol=1e-14)
    theta, phi = float(sol.x[0]), float(sol.x[1])
    resid = math.hypot(*_transverse_residual(sol.x, r))
    if resid > residual_tol * max(1.0, mag):
        raise RuntimeError(
            f"alignment root-find did not converge: residual {resid:.3e}"
        )
    return direction_to_angles(coupled_mode_direction(theta, phi))


def direction_to_angles(n: np.ndarray) -> tuple[float, float]:
    """Canonical (theta, phi) whose coupled mode points along unit vector n;
    theta lands in [0, pi/2] and phi in [0, 2*pi)."""
    nz = max(-1.0, min(1.0, float(n[2])))
    theta = 0.5 * math.acos(nz)
    if math.hypot(n[0], n[1]) > 1e-15:
        phi = math.atan2(-n[1], n[0]) % TWO_PI
    else:
        phi = 0.0
    return theta, phi


# ---------------------------------------------------------------------------
# reduced Hamiltonian and dressed states
# ---------------------------------------------------------------------------

def reduced_hamiltonian(device: DeviceParams) -> np.ndarray:
    """3x3 Hermitian matrix in the basis {|00e>, coupled mode, decoupled mode}.

    The qubit couples only to the first photonic mode, with strength rho;
    the photonic block carries the rotated vector from :func:`rotate_R`.
    """
    device.require_undriven()
    cpl = device.coupling
    rho = cpl.rho
    rp = rotate_R(device.R, cpl.theta, cpl.phi)
    bz = device.flux_bias
    d = device.omega0 - bz / 2.0
    return np.array(
        [
            [bz / 2.0, rho, 0.0],
            [rho, d + rp[2], rp[0] - 1j * rp[1]],
            [0.0, rp[0] + 1j * rp[1], d - rp[2]],
        ],
        dtype=complex,
    )


@dataclass(frozen=True, eq=False)
class DressedStates:
    """Eigensystem of the reduced Hamiltonian with initial-state overlaps.

    ``lambdas`` ascend; ``vectors[:, i]`` is the i-th dressed state with its
    largest-magnitude component rotated real-positive; ``overlaps[i]`` is
    the amplitude of the initial state |00e> on dressed state i.
    """

    lambdas: np.ndarray
    vectors: np.ndarray
    overlaps: np.ndarray = field(repr=False)

    @property
    def weights(self) -> np.ndarray:
        """|c_i|^2, summing to one."""
        return np.abs(self.overlaps) ** 2

    def gap_pairs(self) -> tuple[tuple[int, int, float], ...]:
        """(i, j, lambda_i - lambda_j) for i > j, ascending-index order."""
        lam = self.lambdas
        return tuple(
            (i, j, float(lam[i] - lam[j])) for i in range(len(lam)) for j in range(i)
        )


def eigendecompose(h3: np.ndarray) -> DressedStates:
    """Diagonalize a Hermitian 3x3 with a deterministic eigenvector gauge."""
    h3 = np.asarray(h3, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(h3))) if h3.size else 1.0)
    if np.max(np.abs(h3 - h3.conj().T)) > 1e-12 * scale:
        raise ValueError("input matrix is not Hermitian to 1e-12")
    lam, vec = np.linalg.eigh(h3)
    vec = vec.copy()
    for i in range(vec.shape[1]):
        k = int(np.argmax(np.abs(vec[:, i])))  # ties: argmax takes lowest index
        pivot = vec[k, i]
        if pivot != 0:
            vec[:, i] *= pivot.conjugate() / abs(pivot)
    return DressedStates(lambdas=lam, vectors=vec, overlaps=vec[0, :].copy())


def bright_state_residual(device: DeviceParams) -> float:
    """Transverse magnitude of the rotated vector; zero iff the decoupled
    (bright) photonic mode drops out of the dynamics."""
    cpl = device.coupling
    rp = rotate_R(device.R, cpl.theta, cpl.phi)
    return float(math.hypot(rp[0], rp[1]))


def degeneracy_gap(device: DeviceParams) -> float:
    """Smallest pairwise energy distance of the reduced spectrum."""
    lam = np.linalg.eigvalsh(reduced_hamiltonian(device))
    return float(min(lam[1] - lam[0], lam[2] - lam[1]))
