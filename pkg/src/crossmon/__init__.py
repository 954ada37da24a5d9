"""Simulator and sensing toolkit for a transmon coupled to a two-mode
cross-resonator: exact Fock-space oracle, reduced three-level model,
population dynamics and spectra, quantum metric, and the passive
time-reversal-symmetry detection pipeline."""

from .model import (
    CouplingVector,
    DeviceParams,
    DressedStates,
    MaterialResponse,
    RotationVector,
    UnsupportedConfigurationError,
    alignment_angles,
    bright_state_residual,
    coupling_from_amplitudes,
    degeneracy_gap,
    eigendecompose,
    reduced_hamiltonian,
    rotate_R,
    rotation_vector_from_angles,
    rotation_vector_from_material,
)
from .hilbert import build_fock_basis, build_full_hamiltonian, evolve_state, spin_operators
from .dynamics import (
    PeakList,
    TimeSeries,
    analytic_spectrum,
    excited_population,
    fft_spectrum,
    match_peaks,
    population_series,
)
from .metric import MetricSample, SweepAxis, metric_sweep, quantum_metric
from .sensing import (
    NoiseModel,
    ScanSettings,
    SearchSettings,
    SensingResult,
    estimate_R,
    estimate_magnitude,
    find_alignment,
    hybridization_measure,
)
from .config import Config, ConfigError, parse_config

__version__ = "0.1.0"
