"""Line-oriented run configuration: ``section.key = value`` with ``#`` comments.

Parsing is strict (unknown keys, duplicates and conflicting specifications
are errors carrying line numbers) and fully resolved: every defaulted key
is recorded so output files can echo the exact run description.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .metric import SweepAxis
from .model import (
    CouplingVector,
    DeviceParams,
    MaterialResponse,
    RotationVector,
    rotation_vector_from_material,
)
from .sensing import NoiseModel, ScanSettings, SearchSettings

__all__ = [
    "ConfigError",
    "FourierSettings",
    "ValidateSettings",
    "Config",
    "parse_config",
]


class ConfigError(ValueError):
    """Configuration problem, with a line number when one applies."""

    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


_REQUIRED = object()
_OPTIONAL = object()

# key -> (type, default); _REQUIRED must appear, _OPTIONAL may be absent
_SCHEMA: dict[str, tuple[type, object]] = {
    "device.omega0": (float, _REQUIRED),
    "device.resonance": (bool, False),
    "device.flux_bias": (float, _OPTIONAL),
    "device.drive_re": (float, 0.0),
    "device.drive_im": (float, 0.0),
    "device.r_magnitude": (float, _OPTIONAL),
    "device.r_theta0": (float, _OPTIONAL),
    "device.r_phi0": (float, _OPTIONAL),
    "device.rx": (float, _OPTIONAL),
    "device.ry": (float, _OPTIONAL),
    "device.rz": (float, _OPTIONAL),
    "material.real_susceptibility": (float, _OPTIONAL),
    "material.mode_split": (float, _OPTIONAL),
    "material.geometric_coupling": (float, _OPTIONAL),
    "material.hall": (float, _OPTIONAL),
    "material.k_x": (float, _OPTIONAL),
    "material.k_y": (float, _OPTIONAL),
    "material.k_z": (float, _OPTIONAL),
    "coupling.g_a": (float, _OPTIONAL),
    "coupling.g_b": (float, _OPTIONAL),
    "coupling.rho": (float, _OPTIONAL),
    "coupling.rms": (float, _OPTIONAL),
    "coupling.theta": (float, _OPTIONAL),
    "coupling.phi": (float, 0.0),
    "dynamics.t_max": (float, 300.0),
    "dynamics.dt": (float, 0.05),
    "fourier.threshold": (float, 1e-3),
    "fourier.window": (str, "none"),
    "fourier.tol_freq_bins": (float, 2.0),
    "fourier.tol_weight": (float, 0.05),
    "sweep.radius_kind": (str, "rms"),
    "sweep.radius_min": (float, _OPTIONAL),
    "sweep.radius_max": (float, _OPTIONAL),
    "sweep.radius_count": (int, _OPTIONAL),
    "sweep.theta_min": (float, _OPTIONAL),
    "sweep.theta_max": (float, _OPTIONAL),
    "sweep.theta_count": (int, _OPTIONAL),
    "sweep.phi_min": (float, _OPTIONAL),
    "sweep.phi_max": (float, _OPTIONAL),
    "sweep.phi_count": (int, _OPTIONAL),
    "sensing.grid_theta": (int, 25),
    "sensing.grid_phi": (int, 49),
    "sensing.refine_tol": (float, 1e-9),
    "sensing.refine_sweeps": (int, 8),
    "sensing.max_evals": (int, 50_000),
    "sensing.scan_rms_min": (float, 0.01),
    "sensing.scan_rms_max": (float, 0.5),
    "sensing.scan_points": (int, 64),
    "sensing.scan_xtol": (float, 1e-10),
    "sensing.closure_tol": (float, 1e-6),
    "sensing.trs_threshold": (float, _OPTIONAL),
    "sensing.noise_std": (float, 0.0),
    "sensing.noise_seed": (int, 0),
    "sensing.noise_t_max": (float, 2000.0),
    "sensing.noise_samples": (int, 16384),
    "sensing.noise_fft_threshold": (float, 1e-4),
    "validate.n_max": (int, 2),
    "validate.trials": (int, 100),
    "validate.t_samples": (int, 1000),
    "validate.degeneracy_trials": (int, 20),
    "validate.seed": (int, 12345),
}

_CHOICES = {
    "fourier.window": ("none", "hann"),
    "sweep.radius_kind": ("rms", "rho"),
}


@dataclass(frozen=True)
class FourierSettings:
    threshold: float
    window: Optional[str]
    tol_freq_bins: float
    tol_weight: float


@dataclass(frozen=True)
class ValidateSettings:
    n_max: int
    trials: int
    t_samples: int
    degeneracy_trials: int
    seed: int


@dataclass(frozen=True)
class Config:
    """Fully resolved run description."""

    device: DeviceParams
    dynamics_t_max: float
    dynamics_dt: float
    fourier: FourierSettings
    sweep_axes: tuple[SweepAxis, ...]
    search: SearchSettings
    scan: ScanSettings
    trs_threshold: float
    noise: Optional[NoiseModel]
    validation: ValidateSettings
    resolved: tuple[tuple[str, str], ...]
    defaults_applied: tuple[str, ...]

    def with_seed(self, seed: int) -> "Config":
        """Override every seed used by stochastic steps (CLI --seed)."""
        validation = ValidateSettings(
            self.validation.n_max,
            self.validation.trials,
            self.validation.t_samples,
            self.validation.degeneracy_trials,
            seed,
        )
        noise = self.noise
        if noise is not None:
            noise = NoiseModel(
                std=noise.std,
                seed=seed,
                t_max=noise.t_max,
                samples=noise.samples,
                fft_threshold=noise.fft_threshold,
            )
        resolved = tuple(
            (k, _format_value(seed) if k in ("validate.seed", "sensing.noise_seed") else v)
            for k, v in self.resolved
        )
        return Config(
            device=self.device,
            dynamics_t_max=self.dynamics_t_max,
            dynamics_dt=self.dynamics_dt,
            fourier=self.fourier,
            sweep_axes=self.sweep_axes,
            search=self.search,
            scan=self.scan,
            trs_threshold=self.trs_threshold,
            noise=noise,
            validation=validation,
            resolved=resolved,
            defaults_applied=self.defaults_applied,
        )


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _parse_value(key: str, raw: str, line: int):
    kind, _ = _SCHEMA[key]
    if kind is bool:
        low = raw.lower()
        if low in ("true", "false"):
            return low == "true"
        raise ConfigError(f"key {key} expects true or false, got {raw!r}", line)
    if kind is int:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"key {key} expects an integer, got {raw!r}", line) from None
    if kind is float:
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"key {key} expects a number, got {raw!r}", line) from None
        if not math.isfinite(value):
            raise ConfigError(f"key {key} must be finite, got {raw!r}", line)
        return value
    if key in _CHOICES and raw not in _CHOICES[key]:
        raise ConfigError(
            f"key {key} expects one of {_CHOICES[key]}, got {raw!r}", line
        )
    return raw


def _scan_lines(text: str):
    """Yield (key, raw_value, line_number) for every assignment line."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'section.key = value', got {line.strip()!r}", lineno)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"expected 'section.key = value', got {line.strip()!r}", lineno)
        yield key, raw, lineno


class _Resolver:
    """Typed key-value view with default tracking."""

    def __init__(self, entries: dict[str, tuple[object, int]]):
        self.entries = entries
        self.defaults_applied: list[str] = []
        self.resolved: dict[str, object] = {}

    def present(self, key: str) -> bool:
        return key in self.entries

    def line(self, key: str) -> Optional[int]:
        return self.entries[key][1] if key in self.entries else None

    def get(self, key: str, default_override=None):
        if key in self.entries:
            value = self.entries[key][0]
        else:
            _, default = _SCHEMA[key]
            if default is _REQUIRED:
                raise ConfigError(f"missing required key {key}")
            if default is _OPTIONAL:
                if default_override is None:
                    raise ConfigError(f"missing required key {key}")
                value = default_override
                self.defaults_applied.append(key)
            else:
                value = default if default_override is None else default_override
                self.defaults_applied.append(key)
        self.resolved[key] = value
        return value


def parse_config(text: str) -> Config:
    """Parse and fully resolve a configuration document."""
    entries: dict[str, tuple[object, int]] = {}
    for key, raw, lineno in _scan_lines(text):
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key}", lineno)
        if key in entries:
            raise ConfigError(
                f"duplicate key {key} (first set on line {entries[key][1]})", lineno
            )
        entries[key] = (_parse_value(key, raw, lineno), lineno)

    r = _Resolver(entries)

    omega0 = r.get("device.omega0")
    resonance = r.get("device.resonance")
    if resonance:
        if r.present("device.flux_bias") and r.entries["device.flux_bias"][0] != omega0:
            raise ConfigError(
                "device.flux_bias conflicts with device.resonance = true",
                r.line("device.flux_bias"),
            )
        flux_bias = omega0
        r.resolved["device.flux_bias"] = flux_bias
    else:
        if not r.present("device.flux_bias"):
            raise ConfigError(
                "device.flux_bias is required unless device.resonance = true"
            )
        flux_bias = r.get("device.flux_bias")
    drive = complex(r.get("device.drive_re"), r.get("device.drive_im"))

    rotation = _resolve_rotation(r)
    coupling = _resolve_coupling(r)
    device = DeviceParams(
        omega0=omega0, flux_bias=flux_bias, R=rotation, coupling=coupling, drive=drive
    )

    t_max = r.get("dynamics.t_max")
    dt = r.get("dynamics.dt")
    if dt <= 0.0 or t_max < 0.0:
        raise ConfigError("dynamics.dt must be > 0 and dynamics.t_max >= 0")

    window = r.get("fourier.window")
    fourier = FourierSettings(
        threshold=r.get("fourier.threshold"),
        window=None if window == "none" else window,
        tol_freq_bins=r.get("fourier.tol_freq_bins"),
        tol_weight=r.get("fourier.tol_weight"),
    )

    sweep_axes = _resolve_sweep(r)

    search = SearchSettings(
        theta_points=r.get("sensing.grid_theta"),
        phi_points=r.get("sensing.grid_phi"),
        refine_tol=r.get("sensing.refine_tol"),
        refine_sweeps=r.get("sensing.refine_sweeps"),
        max_evaluations=r.get("sensing.max_evals"),
    )
    scan = ScanSettings(
        rms_min=r.get("sensing.scan_rms_min"),
        rms_max=r.get("sensing.scan_rms_max"),
        points=r.get("sensing.scan_points"),
        xtol=r.get("sensing.scan_xtol"),
        closure_tol=r.get("sensing.closure_tol"),
    )
    trs_threshold = r.get("sensing.trs_threshold", default_override=1e-6 * omega0)
    noise_std = r.get("sensing.noise_std")
    noise = None
    if noise_std > 0.0:
        noise = NoiseModel(
            std=noise_std,
            seed=r.get("sensing.noise_seed"),
            t_max=r.get("sensing.noise_t_max"),
            samples=r.get("sensing.noise_samples"),
            fft_threshold=r.get("sensing.noise_fft_threshold"),
        )
    else:
        # resolve for the echo even when unused
        r.get("sensing.noise_seed")
        r.get("sensing.noise_t_max")
        r.get("sensing.noise_samples")
        r.get("sensing.noise_fft_threshold")

    validation = ValidateSettings(
        n_max=r.get("validate.n_max"),
        trials=r.get("validate.trials"),
        t_samples=r.get("validate.t_samples"),
        degeneracy_trials=r.get("validate.degeneracy_trials"),
        seed=r.get("validate.seed"),
    )
    if validation.n_max < 1 or validation.trials < 1 or validation.t_samples < 2:
        raise ConfigError("validate.* counts out of range")

    resolved = tuple(
        (key, _format_value(value)) for key, value in sorted(r.resolved.items())
    )
    return Config(
        device=device,
        dynamics_t_max=t_max,
        dynamics_dt=dt,
        fourier=fourier,
        sweep_axes=sweep_axes,
        search=search,
        scan=scan,
        trs_threshold=trs_threshold,
        noise=noise,
        validation=validation,
        resolved=resolved,
        defaults_applied=tuple(sorted(set(r.defaults_applied))),
    )


def _resolve_rotation(r: _Resolver) -> RotationVector:
    angle_keys = ("device.r_magnitude", "device.r_theta0", "device.r_phi0")
    cart_keys = ("device.rx", "device.ry", "device.rz")
    material_keys = tuple(k for k in _SCHEMA if k.startswith("material."))
    forms = []
    if any(r.present(k) for k in angle_keys):
        forms.append("angles")
    if any(r.present(k) for k in cart_keys):
        forms.append("cartesian")
    if any(r.present(k) for k in material_keys):
        forms.append("material")
    if len(forms) > 1:
        keysets = {"angles": angle_keys, "cartesian": cart_keys, "material": material_keys}
        second = min(
            r.line(k) for k in keysets[forms[1]] if r.present(k)
        )
        raise ConfigError(
            f"conflicting rotation-vector forms: {' and '.join(forms)}", second
        )
    if not forms:
        raise ConfigError(
            "no rotation vector given: set device.r_magnitude/r_theta0/r_phi0,"
            " device.rx/ry/rz, or a material.* block"
        )
    form = forms[0]
    if form == "angles":
        mag = r.get("device.r_magnitude", default_override=0.0)
        if mag < 0.0:
            raise ConfigError(
                "device.r_magnitude must be >= 0", r.line("device.r_magnitude")
            )
        return RotationVector(
            mag,
            r.get("device.r_theta0", default_override=0.0),
            r.get("device.r_phi0", default_override=0.0),
        )
    if form == "cartesian":
        return RotationVector.from_cartesian(
            r.get("device.rx", default_override=0.0),
            r.get("device.ry", default_override=0.0),
            r.get("device.rz", default_override=0.0),
        )
    material = MaterialResponse(
        real_susceptibility=r.get("material.real_susceptibility", default_override=0.0),
        mode_split=r.get("material.mode_split", default_override=0.0),
        geometric_coupling=r.get("material.geometric_coupling", default_override=0.0),
        hall=r.get("material.hall", default_override=0.0),
        k_x=r.get("material.k_x", default_override=1.0),
        k_y=r.get("material.k_y", default_override=1.0),
        k_z=r.get("material.k_z", default_override=1.0),
    )
    return rotation_vector_from_material(material)


def _resolve_coupling(r: _Resolver) -> CouplingVector:
    has_amp = r.present("coupling.g_a") or r.present("coupling.g_b")
    has_polar = any(
        r.present(k) for k in ("coupling.rho", "coupling.rms", "coupling.theta")
    )
    if has_amp and has_polar:
        second = min(
            r.line(k)
            for k in ("coupling.rho", "coupling.rms", "coupling.theta")
            if r.present(k)
        )
        raise ConfigError(
            "conflicting coupling forms: amplitudes and polar", second
        )
    if r.present("coupling.rho") and r.present("coupling.rms"):
        raise ConfigError(
            "set coupling.rho or coupling.rms, not both", r.line("coupling.rms")
        )
    phi = r.get("coupling.phi")
    if has_polar:
        theta = r.get("coupling.theta", default_override=0.0)
        if r.present("coupling.rms"):
            radius = r.get("coupling.rms")
            r.resolved["coupling.rho"] = radius * math.sqrt(2.0)
            return CouplingVector.from_polar(radius, theta, phi, radius_is_rms=True)
        radius = r.get("coupling.rho", default_override=0.0)
        if radius < 0.0:
            raise ConfigError("coupling radius must be >= 0", r.line("coupling.rho"))
        return CouplingVector.from_polar(radius, theta, phi)
    if not has_amp:
        raise ConfigError(
            "no coupling given: set coupling.g_a/g_b or coupling.rho|rms/theta"
        )
    g_a = r.get("coupling.g_a", default_override=0.0)
    g_b = r.get("coupling.g_b", default_override=0.0)
    if g_a < 0.0 or g_b < 0.0:
        raise ConfigError("coupling amplitudes must be >= 0")
    return CouplingVector(g_a, g_b, phi)


def _resolve_sweep(r: _Resolver) -> tuple[SweepAxis, ...]:
    radius_kind = r.get("sweep.radius_kind")
    axes = []
    for axis in ("radius", "theta", "phi"):
        count_key = f"sweep.{axis}_count"
        if not r.present(count_key):
            continue
        for part in ("min", "max"):
            if not r.present(f"sweep.{axis}_{part}"):
                raise ConfigError(
                    f"sweep.{axis}_{part} is required with {count_key}",
                    r.line(count_key),
                )
        name = radius_kind if axis == "radius" else axis
        count = r.get(count_key)
        lo = r.get(f"sweep.{axis}_min")
        hi = r.get(f"sweep.{axis}_max")
        try:
            axes.append(SweepAxis(name, lo, hi, count))
        except ValueError as exc:
            raise ConfigError(str(exc), r.line(count_key)) from None
    return tuple(axes)
