"""Command-line front end: subcommand dispatch and deterministic file output.

Every emitted file embeds the fully resolved configuration (comment header
in CSV, ``config`` field in JSON) together with the list of keys that took
default values, so a run is reproducible from its outputs alone.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import dynamics as dyn
from .config import Config, ConfigError, parse_config
from .metric import metric_sweep
from .model import (
    UnsupportedConfigurationError,
    eigendecompose,
    reduced_hamiltonian,
)
from .sensing import (
    AlignmentSearchError,
    GapClosureError,
    ScanRangeError,
    estimate_R,
)
from .validation import validation_report

__all__ = ["main", "run", "EXIT_CODES"]

SUBCOMMANDS = ("spectrum", "dynamics", "fourier", "metric", "sense", "validate")

EXIT_CODES = {
    "ok": 0,
    "unexpected": 1,
    "config": 2,
    "invalid": 3,
    "search": 4,
    "scan": 5,
}


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _provenance_lines(config: Config) -> list[str]:
    lines = [f"# config: {key} = {value}" for key, value in config.resolved]
    if config.defaults_applied:
        lines.append("# defaults applied: " + " ".join(config.defaults_applied))
    return lines


def _config_payload(config: Config) -> dict:
    return {
        "config": dict(config.resolved),
        "defaults_applied": list(config.defaults_applied),
    }


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_csv(path: Path, config: Config, header: str, rows) -> None:
    lines = _provenance_lines(config)
    lines.append(header)
    lines.extend(rows)
    _write_text(path, "\n".join(lines) + "\n")


def _write_json(path: Path, config: Config, payload: dict) -> None:
    body = _config_payload(config)
    body.update(payload)
    _write_text(path, json.dumps(body, sort_keys=True, indent=2) + "\n")


def _peaklist_payload(peaks: dyn.PeakList) -> dict:
    return {
        "dc": peaks.dc_weight,
        "peaks": [{"freq": p.frequency, "weight": p.weight} for p in peaks.peaks],
    }


def _cmd_spectrum(config: Config, out: Path) -> Path:
    d = eigendecompose(reduced_hamiltonian(config.device))
    rows = [
        ",".join(
            (
                str(i + 1),
                _fmt(float(d.lambdas[i])),
                _fmt(float(d.overlaps[i].real)),
                _fmt(float(d.overlaps[i].imag)),
                _fmt(float(d.weights[i])),
            )
        )
        for i in range(3)
    ]
    path = out / "spectrum.csv"
    _write_csv(path, config, "state,lambda,overlap_re,overlap_im,weight", rows)
    return path


def _cmd_dynamics(config: Config, out: Path) -> Path:
    d = eigendecompose(reduced_hamiltonian(config.device))
    series = dyn.population_series(d, config.dynamics_t_max, config.dynamics_dt)
    rows = [
        f"{_fmt(float(t))},{_fmt(float(v))}"
        for t, v in zip(series.times, series.values)
    ]
    path = out / "dynamics.csv"
    _write_csv(path, config, "t,rho_e", rows)
    return path


def _cmd_fourier(config: Config, out: Path) -> Path:
    d = eigendecompose(reduced_hamiltonian(config.device))
    analytic = dyn.analytic_spectrum(d)
    series = dyn.population_series(d, config.dynamics_t_max, config.dynamics_dt)
    empirical = dyn.fft_spectrum(
        series,
        rel_threshold=config.fourier.threshold,
        window=config.fourier.window,
    )
    bin_width = 2.0 * math.pi / (len(series.times) * series.dt)
    tol_freq = config.fourier.tol_freq_bins * bin_width
    report = dyn.match_peaks(analytic, empirical, tol_freq, config.fourier.tol_weight)
    payload = {
        "analytic": _peaklist_payload(analytic),
        "empirical": _peaklist_payload(empirical),
        "match": {
            "tol_freq": tol_freq,
            "tol_weight": config.fourier.tol_weight,
            "matched": [
                {
                    "analytic_freq": m.analytic.frequency,
                    "analytic_weight": m.analytic.weight,
                    "empirical_freq": m.empirical.frequency,
                    "empirical_weight": m.empirical.weight,
                    "freq_error": m.freq_error,
                    "weight_error": m.weight_error,
                    "weight_ok": m.weight_ok,
                }
                for m in report.matched
            ],
            "missed": [
                {"freq": p.frequency, "weight": p.weight} for p in report.missed
            ],
            "spurious": [
                {"freq": p.frequency, "weight": p.weight} for p in report.spurious
            ],
        },
    }
    path = out / "fourier.json"
    _write_json(path, config, payload)
    return path


def _cmd_metric(config: Config, out: Path) -> Path:
    if not config.sweep_axes:
        raise ValueError(
            "the metric subcommand needs a sweep section "
            "(sweep.<axis>_min/_max/_count)"
        )
    samples = metric_sweep(config.device, config.sweep_axes)
    rows = []
    for s in samples:
        cpl = s.coupling
        rows.append(
            ",".join(
                _fmt(x)
                for x in (
                    cpl.rho,
                    cpl.rms,
                    cpl.theta,
                    cpl.phi,
                    s.Q,
                    s.g_21,
                    s.g_31,
                    s.g_32,
                    s.gap,
                )
            )
        )
    path = out / "metric_sweep.csv"
    _write_csv(path, config, "rho,rms,theta,phi,Q,g_21,g_31,g_32,gap", rows)
    return path


def _cmd_sense(config: Config, out: Path) -> Path:
    result = estimate_R(
        config.device,
        search=config.search,
        scan=config.scan,
        trs_threshold=config.trs_threshold,
        noise=config.noise,
    )
    payload = {
        "aligned_theta": result.aligned_theta,
        "aligned_phi": result.aligned_phi,
        "r_magnitude": result.r_magnitude,
        "r_estimate": list(result.r_estimate),
        "r_y_estimate": result.r_y_estimate,
        "trs_broken": result.trs_broken,
        "trs_threshold": result.trs_threshold,
        "residuals": {
            "secondary_peak_weight_at_alignment": result.secondary_peak_weight,
            "gap_at_closure": result.gap_at_closure,
        },
        "search_evaluations": result.search_evaluations,
        "scan_evaluations": result.scan_evaluations,
    }
    path = out / "sensing.json"
    _write_json(path, config, payload)
    return path


def _cmd_validate(config: Config, out: Path) -> Path:
    report = validation_report(config)
    path = out / "validate.json"
    _write_json(path, config, report)
    return path


_DISPATCH = {
    "spectrum": _cmd_spectrum,
    "dynamics": _cmd_dynamics,
    "fourier": _cmd_fourier,
    "metric": _cmd_metric,
    "sense": _cmd_sense,
    "validate": _cmd_validate,
}


def run(subcommand: str, config: Config, out_dir: str | Path = ".") -> Path:
    """Execute one subcommand, returning the path of the written file."""
    if subcommand not in _DISPATCH:
        raise ValueError(f"unknown subcommand {subcommand!r}; pick from {SUBCOMMANDS}")
    return _DISPATCH[subcommand](config, Path(out_dir))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="crossmon",
        description="Transmon / cross-resonator simulator and sensing toolkit",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="path to a config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument(
        "--seed", type=int, default=None, help="override every configured seed"
    )
    args = parser.parse_args(argv)

    try:
        config = parse_config(Path(args.config).read_text(encoding="utf-8"))
        if args.seed is not None:
            config = config.with_seed(args.seed)
        path = run(args.subcommand, config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CODES["config"]
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CODES["config"]
    except AlignmentSearchError as exc:
        print(f"search failure: {exc}", file=sys.stderr)
        return EXIT_CODES["search"]
    except (ScanRangeError, GapClosureError) as exc:
        print(f"scan failure: {exc}", file=sys.stderr)
        return EXIT_CODES["scan"]
    except (UnsupportedConfigurationError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CODES["invalid"]
    except Exception as exc:  # pragma: no cover - safety net
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_CODES["unexpected"]
    print(path)
    return EXIT_CODES["ok"]


if __name__ == "__main__":
    raise SystemExit(main())
