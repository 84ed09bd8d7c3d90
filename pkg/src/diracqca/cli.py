"""Command-line front end: figure-data regeneration and the property suite.

Every run is deterministic for a fixed configuration (and seed, where one is
used), and emits plain CSV / key-value text files only; plotting is left to
external tools. Exit codes: 0 success, 1 validation error, 2 numerical
failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import engine, verification, wavepackets
from .engine import (
    SpectralAmplitude,
    amplitude_norm,
    boost_state,
    brillouin_grid,
    embed_positive_branch,
    evolve_direct,
    evolve_spectral,
    localized_state,
    normalized,
    position_density,
    project_positive_branch,
    read_state_csv,
    write_spectral_csv,
    write_state_csv,
)
from .errors import DiracQCAError, ValidationError
from .kinematics import (
    Boost,
    MassParam,
    deformed_boost,
    dispersion,
    group_velocity,
    invariant_measure,
)
from .wavepackets import GaussianPacket, make_packet, packet_width, relative_locality_experiment

FLOAT_FMT = "%.17g"

EXPERIMENTS = (
    "dispersion",
    "boost-point",
    "boost-localized",
    "boost-packet",
    "relative-locality",
    "evolve",
    "verify",
)


@dataclass
class ExperimentConfig:
    experiment: str = ""
    mass: list = field(default_factory=lambda: [0.1, 0.2, 0.4, 0.8, 1.0])
    beta: list = field(default_factory=lambda: [-0.99])
    cells: int = 4096
    steps: int = 100
    k0: list = field(default_factory=lambda: [0.3])
    sigma_k: float = 0.02
    x0: list = field(default_factory=list)
    out: str = "out"
    seed: int = 0
    samples: int = 721
    internal: list = field(default_factory=lambda: [1.0, 0.0, 0.0, 0.0])
    method: str = "both"
    state_in: str = ""
    k1: float = 0.05
    k2: float = np.pi / 5
    delta1: float = 0.05
    delta2: float = 0.4
    t_event: float = 600.0
    scale: float = 1.0


def _parse_list(text: str) -> list:
    return [float(part) for part in str(text).split(",") if part.strip() != ""]


def parse_config_file(path) -> dict:
    """Plain `key = value` lines; `#` starts a comment; lists are
    comma-separated."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


_LIST_KEYS = {"mass", "beta", "k0", "x0", "internal"}
_INT_KEYS = {"cells", "steps", "seed", "samples"}
_FLOAT_KEYS = {"sigma_k", "k1", "k2", "delta1", "delta2", "t_event", "scale"}
_STR_KEYS = {"out", "method", "state_in", "experiment"}


def build_config(args) -> ExperimentConfig:
    """Defaults (per command) < config file < command-line flags."""
    config = ExperimentConfig()
    config.experiment = args.command
    for key, value in _DEFAULTS.get(args.command, {}).items():
        setattr(config, key, list(value) if isinstance(value, list) else value)
    raw = {}
    if getattr(args, "config", None):
        raw.update(parse_config_file(args.config))
    for key in vars(args):
        value = getattr(args, key)
        if key in ("config", "command") or value is None:
            continue
        raw[key] = value
    for key, value in raw.items():
        if not hasattr(config, key):
            raise ValidationError(f"unknown configuration key {key!r}")
        if key in _LIST_KEYS:
            value = _parse_list(value) if isinstance(value, str) else list(value)
        elif key in _INT_KEYS:
            value = int(value)
        elif key in _FLOAT_KEYS:
            value = float(value)
        elif key in _STR_KEYS:
            value = str(value)
        setattr(config, key, value)
    return config


def validate_config(config: ExperimentConfig) -> None:
    """Reject values that would violate an operation precondition, naming it."""
    if not config.mass:
        raise ValidationError("mass list must be nonempty (dispersion precondition)")
    for m in config.mass:
        if not 0.0 <= m <= 1.0:
            raise ValidationError(f"mass {m} outside [0, 1] (mass parameter precondition)")
    for b in config.beta:
        if not abs(b) < 1.0:
            raise ValidationError(f"beta {b} outside (-1, 1) (boost precondition)")
    if config.cells < 2 or config.cells % 2:
        raise ValidationError("cells must be a positive even lattice size")
    if config.steps < 0:
        raise ValidationError("steps must be >= 0 (evolution precondition)")
    if config.sigma_k <= 0:
        raise ValidationError("sigma_k must be positive (packet precondition)")
    for k in config.k0:
        if not -np.pi <= k <= np.pi:
            raise ValidationError(f"k0 {k} outside the Brillouin zone [-pi, pi]")
    if len(config.internal) != 4:
        raise ValidationError("internal must have four entries: re_r, im_r, re_l, im_l")
    if config.method not in ("direct", "spectral", "both"):
        raise ValidationError("method must be direct, spectral, or both")
    if config.samples < 5:
        raise ValidationError("samples must be >= 5")


def _outdir(config: ExperimentConfig) -> Path:
    path = Path(config.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_rows(path: Path, header, rows) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(FLOAT_FMT % v if isinstance(v, float) else str(v) for v in row))
            fh.write("\n")
    tmp.replace(path)


def _write_report(path: Path, entries) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        for key, value in entries:
            if isinstance(value, float):
                value = FLOAT_FMT % value
            fh.write(f"{key} = {value}\n")
    tmp.replace(path)


def _config_echo(config: ExperimentConfig):
    for key in (
        "experiment mass beta cells steps k0 sigma_k x0 out seed samples internal "
        "method state_in k1 k2 delta1 delta2 t_event scale".split()
    ):
        value = getattr(config, key)
        if isinstance(value, list):
            value = ",".join(FLOAT_FMT % v if isinstance(v, float) else str(v) for v in value)
        elif isinstance(value, float):
            value = FLOAT_FMT % value
        yield f"config.{key}", value


def run_dispersion_sweep(config: ExperimentConfig) -> int:
    out = _outdir(config)
    grid = np.linspace(-np.pi, np.pi, config.samples)
    rows = []
    for m in config.mass:
        mass = MassParam(m)
        omegas = dispersion(grid, mass).omega
        velocities = group_velocity(grid, mass)
        for k, omega, v in zip(grid, omegas, velocities):
            rows.append((float(m), float(k), float(omega), float(v)))
    _write_rows(out / "dispersion.csv", ["m", "k", "omega", "v"], rows)
    print(f"wrote {out / 'dispersion.csv'} ({len(rows)} rows)")
    return 0


def run_boost_point(config: ExperimentConfig) -> int:
    out = _outdir(config)
    rows = []
    for m in config.mass:
        mass = MassParam(m)
        for b in config.beta:
            for k in config.k0:
                pt = dispersion(k, mass)
                img = deformed_boost(pt, Boost(b), mass)
                rows.append(
                    (
                        float(m),
                        float(b),
                        float(pt.k),
                        float(pt.omega),
                        float(img.k),
                        float(img.omega),
                        float(group_velocity(pt.k, mass)),
                        float(group_velocity(img.k, mass)),
                        float(invariant_measure(pt.k, mass)),
                        float(invariant_measure(img.k, mass)),
                    )
                )
    header = ["m", "beta", "k", "omega", "k_prime", "omega_prime", "v", "v_prime", "mu", "mu_prime"]
    _write_rows(out / "boost_point.csv", header, rows)
    print(f"wrote {out / 'boost_point.csv'} ({len(rows)} rows)")
    return 0


def _localized_amplitude(config: ExperimentConfig, mass: MassParam):
    internal = np.array(
        [config.internal[0] + 1j * config.internal[1], config.internal[2] + 1j * config.internal[3]]
    )
    norm = np.linalg.norm(internal)
    if norm == 0:
        raise ValidationError("internal state must be nonzero")
    x0 = int(config.x0[0]) if config.x0 else config.cells // 2
    state = localized_state(x0, internal / norm, config.cells)
    return project_positive_branch(state, mass)


def run_boost_localized(config: ExperimentConfig) -> int:
    out = _outdir(config)
    report = list(_config_echo(config))
    for m in config.mass:
        mass = MassParam(m)
        projection = _localized_amplitude(config, mass)
        amp = normalized(projection.amplitude, mass)
        lab_density = position_density(embed_positive_branch(amp, mass))
        tag_m = f"m{m:g}"
        report.append((f"{tag_m}.positive_weight", projection.positive_weight))
        report.append((f"{tag_m}.negative_weight", projection.negative_weight))
        report.append((f"{tag_m}.excluded_weight", projection.excluded_weight))
        for b in config.beta:
            boosted = boost_state(amp, Boost(b), mass)
            drift = abs(amplitude_norm(boosted, mass) - 1.0)
            boosted = normalized(boosted, mass)
            boosted_density = position_density(embed_positive_branch(boosted, mass))
            tag = f"{tag_m}_beta{b:g}"
            _write_rows(
                out / f"density_{tag}.csv",
                ["x", "p_lab", "p_boosted"],
                [
                    (x, float(lab_density[x]), float(boosted_density[x]))
                    for x in range(config.cells)
                ],
            )
            mu = engine._measure_on_grid(amp.grid, mass)
            _write_rows(
                out / f"spectrum_{tag}.csv",
                ["k", "g_abs_lab", "g_abs_boosted", "mu"],
                [
                    (float(amp.grid[j]), float(abs(amp.values[j])), float(abs(boosted.values[j])), float(mu[j]))
                    for j in range(config.cells)
                ],
            )
            report.append((f"{tag}.norm_drift", drift))
            report.append((f"{tag}.density_sum_lab", float(lab_density.sum())))
            report.append((f"{tag}.density_sum_boosted", float(boosted_density.sum())))
    _write_report(out / "boost_localized_report.txt", report)
    print(f"wrote {out}/density_*.csv, spectrum_*.csv, boost_localized_report.txt")
    return 0


def run_boost_packet(config: ExperimentConfig) -> int:
    out = _outdir(config)
    report = list(_config_echo(config))
    for m in config.mass:
        mass = MassParam(m)
        k0 = config.k0[0]
        x0 = config.x0[0] if config.x0 else config.cells / 2.0
        amp = make_packet(GaussianPacket(k0=k0, sigma_k=config.sigma_k, x0=x0, mass=mass), config.cells)
        lab_density = position_density(embed_positive_branch(amp, mass))
        width_x, width_k = packet_width(amp, mass)
        tag_m = f"m{m:g}"
        report.append((f"{tag_m}.width_x_lab", width_x))
        report.append((f"{tag_m}.width_k_lab", width_k))
        for b in config.beta:
            boosted = boost_state(amp, Boost(b), mass)
            drift = abs(amplitude_norm(boosted, mass) - 1.0)
            density = position_density(embed_positive_branch(boosted, mass))
            bx, bk = packet_width(boosted, mass)
            tag = f"{tag_m}_beta{b:g}"
            _write_rows(
                out / f"packet_density_{tag}.csv",
                ["x", "p_lab", "p_boosted"],
                [(x, float(lab_density[x]), float(density[x])) for x in range(config.cells)],
            )
            mu = engine._measure_on_grid(amp.grid, mass)
            _write_rows(
                out / f"packet_spectrum_{tag}.csv",
                ["k", "g_abs_lab", "g_abs_boosted", "mu"],
                [
                    (float(amp.grid[j]), float(abs(amp.values[j])), float(abs(boosted.values[j])), float(mu[j]))
                    for j in range(config.cells)
                ],
            )
            report.append((f"{tag}.norm_drift", drift))
            report.append((f"{tag}.width_x_boosted", bx))
            report.append((f"{tag}.width_k_boosted", bk))
            report.append((f"{tag}.width_ratio", bx / width_x))
    _write_report(out / "boost_packet_report.txt", report)
    print(f"wrote {out}/packet_*.csv, boost_packet_report.txt")
    return 0


def run_relative_locality(config: ExperimentConfig) -> int:
    out = _outdir(config)
    mass = MassParam(config.mass[0])
    rep = relative_locality_experiment(
        config.k1,
        config.k2,
        Boost(config.beta[0]),
        mass,
        n_cells=config.cells,
        sigma_k=config.sigma_k,
        delta1=config.delta1,
        delta2=config.delta2,
        t_event=config.t_event,
    )
    entries = list(_config_echo(config))
    entries += [
        ("members", ",".join(FLOAT_FMT % k for k in rep.members)),
        ("lab_event.t", rep.lab_event.t),
        ("lab_event.x", rep.lab_event.x),
        ("lab_event_pair1.t", rep.lab_event_pair1.t),
        ("lab_event_pair1.x", rep.lab_event_pair1.x),
        ("lab_event_pair2.t", rep.lab_event_pair2.t),
        ("lab_event_pair2.x", rep.lab_event_pair2.x),
        ("boosted_event_pair1.t", rep.boosted_event_pair1.t),
        ("boosted_event_pair1.x", rep.boosted_event_pair1.x),
        ("boosted_event_pair2.t", rep.boosted_event_pair2.t),
        ("boosted_event_pair2.x", rep.boosted_event_pair2.x),
        ("predicted_event_pair1.t", rep.predicted_event_pair1.t),
        ("predicted_event_pair1.x", rep.predicted_event_pair1.x),
        ("predicted_event_pair2.t", rep.predicted_event_pair2.t),
        ("predicted_event_pair2.x", rep.predicted_event_pair2.x),
        ("naive_event_pair1.t", rep.naive_event_pair1.t),
        ("naive_event_pair1.x", rep.naive_event_pair1.x),
        ("naive_event_pair2.t", rep.naive_event_pair2.t),
        ("naive_event_pair2.x", rep.naive_event_pair2.x),
        ("delta_emp", rep.delta_emp),
        ("delta_pred", rep.delta_pred),
        ("delta_naive", rep.delta_naive),
        ("prediction_gap", rep.prediction_gap),
        ("fit_noise", rep.fit_noise),
    ]
    _write_report(out / "relative_locality_report.txt", entries)
    rows = []
    for frame, times, fits in (
        ("lab", rep.lab_times, rep.lab_trajectories),
        ("boosted", rep.boosted_times, rep.boosted_trajectories),
    ):
        for t in times:
            rows.append(
                (
                    float(t),
                    float(fits[0].x_ref + fits[0].v * t),
                    float(fits[1].x_ref + fits[1].v * t),
                    float(fits[2].x_ref + fits[2].v * t),
                    float(fits[3].x_ref + fits[3].v * t),
                    frame,
                )
            )
    _write_rows(
        out / "trajectories.csv",
        ["t", "x_fit_pair1_a", "x_fit_pair1_b", "x_fit_pair2_a", "x_fit_pair2_b", "frame"],
        rows,
    )
    print(
        f"wrote {out}/relative_locality_report.txt, trajectories.csv "
        f"(delta_emp={rep.delta_emp:.3f}, delta_pred={rep.delta_pred:.3f})"
    )
    return 0


def run_evolve(config: ExperimentConfig) -> int:
    out = _outdir(config)
    mass = MassParam(config.mass[0])
    if config.state_in:
        state = read_state_csv(config.state_in)
    else:
        x0 = int(config.x0[0]) if config.x0 else config.cells // 2
        state = localized_state(x0, (1.0, 0.0), config.cells)
    report = list(_config_echo(config))
    results = {}
    if config.method in ("direct", "both"):
        results["direct"] = evolve_direct(state, mass, config.steps)
    if config.method in ("spectral", "both"):
        results["spectral"] = evolve_spectral(state, mass, config.steps)
    if len(results) == 2:
        deviation = max(
            float(np.max(np.abs(results["direct"].psi_r - results["spectral"].psi_r))),
            float(np.max(np.abs(results["direct"].psi_l - results["spectral"].psi_l))),
        )
        report.append(("direct_vs_spectral_max_deviation", deviation))
    final = results.get("direct", results.get("spectral"))
    write_state_csv(final, out / "state_out.csv")
    density = position_density(final)
    _write_rows(
        out / "density.csv",
        ["x", "p"],
        [(x, float(density[x])) for x in range(final.n_cells)],
    )
    report.append(("norm", final.norm()))
    report.append(("backend", engine.step_backend()))
    _write_report(out / "evolve_report.txt", report)
    print(f"wrote {out}/state_out.csv, density.csv, evolve_report.txt")
    return 0


def run_property_suite(config: ExperimentConfig) -> int:
    out = _outdir(config)
    results = verification.run_property_suite(config.seed, scale=config.scale)
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "pass" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {status}  max_residual={r.max_residual:.3e}  tol={r.tolerance:.1e}")
    report = [("seed", str(config.seed)), ("scale", FLOAT_FMT % config.scale)]
    report += [(r.name, f"{'pass' if r.passed else 'FAIL'} {FLOAT_FMT % r.max_residual}") for r in results]
    _write_report(out / "verify_report.txt", report)
    print("\n".join(lines))
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} checks FAILED")
        return 2
    print(f"all {len(results)} checks passed")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="random seed (property sweeps)")
    parser.add_argument("--mass", help="mass or comma-separated list")
    parser.add_argument("--beta", help="boost velocity or comma-separated list")
    parser.add_argument("--cells", type=int, help="lattice size N")
    parser.add_argument("--steps", type=int, help="evolution steps T")
    parser.add_argument("--k0", help="packet momentum (list allowed)")
    parser.add_argument("--sigma-k", dest="sigma_k", type=float, help="packet spectral width")
    parser.add_argument("--x0", help="packet/localized position (list allowed)")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diracqca",
        description="One-dimensional Dirac automaton: deformed boosts and relative locality",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dispersion", help="dispersion and group-velocity sweep")
    _add_common(p)
    p.add_argument("--samples", type=int, help="k-grid sample count")

    p = sub.add_parser("boost-point", help="deformed boost of single on-shell points")
    _add_common(p)

    p = sub.add_parser("boost-localized", help="boost a perfectly localized state")
    _add_common(p)
    p.add_argument("--internal", help="internal state re_r,im_r,re_l,im_l")

    p = sub.add_parser("boost-packet", help="boost a Gaussian packet")
    _add_common(p)

    p = sub.add_parser("relative-locality", help="four-packet coincidence experiment")
    _add_common(p)
    p.add_argument("--k1", type=float, help="first pair momentum")
    p.add_argument("--k2", type=float, help="second pair momentum")
    p.add_argument("--delta1", type=float, help="first pair half-separation")
    p.add_argument("--delta2", type=float, help="second pair half-separation")
    p.add_argument("--t-event", dest="t_event", type=float, help="lab crossing time")

    p = sub.add_parser("evolve", help="evolve a state (direct and/or spectral)")
    _add_common(p)
    p.add_argument("--method", choices=["direct", "spectral", "both"])
    p.add_argument("--state-in", dest="state_in", help="input state CSV")

    p = sub.add_parser("verify", help="run the randomized invariant sweeps")
    _add_common(p)
    p.add_argument("--scale", type=float, help="sample-count scale factor")

    return parser


_RUNNERS = {
    "dispersion": run_dispersion_sweep,
    "boost-point": run_boost_point,
    "boost-localized": run_boost_localized,
    "boost-packet": run_boost_packet,
    "relative-locality": run_relative_locality,
    "evolve": run_evolve,
    "verify": run_property_suite,
}

_DEFAULTS = {
    "boost-packet": {"mass": [0.1], "beta": [-0.99, -0.999], "k0": [0.0]},
    "boost-localized": {"mass": [0.1, 0.3, 0.8], "beta": [-0.99]},
    "relative-locality": {"mass": [0.1], "beta": [-0.5], "cells": 2**14, "sigma_k": 0.01},
    "evolve": {"mass": [0.3], "cells": 256},
    "boost-point": {"mass": [0.1], "beta": [0.5], "k0": [0.2]},
}


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        config = build_config(args)
        validate_config(config)
        return _RUNNERS[args.command](config)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except DiracQCAError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
