"""Command-line front end: reproducible runs that emit CSV/JSON tables.

Subcommands: spectrum | evolve | collapse | timeavg | manybody | entropy |
bench.  Flags beat an optional `--config key=value` file, which beats the
built-in defaults; the fully resolved configuration is written beside every
output as `<out>.manifest.json`, and identical configurations produce
byte-identical outputs (floats are printed with 17 significant digits, so
every table re-parses to the exact values that produced it).

Exit codes: 0 success, 2 input error, 3 resource cap, 4 convergence
failure.  The HDYSON_THREADS environment variable sets the worker count
used for parallel maps over time points.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._util import fmt17
from .analytic import (
    closed_form_average,
    estimate_dynamical_exponent,
    psi_finite,
    psi_thermo,
    tail_average,
    tail_bound,
    time_average,
    wave_profile_finite,
    wave_profile_thermo,
)
from .errors import ConvergenceError, InputError, ResourceLimitError
from .geometry import TreeGeometry
from .manybody import (
    SpinState,
    build_spin_hamiltonian,
    evolve_spin,
    quasi_conservation_report,
)
from .oracle import benchmark_fast_ops, dense_evolve_series, fast_evolve_series
from .profiles import SITE_MODE, TruncationPolicy, WaveProfile, expand_shells_to_sites
from .spectral import ModelParams, eigenvalues

__all__ = [
    "RunConfig",
    "build_run_config",
    "cmd_spectrum",
    "cmd_evolve",
    "cmd_collapse",
    "cmd_timeavg",
    "cmd_manybody",
    "cmd_entropy",
    "cmd_bench",
    "main",
    "console_main",
]

COMMANDS = ("spectrum", "evolve", "collapse", "timeavg", "manybody", "entropy", "bench")

EVOLVE_MODES = ("thermo", "finite", "dense", "fast")
ENTROPY_MODES = ("single", "manybody")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings of one run; a run is reproducible from this."""

    command: str
    N: int | None = None
    L: int | None = None
    sigma: float = 1.0
    J: float = 1.0
    h: float = 0.0
    tmax: float | None = None
    dt: float | None = None
    K: int = 64
    mode: str | None = None
    out: str = "out.csv"
    format: str = "csv"
    rmin: int | None = None
    rmax: int | None = None
    points: int | None = None
    nmin: int | None = None
    nmax: int | None = None
    repeats: int | None = None
    compare_single_particle: bool = False
    seed: int = 0  # reserved: every computation here is deterministic


_COMMON_DEFAULTS = {
    "sigma": 1.0,
    "J": 1.0,
    "h": 0.0,
    "K": 64,
    "format": "csv",
    "seed": 0,
    "compare_single_particle": False,
}

_COMMAND_DEFAULTS = {
    "spectrum": {"N": 6, "out": "spectrum.csv"},
    "evolve": {
        "N": 6, "mode": "thermo", "tmax": 20.0, "dt": 0.1, "rmax": 12,
        "out": "evolve.csv",
    },
    "collapse": {
        "tmax": 20.0, "points": 201, "rmin": 1, "rmax": 8, "out": "collapse.csv",
    },
    "timeavg": {"rmin": 0, "rmax": 5, "dt": 0.01, "out": "timeavg.csv"},
    "manybody": {"L": 8, "h": 40.0, "tmax": 10.0, "dt": 0.1, "out": "manybody"},
    "entropy": {
        "mode": "single", "N": 8, "L": 8, "h": 40.0, "tmax": 10.0, "dt": 0.5,
        "out": "entropy.csv",
    },
    "bench": {"nmin": 16, "nmax": 22, "repeats": 5, "out": "bench.csv"},
}

_CONVERTERS = {
    "N": int, "L": int, "sigma": float, "J": float, "h": float,
    "tmax": float, "dt": float, "K": int, "mode": str, "out": str,
    "format": str, "rmin": int, "rmax": int, "points": int, "nmin": int,
    "nmax": int, "repeats": int, "seed": int,
    "compare_single_particle": lambda s: str(s).lower() in ("1", "true", "yes"),
}


def _load_config_file(path: str) -> dict:
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONVERTERS:
            raise InputError(f"{path}:{lineno}: unknown configuration key {key!r}")
        try:
            values[key] = _CONVERTERS[key](value.strip())
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags win on conflict")
    common.add_argument("--N", type=int, help="tree depth, chain length L = 2^N")
    common.add_argument("--sigma", type=float, help="interaction decay exponent")
    common.add_argument("--J", type=float, help="coupling strength")
    common.add_argument("--h", type=float, help="transverse field")
    common.add_argument("--tmax", type=float, help="time horizon (units of 1/J)")
    common.add_argument("--dt", type=float, help="output grid step")
    common.add_argument("--K", type=int, help="mode-series cutoff")
    common.add_argument("--mode", help="evaluation mode of the subcommand")
    common.add_argument("--out", help="output path (or stem for manybody)")
    common.add_argument("--format", choices=("csv", "json"), help="table format")
    common.add_argument("--seed", type=int, help="reserved")

    parser = argparse.ArgumentParser(
        prog="hdyson",
        description="hierarchical-chain excitation dynamics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("spectrum", parents=[common],
                   help="distinct hopping eigenvalues with multiplicities")
    p_evolve = sub.add_parser("evolve", parents=[common],
                              help="shell amplitudes and probabilities over time")
    p_evolve.add_argument("--rmax", type=int, help="largest shell to emit")
    p_collapse = sub.add_parser("collapse", parents=[common],
                                help="scaling-collapse curves and exponent fit")
    p_collapse.add_argument("--rmin", type=int)
    p_collapse.add_argument("--rmax", type=int)
    p_collapse.add_argument("--points", type=int, help="rescaled-time samples")
    p_timeavg = sub.add_parser("timeavg", parents=[common],
                               help="finite-horizon averages vs closed forms")
    p_timeavg.add_argument("--rmin", type=int)
    p_timeavg.add_argument("--rmax", type=int)
    p_many = sub.add_parser("manybody", parents=[common],
                            help="exact full-spin evolution at small L")
    p_many.add_argument("--L", type=int, help="chain length (power of two <= 16)")
    p_many.add_argument("--compare-single-particle", action="store_true",
                        default=None, dest="compare_single_particle")
    p_entropy = sub.add_parser("entropy", parents=[common],
                               help="bipartite entanglement entropy profiles")
    p_entropy.add_argument("--L", type=int, help="chain length for manybody mode")
    p_bench = sub.add_parser("bench", parents=[common],
                             help="wall-time scaling of the O(L) kernels")
    p_bench.add_argument("--nmin", type=int)
    p_bench.add_argument("--nmax", type=int)
    p_bench.add_argument("--repeats", type=int)
    return parser


def build_run_config(argv) -> RunConfig:
    """Parse argv and resolve flags > config file > defaults."""
    args = vars(_build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    file_values = _load_config_file(config_path) if config_path else {}

    resolved = dict(_COMMON_DEFAULTS)
    resolved.update(_COMMAND_DEFAULTS[command])
    for key, value in file_values.items():
        resolved[key] = value
    for key, value in args.items():
        if value is not None:
            resolved[key] = value
    allowed = {f for f in RunConfig.__dataclass_fields__ if f != "command"}
    resolved = {k: v for k, v in resolved.items() if k in allowed}
    return RunConfig(command=command, **resolved)


# ---------------------------------------------------------------------------
# table and manifest writers
# ---------------------------------------------------------------------------

def write_table(path: str, header: list[str], rows, fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(fmt17(value) for value in row))
        Path(path).write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        records = []
        for row in rows:
            record = {}
            for key, value in zip(header, row):
                if isinstance(value, (int, np.integer)) or key in ("k", "r", "x", "N", "L"):
                    record[key] = int(value)
                elif isinstance(value, str):
                    record[key] = value
                else:
                    record[key] = float(value)
            records.append(record)
        Path(path).write_text(json.dumps(records, indent=1) + "\n")
    else:
        raise InputError(f"unknown output format {fmt!r}")
    return str(path)


def _write_manifest(config: RunConfig, outputs: list[str], extras: dict) -> str:
    payload = {
        "package": "hdyson",
        "version": __version__,
        "config": asdict(config),
        "outputs": sorted(outputs),
    }
    payload.update(extras)
    path = f"{config.out}.manifest.json"
    Path(path).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    return path


def _time_grid(tmax: float, dt: float) -> np.ndarray:
    if tmax < 0 or dt <= 0:
        raise InputError(f"need tmax >= 0 and dt > 0, got tmax={tmax}, dt={dt}")
    steps = max(1, int(round(tmax / dt)))
    return np.linspace(0.0, tmax, steps + 1)


def _sided_path(out: str, tag: str) -> str:
    path = Path(out)
    return str(path.with_name(path.stem + tag + path.suffix))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(config: RunConfig) -> dict:
    params = ModelParams(TreeGeometry(config.N), J=config.J,
                         sigma=config.sigma, h=config.h)
    spec = eigenvalues(params)
    rows = [
        (k, spec.eps[k], int(spec.degeneracy[k]))
        for k in range(spec.eps.size)
    ]
    out = write_table(config.out, ["k", "epsilon", "degeneracy"], rows, config.format)
    return {"outputs": [out]}


def _delta_profile(geom: TreeGeometry) -> WaveProfile:
    amp = np.zeros(geom.length, dtype=complex)
    amp[0] = 1.0
    return WaveProfile(amp, 0.0, SITE_MODE)


def cmd_evolve(config: RunConfig) -> dict:
    if config.mode not in EVOLVE_MODES:
        raise InputError(f"evolve mode must be one of {EVOLVE_MODES}, got {config.mode!r}")
    grid = _time_grid(config.tmax, config.dt)
    policy = TruncationPolicy(config.K)

    if config.mode == "thermo":
        r_top = config.rmax
        shell_amps = np.array(
            [psi_thermo(r, grid, config.sigma, config.J, policy) for r in range(r_top + 1)]
        )
    else:
        params = ModelParams(TreeGeometry(config.N), J=config.J,
                             sigma=config.sigma, h=config.h)
        r_top = params.geom.levels
        if config.mode == "finite":
            shell_amps = np.array(
                [psi_finite(r, grid, params) for r in range(r_top + 1)]
            )
        else:
            if config.mode == "dense":
                sites = dense_evolve_series(params, grid, _delta_profile(params.geom))
            else:
                sites = fast_evolve_series(params, grid, _delta_profile(params.geom).amplitudes)
            picks = [0] + [1 << (r - 1) for r in range(1, r_top + 1)]
            shell_amps = sites[:, picks].T

    weights = np.array([1.0] + [2.0 ** (r - 1) for r in range(1, r_top + 1)])
    rows = []
    for it, t in enumerate(grid):
        for r in range(r_top + 1):
            amp = shell_amps[r, it]
            rows.append((t, r, amp.real, amp.imag, weights[r] * abs(amp) ** 2))
    out = write_table(config.out, ["t", "r", "psi_re", "psi_im", "P"], rows, config.format)
    return {"outputs": [out]}


def cmd_collapse(config: RunConfig) -> dict:
    if config.rmin < 1 or config.rmax < config.rmin:
        raise InputError(f"need 1 <= rmin <= rmax, got {config.rmin}..{config.rmax}")
    policy = TruncationPolicy(config.K)
    s_grid = np.linspace(0.0, config.tmax, config.points)
    rows = []
    for r in range(config.rmin, config.rmax + 1):
        curve = 2.0 ** r * psi_thermo(
            r, s_grid * 2.0 ** (config.sigma * r), config.sigma, config.J, policy
        )
        for s, value in zip(s_grid, curve):
            rows.append((s, value.real, value.imag, r))
    out = write_table(config.out, ["s", "F_re", "F_im", "r_source"], rows, config.format)

    fit_grid = np.linspace(0.0, min(config.tmax, 6.0), 61)[1:]
    z_est = estimate_dynamical_exponent(
        lambda r, t: psi_thermo(r, t, config.sigma, config.J, policy),
        range(config.rmin, config.rmax + 1),
        fit_grid,
    )
    print(f"recovered dynamical exponent z = {z_est:.6f} (sigma = {config.sigma})")
    return {"outputs": [out], "z_estimate": z_est}


def cmd_timeavg(config: RunConfig) -> dict:
    if config.rmin < 0 or config.rmax < config.rmin:
        raise InputError(f"need 0 <= rmin <= rmax, got {config.rmin}..{config.rmax}")
    policy = TruncationPolicy(config.K)
    horizons, averages, rows = [], [], []
    for r in range(config.rmin, config.rmax + 1):
        horizon = config.tmax if config.tmax else 100.0 * 2.0 ** (r * config.sigma)
        value = time_average(r, horizon, config.sigma, config.J, policy, dt=config.dt)
        horizons.append(horizon)
        averages.append(value)
        rows.append((r, horizon, value, closed_form_average(r)))
    out = write_table(
        config.out, ["r", "T", "numerical_avg", "closed_form"], rows, config.format
    )

    tail_rows = []
    accumulated = 0.0
    for i, r in enumerate(range(config.rmin, config.rmax + 1)):
        accumulated += averages[i]
        if config.rmin == 0:  # 1 - cumulative average only closes from r = 0
            tail_rows.append(
                (r, horizons[i], 1.0 - accumulated, tail_average(r), tail_bound(r))
            )
    outputs = [out]
    if tail_rows:
        tail_path = _sided_path(config.out, "_tail")
        outputs.append(write_table(
            tail_path,
            ["R", "T", "numerical_tail", "closed_form_tail", "bound"],
            tail_rows, config.format,
        ))
    return {"outputs": outputs}


def cmd_manybody(config: RunConfig) -> dict:
    if config.L is None or config.L < 2 or config.L & (config.L - 1):
        raise InputError(f"manybody L must be a power of two >= 2, got {config.L}")
    geom = TreeGeometry.from_length(config.L)
    params = ModelParams(geom, J=config.J, sigma=config.sigma, h=config.h)
    if config.compare_single_particle and config.h == 0:
        raise InputError("single-particle comparison needs h > 0 (paramagnetic phase)")
    hamiltonian = build_spin_hamiltonian(params)
    grid = _time_grid(config.tmax, config.dt)
    series = evolve_spin(hamiltonian, SpinState.single_flip(config.L),
                         grid, compute_entropy=True)

    ext = ".csv" if config.format == "csv" else ".json"
    n_rows, p_rows, s_rows = [], [], []
    for it, t in enumerate(grid):
        for x in range(1, config.L + 1):
            n_rows.append((t, x, series.n[it, x - 1]))
        for r in range(geom.levels + 1):
            p_rows.append((t, r, series.shell_p[it, r]))
        for x in range(1, config.L):
            s_rows.append((t, x, series.entropy[it, x - 1]))
    outputs = [
        write_table(f"{config.out}_n{ext}", ["t", "x", "n"], n_rows, config.format),
        write_table(f"{config.out}_P{ext}", ["t", "r", "P"], p_rows, config.format),
        write_table(f"{config.out}_S{ext}", ["t", "x", "S"], s_rows, config.format),
    ]
    extras = {
        "scheme": "adaptive-lanczos-expm",
        "tolerances": {"local_error": 1e-9, "krylov_dim": 30},
        "quasi_conservation_max_deviation": quasi_conservation_report(series),
    }
    if config.compare_single_particle:
        deviation = 0.0
        for it, t in enumerate(grid):
            predicted = np.abs(wave_profile_finite(t, params).amplitudes) ** 2
            deviation = max(deviation, float(np.max(np.abs(series.n[it] - predicted))))
        extras["single_particle_max_deviation"] = deviation
    return {"outputs": outputs, **extras}


def cmd_entropy(config: RunConfig) -> dict:
    if config.mode not in ENTROPY_MODES:
        raise InputError(
            f"entropy mode must be one of {ENTROPY_MODES}, got {config.mode!r}"
        )
    grid = _time_grid(config.tmax, config.dt)
    rows = []
    if config.mode == "single":
        policy = TruncationPolicy(config.K)
        geom = TreeGeometry(config.N)
        for t in grid:
            profile = wave_profile_thermo(t, config.sigma, config.J, policy,
                                          r_max=geom.levels)
            site_probs = np.abs(
                expand_shells_to_sites(profile.amplitudes, geom)
            ) ** 2
            inside = np.cumsum(site_probs)[:-1]
            inside = np.clip(inside, 0.0, 1.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                entropy = -np.where(inside > 0, inside * np.log(inside), 0.0)
                entropy -= np.where(
                    inside < 1, (1 - inside) * np.log(1 - inside), 0.0
                )
            for x in range(1, geom.length):
                rows.append((t, x, entropy[x - 1]))
    else:
        if config.L is None or config.L < 2 or config.L & (config.L - 1):
            raise InputError(f"manybody L must be a power of two >= 2, got {config.L}")
        geom = TreeGeometry.from_length(config.L)
        params = ModelParams(geom, J=config.J, sigma=config.sigma, h=config.h)
        series = evolve_spin(build_spin_hamiltonian(params),
                             SpinState.single_flip(config.L), grid,
                             compute_entropy=True)
        for it, t in enumerate(grid):
            for x in range(1, config.L):
                rows.append((t, x, series.entropy[it, x - 1]))
    out = write_table(config.out, ["t", "x", "S"], rows, config.format)
    return {"outputs": [out]}


def cmd_bench(config: RunConfig) -> dict:
    if config.nmin < 1 or config.nmax < config.nmin:
        raise InputError(f"need 1 <= nmin <= nmax, got {config.nmin}..{config.nmax}")
    bench = benchmark_fast_ops(range(config.nmin, config.nmax + 1),
                               repeats=config.repeats,
                               sigma=config.sigma, J=config.J)
    rows = [(b["N"], b["L"], b["op"], b["mean_ns"], b["stddev_ns"]) for b in bench]
    out = write_table(config.out, ["N", "L", "op", "mean_ns", "stddev_ns"],
                      rows, config.format)
    return {"outputs": [out]}


_DISPATCH = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "collapse": cmd_collapse,
    "timeavg": cmd_timeavg,
    "manybody": cmd_manybody,
    "entropy": cmd_entropy,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    try:
        config = build_run_config(argv)
        payload = _DISPATCH[config.command](config)
        outputs = payload.pop("outputs")
        manifest = _write_manifest(config, outputs, payload)
        for path in outputs:
            print(f"wrote {path}")
        print(f"wrote {manifest}")
        return 0
    except InputError as exc:  # includes SingularLimitError
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 4


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
