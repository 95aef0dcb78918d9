"""Command-line front end.

Subcommands: optimize | sweep | analyze | wigner | validate.  Parameters
come from flags, optionally layered over an INI config file (flags win).
Identical configuration and seed produce byte-identical output artifacts.

Exit codes: 0 success, 1 validation-suite failure, 2 configuration error,
3 solver non-convergence, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import serialization as ser
from .channel import ChannelConfig, hypothesis_states
from .discrimination import HypothesisPair, helstrom_error
from .optimizer import (
    AllStartsFailedError,
    Objective,
    OptimizationProblem,
    optimize_probe,
)
from .states import (
    DEFAULT_DIM,
    DEFAULT_PHASE_GRID,
    DensityMatrix,
    FockVector,
    coherence,
    coherent_coefficients,
    counting_statistics,
    default_wigner_axes,
    fidelity,
    mean_photon,
    phase_distribution,
    phase_fwhm,
    photon_variance,
    vacuum_probability,
    wigner,
)
from .sweep import default_r_grid, probe_record, sweep
from .validate import run_all

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_IO = 4

OUTDIR_ENV = "QTDOPT_OUTDIR"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Resolved parameters of one CLI invocation."""

    r: float | None = None
    r_grid: str | None = None
    n_env: list[float] = field(default_factory=lambda: [0.0])
    n_bar: list[float] = field(default_factory=lambda: [1.0])
    dim: int = DEFAULT_DIM
    objectives: list[Objective] = field(default_factory=lambda: [Objective.HELSTROM_DM])
    prior: float = 0.5
    restarts: int = 8
    seed: int = 0
    workers: int = 1
    out_dir: Path = field(default_factory=Path)
    phase_grid: int = DEFAULT_PHASE_GRID
    emit_phase: bool = False
    emit_hypotheses: bool = False

    def validate(self) -> None:
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.dim < 1:
            raise ConfigError("dim must be positive")
        if not 0.0 <= self.prior <= 1.0:
            raise ConfigError("prior must lie in [0, 1]")
        if self.restarts < 0:
            raise ConfigError("restarts must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        for value in self.n_env:
            if value < 0.0:
                raise ConfigError("n-env must be nonnegative")
        for value in self.n_bar:
            if value < 0.0:
                raise ConfigError("n-bar must be nonnegative")
        if self.r is not None and not 0.0 <= self.r <= 1.0:
            raise ConfigError("r must lie in [0, 1]")


def _parse_float_list(text: str) -> list[float]:
    values = [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    if not values:
        raise ConfigError(f"empty list {text!r}")
    return values


def parse_r_grid(spec: str) -> np.ndarray:
    """Grid specs: 'default', 'log:lo,hi,n', 'lin:lo,hi,n', 'list:v1,v2,...'."""
    spec = spec.strip()
    if spec == "default":
        return default_r_grid()
    if ":" not in spec:
        raise ConfigError(f"bad grid spec {spec!r}")
    kind, _, rest = spec.partition(":")
    values = _parse_float_list(rest)
    if kind == "list":
        grid = np.array(sorted(values))
    elif kind in ("log", "lin"):
        if len(values) != 3:
            raise ConfigError(f"{kind} grid needs lo,hi,n")
        lo, hi, count = values
        if count < 2 or lo >= hi:
            raise ConfigError(f"bad {kind} grid bounds")
        grid = (
            np.geomspace(lo, hi, int(count)) if kind == "log" else np.linspace(lo, hi, int(count))
        )
    else:
        raise ConfigError(f"unknown grid kind {kind!r}")
    if grid.size == 0:
        raise ConfigError("empty reflectivity grid")
    if grid[0] < 0.0 or grid[-1] > 1.0:
        raise ConfigError("grid reflectivities must lie in [0, 1]")
    return grid


def _read_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    values: dict = {}
    channel = parser["channel"] if parser.has_section("channel") else {}
    if "r" in channel:
        values["r"] = float(channel["r"])
    if "n_env" in channel:
        values["n_env"] = _parse_float_list(channel["n_env"])
    if "n_bar" in channel:
        values["n_bar"] = _parse_float_list(channel["n_bar"])
    if "dim" in channel:
        values["dim"] = int(channel["dim"])
    obj = parser["objective"] if parser.has_section("objective") else {}
    if "objective" in obj:
        values["objectives"] = [
            Objective.from_name(tok.strip()) for tok in obj["objective"].split(",") if tok.strip()
        ]
    if "prior" in obj:
        values["prior"] = float(obj["prior"])
    solver = parser["solver"] if parser.has_section("solver") else {}
    for key, cast in (("restarts", int), ("seed", int), ("workers", int)):
        if key in solver:
            values[key] = cast(solver[key])
    grid = parser["grid"] if parser.has_section("grid") else {}
    if "spec" in grid:
        values["r_grid"] = grid["spec"]
    output = parser["output"] if parser.has_section("output") else {}
    if "dir" in output:
        values["out_dir"] = Path(output["dir"])
    for key in ("emit_phase", "emit_hypotheses"):
        if key in output:
            values[key] = output.getboolean(key)
    phase = parser["phase"] if parser.has_section("phase") else {}
    if "grid_size" in phase:
        values["phase_grid"] = int(phase["grid_size"])
    return values


def build_run_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for key, value in _read_config_file(args.config).items():
            setattr(cfg, key, value)
    if getattr(args, "r", None) is not None:
        cfg.r = args.r
    if getattr(args, "r_grid", None) is not None:
        cfg.r_grid = args.r_grid
    if getattr(args, "n_env", None) is not None:
        cfg.n_env = [args.n_env]
    if getattr(args, "n_bar", None) is not None:
        cfg.n_bar = [args.n_bar]
    if getattr(args, "dim", None) is not None:
        cfg.dim = args.dim
    if getattr(args, "objective", None) is not None:
        cfg.objectives = [Objective.from_name(args.objective)]
    if getattr(args, "prior", None) is not None:
        cfg.prior = args.prior
    if getattr(args, "restarts", None) is not None:
        cfg.restarts = args.restarts
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "workers", None) is not None:
        cfg.workers = args.workers
    if getattr(args, "phase_grid", None) is not None:
        cfg.phase_grid = args.phase_grid
    if getattr(args, "emit_phase", False):
        cfg.emit_phase = True
    if getattr(args, "emit_hypotheses", False):
        cfg.emit_hypotheses = True
    if getattr(args, "out", None) is not None:
        cfg.out_dir = Path(args.out)
    elif cfg.out_dir == Path() and os.environ.get(OUTDIR_ENV):
        cfg.out_dir = Path(os.environ[OUTDIR_ENV])
    cfg.validate()
    return cfg


def _tag(value: float) -> str:
    return format(value, "g").replace(".", "p").replace("-", "m")


def _problem(cfg: RunConfig, objective: Objective, r: float, n_env: float, n_bar: float) -> OptimizationProblem:
    return OptimizationProblem(
        objective=objective,
        config=ChannelConfig(r=r, n_env=n_env, dim_probe=cfg.dim),
        n_target=n_bar,
        p0=cfg.prior,
        phase_grid=cfg.phase_grid,
    )


def cmd_optimize(cfg: RunConfig) -> int:
    if cfg.r is None:
        raise ConfigError("optimize needs --r")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    for objective in cfg.objectives:
        for n_env in cfg.n_env:
            for n_bar in cfg.n_bar:
                problem = _problem(cfg, objective, cfg.r, n_env, n_bar)
                prefix = (
                    f"ops_{objective.value}_r{_tag(cfg.r)}_nenv{_tag(n_env)}_nbar{_tag(n_bar)}"
                )
                try:
                    result = optimize_probe(problem, cfg.restarts, cfg.seed)
                except AllStartsFailedError as exc:
                    print(f"{prefix}: no start converged ({exc})", file=sys.stderr)
                    status = EXIT_NO_CONVERGENCE
                    continue
                state = FockVector(result.coeffs.astype(complex), normalize=True)
                record = probe_record(
                    result.coeffs, problem, result.iterations, result.converged
                )
                ser.save_state(cfg.out_dir / f"{prefix}_state.json", state)
                ser.save_summary(
                    cfg.out_dir / f"{prefix}_summary.json",
                    ser.summary_for_result(problem, result, record),
                )
                if cfg.emit_hypotheses:
                    rho0, rho1 = hypothesis_states(state, problem.config)
                    ser.save_state(cfg.out_dir / f"{prefix}_rho0.json", rho0)
                    ser.save_state(cfg.out_dir / f"{prefix}_rho1.json", rho1)
                if cfg.emit_phase:
                    dist = phase_distribution(state.density(), cfg.phase_grid)
                    ref = phase_distribution(
                        coherent_coefficients(n_bar, cfg.dim).density(), cfg.phase_grid
                    )
                    ser.save_phase_csv(cfg.out_dir / f"{prefix}_phase.csv", dist, ref)
                print(
                    f"{prefix}: objective={result.objective_value:.6g} "
                    f"qa_db={record.qa_db:.4f} converged={result.converged}"
                )
    return status


def _sweep_one(payload) -> list:
    # module-level worker so the process pool can pickle it
    grid, template, restarts, seed = payload
    return sweep(grid, template, restarts=restarts, seed=seed, warm_start=False)


def cmd_sweep(cfg: RunConfig) -> int:
    grid = parse_r_grid(cfg.r_grid or "default")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    jobs = []
    for objective in cfg.objectives:
        for n_env in cfg.n_env:
            for n_bar in cfg.n_bar:
                template = _problem(cfg, objective, float(grid[0]), n_env, n_bar)
                name = f"sweep_{objective.value}_nenv{_tag(n_env)}_nbar{_tag(n_bar)}"
                jobs.append((name, template))
    status = EXIT_OK
    if cfg.workers > 1 and len(jobs) > 1:
        # parallel tables forgo warm starts; per-point seeding keeps each
        # table independent of scheduling
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(
                pool.map(
                    _sweep_one,
                    [(grid, template, cfg.restarts, cfg.seed) for _, template in jobs],
                )
            )
        for (name, _), points in zip(jobs, results):
            ser.save_sweep_csv(cfg.out_dir / f"{name}.csv", [p.record for p in points])
    else:
        # serial path streams each row to disk as it is computed, so a
        # failure mid-grid leaves the finished points on disk
        results = []
        for name, template in jobs:
            with ser.SweepCsvWriter(cfg.out_dir / f"{name}.csv") as writer:
                results.append(
                    sweep(
                        grid,
                        template,
                        restarts=cfg.restarts,
                        seed=cfg.seed,
                        warm_start=True,
                        on_point=lambda point, w=writer: w.add(point.record),
                    )
                )
    for (name, _), points in zip(jobs, results):
        ser.save_sweep_coefficients(cfg.out_dir / f"{name}_coeffs.json", points)
        bad = sum(1 for p in points if not p.record.converged)
        if bad:
            print(f"{name}: {bad}/{len(points)} points unconverged", file=sys.stderr)
            status = EXIT_NO_CONVERGENCE
        print(f"{name}: wrote {len(points)} points")
    return status


def cmd_analyze(cfg: RunConfig, state_path: str, phase_out: str | None, counts_out: str | None) -> int:
    state = ser.load_state(state_path)
    rho = state.density() if isinstance(state, FockVector) else state
    n_bar = mean_photon(rho)
    r = cfg.r if cfg.r is not None else 1.0
    n_env = cfg.n_env[0]
    config = ChannelConfig(r=r, n_env=n_env, dim_probe=rho.dim)
    coh = coherent_coefficients(n_bar, rho.dim)
    rho_coh = coh.density()

    dist = phase_distribution(rho, cfg.phase_grid)
    dist_coh = phase_distribution(rho_coh, cfg.phase_grid)
    fwhm = phase_fwhm(dist)
    fwhm_coh = phase_fwhm(dist_coh)
    var = photon_variance(rho)
    var_coh = photon_variance(coh)

    p_err = helstrom_error(
        HypothesisPair(*hypothesis_states_from(rho, config), cfg.prior)
    )
    p_err_coh = helstrom_error(HypothesisPair(*hypothesis_states(coh, config), cfg.prior))

    doc = {
        "source": str(state_path),
        "r": r,
        "n_env": n_env,
        "prior_p0": cfg.prior,
        "mean_photon": n_bar,
        "photon_variance": var,
        "coherence": coherence(rho),
        "coherence_coherent": coherence(rho_coh),
        "coherence_ratio": coherence(rho) / coherence(rho_coh) if coherence(rho_coh) > 0 else "nan",
        "phase_fwhm": fwhm,
        "phase_fwhm_coherent": fwhm_coh,
        "sd_ratio_phi": fwhm / fwhm_coh if fwhm_coh > 0 else "nan",
        "sd_ratio_n": math.sqrt(var / var_coh) if var_coh > 0 else "nan",
        "fidelity_to_coherent": fidelity(rho, rho_coh),
        "p_err": p_err,
        "p_err_coherent": p_err_coh,
        "vacuum_probability": vacuum_probability(rho.diagonal(), r),
    }
    out_path = cfg.out_dir / (Path(state_path).stem + "_analysis.json")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    ser.save_summary(out_path, doc)
    if phase_out:
        ser.save_phase_csv(phase_out, dist, dist_coh)
    if counts_out:
        ser.save_counts_csv(counts_out, counting_statistics(rho.diagonal(), r))
    print(f"analysis written to {out_path}")
    return EXIT_OK


def hypothesis_states_from(rho: DensityMatrix, config: ChannelConfig):
    from .channel import apply_bs_channel
    from .states import thermal_density

    rho0 = thermal_density(config.n_env, config.dim_probe)
    rho1 = apply_bs_channel(rho, config).rho_recv
    return rho0, rho1


def cmd_wigner(cfg: RunConfig, state_path: str, extent: float, points: int) -> int:
    state = ser.load_state(state_path)
    rho = state.density() if isinstance(state, FockVector) else state
    x_axis, p_axis = default_wigner_axes(extent, points)
    grid = wigner(rho, x_axis, p_axis)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / (Path(state_path).stem + "_wigner.csv")
    ser.save_wigner_csv(path, grid)
    print(f"wigner grid written to {path}")
    return EXIT_OK


def cmd_validate(cases: int | None, seed: int | None, out: str | None) -> int:
    results = run_all(cases=cases, seed=seed)
    lines = [result.line() for result in results]
    report = "\n".join(lines) + "\n"
    print(report, end="")
    if out:
        Path(out).write_text(report, encoding="utf-8")
    return EXIT_OK if all(result.passed for result in results) else EXIT_VALIDATION


def _add_common(parser: argparse.ArgumentParser, *, grid: bool) -> None:
    parser.add_argument("--config", help="INI config file; flags override it")
    if grid:
        parser.add_argument("--r-grid", dest="r_grid", help="default | log:lo,hi,n | lin:lo,hi,n | list:v1,v2,...")
    parser.add_argument("--r", type=float, help="target intensity reflectivity in [0, 1]")
    parser.add_argument("--n-env", dest="n_env", type=float, help="environment mean photon number")
    parser.add_argument("--n-bar", dest="n_bar", type=float, help="probe mean photon number constraint")
    parser.add_argument("--dim", type=int, help=f"Fock truncation (default {DEFAULT_DIM})")
    parser.add_argument("--objective", choices=["dm", "ps", "po"], help="optimization objective")
    parser.add_argument("--prior", type=float, help="prior probability of target absence (default 0.5)")
    parser.add_argument("--restarts", type=int, help="random feasible restarts (default 8)")
    parser.add_argument("--seed", type=int, help="RNG seed (default 0)")
    parser.add_argument("--workers", type=int, help="process pool size for sweeps (default 1)")
    parser.add_argument("--phase-grid", dest="phase_grid", type=int, help="phase grid resolution")
    parser.add_argument("--out", help=f"output directory (default ${OUTDIR_ENV} or '.')")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtdopt",
        description="Optimal probe states for quantum target detection on the truncated Fock basis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("optimize", help="optimize the probe at one reflectivity")
    _add_common(p_opt, grid=False)
    p_opt.add_argument("--emit-phase", action="store_true", help="also write the phase-density table")
    p_opt.add_argument("--emit-hypotheses", action="store_true", help="also write rho0/rho1 documents")

    p_sweep = sub.add_parser("sweep", help="optimize across a reflectivity grid, write a CSV table")
    _add_common(p_sweep, grid=True)

    p_an = sub.add_parser("analyze", help="state-character metrics for a saved state")
    _add_common(p_an, grid=False)
    p_an.add_argument("--state", required=True, help="state JSON document")
    p_an.add_argument("--phase-out", dest="phase_out", help="write phase densities (state + coherent reference)")
    p_an.add_argument("--counts-out", dest="counts_out", help="write thinned counting statistics")

    p_wig = sub.add_parser("wigner", help="Wigner grid table for a saved state")
    _add_common(p_wig, grid=False)
    p_wig.add_argument("--state", required=True, help="state JSON document")
    p_wig.add_argument("--extent", type=float, default=5.0, help="quadrature half-range (default 5)")
    p_wig.add_argument("--points", type=int, default=101, help="grid points per axis (default 101)")

    p_val = sub.add_parser("validate", help="run the cross-check oracle suites")
    p_val.add_argument("--cases", type=int, help="cases per suite (default: suite-specific)")
    p_val.add_argument("--seed", type=int, help="suite RNG seed")
    p_val.add_argument("--out", help="write the report to this file")

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.cases, args.seed, args.out)
        cfg = build_run_config(args)
        if args.command == "optimize":
            return cmd_optimize(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.state, args.phase_out, args.counts_out)
        if args.command == "wigner":
            return cmd_wigner(cfg, args.state, args.extent, args.points)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
