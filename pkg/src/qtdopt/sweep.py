"""Reflectivity sweeps and the transition-reflectivity search.

A sweep optimizes the probe at every reflectivity on a grid and tabulates,
per point, the error probabilities of the optimal and coherent probes, the
advantage in dB, and the state-character diagnostics (fidelity to coherent,
photon-number spread, phase width, off-diagonal weight) that locate the
phase-squeezed and number-squeezed regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import hypothesis_states
from .discrimination import HypothesisPair, helstrom_error, quantum_advantage
from .optimizer import (
    AllStartsFailedError,
    OptimizationProblem,
    OptimizationResult,
    SolverOptions,
    optimize_probe,
)
from .states import (
    FockVector,
    coherence,
    coherent_coefficients,
    fidelity,
    phase_distribution,
    phase_fwhm,
    photon_variance,
)

DEFAULT_BRACKET = (0.02, 0.95)


@dataclass(frozen=True)
class SweepRecord:
    """One tabulated grid point.  Field order matches the CSV schema."""

    r: float
    n_env: float
    n_bar: float
    p_err_coh: float
    p_err_opt: float
    qa_db: float
    fidelity_to_coherent: float
    photon_variance: float
    phase_fwhm: float
    coherence_value: float
    sd_ratio_n: float
    sd_ratio_phi: float
    coherence_ratio: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class SweepPoint:
    """A record plus the coefficient vector that produced it."""

    record: SweepRecord
    coeffs: np.ndarray


class BracketError(ValueError):
    """No sign change of the phase-width ratio inside the given bracket."""


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0.0 else math.nan


def probe_record(
    coeffs: np.ndarray,
    problem: OptimizationProblem,
    iterations: int = 0,
    converged: bool = True,
    phase_grid: int | None = None,
) -> SweepRecord:
    """Tabulate the standard sweep quantities for one probe state."""
    config = problem.config
    grid = phase_grid or problem.phase_grid
    probe = FockVector(np.asarray(coeffs, dtype=complex), normalize=True)
    coh = coherent_coefficients(problem.n_target, config.dim_probe)

    p_err_opt = helstrom_error(HypothesisPair(*hypothesis_states(probe, config), problem.p0))
    p_err_coh = helstrom_error(HypothesisPair(*hypothesis_states(coh, config), problem.p0))

    rho_probe = probe.density()
    rho_coh = coh.density()
    fwhm_probe = phase_fwhm(phase_distribution(rho_probe, grid))
    fwhm_coh = phase_fwhm(phase_distribution(rho_coh, grid))
    var_probe = photon_variance(probe)
    var_coh = photon_variance(coh)

    return SweepRecord(
        r=config.r,
        n_env=config.n_env,
        n_bar=problem.n_target,
        p_err_coh=p_err_coh,
        p_err_opt=p_err_opt,
        qa_db=quantum_advantage(p_err_coh, p_err_opt),
        fidelity_to_coherent=fidelity(rho_probe, rho_coh),
        photon_variance=var_probe,
        phase_fwhm=fwhm_probe,
        coherence_value=coherence(rho_probe),
        sd_ratio_n=_ratio(math.sqrt(max(0.0, var_probe)), math.sqrt(max(0.0, var_coh))),
        sd_ratio_phi=_ratio(fwhm_probe, fwhm_coh),
        coherence_ratio=_ratio(coherence(rho_probe), coherence(rho_coh)),
        iterations=iterations,
        converged=converged,
    )


def optimize_at(
    problem: OptimizationProblem,
    restarts: int,
    seed: int,
    extra_starts: tuple[np.ndarray, ...] = (),
    opts: SolverOptions = SolverOptions(),
) -> tuple[OptimizationResult, bool]:
    """optimize_probe that degrades to the best attempt instead of raising."""
    try:
        return optimize_probe(problem, restarts, seed, extra_starts, opts), True
    except AllStartsFailedError as exc:
        return exc.best, False


def sweep(
    r_grid,
    problem_template: OptimizationProblem,
    restarts: int = 8,
    seed: int = 0,
    warm_start: bool = True,
    opts: SolverOptions = SolverOptions(),
    on_point=None,
) -> list[SweepPoint]:
    """One optimization per grid reflectivity, in grid order.

    The coherent-probe error is recomputed at every point with the same mean
    photon number.  With ``warm_start`` the previous point's optimum joins
    the initialization pool (best-of-all-starts still applies, so warming
    can only help).  Failed points are recorded with ``converged=False``
    and the sweep continues.  ``on_point`` is invoked with each finished
    :class:`SweepPoint` as it lands, letting callers flush partial output.
    """
    r_values = [float(r) for r in r_grid]
    if any(not 0.0 <= r <= 1.0 for r in r_values):
        raise ValueError("reflectivities must lie in [0, 1]")
    if sorted(r_values) != r_values:
        raise ValueError("reflectivity grid must be sorted ascending")

    points: list[SweepPoint] = []
    previous: np.ndarray | None = None
    for index, r in enumerate(r_values):
        problem = replace(
            problem_template, config=replace(problem_template.config, r=r)
        )
        extra = (previous,) if (warm_start and previous is not None) else ()
        result, ok = optimize_at(problem, restarts, _point_seed(seed, index), extra, opts)
        record = probe_record(
            result.coeffs,
            problem,
            iterations=result.iterations,
            converged=bool(ok and result.converged),
        )
        point = SweepPoint(record=record, coeffs=np.asarray(result.coeffs, dtype=float))
        points.append(point)
        if on_point is not None:
            on_point(point)
        if ok and result.converged:
            previous = result.coeffs
    return points


def _point_seed(seed: int, index: int) -> int:
    # scheduling-independent per-point seeding
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(1)[0])


def default_r_grid(
    log_points: int = 25, linear_points: int = 30, log_lo: float = 1e-3, split: float = 0.1, hi: float = 0.99
) -> np.ndarray:
    """Log-spaced points resolving the r -> 0 limit joined to a linear tail
    through the transition region."""
    log_part = np.geomspace(log_lo, split, log_points, endpoint=False)
    lin_part = np.linspace(split, hi, linear_points)
    return np.concatenate([log_part, lin_part])


def find_transition_reflectivity(
    problem_template: OptimizationProblem,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    restarts: int = 8,
    seed: int = 0,
    tol_r: float = 1e-3,
    opts: SolverOptions = SolverOptions(),
) -> float:
    """Reflectivity where the optimal probe reverts to a coherent state.

    Bisection on the sign of (phase-width ratio - 1): below the transition
    the optimal probe is phase squeezed (ratio < 1), above it the ratio
    exceeds 1 as the probe turns number squeezed.  Requires the noisy
    regime n_env > n_target, where the transition exists; raises
    :class:`BracketError` when the bracket shows no sign change (the
    monotone regime).
    """
    config = problem_template.config
    if config.n_env <= problem_template.n_target:
        raise BracketError(
            "transition search needs environment noise above the probe energy"
        )
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0.0 < lo < hi < 1.0:
        raise ValueError("bracket must satisfy 0 < lo < hi < 1")

    def ratio_excess(r: float, index: int) -> float:
        problem = replace(problem_template, config=replace(config, r=r))
        result, _ = optimize_at(problem, restarts, _point_seed(seed, index), (), opts)
        record = probe_record(result.coeffs, problem)
        return record.sd_ratio_phi - 1.0

    f_lo = ratio_excess(lo, 0)
    f_hi = ratio_excess(hi, 1)
    if not (f_lo < 0.0 < f_hi):
        raise BracketError(
            f"no phase-width sign change in bracket ({lo:g}, {hi:g}): "
            f"ratio-1 endpoints {f_lo:.3g}, {f_hi:.3g}"
        )
    index = 2
    while hi - lo > tol_r:
        mid = 0.5 * (lo + hi)
        if ratio_excess(mid, index) < 0.0:
            lo = mid
        else:
            hi = mid
        index += 1
    return 0.5 * (lo + hi)
