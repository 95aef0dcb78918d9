"""Cross-checking oracle suites runnable from the command line.

Each suite pits an implementation against an independently coded reference
and reports its worst deviation; the CLI turns any failure into a nonzero
exit.  The same suites back the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelConfig,
    apply_bs_channel,
    apply_bs_channel_via_tensor,
    bs_block_unitary,
)
from .discrimination import (
    DegenerateSpectrumError,
    HypothesisPair,
    error_gradient,
    error_gradient_fd,
    helstrom_error,
    helstrom_error_pure,
)
from .optimizer import random_feasible_start
from .states import FockVector, counting_statistics, mean_photon


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    cases: int

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"[{flag}] {self.name}: max deviation {self.max_deviation:.3e} "
            f"(tolerance {self.tolerance:.1e}, {self.cases} cases)"
        )


def _random_probe(rng: np.random.Generator, dim: int) -> FockVector:
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return FockVector(vec, normalize=True)


def channel_oracle_suite(cases: int = 100, seed: int = 7, dim: int = 8) -> SuiteResult:
    """Received state via sector-unitary conjugation against the
    process-tensor contraction, entrywise."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        probe = _random_probe(rng, dim)
        config = ChannelConfig(
            r=float(rng.uniform(0.0, 1.0)),
            n_env=float(rng.uniform(0.0, 1.0)),
            dim_probe=dim,
        )
        via_unitary = apply_bs_channel(probe, config).rho_recv.entries
        via_tensor = apply_bs_channel_via_tensor(probe, config)
        worst = max(worst, float(np.max(np.abs(via_unitary - via_tensor))))
    return SuiteResult("channel tensor vs sector unitary", worst <= 1e-10, worst, 1e-10, cases)


def unitarity_suite(cases: int = 40, seed: int = 11, n_max: int = 14) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(0, n_max + 1))
        u = bs_block_unitary(n, float(rng.uniform(0.0, 1.0)))
        worst = max(worst, float(np.max(np.abs(u @ u.T - np.eye(n + 1)))))
    return SuiteResult("sector unitarity", worst <= 1e-12, worst, 1e-12, cases)


def conservation_suite(cases: int = 50, seed: int = 13, dim: int = 8) -> SuiteResult:
    """Trace and mean-photon bookkeeping through the channel.

    With a vacuum environment all populated sectors stay inside the readout
    truncation, so conservation must hold to 1e-10; for thermal
    environments the dropped-mass accounting must balance exactly.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        probe = _random_probe(rng, dim)
        config = ChannelConfig(r=float(rng.uniform(0.0, 1.0)), n_env=0.0, dim_probe=dim)
        out = apply_bs_channel(probe, config)
        in_mean = mean_photon(probe)
        worst = max(worst, abs(out.rho_recv.trace() - out.input_trace))
        worst = max(
            worst,
            abs(mean_photon(out.rho_recv) + mean_photon(out.rho_lost) - in_mean),
        )
    for _ in range(cases):
        probe = _random_probe(rng, dim)
        config = ChannelConfig(
            r=float(rng.uniform(0.0, 1.0)), n_env=float(rng.uniform(0.0, 0.5)), dim_probe=dim
        )
        out = apply_bs_channel(probe, config)
        worst = max(
            worst, abs(out.rho_recv.trace() + out.dropped_recv_mass - out.input_trace)
        )
    return SuiteResult("channel conservation", worst <= 1e-10, worst, 1e-10, 2 * cases)


def helstrom_closed_form_suite(cases: int = 100, seed: int = 17, dim: int = 8) -> SuiteResult:
    """General eigenvalue kernel against the two-pure-states closed form."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        a = _random_probe(rng, dim)
        b = _random_probe(rng, dim)
        p0 = float(rng.uniform(0.05, 0.95))
        overlap = float(np.abs(np.vdot(a.coeffs, b.coeffs)) ** 2)
        numeric = helstrom_error(HypothesisPair(a.density(), b.density(), p0))
        closed = helstrom_error_pure(overlap, p0)
        worst = max(worst, abs(numeric - closed))
    return SuiteResult("pure-state Helstrom closed form", worst <= 1e-10, worst, 1e-10, cases)


def gradient_suite(cases: int = 50, seed: int = 19, dim: int = 8) -> SuiteResult:
    """Analytic eigenvalue-perturbation gradient against central finite
    differences, on random feasible points away from flagged degeneracies."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < cases:
        n_bar = float(rng.uniform(0.2, 2.0))
        config = ChannelConfig(
            r=float(rng.uniform(0.05, 0.95)),
            n_env=float(rng.choice([0.0, 0.1, 0.3])),
            dim_probe=dim,
        )
        x = random_feasible_start(rng, n_bar, dim)
        try:
            analytic = error_gradient(x, config)
        except DegenerateSpectrumError:
            continue  # flagged: the caller contract says use finite differences
        numeric = error_gradient_fd(x, config)
        scale = max(1e-12, float(np.max(np.abs(numeric))))
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
        done += 1
    return SuiteResult("error gradient vs finite differences", worst <= 1e-5, worst, 1e-5, cases)


def thinning_composition_suite(cases: int = 100, seed: int = 23, dim: int = 10) -> SuiteResult:
    """Binomial thinning composes: r1 after r2 equals the product r1*r2."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        diag = rng.uniform(0.0, 1.0, dim)
        diag /= diag.sum()
        r1 = float(rng.uniform(0.0, 1.0))
        r2 = float(rng.uniform(0.0, 1.0))
        twice = counting_statistics(counting_statistics(diag, r1), r2)
        once = counting_statistics(diag, r1 * r2)
        worst = max(worst, float(np.max(np.abs(twice - once))))
    return SuiteResult("binomial thinning composition", worst <= 1e-10, worst, 1e-10, cases)


ALL_SUITES = (
    unitarity_suite,
    channel_oracle_suite,
    conservation_suite,
    helstrom_closed_form_suite,
    gradient_suite,
    thinning_composition_suite,
)


def run_all(cases: int | None = None, seed: int | None = None) -> list[SuiteResult]:
    results = []
    for suite in ALL_SUITES:
        kwargs = {}
        if cases is not None:
            kwargs["cases"] = cases
        if seed is not None:
            kwargs["seed"] = seed
        results.append(suite(**kwargs))
    return results
