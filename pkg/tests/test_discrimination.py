"""Helstrom kernel, advantage measure, and the analytic error gradient."""

import math

import numpy as np
import pytest

from qtdopt import (
    ChannelConfig,
    FockVector,
    HypothesisPair,
    coherent_coefficients,
    error_gradient,
    error_gradient_fd,
    helstrom_error,
    helstrom_error_pure,
    hypothesis_states,
    quantum_advantage,
    trace_norm,
)
from qtdopt.discrimination import DegenerateSpectrumError
from qtdopt.optimizer import random_feasible_start

# mpmath oracle: (1 - sqrt(1 - e^{-1})) / 2
HELSTROM_VAC_COH1 = 0.10246995118967495


def fock(n, dim=8):
    c = np.zeros(dim)
    c[n] = 1.0
    return FockVector(c)


def random_hermitian(rng, dim):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (raw + raw.conj().T)


class TestTraceNorm:
    def test_identity(self):
        assert trace_norm(np.eye(5)) == pytest.approx(5.0, abs=1e-12)

    def test_signed_diagonal(self):
        assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0, abs=1e-12)

    def test_matches_singular_values(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            m = random_hermitian(rng, 8)
            want = float(np.linalg.svd(m, compute_uv=False).sum())
            assert trace_norm(m) == pytest.approx(want, abs=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            trace_norm(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestHelstrom:
    def test_indistinguishable(self):
        rho = fock(2).density()
        assert helstrom_error(HypothesisPair(rho, rho, 0.5)) == pytest.approx(0.5, abs=1e-12)

    def test_orthogonal(self):
        pair = HypothesisPair(fock(0).density(), fock(1).density(), 0.5)
        assert helstrom_error(pair) == pytest.approx(0.0, abs=1e-12)

    def test_vacuum_versus_coherent_closed_form(self):
        pair = HypothesisPair(
            fock(0, 16).density(), coherent_coefficients(1, 16).density(), 0.5
        )
        assert helstrom_error(pair) == pytest.approx(HELSTROM_VAC_COH1, abs=1e-10)

    def test_matches_pure_closed_form(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            a = FockVector(rng.standard_normal(8) + 1j * rng.standard_normal(8), normalize=True)
            b = FockVector(rng.standard_normal(8) + 1j * rng.standard_normal(8), normalize=True)
            p0 = float(rng.uniform(0.05, 0.95))
            overlap = float(abs(np.vdot(a.coeffs, b.coeffs)) ** 2)
            got = helstrom_error(HypothesisPair(a.density(), b.density(), p0))
            assert got == pytest.approx(helstrom_error_pure(overlap, p0), abs=1e-10)

    def test_bounded_by_smaller_prior(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            a = FockVector(rng.standard_normal(6), normalize=True)
            b = FockVector(rng.standard_normal(6), normalize=True)
            p0 = float(rng.uniform(0.0, 1.0))
            err = helstrom_error(HypothesisPair(a.density(), b.density(), p0))
            assert -1e-12 <= err <= min(p0, 1 - p0) + 1e-12

    def test_unitary_invariance(self):
        rng = np.random.default_rng(3)
        a = FockVector(rng.standard_normal(8), normalize=True).density()
        b = FockVector(rng.standard_normal(8), normalize=True).density()
        base = helstrom_error(HypothesisPair(a, b, 0.3))
        raw = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        u, _ = np.linalg.qr(raw)
        from qtdopt import DensityMatrix

        au = DensityMatrix(u @ a.entries @ u.conj().T)
        bu = DensityMatrix(u @ b.entries @ u.conj().T)
        assert helstrom_error(HypothesisPair(au, bu, 0.3)) == pytest.approx(base, abs=1e-10)

    def test_monotone_in_overlap(self):
        # pure pairs with larger overlap are harder to tell apart; the
        # overlap cos^2(t) shrinks as t grows, so the error must shrink too
        angles = np.linspace(0.1, 1.4, 12)
        errs = []
        for t in angles:
            b = FockVector([math.cos(t), math.sin(t), 0, 0])
            errs.append(helstrom_error(HypothesisPair(fock(0, 4).density(), b.density(), 0.5)))
        assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))

    def test_data_processing_attenuation(self):
        # attenuation can only blur the hypotheses for vacuum noise
        rng = np.random.default_rng(4)
        for _ in range(10):
            probe = FockVector(rng.standard_normal(8), normalize=True)
            ideal = HypothesisPair(*hypothesis_states(probe, ChannelConfig(r=1.0, n_env=0.0)))
            lossy = HypothesisPair(
                *hypothesis_states(probe, ChannelConfig(r=float(rng.uniform(0, 1)), n_env=0.0))
            )
            assert helstrom_error(lossy) >= helstrom_error(ideal) - 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            HypothesisPair(fock(0, 4).density(), fock(0, 8).density())


class TestQuantumAdvantage:
    def test_equal_probabilities(self):
        assert quantum_advantage(0.3, 0.3) == pytest.approx(0.0, abs=1e-15)

    def test_factor_two(self):
        # 10 log10 2
        assert quantum_advantage(0.2, 0.1) == pytest.approx(3.010299956639812, abs=1e-12)
        assert quantum_advantage(0.1, 0.05) == pytest.approx(3.010299956639812, abs=1e-12)

    def test_zero_reports_infinity_sentinel(self):
        assert quantum_advantage(0.3, 0.0) == math.inf

    def test_domain(self):
        with pytest.raises(ValueError):
            quantum_advantage(0.0, 0.1)
        with pytest.raises(ValueError):
            quantum_advantage(0.7, 0.1)


class TestErrorGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        checked = 0
        while checked < 50:
            cfg = ChannelConfig(
                r=float(rng.uniform(0.05, 0.95)),
                n_env=float(rng.choice([0.0, 0.1, 0.3])),
            )
            x = random_feasible_start(rng, float(rng.uniform(0.2, 2.0)), 8)
            try:
                analytic = error_gradient(x, cfg)
            except DegenerateSpectrumError:
                continue  # flagged points are excluded by contract
            numeric = error_gradient_fd(x, cfg)
            scale = max(1e-12, float(np.max(np.abs(numeric))))
            assert np.max(np.abs(analytic - numeric)) / scale < 1e-5
            checked += 1

    def test_zero_reflectivity_gives_zero_gradient(self):
        rng = np.random.default_rng(6)
        x = random_feasible_start(rng, 1.0, 8)
        grad = error_gradient(x, ChannelConfig(r=0.0, n_env=0.2))
        assert np.max(np.abs(grad)) < 1e-10

    def test_requires_unit_norm(self):
        with pytest.raises(ValueError, match="unit norm"):
            error_gradient(np.ones(8), ChannelConfig(r=0.5, n_env=0.0))

    def test_first_order_optimality_at_solver_optimum(self):
        from qtdopt import Objective, OptimizationProblem, optimize_probe
        from qtdopt.optimizer import constraint_jacobian

        problem = OptimizationProblem(
            Objective.HELSTROM_DM, ChannelConfig(r=0.7, n_env=0.1), 1.0
        )
        result = optimize_probe(problem, restarts=3, seed=0)
        assert result.converged
        grad = error_gradient_fd(result.coeffs, problem.config)
        jac = constraint_jacobian(result.coeffs, np.arange(8.0))
        # project out the constraint normals
        q, _ = np.linalg.qr(jac.T)
        tangent = grad - q @ (q.T @ grad)
        assert np.linalg.norm(tangent) < 1e-6
