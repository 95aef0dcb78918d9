"""Fock-space constructors and measurements against independent oracles.

Frozen constants were computed with 40-digit mpmath arithmetic (factorial
series, geometric sums, adaptive quadrature) independent of the library
code; see the comments next to each value.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_laguerre

from qtdopt import (
    DensityMatrix,
    FockVector,
    TruncationError,
    coherence,
    coherent_coefficients,
    counting_statistics,
    distribution_fidelity,
    fidelity,
    mean_photon,
    phase_distribution,
    phase_fwhm,
    phase_overlap,
    photon_variance,
    pnss,
    thermal_density,
    uniform_phase_distribution,
    vacuum_probability,
    wigner,
)
from qtdopt.states import NonPositiveStateError, coherent_tail_mass

# mpmath oracle: e^{-1/2}/sqrt(n!) renormalized over 8 levels
COHERENT1_C0 = 0.60653376796253654
COHERENT1_C2 = 0.42888414034493751
# mpmath oracle: 1 - sum_{n<8} e^-2 2^n/n!  (direct Poisson summation)
POISSON_TAIL_2_8 = 1.0967189678587027e-3
# mpmath oracle: adaptive quadrature of int sqrt(P_coh * 1/2pi) dphi
OVERLAP_UNIFORM = {0.5: 0.88715644833103606, 1.0: 0.79539444153096049, 2.0: 0.66030054295172271}


def fock(n, dim=8):
    c = np.zeros(dim)
    c[n] = 1.0
    return FockVector(c)


class TestFockVector:
    def test_requires_normalization(self):
        with pytest.raises(ValueError, match="not normalized"):
            FockVector([0.5, 0.5])
        fv = FockVector([0.5, 0.5], normalize=True)
        assert math.isclose(float(np.abs(fv.coeffs) ** 2 @ np.ones(2)), 1.0, abs_tol=1e-12)

    def test_immutable(self):
        fv = fock(0)
        with pytest.raises(AttributeError):
            fv.coeffs = np.zeros(8)
        with pytest.raises(ValueError):
            fv.coeffs[0] = 2.0

    def test_density_is_valid_rank_one(self):
        rho = coherent_coefficients(1, 8).density()
        assert rho.trace() == pytest.approx(1.0, abs=1e-12)
        eigs = np.linalg.eigvalsh(rho.entries)
        assert eigs[-1] == pytest.approx(1.0, abs=1e-12)
        assert eigs[0] >= -1e-12

    @given(st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_random_vectors_normalize(self, dim, seed):
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        if np.linalg.norm(raw) == 0:
            return
        fv = FockVector(raw, normalize=True)
        assert abs(float(np.vdot(fv.coeffs, fv.coeffs).real) - 1.0) < 1e-12


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix([[0.5, 0.5], [0.0, 0.5]])

    def test_rejects_non_psd(self):
        with pytest.raises(NonPositiveStateError):
            DensityMatrix([[1.5, 0.0], [0.0, -0.5]])

    def test_rejects_trace_above_one(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(np.eye(2))


class TestCoherent:
    def test_vacuum_limit(self):
        fv = coherent_coefficients(0, 8)
        assert np.array_equal(fv.coeffs.real, [1, 0, 0, 0, 0, 0, 0, 0])

    def test_matches_factorial_series(self):
        fv = coherent_coefficients(1, 8)
        assert fv.coeffs[0].real == pytest.approx(COHERENT1_C0, abs=1e-15)
        assert fv.coeffs[1].real == pytest.approx(COHERENT1_C0, abs=1e-15)
        assert fv.coeffs[2].real == pytest.approx(COHERENT1_C2, abs=1e-15)

    def test_tail_mass_poisson(self):
        assert coherent_tail_mass(2.0, 8) == pytest.approx(POISSON_TAIL_2_8, rel=1e-12)

    def test_mean_photon_truncation_bias(self):
        assert mean_photon(coherent_coefficients(1, 8)) == pytest.approx(1.0, abs=2e-4)

    def test_warns_when_tail_is_visible(self):
        with pytest.warns(RuntimeWarning, match="discards mass"):
            coherent_coefficients(2, 8)

    def test_rejects_hopeless_truncation(self):
        with pytest.raises(TruncationError):
            coherent_coefficients(30, 8)
        with pytest.raises(ValueError):
            coherent_coefficients(-0.1, 8)


class TestThermal:
    def test_vacuum_limit(self):
        rho = thermal_density(0, 8)
        want = np.zeros((8, 8))
        want[0, 0] = 1.0
        assert np.array_equal(rho.entries.real, want)

    def test_geometric_series(self):
        with pytest.warns(RuntimeWarning, match="discards mass"):
            rho = thermal_density(1, 8)
        diag = rho.diagonal()
        assert np.allclose(diag, 0.5 ** np.arange(1, 9), atol=1e-15)
        assert rho.trace() == pytest.approx(1 - 2.0 ** -8, abs=1e-15)
        assert np.count_nonzero(rho.entries - np.diag(np.diag(rho.entries))) == 0

    def test_small_noise_no_warning(self, recwarn):
        rho = thermal_density(0.2, 8)
        assert rho.diagonal()[0] == pytest.approx(5.0 / 6.0, abs=1e-15)
        assert not [w for w in recwarn if issubclass(w.category, RuntimeWarning)]

    def test_renormalize_flag(self):
        rho = thermal_density(1, 8, renormalize=True)
        assert rho.trace() == pytest.approx(1.0, abs=1e-12)

    def test_mean_photon(self):
        assert mean_photon(thermal_density(0.2, 8)) == pytest.approx(0.2, abs=1e-4)


class TestPnss:
    def test_integer_mean_is_fock(self):
        assert np.array_equal(pnss(1, 8).coeffs.real, fock(1).coeffs.real)
        assert np.array_equal(pnss(2, 8).coeffs.real, fock(2).coeffs.real)

    def test_fractional_mean(self):
        fv = pnss(1.25, 8)
        assert fv.coeffs[2].real == pytest.approx(math.sqrt(0.25), abs=1e-15)
        assert fv.coeffs[1].real == pytest.approx(math.sqrt(0.75), abs=1e-15)
        assert mean_photon(fv) == pytest.approx(1.25, abs=1e-12)

    def test_rejects_ceiling_beyond_truncation(self):
        with pytest.raises(TruncationError):
            pnss(7.5, 8)

    @pytest.mark.parametrize("n_mean", [0.3, 0.5, 1.25, 1.75, 2.5])
    def test_minimum_variance_on_two_levels(self, n_mean):
        # brute-force oracle: scan all two-level superpositions on the
        # adjacent pair carrying the same mean
        lo, hi = math.floor(n_mean), math.ceil(n_mean)
        best = min(
            photon_variance(FockVector(_two_level(lo, hi, p), normalize=True))
            for p in np.linspace(0.0, 1.0, 2001)
            if abs(p * hi + (1 - p) * lo - n_mean) < 5e-4
        )
        assert photon_variance(pnss(n_mean, 8)) <= best + 1e-3

    def test_variance_oracle_value(self):
        # Var = 0.25*4 + 0.75*1 - 1.25^2
        assert photon_variance(pnss(1.25, 8)) == pytest.approx(0.1875, abs=1e-12)


def _two_level(lo, hi, p):
    c = np.zeros(8)
    c[hi] = math.sqrt(p)
    c[lo] = math.sqrt(1 - p)
    return c


class TestFidelity:
    def test_identical_and_orthogonal(self):
        one = fock(1).density()
        zero = fock(0).density()
        assert fidelity(one, one) == pytest.approx(1.0, abs=1e-12)
        assert fidelity(zero, one) == pytest.approx(0.0, abs=1e-12)

    def test_vacuum_versus_coherent(self):
        # |<0|alpha>|^2 = e^{-1}; use a deep truncation so the residual
        # renormalization sits below the tolerance
        vac = fock(0, 16).density()
        coh = coherent_coefficients(1, 16).density()
        assert fidelity(vac, coh) == pytest.approx(math.exp(-1), abs=1e-10)

    def test_symmetry_and_pure_overlap(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = FockVector(rng.standard_normal(8) + 1j * rng.standard_normal(8), normalize=True)
            b = FockVector(rng.standard_normal(8) + 1j * rng.standard_normal(8), normalize=True)
            f_ab = fidelity(a.density(), b.density())
            f_ba = fidelity(b.density(), a.density())
            overlap = abs(np.vdot(a.coeffs, b.coeffs)) ** 2
            assert abs(f_ab - f_ba) < 1e-10
            assert f_ab == pytest.approx(overlap, abs=1e-10)

    def test_mixed_state_oracle(self):
        # against scipy's matrix square root, an independent decomposition
        from scipy.linalg import sqrtm

        rng = np.random.default_rng(11)
        a = _random_density(rng, 6)
        b = _random_density(rng, 6)
        sq = sqrtm(a.entries)
        want = float(np.trace(sqrtm(sq @ b.entries @ sq)).real) ** 2
        assert fidelity(a, b) == pytest.approx(want, abs=1e-9)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(fock(0, 4).density(), fock(0, 8).density())


def _random_density(rng, dim):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    mat = raw @ raw.conj().T
    return DensityMatrix(mat / np.trace(mat).real)


class TestPhaseDistribution:
    def test_fock_state_is_flat(self):
        dist = phase_distribution(fock(3).density(), 256)
        assert np.max(np.abs(dist.prob - 1 / (2 * math.pi))) < 1e-10

    def test_thermal_is_flat(self):
        dist = phase_distribution(thermal_density(0.2, 8), 256)
        assert np.max(np.abs(dist.prob - 1 / (2 * math.pi))) < 1e-10

    def test_coherent_peaks_at_zero(self):
        dist = phase_distribution(coherent_coefficients(1, 8).density(), 4096)
        assert abs(dist.phi[int(np.argmax(dist.prob))]) < 2 * math.pi / 4096 + 1e-12
        assert float(dist.prob.sum()) * dist.step == pytest.approx(1.0, abs=1e-12)

    def test_rejects_small_grid(self):
        with pytest.raises(ValueError):
            phase_distribution(fock(0).density(), 32)


class TestPhaseOverlap:
    def test_uniform_with_itself(self):
        u = uniform_phase_distribution(512)
        assert phase_overlap(u, u) == pytest.approx(1.0, abs=1e-12)

    def test_any_distribution_with_itself(self):
        dist = phase_distribution(coherent_coefficients(1, 8).density(), 512)
        assert phase_overlap(dist, dist) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("n_mean", [0.5, 1.0, 2.0])
    def test_coherent_versus_uniform_oracle(self, n_mean):
        dist = phase_distribution(coherent_coefficients(n_mean, 8).density(), 4096)
        got = phase_overlap(dist, uniform_phase_distribution(4096))
        assert got == pytest.approx(OVERLAP_UNIFORM[n_mean], abs=1e-9)

    def test_decreases_with_amplitude(self):
        assert OVERLAP_UNIFORM[0.5] > OVERLAP_UNIFORM[1.0] > OVERLAP_UNIFORM[2.0]

    def test_rejects_mismatched_grids(self):
        with pytest.raises(ValueError):
            phase_overlap(uniform_phase_distribution(256), uniform_phase_distribution(512))


class TestPhaseFwhm:
    def test_flat_conventions(self):
        assert phase_fwhm(uniform_phase_distribution(256)) == pytest.approx(2 * math.pi)
        dist = phase_distribution(fock(0).density(), 256)
        assert phase_fwhm(dist) == pytest.approx(2 * math.pi)

    def test_narrows_with_amplitude(self):
        wide = phase_fwhm(phase_distribution(coherent_coefficients(0.25, 8).density(), 4096))
        narrow = phase_fwhm(phase_distribution(coherent_coefficients(1, 8).density(), 4096))
        assert 0 < narrow < wide < 2 * math.pi


class TestCoherence:
    def test_fock_and_thermal_are_diagonal(self):
        assert coherence(fock(3).density()) == 0.0
        assert coherence(thermal_density(0.2, 8)) == 0.0

    def test_balanced_superposition(self):
        fv = FockVector([1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0])
        assert coherence(fv.density()) == pytest.approx(1.0, abs=1e-12)

    def test_zero_iff_diagonal(self):
        rng = np.random.default_rng(3)
        rho = _random_density(rng, 5)
        assert coherence(rho) > 1e-3
        diag = DensityMatrix(np.diag(rho.diagonal()).astype(complex) / rho.trace())
        assert coherence(diag) < 1e-12


class TestCountingStatistics:
    def test_unit_efficiency_is_identity(self):
        diag = np.array([0.1, 0.2, 0.3, 0.4])
        assert np.allclose(counting_statistics(diag, 1.0), diag, atol=1e-15)

    def test_fock_two_binomial(self):
        got = counting_statistics(fock(2).probabilities(), 0.5)
        assert np.allclose(got[:3], [0.25, 0.5, 0.25], atol=1e-15)
        assert np.allclose(got[3:], 0.0)

    def test_vacuum_invariant(self):
        got = counting_statistics(fock(0).probabilities(), 0.3)
        assert got[0] == pytest.approx(1.0, abs=1e-15)

    def test_rejects_bad_efficiency(self):
        with pytest.raises(ValueError):
            counting_statistics([1.0], 1.5)

    @given(
        st.lists(st.floats(0.0, 1.0), min_size=2, max_size=12),
        st.floats(0.0, 1.0),
        st.floats(0.0, 1.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_thinning_composition(self, raw, r1, r2):
        diag = np.asarray(raw)
        total = diag.sum()
        if total == 0:
            return
        diag = diag / total
        twice = counting_statistics(counting_statistics(diag, r1), r2)
        once = counting_statistics(diag, r1 * r2)
        assert np.max(np.abs(twice - once)) < 1e-10

    def test_mass_preserved(self):
        diag = np.array([0.3, 0.3, 0.2, 0.1])  # sub-unit mass allowed
        out = counting_statistics(diag, 0.4)
        assert out.sum() == pytest.approx(diag.sum(), abs=1e-12)


class TestVacuumProbability:
    @pytest.mark.parametrize("n,r", [(0, 0.3), (2, 0.5), (5, 0.9)])
    def test_fock_closed_form(self, n, r):
        got = vacuum_probability(fock(n).probabilities(), r)
        assert got == pytest.approx((1 - r) ** n, abs=1e-14)

    def test_limits_and_consistency(self):
        diag = coherent_coefficients(1, 8).probabilities()
        assert vacuum_probability(diag, 1.0) == pytest.approx(diag[0], abs=1e-15)
        assert vacuum_probability(diag, 0.0) == pytest.approx(diag.sum(), abs=1e-15)
        assert vacuum_probability(diag, 0.37) == pytest.approx(
            counting_statistics(diag, 0.37)[0], abs=1e-13
        )


class TestWigner:
    def setup_method(self):
        self.axis = np.linspace(-5, 5, 101)

    def test_vacuum_gaussian(self):
        grid = wigner(fock(0).density(), self.axis, self.axis)
        assert grid.values.max() == pytest.approx(1 / math.pi, abs=1e-12)
        assert grid.values[50, 50] == pytest.approx(1 / math.pi, abs=1e-12)
        assert grid.grid_integral() == pytest.approx(1.0, abs=1e-2)

    def test_single_photon_negativity(self):
        grid = wigner(fock(1).density(), self.axis, self.axis)
        assert grid.values[50, 50] == pytest.approx(-1 / math.pi, abs=1e-12)

    def test_fock_laguerre_oracle(self):
        grid = wigner(fock(3).density(), self.axis, self.axis)
        xx, pp = np.meshgrid(self.axis, self.axis, indexing="ij")
        rr = xx ** 2 + pp ** 2
        oracle = (-1) ** 3 / math.pi * eval_laguerre(3, 2 * rr) * np.exp(-rr)
        assert np.max(np.abs(grid.values - oracle)) < 1e-12

    def test_coherent_displacement(self):
        grid = wigner(coherent_coefficients(1, 12).density(), self.axis, self.axis)
        i, j = np.unravel_index(np.argmax(grid.values), grid.values.shape)
        assert self.axis[i] == pytest.approx(math.sqrt(2), abs=0.1)
        assert self.axis[j] == pytest.approx(0.0, abs=0.1)


class TestDistributionFidelity:
    def test_identical_and_disjoint(self):
        p = np.array([0.25, 0.75, 0.0])
        assert distribution_fidelity(p, p) == pytest.approx(1.0, abs=1e-12)
        assert distribution_fidelity([1, 0], [0, 1]) == 0.0
