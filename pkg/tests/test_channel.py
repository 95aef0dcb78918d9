"""Beam-splitter channel: unitarity, limits, conservation, and the
process-tensor cross-check."""

import math

import numpy as np
import pytest

from qtdopt import (
    ChannelConfig,
    DensityMatrix,
    FockVector,
    HypothesisPair,
    TruncationOverflowError,
    apply_bs_channel,
    bs_block_unitary,
    coherent_coefficients,
    fidelity,
    helstrom_error,
    hypothesis_states,
    mean_photon,
    process_tensor_element,
    thermal_density,
    two_mode_output,
)
from qtdopt.channel import apply_bs_channel_via_tensor, received_state_matrix
from qtdopt.states import thermal_diagonal


def fock(n, dim=8):
    c = np.zeros(dim)
    c[n] = 1.0
    return FockVector(c)


def random_probe(rng, dim=8):
    return FockVector(rng.standard_normal(dim) + 1j * rng.standard_normal(dim), normalize=True)


class TestChannelConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ChannelConfig(r=1.5, n_env=0.0)
        with pytest.raises(ValueError):
            ChannelConfig(r=0.5, n_env=-0.1)
        with pytest.raises(ValueError):
            ChannelConfig(r=0.5, n_env=0.0, dim_probe=0)

    def test_env_dim_defaults_to_probe(self):
        cfg = ChannelConfig(r=0.5, n_env=0.0, dim_probe=6)
        assert cfg.dim_env == 6
        assert cfg.sector_cutoff == 10


class TestBlockUnitary:
    def test_vacuum_sector(self):
        assert np.array_equal(bs_block_unitary(0, 0.7), np.eye(1))

    def test_single_photon_balanced(self):
        u = bs_block_unitary(1, 0.5)
        # each port reached with probability 1/2
        assert np.allclose(u ** 2, 0.5, atol=1e-12)
        # reflected amplitude of |1,0> is +sqrt(r)
        assert u[1, 1] == pytest.approx(math.sqrt(0.5), abs=1e-12)

    def test_two_photon_amplitudes(self):
        r = 0.36
        u = bs_block_unitary(2, r)
        # |2,0> -> (r, sqrt(2 r (1-r)), (1-r)) onto |2,0>,|1,1>,|0,2>
        assert u[2, 2] == pytest.approx(r, abs=1e-12)
        assert u[1, 2] == pytest.approx(math.sqrt(2 * r * (1 - r)), abs=1e-12)
        assert u[0, 2] == pytest.approx(1 - r, abs=1e-12)

    def test_unitary_to_tolerance(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            n = int(rng.integers(0, 15))
            u = bs_block_unitary(n, float(rng.uniform(0, 1)))
            assert np.max(np.abs(u @ u.T - np.eye(n + 1))) < 1e-12

    def test_rejects_bad_reflectivity(self):
        with pytest.raises(ValueError):
            bs_block_unitary(2, -0.1)


class TestProcessTensor:
    def test_delta_constraint(self):
        assert process_tensor_element(1, 0, 0, 0, 1, 0, 1, 0, 0.5) == 0.0

    def test_vacuum_invariant(self):
        assert process_tensor_element(0, 0, 0, 0, 0, 0, 0, 0, 0.37) == pytest.approx(1.0)

    def test_matches_unitary_products(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            r = float(rng.uniform(0, 1))
            m1, m2, n1, n2 = (int(v) for v in rng.integers(0, 5, 4))
            j1 = int(rng.integers(0, m1 + m2 + 1))
            k1 = int(rng.integers(0, n1 + n2 + 1))
            j2, k2 = m1 + m2 - j1, n1 + n2 - k1
            got = process_tensor_element(j1, k1, j2, k2, m1, n1, m2, n2, r)
            want = (
                bs_block_unitary(m1 + m2, r)[j1, m1]
                * np.conj(bs_block_unitary(n1 + n2, r)[k1, n1])
            )
            assert got == pytest.approx(want, abs=1e-12)


class TestApplyChannel:
    def test_perfect_mirror(self):
        probe = coherent_coefficients(1, 8)
        out = apply_bs_channel(probe, ChannelConfig(r=1.0, n_env=0.0))
        assert np.max(np.abs(out.rho_recv.entries - probe.density().entries)) < 1e-14

    def test_target_absent(self):
        out = apply_bs_channel(fock(3), ChannelConfig(r=0.0, n_env=0.2))
        want = thermal_density(0.2, 8)
        assert np.max(np.abs(out.rho_recv.entries - want.entries)) < 1e-14

    def test_coherent_maps_to_coherent(self):
        # deep truncation so the input tail sits below the tolerance
        probe = coherent_coefficients(1, 16)
        out = apply_bs_channel(probe, ChannelConfig(r=0.36, n_env=0.0, dim_probe=16))
        target = coherent_coefficients(0.36, 16).density()
        assert 1 - fidelity(out.rho_recv, target) < 1e-8

    def test_energy_bookkeeping(self):
        probe = coherent_coefficients(0.04, 8)
        cfg = ChannelConfig(r=0.5, n_env=0.2)
        out = apply_bs_channel(probe, cfg)
        env_mean = float(np.arange(8) @ thermal_diagonal(0.2, 8))
        want = 0.5 * mean_photon(probe) + 0.5 * env_mean
        # readout truncation drops ~6e-9 of mass at high photon number, so
        # the split holds to the corresponding moment deficit
        assert mean_photon(out.rho_recv) == pytest.approx(want, abs=1e-6)

    def test_trace_and_moment_conservation_vacuum_env(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            probe = random_probe(rng)
            cfg = ChannelConfig(r=float(rng.uniform(0, 1)), n_env=0.0)
            out = apply_bs_channel(probe, cfg)
            assert out.rho_recv.trace() == pytest.approx(out.input_trace, abs=1e-12)
            total = mean_photon(out.rho_recv) + mean_photon(out.rho_lost)
            assert total == pytest.approx(mean_photon(probe), abs=1e-10)

    def test_dropped_mass_accounting_thermal_env(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            probe = random_probe(rng)
            cfg = ChannelConfig(r=float(rng.uniform(0, 1)), n_env=float(rng.uniform(0, 1)))
            out = apply_bs_channel(probe, cfg)
            assert out.rho_recv.trace() + out.dropped_recv_mass == pytest.approx(
                out.input_trace, abs=1e-12
            )
            assert out.rho_lost.trace() + out.dropped_lost_mass == pytest.approx(
                out.input_trace, abs=1e-12
            )
            assert float(np.linalg.eigvalsh(out.rho_recv.entries)[0]) >= -1e-10
            assert float(np.linalg.eigvalsh(out.rho_lost.entries)[0]) >= -1e-10

    def test_linearity_in_probe(self):
        rng = np.random.default_rng(4)
        cfg = ChannelConfig(r=0.37, n_env=0.2)
        a = random_probe(rng).density()
        b = random_probe(rng).density()
        mix = DensityMatrix(0.3 * a.entries + 0.7 * b.entries)
        out_mix = apply_bs_channel(mix, cfg).rho_recv.entries
        sep = 0.3 * apply_bs_channel(a, cfg).rho_recv.entries + 0.7 * apply_bs_channel(
            b, cfg
        ).rho_recv.entries
        assert np.max(np.abs(out_mix - sep)) < 1e-12

    def test_phase_covariance(self):
        rng = np.random.default_rng(5)
        cfg = ChannelConfig(r=0.6, n_env=0.2)
        probe = random_probe(rng)
        theta = 0.77
        rotation = np.exp(1j * theta * np.arange(8))
        rotated = FockVector(probe.coeffs * rotation)
        out = apply_bs_channel(probe, cfg).rho_recv.entries
        out_rot = apply_bs_channel(rotated, cfg).rho_recv.entries
        conjugated = np.outer(rotation, rotation.conj()) * out
        assert np.max(np.abs(out_rot - conjugated)) < 1e-12
        # consequently the error probability is gauge invariant
        pair = HypothesisPair(*hypothesis_states(probe, cfg))
        pair_rot = HypothesisPair(*hypothesis_states(rotated, cfg))
        assert helstrom_error(pair) == pytest.approx(helstrom_error(pair_rot), abs=1e-10)

    def test_truncation_overflow_guard(self):
        hot = coherent_coefficients(6, 24)
        with pytest.raises(TruncationOverflowError):
            apply_bs_channel(hot, ChannelConfig(r=0.5, n_env=0.0, dim_probe=8))


class TestTwoModeOutput:
    def test_mirror_preserves_product_state(self):
        probe = coherent_coefficients(1, 8)
        joint = two_mode_output(probe, ChannelConfig(r=1.0, n_env=0.2))
        want = np.einsum(
            "ik,jl->ijkl", probe.density().entries, thermal_density(0.2, 8).entries
        )
        assert np.max(np.abs(joint.entries - want)) < 1e-12

    def test_reductions_match_channel_for_vacuum_env(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            probe = random_probe(rng)
            cfg = ChannelConfig(r=float(rng.uniform(0, 1)), n_env=0.0)
            joint = two_mode_output(probe, cfg)
            out = apply_bs_channel(probe, cfg)
            assert np.max(np.abs(joint.reduce_received().entries - out.rho_recv.entries)) < 1e-12
            assert np.max(np.abs(joint.reduce_lost().entries - out.rho_lost.entries)) < 1e-12
            assert joint.trace() == pytest.approx(out.input_trace, abs=1e-12)

    def test_joint_swap_hermiticity_enforced(self):
        from qtdopt import TwoModeDensity

        bad = np.zeros((2, 2, 2, 2), dtype=complex)
        bad[0, 0, 1, 1] = 0.5  # no conjugate partner
        bad[0, 0, 0, 0] = 1.0
        with pytest.raises(ValueError, match="joint index swap"):
            TwoModeDensity(bad)


class TestOracleEquivalence:
    def test_tensor_contraction_matches_unitary_path(self):
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(100):
            probe = random_probe(rng)
            cfg = ChannelConfig(
                r=float(rng.uniform(0, 1)), n_env=float(rng.uniform(0, 1)), dim_probe=8
            )
            via_unitary = apply_bs_channel(probe, cfg).rho_recv.entries
            via_tensor = apply_bs_channel_via_tensor(probe, cfg)
            worst = max(worst, float(np.max(np.abs(via_unitary - via_tensor))))
        assert worst < 1e-10

    def test_superoperator_matches_direct_application(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            probe = random_probe(rng)
            cfg = ChannelConfig(r=float(rng.uniform(0, 1)), n_env=float(rng.uniform(0, 0.5)))
            direct = apply_bs_channel(probe, cfg).rho_recv.entries
            fast = received_state_matrix(probe.coeffs, cfg)
            assert np.max(np.abs(direct - fast)) < 1e-13


class TestHypothesisStates:
    def test_indistinguishable_limit(self):
        rho0, rho1 = hypothesis_states(fock(1), ChannelConfig(r=0.0, n_env=0.0))
        assert np.max(np.abs(rho0.entries - rho1.entries)) < 1e-14
        assert rho0.entries[0, 0] == pytest.approx(1.0)

    def test_orthogonal_limit(self):
        rho0, rho1 = hypothesis_states(fock(1), ChannelConfig(r=1.0, n_env=0.0))
        assert rho0.entries[0, 0] == pytest.approx(1.0)
        assert rho1.entries[1, 1] == pytest.approx(1.0)

    def test_energy_split(self):
        cfg = ChannelConfig(r=0.5, n_env=0.2)
        rho0, rho1 = hypothesis_states(coherent_coefficients(0.04, 8), cfg)
        assert rho0.dim == rho1.dim == 8
        assert mean_photon(rho1) == pytest.approx(0.5 * 0.04 + 0.5 * 0.2, abs=2e-3)
