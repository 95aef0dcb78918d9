"""Beam-splitter loss/noise channel on the truncated two-mode Fock space.

The target and its lossy, noisy surroundings are modeled as a beam splitter
of intensity reflectivity r that mixes the probe mode with a thermal
environment mode.  Photon number is conserved, so the two-mode unitary is
block diagonal over total-photon sectors and the channel can be applied
exactly within every sector, followed by a partial trace over the mode the
receiver never sees.

Amplitude convention: intensity reflectivity r maps a single probe photon to
the received port with amplitude +sqrt(r) and to the lost port with amplitude
+sqrt(1-r); a single environment photon reaches the received port with
amplitude -sqrt(1-r).  The relative sign is unobservable for a phase-flat
environment but is fixed so both code paths in this module agree entrywise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .states import DEFAULT_DIM, DensityMatrix, FockVector, thermal_density, thermal_diagonal


class TruncationOverflowError(ValueError):
    """Input carries non-negligible mass beyond the joint truncation."""


@dataclass(frozen=True)
class ChannelConfig:
    """Physical parameters of one detection scenario.

    r is the intensity reflectivity of the target, n_env the mean photon
    number of the thermal environment; dim_probe and dim_env set the
    truncation of the two modes (the environment defaults to the probe's).
    """

    r: float
    n_env: float
    dim_probe: int = DEFAULT_DIM
    dim_env: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"reflectivity {self.r!r} outside [0, 1]")
        if self.n_env < 0.0:
            raise ValueError("environment mean photon number must be nonnegative")
        if self.dim_probe < 1:
            raise ValueError("dim_probe must be positive")
        if self.dim_env is None:
            object.__setattr__(self, "dim_env", self.dim_probe)
        if self.dim_env < 1:
            raise ValueError("dim_env must be positive")

    @property
    def sector_cutoff(self) -> int:
        """Largest representable total photon number."""
        return self.dim_probe + self.dim_env - 2


@dataclass(frozen=True)
class TwoModeDensity:
    """Joint two-mode state on the truncated product basis.

    ``entries[j1, j2, k1, k2]`` is the matrix element
    <j1 j2| rho |k1 k2> with mode 1 the received side and mode 2 the lost
    side.  Hermitian under the joint index swap; the trace may fall below
    one by whatever weight the truncation cannot hold.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 4 or arr.shape[0] != arr.shape[2] or arr.shape[1] != arr.shape[3]:
            raise ValueError("two-mode entries must have shape (d1, d2, d1, d2)")
        swap = np.conj(arr.transpose(2, 3, 0, 1))
        if float(np.max(np.abs(arr - swap))) > 1e-10:
            raise ValueError("not Hermitian under the joint index swap")
        tr = self.trace_of(arr)
        if tr > 1.0 + 1e-10:
            raise ValueError(f"trace {tr!r} beyond 1")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @staticmethod
    def trace_of(arr: np.ndarray) -> float:
        return float(np.einsum("ijij->", arr).real)

    def trace(self) -> float:
        return self.trace_of(self.entries)

    def reduce_received(self) -> DensityMatrix:
        """Partial trace over the lost mode."""
        return DensityMatrix(np.einsum("ixkx->ik", self.entries), check_psd=False)

    def reduce_lost(self) -> DensityMatrix:
        """Partial trace over the received mode."""
        return DensityMatrix(np.einsum("xjxl->jl", self.entries), check_psd=False)


@dataclass(frozen=True)
class ChannelOutput:
    """Both reduced output states plus exact mass bookkeeping.

    ``dropped_recv_mass`` (resp. ``dropped_lost_mass``) is the probability
    weight that left through received-mode (lost-mode) levels above the
    respective truncation when reading out the reduced state, so
    trace(rho_recv) + dropped_recv_mass == input_trace holds exactly.
    """

    rho_recv: DensityMatrix
    rho_lost: DensityMatrix
    input_trace: float
    dropped_recv_mass: float
    dropped_lost_mass: float


def bs_block_unitary(n_total: int, r: float) -> np.ndarray:
    """Beam-splitter unitary on the (n_total+1)-dimensional total-photon
    sector, in the basis |k>|n_total-k> ordered by received-mode count k.

    Generated by exponentiating the number-conserving mixer, so the result
    is orthogonal to machine precision.
    """
    if n_total < 0:
        raise ValueError("n_total must be nonnegative")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"reflectivity {r!r} outside [0, 1]")
    return _sector_unitaries(float(r), n_total)[n_total]


@lru_cache(maxsize=512)
def _sector_unitaries(r: float, n_max: int) -> tuple[np.ndarray, ...]:
    theta = math.acos(min(1.0, math.sqrt(r)))
    mats = []
    for n in range(n_max + 1):
        gen = np.zeros((n + 1, n + 1))
        for k in range(1, n + 1):
            # theta * (a b^dag - a^dag b) restricted to the sector
            gen[k - 1, k] = theta * math.sqrt(k * (n - k + 1))
            gen[k, k - 1] = -gen[k - 1, k]
        u = expm(gen)
        u.flags.writeable = False
        mats.append(u)
    return tuple(mats)


def _bs_amplitude(j1: int, j2: int, m1: int, m2: int, r: float) -> float:
    """Closed-form sector amplitude <j1, j2| U |m1, m2> from the binomial
    expansion of the mixed creation operators.  Independent of the
    exponential construction in :func:`bs_block_unitary`; used as the
    process-tensor cross-check.
    """
    if j1 + j2 != m1 + m2 or min(j1, j2, m1, m2) < 0:
        return 0.0
    sr = math.sqrt(r)
    st = math.sqrt(1.0 - r)
    total = 0.0
    for p in range(max(0, j1 - m2), min(m1, j1) + 1):
        q = j1 - p
        term = math.comb(m1, p) * math.comb(m2, q) * (-1.0) ** q
        power_r = 2 * p + m2 - j1
        power_t = m1 + j1 - 2 * p
        total += term * _safe_pow(sr, power_r) * _safe_pow(st, power_t)
    norm = math.exp(
        0.5 * (_lgamma(j1) + _lgamma(j2) - _lgamma(m1) - _lgamma(m2))
    )
    return norm * total


def _safe_pow(base: float, power: int) -> float:
    if power == 0:
        return 1.0
    return base ** power


def _lgamma(n: int) -> float:
    return math.lgamma(n + 1)


def process_tensor_element(
    j1: int, k1: int, j2: int, k2: int,
    m1: int, n1: int, m2: int, n2: int,
    r: float,
) -> complex:
    """Element of the beam-splitter process tensor in the Fock basis,
    mapping input density-matrix element (m1 n1 m2 n2) to output element
    (j1 k1 j2 k2).  Both photon-number deltas are enforced; amplitudes use
    the same unitary-consistent convention as :func:`bs_block_unitary`.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"reflectivity {r!r} outside [0, 1]")
    if m1 + m2 != j1 + j2 or n1 + n2 != k1 + k2:
        return 0.0 + 0.0j
    return complex(_bs_amplitude(j1, j2, m1, m2, r) * _bs_amplitude(k1, k2, n1, n2, r))


def _probe_matrix(rho_probe, dim_probe: int) -> np.ndarray:
    if isinstance(rho_probe, FockVector):
        rho_probe = rho_probe.density()
    if not isinstance(rho_probe, DensityMatrix):
        raise TypeError("rho_probe must be a FockVector or DensityMatrix")
    mat = rho_probe.entries
    if rho_probe.dim > dim_probe:
        outside = float(np.trace(mat[dim_probe:, dim_probe:]).real)
        if outside > 1e-6:
            raise TruncationOverflowError(
                f"probe carries mass {outside:.3e} beyond the channel truncation"
            )
        mat = mat[:dim_probe, :dim_probe]
    elif rho_probe.dim < dim_probe:
        pad = np.zeros((dim_probe, dim_probe), dtype=complex)
        pad[: rho_probe.dim, : rho_probe.dim] = mat
        mat = pad
    return mat


def apply_bs_channel(rho_probe, config: ChannelConfig) -> ChannelOutput:
    """Mix the probe with the thermal environment on the beam splitter and
    trace out each mode in turn.

    The conjugation is performed in full total-photon sectors, so it is
    exact; truncation enters only when reading the reduced states back into
    dim_probe x dim_probe (received) and dim_env x dim_env (lost) matrices,
    and the diagonal weight lost that way is reported in the output.
    """
    d_p, d_e = config.dim_probe, config.dim_env
    rho_p = _probe_matrix(rho_probe, d_p)
    p_env = thermal_diagonal(config.n_env, d_e)
    units = _sector_unitaries(float(config.r), config.sector_cutoff)

    recv = np.zeros((d_p, d_p), dtype=complex)
    lost = np.zeros((d_e, d_e), dtype=complex)
    dropped_recv = 0.0
    dropped_lost = 0.0
    n_max = config.sector_cutoff

    for n_row in range(n_max + 1):
        for n_col in range(n_max + 1):
            block = _input_sector_block(rho_p, p_env, n_row, n_col, d_p, d_e)
            if block is None:
                continue
            out = units[n_row] @ block @ units[n_col].T
            # received reduced state: equal lost indices => k1 = j1 + offset
            off = n_col - n_row
            for j1 in range(max(0, -off), n_row + 1):
                k1 = j1 + off
                if k1 > n_col:
                    break
                if j1 < d_p and k1 < d_p:
                    recv[j1, k1] += out[j1, k1]
                elif j1 == k1:
                    dropped_recv += out[j1, j1].real
            # lost reduced state: equal received indices
            for j1 in range(min(n_row, n_col) + 1):
                j2, k2 = n_row - j1, n_col - j1
                if j2 < d_e and k2 < d_e:
                    lost[j2, k2] += out[j1, j1]
                elif j2 == k2:
                    dropped_lost += out[j1, j1].real

    input_trace = float(np.trace(rho_p).real) * float(p_env.sum())
    return ChannelOutput(
        rho_recv=DensityMatrix(recv, check_psd=False),
        rho_lost=DensityMatrix(lost, check_psd=False),
        input_trace=input_trace,
        dropped_recv_mass=dropped_recv,
        dropped_lost_mass=dropped_lost,
    )


def two_mode_output(rho_probe, config: ChannelConfig) -> TwoModeDensity:
    """The full joint output state before any partial trace, read back into
    the truncated product basis.

    Useful for inspecting what the receiver-side reduction discards; the
    reductions of this object agree with :func:`apply_bs_channel` exactly
    whenever no populated sector overflows the truncation (vacuum
    environment), and up to the dropped readout mass otherwise.
    """
    d_p, d_e = config.dim_probe, config.dim_env
    rho_p = _probe_matrix(rho_probe, d_p)
    p_env = thermal_diagonal(config.n_env, d_e)
    units = _sector_unitaries(float(config.r), config.sector_cutoff)
    joint = np.zeros((d_p, d_e, d_p, d_e), dtype=complex)
    for n_row in range(config.sector_cutoff + 1):
        for n_col in range(config.sector_cutoff + 1):
            block = _input_sector_block(rho_p, p_env, n_row, n_col, d_p, d_e)
            if block is None:
                continue
            out = units[n_row] @ block @ units[n_col].T
            for j1 in range(min(n_row, d_p - 1) + 1):
                j2 = n_row - j1
                if j2 >= d_e:
                    continue
                for k1 in range(min(n_col, d_p - 1) + 1):
                    k2 = n_col - k1
                    if k2 < d_e:
                        joint[j1, j2, k1, k2] += out[j1, k1]
    return TwoModeDensity(joint)


def _input_sector_block(rho_p, p_env, n_row, n_col, d_p, d_e):
    block = None
    for x in range(d_e):
        m1 = n_row - x
        n1 = n_col - x
        if m1 < 0 or n1 < 0:
            break
        if m1 >= d_p or n1 >= d_p or p_env[x] == 0.0:
            continue
        val = rho_p[m1, n1] * p_env[x]
        if val != 0.0:
            if block is None:
                block = np.zeros((n_row + 1, n_col + 1), dtype=complex)
            block[m1, n1] += val
    return block


@lru_cache(maxsize=64)
def channel_superoperator(r: float, n_env: float, dim_probe: int, dim_env: int) -> np.ndarray:
    """Dense matrix S of the linear map vec(rho_probe) -> vec(rho_recv),
    with row-major vec ordering.  Precomputing S turns repeated channel
    applications inside the optimizer into a single mat-vec.
    """
    d_p, d_e = dim_probe, dim_env
    p_env = thermal_diagonal(n_env, d_e)
    units = _sector_unitaries(float(r), d_p + d_e - 2)
    s = np.zeros((d_p * d_p, d_p * d_p))
    for m1 in range(d_p):
        for n1 in range(d_p):
            col = m1 * d_p + n1
            delta = n1 - m1
            for x in range(d_e):
                if p_env[x] == 0.0:
                    continue
                u_row = units[m1 + x]
                u_col = units[n1 + x]
                j_hi = min(m1 + x, d_p - 1)
                for j1 in range(max(0, -delta), j_hi + 1):
                    k1 = j1 + delta
                    if k1 < 0 or k1 > n1 + x or k1 >= d_p:
                        continue
                    s[j1 * d_p + k1, col] += p_env[x] * u_row[j1, m1] * u_col[k1, n1]
    s.flags.writeable = False
    return s


def received_state_matrix(probe_coeffs: np.ndarray, config: ChannelConfig) -> np.ndarray:
    """Fast path: rho_recv as a raw array for a pure probe given by its
    coefficient vector.  Used in optimizer inner loops."""
    s = channel_superoperator(config.r, config.n_env, config.dim_probe, config.dim_env)
    rho = np.outer(probe_coeffs, np.conj(probe_coeffs))
    return (s @ rho.ravel()).reshape(config.dim_probe, config.dim_probe)


def apply_superoperator(rho: np.ndarray, config: ChannelConfig) -> np.ndarray:
    """rho_recv as a raw array for an arbitrary probe matrix."""
    s = channel_superoperator(config.r, config.n_env, config.dim_probe, config.dim_env)
    return (s @ np.asarray(rho, dtype=complex).ravel()).reshape(config.dim_probe, config.dim_probe)


def hypothesis_states(probe: FockVector, config: ChannelConfig) -> tuple[DensityMatrix, DensityMatrix]:
    """The two states the receiver must tell apart: rho0 (target absent,
    bare environment) and rho1 (target present, attenuated probe plus
    environment leakage), both on the probe truncation."""
    rho0 = thermal_density(config.n_env, config.dim_probe)
    rho1 = apply_bs_channel(probe, config).rho_recv
    return rho0, rho1


def apply_bs_channel_via_tensor(rho_probe, config: ChannelConfig) -> np.ndarray:
    """Reference received state computed by contracting the process tensor
    elementwise.

    Deliberately independent of :func:`apply_bs_channel`: sector amplitudes
    come from the combinatorial closed form (no matrix exponential) and the
    contraction is spelled out as explicit loops over tensor indices.  Only
    used by the validation suite and tests.
    """
    d_p, d_e = config.dim_probe, config.dim_env
    rho_p = _probe_matrix(rho_probe, d_p)
    p_env = thermal_diagonal(config.n_env, d_e)
    r = config.r
    recv = np.zeros((d_p, d_p), dtype=complex)
    for m1 in range(d_p):
        for n1 in range(d_p):
            if rho_p[m1, n1] == 0.0:
                continue
            for x in range(d_e):
                weight = rho_p[m1, n1] * p_env[x]
                if weight == 0.0:
                    continue
                # output element (j1 k1 j2 k2) with j2 = k2 enforced by the
                # partial trace and both number deltas enforced by the tensor
                for j1 in range(min(m1 + x, d_p - 1) + 1):
                    j2 = m1 + x - j1
                    k1 = n1 + x - j2
                    if k1 < 0 or k1 >= d_p:
                        continue
                    amp = _bs_amplitude(j1, j2, m1, x, r) * _bs_amplitude(k1, j2, n1, x, r)
                    if amp != 0.0:
                        recv[j1, k1] += amp * weight
    return recv
