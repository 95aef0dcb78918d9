"""Binary state discrimination: minimum error probability and its gradient.

The receiver is assumed optimal, so the single-shot error probability of
telling the two hypothesis states apart is set by the trace norm of the
prior-weighted difference matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, channel_superoperator, received_state_matrix
from .states import DensityMatrix, thermal_diagonal

HERMITICITY_TOL = 1e-10
# eigenvalues below this (relative) size are treated as exactly zero kinks
SIGN_ZERO_TOL = 1e-12
# finite-difference step the fallback and the validation oracle both use
FD_STEP = 1e-5


class DegenerateSpectrumError(RuntimeError):
    """An eigenvalue sits too close to zero for the perturbation formula.

    The absolute-value sum is not differentiable at zero crossings; when an
    eigenvalue is within finite-difference reach of zero relative to its own
    sensitivity, the analytic gradient and a finite-difference check would
    disagree, so the caller should fall back to finite differences.
    """


@dataclass(frozen=True)
class HypothesisPair:
    """The two receiver states with the prior p0 = P(target absent)."""

    rho0: DensityMatrix
    rho1: DensityMatrix
    p0: float = 0.5

    def __post_init__(self):
        if self.rho0.dim != self.rho1.dim:
            raise ValueError("hypothesis states must share dimension")
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError("prior must lie in [0, 1]")

    @property
    def p1(self) -> float:
        return 1.0 - self.p0


def trace_norm(m) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix.

    Input must be Hermitian within 1e-10; eigensolver failures propagate as
    numpy.linalg.LinAlgError.
    """
    mat = np.asarray(m, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("trace norm needs a square matrix")
    resid = float(np.max(np.abs(mat - mat.conj().T)))
    if resid > HERMITICITY_TOL:
        raise ValueError(f"matrix is not Hermitian: residual {resid:.3e}")
    eigs = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
    return float(np.abs(eigs).sum())


def helstrom_error(h: HypothesisPair) -> float:
    """Minimum single-shot error probability
    (1 - || p0 rho0 - p1 rho1 ||_1) / 2."""
    diff = h.p0 * h.rho0.entries - h.p1 * h.rho1.entries
    return 0.5 * (1.0 - trace_norm(diff))


def helstrom_error_pure(overlap_sq: float, p0: float = 0.5) -> float:
    """Closed form (1 - sqrt(1 - 4 p0 p1 s)) / 2 for a pair of pure states
    with squared overlap s; the independent oracle for the general kernel."""
    if not 0.0 <= overlap_sq <= 1.0 + 1e-12:
        raise ValueError("squared overlap must lie in [0, 1]")
    p1 = 1.0 - p0
    return 0.5 * (1.0 - math.sqrt(max(0.0, 1.0 - 4.0 * p0 * p1 * min(1.0, overlap_sq))))


def quantum_advantage(p_coh: float, p_opt: float) -> float:
    """Error-probability gain 10 log10(p_coh / p_opt) in dB.

    p_opt == 0 (orthogonal hypotheses) reports the +inf sentinel rather
    than raising, so sweep records stay writable.
    """
    if not 0.0 < p_coh <= 0.5 + 1e-12:
        raise ValueError(f"p_coh {p_coh!r} outside (0, 1/2]")
    if not 0.0 <= p_opt <= 0.5 + 1e-12:
        raise ValueError(f"p_opt {p_opt!r} outside [0, 1/2]")
    if p_opt == 0.0:
        return math.inf
    return 10.0 * math.log10(p_coh / p_opt)


def _difference_matrix(coeffs: np.ndarray, config: ChannelConfig, p0: float) -> np.ndarray:
    d = config.dim_probe
    rho1 = received_state_matrix(coeffs, config)
    diag0 = thermal_diagonal(config.n_env, d)
    diff = -(1.0 - p0) * rho1
    diff.flat[:: d + 1] += p0 * diag0
    return 0.5 * (diff + diff.conj().T)


def error_probability(coeffs: np.ndarray, config: ChannelConfig, p0: float = 0.5) -> float:
    """Helstrom error for a pure probe given by its coefficient vector;
    fast array-level path shared by the optimizer and the gradient."""
    eigs = np.linalg.eigvalsh(_difference_matrix(np.asarray(coeffs, dtype=complex), config, p0))
    return 0.5 * (1.0 - float(np.abs(eigs).sum()))


def error_gradient(coeffs, config: ChannelConfig, p0: float = 0.5) -> np.ndarray:
    """Gradient of the Helstrom error with respect to real probe
    coefficients, by first-order eigenvalue perturbation:

        d||M||_1 = sum_i sign(lambda_i) <v_i| dM |v_i>,   sign(0) := 0,

    with dM assembled from the linear channel acting on the rank-1
    perturbations of the probe.  Raises :class:`DegenerateSpectrumError`
    when an eigenvalue is near enough to zero, relative to its sensitivity,
    that the formula is unreliable; callers then use finite differences.
    """
    c = np.asarray(coeffs, dtype=float)
    if abs(float(c @ c) - 1.0) > 1e-10:
        raise ValueError("coefficients must have unit norm")
    return _error_gradient_any(c, config, p0)


def _error_gradient_any(coeffs, config: ChannelConfig, p0: float = 0.5) -> np.ndarray:
    # same perturbation formula without the unit-norm contract; the SQP
    # iterates evaluate it off the constraint manifold during line searches
    c = np.asarray(coeffs, dtype=float)
    d = c.size
    if config.dim_probe != d:
        raise ValueError("coefficient count must match the channel truncation")
    s = channel_superoperator(config.r, config.n_env, config.dim_probe, config.dim_env)
    diag0 = thermal_diagonal(config.n_env, d)
    p1 = 1.0 - p0
    m = -p1 * (s @ np.outer(c, c).ravel()).reshape(d, d)
    m.flat[:: d + 1] += p0 * diag0
    m = 0.5 * (m + m.T)
    lam, vec = np.linalg.eigh(m)
    scale = max(1.0, float(np.abs(lam).max()))
    signs = np.sign(lam)
    signs[np.abs(lam) <= SIGN_ZERO_TOL * scale] = 0.0

    # rank-1 perturbations of rho for every coefficient, pushed through the
    # linear channel in one matmul
    drho = np.zeros((d, d, d))
    idx = np.arange(d)
    drho[idx, idx, :] += c
    drho[idx, :, idx] += c
    dm = -p1 * (s @ drho.reshape(d, d * d).T).T.reshape(d, d, d)
    dm = 0.5 * (dm + dm.transpose(0, 2, 1))
    # sens[n, i] = <v_i| dM_n |v_i>: per-eigenvalue first-order sensitivities
    sens = np.einsum("ji,njk,ki->ni", vec, dm, vec)
    risky = (np.abs(lam)[None, :] > SIGN_ZERO_TOL * scale) & (
        np.abs(lam)[None, :] < 10.0 * FD_STEP * np.abs(sens)
    )
    if bool(risky.any()):
        raise DegenerateSpectrumError(
            "eigenvalue within finite-difference reach of zero; use finite differences"
        )
    return -0.5 * (sens @ signs)


def error_gradient_fd(coeffs, config: ChannelConfig, p0: float = 0.5, step: float = FD_STEP) -> np.ndarray:
    """Central finite differences of the Helstrom error; the fallback for
    flagged degeneracies and the independent oracle for the analytic path."""
    c = np.asarray(coeffs, dtype=float)
    grad = np.zeros(c.size)
    for n in range(c.size):
        bump = np.zeros(c.size)
        bump[n] = step
        grad[n] = (
            error_probability(c + bump, config, p0) - error_probability(c - bump, config, p0)
        ) / (2.0 * step)
    return grad
