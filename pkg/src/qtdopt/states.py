"""Truncated Fock-space states and the measurements taken on them.

Everything lives on the number basis |0>..|d-1>.  Pure states are coefficient
vectors, mixed states are density matrices.  All operations are pure functions;
nothing here mutates shared state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

DEFAULT_DIM = 8
DEFAULT_PHASE_GRID = 4096

# Constructors warn when the mass lost to truncation exceeds this.
TAIL_WARN = 1e-6
# coherent_coefficients refuses to build states this badly truncated.
COHERENT_TAIL_REJECT = 1e-2

WIGNER_CONVENTION = "W_vac(x,p) = exp(-(x^2+p^2))/pi; vacuum quadrature variance 1/2"


class TruncationError(ValueError):
    """The requested state does not fit the truncated basis."""


class NonPositiveStateError(ValueError):
    """A matrix that must be positive semidefinite is not."""


class FockVector:
    """Pure state sum_n c_n |n> over the truncated number basis.

    Coefficients are stored as a read-only complex array of unit norm.
    Pass ``normalize=True`` to rescale arbitrary input.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs, *, normalize: bool = False):
        arr = np.array(coeffs, dtype=complex).ravel()
        if arr.size < 1:
            raise ValueError("a Fock vector needs at least one coefficient")
        if not np.all(np.isfinite(arr.view(float))):
            raise ValueError("coefficients must be finite")
        nrm2 = float(np.vdot(arr, arr).real)
        if normalize:
            if nrm2 == 0.0:
                raise ValueError("cannot normalize the zero vector")
            arr = arr / math.sqrt(nrm2)
        elif abs(nrm2 - 1.0) > 1e-12:
            raise ValueError(f"coefficients are not normalized: sum |c_n|^2 = {nrm2!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("FockVector is immutable")

    @property
    def dim(self) -> int:
        return self.coeffs.size

    def density(self) -> "DensityMatrix":
        """Rank-1 density matrix |psi><psi|."""
        return DensityMatrix(np.outer(self.coeffs, self.coeffs.conj()))

    def probabilities(self) -> np.ndarray:
        """Number-basis populations |c_n|^2."""
        return np.abs(self.coeffs) ** 2

    def __repr__(self):
        return f"FockVector(dim={self.dim})"


class DensityMatrix:
    """d x d Hermitian, PSD (within tolerance) state matrix.

    The trace is normally one, but may fall below it for states whose
    construction truncated probability mass (e.g. thermal states kept
    elementwise faithful rather than renormalized).
    """

    __slots__ = ("entries",)

    HERMITICITY_TOL = 1e-10
    PSD_TOL = 1e-10
    TRACE_TOL = 1e-10

    def __init__(self, entries, *, check_psd: bool = True):
        mat = np.array(entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise ValueError("density matrix must be square and nonempty")
        resid = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
        if resid > self.HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian: residual {resid:.3e}")
        mat = 0.5 * (mat + mat.conj().T)  # exact Hermiticity from here on
        tr = float(np.trace(mat).real)
        if tr <= 0.0 or tr > 1.0 + self.TRACE_TOL:
            raise ValueError(f"trace {tr!r} outside (0, 1]")
        if check_psd:
            lo = float(np.linalg.eigvalsh(mat)[0])
            if lo < -self.PSD_TOL:
                raise NonPositiveStateError(f"matrix has eigenvalue {lo:.3e} < 0")
        mat.flags.writeable = False
        object.__setattr__(self, "entries", mat)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def diagonal(self) -> np.ndarray:
        return self.entries.diagonal().real.copy()

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, trace={self.trace():.6f})"


@dataclass(frozen=True)
class PhaseDistribution:
    """Probability density over optical phase on a uniform grid of [-pi, pi).

    The grid is periodic: the point +pi is identified with -pi, and the
    quadrature weight of every node is the spacing 2*pi/G (trapezoid rule
    with wraparound).
    """

    phi: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        prob = np.asarray(self.prob, dtype=float)
        if phi.ndim != 1 or phi.shape != prob.shape or phi.size < 2:
            raise ValueError("phi and prob must be matching 1-d arrays")
        step = 2.0 * math.pi / phi.size
        expect = -math.pi + step * np.arange(phi.size)
        if not np.allclose(phi, expect, atol=1e-9, rtol=0.0):
            raise ValueError("phi must uniformly span [-pi, pi)")
        if float(prob.min()) < -1e-12:
            raise ValueError("negative phase density")
        total = float(prob.sum()) * step
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"phase distribution integrates to {total!r}, not 1")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "prob", prob)

    @property
    def grid_size(self) -> int:
        return self.phi.size

    @property
    def step(self) -> float:
        return 2.0 * math.pi / self.phi.size


@dataclass(frozen=True)
class WignerGrid:
    """Discretized Wigner function W(x, p) on a rectangular quadrature grid."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    convention: str = WIGNER_CONVENTION

    def grid_integral(self) -> float:
        """Trapezoid-rule integral of W over the grid."""
        return float(np.trapezoid(np.trapezoid(self.values, self.p_axis, axis=1), self.x_axis))


def _binomial(n: int, m: int) -> float:
    # exact integers up to n = 20, log-space above to stay finite for large d
    if m < 0 or m > n:
        return 0.0
    if n <= 20:
        return float(math.comb(n, m))
    return float(math.exp(gammaln(n + 1) - gammaln(m + 1) - gammaln(n - m + 1)))


def coherent_tail_mass(n_mean: float, dim: int) -> float:
    """Poisson mass P(n >= dim) removed by truncating a coherent state."""
    if n_mean == 0.0:
        return 0.0
    n = np.arange(dim)
    log_p = -n_mean + n * math.log(n_mean) - gammaln(n + 1)
    return max(0.0, 1.0 - float(np.exp(log_p).sum()))


def coherent_coefficients(n_mean: float, dim: int = DEFAULT_DIM) -> FockVector:
    """Truncated coherent state with mean photon number ``n_mean``.

    Coefficients follow exp(-n/2) n^(k/2) / sqrt(k!) and are renormalized
    over the retained levels, so the result is a valid unit-norm state whose
    mean photon count sits slightly below ``n_mean`` (truncation bias).

    Raises :class:`TruncationError` when the discarded Poisson tail exceeds
    ``COHERENT_TAIL_REJECT`` (the truncation dimension is then inadequate).
    """
    if n_mean < 0:
        raise ValueError("mean photon number must be nonnegative")
    if dim < 1:
        raise ValueError("dim must be positive")
    tail = coherent_tail_mass(n_mean, dim)
    if tail > COHERENT_TAIL_REJECT:
        raise TruncationError(
            f"coherent tail mass {tail:.3e} exceeds {COHERENT_TAIL_REJECT:g}; increase dim"
        )
    if tail > TAIL_WARN:
        warnings.warn(
            f"coherent state truncation discards mass {tail:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
    if n_mean == 0.0:
        c = np.zeros(dim)
        c[0] = 1.0
        return FockVector(c)
    n = np.arange(dim)
    log_c = -0.5 * n_mean + 0.5 * n * math.log(n_mean) - 0.5 * gammaln(n + 1)
    return FockVector(np.exp(log_c), normalize=True)


@lru_cache(maxsize=256)
def thermal_diagonal(n_env: float, dim: int) -> np.ndarray:
    """Raw geometric populations n_env^k / (n_env+1)^(k+1), not renormalized.

    Returns a shared read-only array (this sits in optimizer hot loops).
    """
    if n_env < 0:
        raise ValueError("environment mean photon number must be nonnegative")
    if dim < 1:
        raise ValueError("dim must be positive")
    if n_env == 0.0:
        diag = np.zeros(dim)
        diag[0] = 1.0
    else:
        k = np.arange(dim)
        diag = np.exp(k * math.log(n_env) - (k + 1) * math.log(n_env + 1.0))
    diag.flags.writeable = False
    return diag


def thermal_density(n_env: float, dim: int = DEFAULT_DIM, *, renormalize: bool = False) -> DensityMatrix:
    """Truncated thermal state of mean photon number ``n_env``.

    By default the retained diagonal entries are kept elementwise exact, so
    the trace falls short of one by the truncated geometric tail; a warning
    is emitted when that deficit exceeds ``TAIL_WARN``.  Pass
    ``renormalize=True`` to rescale to unit trace instead.
    """
    diag = thermal_diagonal(n_env, dim)
    retained = float(diag.sum())
    if not renormalize and 1.0 - retained > TAIL_WARN:
        warnings.warn(
            f"thermal state truncation discards mass {1.0 - retained:.3e}",
            RuntimeWarning,
            stacklevel=2,
        )
    if renormalize:
        diag = diag / retained
    return DensityMatrix(np.diag(diag.astype(complex)), check_psd=False)


def pnss(n_mean: float, dim: int = DEFAULT_DIM) -> FockVector:
    """Photon-number-squeezed state: the two-level number superposition
    sqrt(p)|ceil(n)> + sqrt(1-p)|floor(n)> with p = n - ceil(n) + 1.

    Uses the standard ceiling/floor, which makes the mean photon number of
    the result equal ``n_mean`` exactly; integer means give a single Fock
    state.
    """
    if n_mean < 0:
        raise ValueError("mean photon number must be nonnegative")
    hi = math.ceil(n_mean)
    lo = math.floor(n_mean)
    if hi >= dim:
        raise TruncationError(f"pnss needs level {hi} but dim is {dim}")
    c = np.zeros(dim)
    if hi == lo:
        c[hi] = 1.0
    else:
        p = n_mean - hi + 1.0
        c[hi] = math.sqrt(p)
        c[lo] = math.sqrt(1.0 - p)
    return FockVector(c)


def _number_weights(state) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(state, FockVector):
        return np.arange(state.dim, dtype=float), state.probabilities()
    if isinstance(state, DensityMatrix):
        return np.arange(state.dim, dtype=float), state.diagonal()
    raise TypeError(f"expected FockVector or DensityMatrix, got {type(state).__name__}")


def mean_photon(state) -> float:
    """First moment sum_n n p_n of the number distribution (not renormalized
    by the trace, so truncated states report their retained moment)."""
    n, p = _number_weights(state)
    return float(n @ p)


def photon_variance(state) -> float:
    """Variance <n^2> - <n>^2 of the number distribution."""
    n, p = _number_weights(state)
    m1 = float(n @ p)
    m2 = float((n * n) @ p)
    return m2 - m1 * m1


def _psd_sqrt(rho: DensityMatrix, which: str) -> np.ndarray:
    w, v = np.linalg.eigh(rho.entries)
    if float(w[0]) < -DensityMatrix.PSD_TOL:
        raise NonPositiveStateError(f"{which} argument is not PSD; square root undefined")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity [Tr sqrt(sqrt(a) b sqrt(a))]^2, in [0, 1].

    Evaluated as the squared nuclear norm of sqrt(a) sqrt(b) (the same
    quantity, but exactly symmetric and without square-root amplification
    of eigenvalue roundoff).  Equals |<psi_a|psi_b>|^2 for pure inputs.
    Raises :class:`NonPositiveStateError` when an input is not PSD, in
    which case the matrix square root is undefined.
    """
    if a.dim != b.dim:
        raise ValueError("states must share dimension")
    singulars = np.linalg.svd(_psd_sqrt(a, "first") @ _psd_sqrt(b, "second"), compute_uv=False)
    root_sum = float(singulars.sum())
    return min(1.0, root_sum * root_sum)


def distribution_fidelity(p, q) -> float:
    """Classical (Bhattacharyya-squared) fidelity (sum_k sqrt(p_k q_k))^2."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must share length")
    s = float(np.sqrt(np.clip(p * q, 0.0, None)).sum())
    return min(1.0, s * s)


@lru_cache(maxsize=16)
def _phase_harmonics(grid_size: int, dim: int) -> np.ndarray:
    # e^{i k phi} for k = -(dim-1) .. (dim-1) on the periodic grid
    phi = phase_grid(grid_size)
    k = np.arange(-(dim - 1), dim)
    mat = np.exp(1j * np.outer(phi, k))
    mat.flags.writeable = False
    return mat


def phase_grid(grid_size: int) -> np.ndarray:
    """Uniform periodic grid of ``grid_size`` angles spanning [-pi, pi)."""
    step = 2.0 * math.pi / grid_size
    return -math.pi + step * np.arange(grid_size)


def phase_distribution(rho: DensityMatrix, grid_size: int = DEFAULT_PHASE_GRID) -> PhaseDistribution:
    """Phase density P(phi) = (1/2pi) sum_{n,m} rho_{n,m} e^{i(m-n)phi}.

    The result is renormalized to unit integral on the periodic grid, which
    also absorbs any trace deficit of a truncated input.  The imaginary
    residue of the sum must stay below 1e-8 (it is zero for Hermitian
    input); the real part is returned.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    d = rho.dim
    # s_k = sum_n rho[n, n+k] for each superdiagonal offset k (m - n = k)
    s = np.array([np.trace(rho.entries, offset=k) for k in range(-(d - 1), d)])
    vals = (_phase_harmonics(grid_size, d) @ s) / (2.0 * math.pi)
    residue = float(np.max(np.abs(vals.imag)))
    if residue > 1e-8:
        raise ValueError(f"imaginary residue {residue:.3e} in phase distribution; input not Hermitian")
    prob = vals.real
    step = 2.0 * math.pi / grid_size
    total = float(prob.sum()) * step
    if total <= 0.0:
        raise ValueError("phase distribution has nonpositive total mass")
    return PhaseDistribution(phase_grid(grid_size), prob / total)


def uniform_phase_distribution(grid_size: int = DEFAULT_PHASE_GRID) -> PhaseDistribution:
    """The flat density 1/2pi carried by any diagonal state."""
    return PhaseDistribution(phase_grid(grid_size), np.full(grid_size, 1.0 / (2.0 * math.pi)))


def phase_overlap(pa: PhaseDistribution, pb: PhaseDistribution) -> float:
    """Bhattacharyya coefficient int sqrt(P_a P_b) dphi on the shared grid."""
    if pa.grid_size != pb.grid_size or not np.array_equal(pa.phi, pb.phi):
        raise ValueError("phase distributions must share the same grid")
    integrand = np.sqrt(np.clip(pa.prob * pb.prob, 0.0, None))
    return min(1.0, float(integrand.sum()) * pa.step)


def phase_fwhm(p: PhaseDistribution) -> float:
    """Full width at half maximum of the phase density around its global peak.

    Crossings are located by linear interpolation between grid nodes,
    walking circularly from the peak.  Flat or near-flat distributions with
    no half-maximum crossing report the full circle 2*pi.
    """
    prob = p.prob
    g = prob.size
    k_max = int(np.argmax(prob))
    half = prob[k_max] / 2.0

    def _walk(direction: int) -> float | None:
        # distance (radians) from the peak to the half-max crossing
        prev = prob[k_max]
        for step_count in range(1, g):
            k = (k_max + direction * step_count) % g
            cur = prob[k]
            if cur <= half:
                frac = (prev - half) / (prev - cur) if prev != cur else 0.0
                return (step_count - 1 + frac) * p.step
            prev = cur
        return None

    right = _walk(+1)
    left = _walk(-1)
    if right is None or left is None:
        return 2.0 * math.pi
    return min(2.0 * math.pi, left + right)


def coherence(rho: DensityMatrix) -> float:
    """Off-diagonal l1 weight sum_{n != m} |rho_{n,m}|."""
    mag = np.abs(rho.entries)
    return float(mag.sum() - np.trace(mag))


def _check_probability_vector(diag) -> np.ndarray:
    diag = np.asarray(diag, dtype=float).ravel()
    if diag.size < 1:
        raise ValueError("need at least one probability")
    if float(diag.min()) < 0.0:
        raise ValueError("probabilities must be nonnegative")
    if float(diag.sum()) > 1.0 + 1e-10:
        raise ValueError("probabilities sum beyond 1")
    return diag


def counting_statistics(diag, r: float) -> np.ndarray:
    """Number statistics after detection (or reflection) with efficiency r:
    P_m = sum_{n >= m} C(n, m) r^m (1-r)^(n-m) p_n.

    Binomial thinning preserves the total mass of the input vector.
    """
    diag = _check_probability_vector(diag)
    if not 0.0 <= r <= 1.0:
        raise ValueError("efficiency must lie in [0, 1]")
    d = diag.size
    out = np.zeros(d)
    for n in range(d):
        if diag[n] == 0.0:
            continue
        for m in range(n + 1):
            out[m] += _binomial(n, m) * (r ** m) * ((1.0 - r) ** (n - m)) * diag[n]
    return out


def vacuum_probability(diag, r: float) -> float:
    """Probability sum_n (1-r)^n p_n of detecting no photons at efficiency r."""
    diag = _check_probability_vector(diag)
    if not 0.0 <= r <= 1.0:
        raise ValueError("efficiency must lie in [0, 1]")
    n = np.arange(diag.size)
    return float(((1.0 - r) ** n) @ diag)


def wigner(rho: DensityMatrix, x_axis, p_axis) -> WignerGrid:
    """Wigner function on the grid, in the convention where the vacuum gives
    W(x,p) = (1/pi) exp(-x^2 - p^2) (quadrature variance 1/2).

    Computed by the standard two-term recurrence over the number basis; the
    imaginary residue is checked below 1e-9 and discarded.
    """
    x_axis = np.asarray(x_axis, dtype=float).ravel()
    p_axis = np.asarray(p_axis, dtype=float).ravel()
    d = rho.dim
    mat = rho.entries
    # grid of alpha = (x + i p) / sqrt(2); columns scan p for fixed x
    a = (x_axis[:, None] + 1j * p_axis[None, :]) / math.sqrt(2.0)
    w_prev = np.exp(-2.0 * np.abs(a) ** 2) / math.pi  # <0| kernel |0>
    total = mat[0, 0] * w_prev
    row = [w_prev]  # <0| kernel |n> for increasing n
    for n in range(1, d):
        row.append(2.0 * a * row[n - 1] / math.sqrt(n))
        total = total + 2.0 * (mat[0, n] * row[n]).real  # n,0 and 0,n pair
    for m in range(1, d):
        nxt = [None] * d
        nxt[m] = (2.0 * np.conj(a) * row[m] - math.sqrt(m) * row[m - 1]) / math.sqrt(m)
        total = total + mat[m, m] * nxt[m]
        for n in range(m + 1, d):
            nxt[n] = (2.0 * a * nxt[n - 1] - math.sqrt(m) * row[n - 1]) / math.sqrt(n)
            total = total + 2.0 * (mat[m, n] * nxt[n]).real
        row = nxt
    residue = float(np.max(np.abs(total.imag)))
    if residue > 1e-9:
        raise ValueError(f"imaginary residue {residue:.3e} in Wigner function")
    return WignerGrid(x_axis, p_axis, total.real)


def default_wigner_axes(extent: float = 5.0, points: int = 101) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric default quadrature grid used by the CLI."""
    ax = np.linspace(-extent, extent, points)
    return ax, ax.copy()
