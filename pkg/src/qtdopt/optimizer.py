"""Sequential quadratic programming over probe-state coefficients.

The probe is parameterized by real coefficients on the number basis (an
opt-in complex mode doubles the parameter count), subject to the two
equality constraints of unit norm and fixed mean photon number.  Each
iteration linearizes the constraints, solves the KKT system of an equality
quadratic program with a damped-BFGS Lagrangian Hessian, and backtracks on
an L1 exact-penalty merit function.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelConfig, received_state_matrix
from .discrimination import (
    DegenerateSpectrumError,
    _error_gradient_any,
    error_gradient_fd,
    error_probability,
)
from .states import DEFAULT_PHASE_GRID, _phase_harmonics


class Objective(enum.Enum):
    """Which quantity the solver minimizes."""

    HELSTROM_DM = "dm"    # full-density-matrix error probability
    VACUUM_P0 = "ps"      # vacuum weight of the thinned photon statistics
    PHASE_OVERLAP = "po"  # phase-distribution overlap with the flat noise

    @classmethod
    def from_name(cls, name: str) -> "Objective":
        for member in cls:
            if member.value == name.lower():
                return member
        raise ValueError(f"unknown objective {name!r}; expected dm, ps, or po")


class InfeasibleProblemError(ValueError):
    """The constraints admit no solution at this truncation."""


class AllStartsFailedError(RuntimeError):
    """No initialization produced a converged feasible result."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class RankDeficientConstraintsError(RuntimeError):
    """The linearized constraint Jacobian lost row rank."""


@dataclass(frozen=True)
class OptimizationProblem:
    """One probe-optimization instance: objective, channel, and constraints."""

    objective: Objective
    config: ChannelConfig
    n_target: float
    p0: float = 0.5
    complex_coeffs: bool = False
    phase_grid: int = DEFAULT_PHASE_GRID

    def __post_init__(self):
        if self.n_target < 0.0:
            raise ValueError("target mean photon number must be nonnegative")
        if self.n_target > self.config.dim_probe - 1:
            raise InfeasibleProblemError(
                f"mean photon {self.n_target} unreachable with {self.config.dim_probe} levels"
            )
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError("prior must lie in [0, 1]")

    @property
    def dim(self) -> int:
        return self.config.dim_probe


@dataclass(frozen=True)
class SolverOptions:
    kkt_tol: float = 1e-8
    step_tol: float = 1e-10
    max_iter: int = 500
    armijo: float = 1e-4
    penalty_margin: float = 1.0
    max_backtracks: int = 40
    norm_tol: float = 1e-10    # |sum c^2 - 1| required of converged results
    photon_tol: float = 1e-8   # |sum n c^2 - n_target| required
    stall_window: int = 60     # iterations without best-merit improvement before stopping
    stall_abs: float = 1e-9    # merit improvement below this counts as none
    step_callback: object = None  # called with (merit_before, merit_after) per accepted step


@dataclass
class OptimizationResult:
    coeffs: np.ndarray
    objective_value: float
    iterations: int
    kkt_residual: float
    converged: bool
    restarts_used: int = 0
    message: str = ""


def solve_equality_qp(hessian, grad, jac, cviol) -> tuple[np.ndarray, np.ndarray]:
    """Solve the equality-constrained QP step through its KKT system

        [[H, J^T], [J, 0]] . [d, -mu] = [-g, -c].

    Returns the step d and the multiplier estimate mu (the one that makes
    grad - J^T mu stationary).  Raises
    :class:`RankDeficientConstraintsError` when J loses row rank, e.g. when
    the iterate collapses onto a single Fock state.
    """
    h = np.asarray(hessian, dtype=float)
    g = np.asarray(grad, dtype=float)
    j = np.atleast_2d(np.asarray(jac, dtype=float))
    c = np.atleast_1d(np.asarray(cviol, dtype=float))
    n, m = g.size, c.size
    sv = np.linalg.svd(j, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise RankDeficientConstraintsError("constraint Jacobian is rank deficient")
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = h
    kkt[:n, n:] = j.T
    kkt[n:, :n] = j
    rhs = np.concatenate([-g, -c])
    sol = np.linalg.solve(kkt, rhs)
    return sol[:n], -sol[n:]


def constraint_values(x: np.ndarray, n_target: float, weights: np.ndarray) -> np.ndarray:
    return np.array([float(x @ x) - 1.0, float(weights @ (x * x)) - n_target])


def constraint_jacobian(x: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.vstack([2.0 * x, 2.0 * weights * x])


def project_to_constraints(
    x: np.ndarray, n_target: float, weights: np.ndarray, tol: float = 1e-13, max_iter: int = 60
) -> np.ndarray:
    """Newton projection onto the two-constraint manifold (minimum-norm
    correction per step).  Raises on stagnation, e.g. from a hopeless start."""
    x = np.array(x, dtype=float)
    for _ in range(max_iter):
        c = constraint_values(x, n_target, weights)
        if float(np.max(np.abs(c))) < tol:
            return x
        j = constraint_jacobian(x, weights)
        try:
            delta = np.linalg.solve(j @ j.T, -c)
        except np.linalg.LinAlgError as exc:
            raise RankDeficientConstraintsError("projection hit a rank-deficient point") from exc
        x = x + j.T @ delta
    raise RuntimeError("constraint projection did not converge")


class _ObjectiveFunctions:
    """Objective value/gradient callables for one problem, including the
    mapping between solver variables and (possibly complex) coefficients."""

    def __init__(self, problem: OptimizationProblem):
        self.problem = problem
        d = problem.dim
        base = np.arange(d, dtype=float)
        self.weights = np.concatenate([base, base]) if problem.complex_coeffs else base
        self.n_vars = 2 * d if problem.complex_coeffs else d
        config = problem.config
        if problem.objective is Objective.HELSTROM_DM and not problem.complex_coeffs:
            # everything is real in the real parameterization; precompute the
            # channel matrix and the weighted noise diagonal once
            from .channel import channel_superoperator
            from .states import thermal_diagonal

            self._super = channel_superoperator(
                config.r, config.n_env, config.dim_probe, config.dim_env
            )
            self._p0_diag = problem.p0 * thermal_diagonal(config.n_env, d)

    def to_coeffs(self, x: np.ndarray) -> np.ndarray:
        d = self.problem.dim
        if self.problem.complex_coeffs:
            return x[:d] + 1j * x[d:]
        return x.astype(complex)

    def value(self, x: np.ndarray) -> float:
        p = self.problem
        if p.objective is Objective.HELSTROM_DM:
            if not p.complex_coeffs:
                d = p.dim
                m = -(1.0 - p.p0) * (self._super @ np.outer(x, x).ravel()).reshape(d, d)
                m.flat[:: d + 1] += self._p0_diag
                eigs = np.linalg.eigvalsh(0.5 * (m + m.T))
                return 0.5 * (1.0 - float(np.abs(eigs).sum()))
            return error_probability(self.to_coeffs(x), p.config, p.p0)
        c = self.to_coeffs(x)
        if p.objective is Objective.VACUUM_P0:
            decay = (1.0 - p.config.r) ** np.arange(p.dim)
            return float(decay @ np.abs(c) ** 2)
        return self._phase_overlap_uniform(c)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        p = self.problem
        if p.objective is Objective.VACUUM_P0:
            decay = (1.0 - p.config.r) ** np.arange(p.dim)
            if p.complex_coeffs:
                decay = np.concatenate([decay, decay])
            return 2.0 * decay * x
        if p.objective is Objective.HELSTROM_DM and not p.complex_coeffs:
            try:
                return _error_gradient_any(x, p.config, p.p0)
            except DegenerateSpectrumError:
                return error_gradient_fd(x, p.config, p.p0)
        return self._numeric_gradient(x)

    def _numeric_gradient(self, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
        grad = np.zeros(x.size)
        for i in range(x.size):
            bump = np.zeros(x.size)
            bump[i] = step
            grad[i] = (self.value(x + bump) - self.value(x - bump)) / (2.0 * step)
        return grad

    def _phase_overlap_uniform(self, coeffs: np.ndarray) -> float:
        # Bhattacharyya coefficient of the received state's phase density
        # against the flat 1/2pi, on the periodic grid; inlined so objective
        # evaluations stay off the validated public constructors.
        p = self.problem
        rho = received_state_matrix(coeffs, p.config)
        d = rho.shape[0]
        s = np.array([np.trace(rho, offset=k) for k in range(-(d - 1), d)])
        vals = (_phase_harmonics(p.phase_grid, d) @ s).real / (2.0 * math.pi)
        step = 2.0 * math.pi / p.phase_grid
        total = float(vals.sum()) * step
        dens = np.clip(vals / total, 0.0, None)
        return float(np.sqrt(dens / (2.0 * math.pi)).sum()) * step


def coherent_start(n_target: float, dim: int) -> np.ndarray:
    """The conventional initialization: truncated coherent amplitudes."""
    from .states import coherent_coefficients

    return coherent_coefficients(n_target, dim).coeffs.real.copy()


def number_squeezed_start(n_target: float, dim: int) -> np.ndarray:
    """The adjacent-level superposition, the known optimum of the high-
    reflectivity limit; starting here lets the solver settle directly onto
    the trace-norm kink that limit produces."""
    from .states import pnss

    return pnss(n_target, dim).coeffs.real.copy()


def canonical_gauge(coeffs: np.ndarray) -> np.ndarray:
    """Fix the reporting gauge of a real coefficient vector.

    The channel and every objective here are covariant under number-phase
    rotations, whose only trace in the real parameterization is the
    alternating sign flip c_n -> (-1)^n c_n (it shifts the phase density by
    pi).  Flip so the first phase moment points at phi = 0, then pick the
    global sign making the largest-magnitude coefficient nonnegative.
    """
    c = np.array(coeffs, dtype=float)
    if c.size > 1 and float(c[:-1] @ c[1:]) < 0.0:
        c[1::2] *= -1.0
    if c[int(np.argmax(np.abs(c)))] < 0.0:
        c = -c
    return c


def sqp_minimize(
    problem: OptimizationProblem,
    x0: np.ndarray,
    opts: SolverOptions = SolverOptions(),
) -> OptimizationResult:
    """Run the SQP iteration from one starting point.

    Iterates QP subproblems with a Powell-damped BFGS Lagrangian Hessian and
    an L1 exact-penalty backtracking line search until the KKT residual
    drops below ``opts.kkt_tol`` or the accepted step shrinks below
    ``opts.step_tol``.  A result is only marked converged when it is also
    feasible to the result tolerances; infeasible stalls report
    ``converged=False``.
    """
    funcs = _ObjectiveFunctions(problem)
    x = np.array(x0, dtype=float)
    if x.size != funcs.n_vars:
        raise ValueError(f"starting point must have {funcs.n_vars} entries")

    if problem.n_target == 0.0:
        # only feasible point: the vacuum (up to gauge)
        x = np.zeros(funcs.n_vars)
        x[0] = 1.0
        return OptimizationResult(
            coeffs=x, objective_value=funcs.value(x), iterations=0,
            kkt_residual=0.0, converged=True, message="degenerate target: vacuum",
        )

    weights = funcs.weights
    n = funcs.n_vars
    mu = np.zeros(2)
    hess = np.eye(n)
    sigma = 1.0
    grad = funcs.gradient(x)
    cons = constraint_values(x, problem.n_target, weights)
    jac = constraint_jacobian(x, weights)
    kkt_res = _kkt_residual(grad, jac, mu, cons)
    status = "iteration limit reached"
    iters = 0
    best_merit = math.inf
    since_improvement = 0

    for iters in range(1, opts.max_iter + 1):
        if kkt_res < opts.kkt_tol:
            status = "kkt residual below tolerance"
            break
        try:
            step, mu_new = solve_equality_qp(hess, grad, jac, cons)
        except RankDeficientConstraintsError:
            x = _nudge_off_degeneracy(x)
            grad = funcs.gradient(x)
            cons = constraint_values(x, problem.n_target, weights)
            jac = constraint_jacobian(x, weights)
            continue

        sigma = max(sigma, float(np.max(np.abs(mu_new))) + opts.penalty_margin)
        merit0 = funcs.value(x) + sigma * float(np.abs(cons).sum())
        # with sigma beyond the multipliers this is negative in exact
        # arithmetic; clamp so accepted steps never increase the merit
        descent = min(0.0, float(grad @ step) - sigma * float(np.abs(cons).sum()))
        alpha = 1.0
        for _ in range(opts.max_backtracks):
            x_try = x + alpha * step
            merit_try = funcs.value(x_try) + sigma * float(
                np.abs(constraint_values(x_try, problem.n_target, weights)).sum()
            )
            if merit_try <= merit0 + opts.armijo * alpha * descent:
                break
            alpha *= 0.5
        else:
            status = "line search failed"
            break

        if opts.step_callback is not None:
            opts.step_callback(merit0, merit_try)
        x_new = x + alpha * step
        grad_new = funcs.gradient(x_new)
        cons_new = constraint_values(x_new, problem.n_target, weights)
        jac_new = constraint_jacobian(x_new, weights)
        hess = _damped_bfgs_update(
            hess,
            alpha * step,
            (grad_new - jac_new.T @ mu_new) - (grad - jac.T @ mu_new),
        )
        x, grad, cons, jac, mu = x_new, grad_new, cons_new, jac_new, mu_new
        kkt_res = _kkt_residual(grad, jac, mu, cons)
        if float(np.linalg.norm(alpha * step)) < opts.step_tol:
            status = "step size below tolerance"
            break
        # trace-norm objectives reach their optima at eigenvalue-crossing
        # kinks where the smooth KKT residual cannot vanish; a long feasible
        # run without merit improvement is the practical stopping signal
        if merit_try < best_merit - opts.stall_abs:
            best_merit = merit_try
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement >= opts.stall_window and float(np.max(np.abs(cons))) <= 1e-9:
                status = "objective progress stalled"
                break

    if kkt_res < opts.kkt_tol * 10.0 or float(np.max(np.abs(cons))) < 1e-6:
        # cheap exact-feasibility polish; does not move the objective at
        # first order because the correction is normal to the constraints
        try:
            x = project_to_constraints(x, problem.n_target, weights)
        except (RankDeficientConstraintsError, RuntimeError):
            pass
        grad = funcs.gradient(x)
        cons = constraint_values(x, problem.n_target, weights)
        jac = constraint_jacobian(x, weights)
        kkt_res = _kkt_residual(grad, jac, mu, cons)

    feasible = abs(cons[0]) <= opts.norm_tol and abs(cons[1]) <= opts.photon_tol
    converged = feasible and (
        kkt_res < opts.kkt_tol
        or status in ("step size below tolerance", "objective progress stalled")
    )
    return OptimizationResult(
        coeffs=x,
        objective_value=funcs.value(x),
        iterations=iters,
        kkt_residual=kkt_res,
        converged=converged,
        message=status,
    )


def _kkt_residual(grad, jac, mu, cons) -> float:
    stationarity = grad - jac.T @ mu
    return max(float(np.max(np.abs(stationarity))), float(np.max(np.abs(cons))))


def _nudge_off_degeneracy(x: np.ndarray) -> np.ndarray:
    # rank deficiency means the iterate sits on a single Fock level; leak a
    # deterministic sliver of amplitude into a neighboring level
    x = np.array(x, dtype=float)
    k = int(np.argmax(np.abs(x)))
    neighbor = k + 1 if k + 1 < x.size else k - 1
    x[neighbor] += 1e-6 if x[k] >= 0 else -1e-6
    return x


def _damped_bfgs_update(hess: np.ndarray, s: np.ndarray, y: np.ndarray, damping: float = 0.2) -> np.ndarray:
    ss = float(s @ s)
    if ss <= 1e-30:
        return hess
    hs = hess @ s
    shs = float(s @ hs)
    sy = float(s @ y)
    if shs <= 1e-30:
        return hess
    # Powell damping keeps the update positive definite near nonconvexity
    if sy < damping * shs:
        theta = (1.0 - damping) * shs / (shs - sy)
        y = theta * y + (1.0 - theta) * hs
        sy = float(s @ y)
    if sy <= 1e-30:
        return hess
    hess = hess - np.outer(hs, hs) / shs + np.outer(y, y) / sy
    return 0.5 * (hess + hess.T)


def random_feasible_start(
    rng: np.random.Generator, n_target: float, dim: int, complex_coeffs: bool = False
) -> np.ndarray:
    """Uniform direction on the sphere, Newton-projected onto the
    constraint manifold; resamples when the projection stalls."""
    base = np.arange(dim, dtype=float)
    weights = np.concatenate([base, base]) if complex_coeffs else base
    n = weights.size
    for _ in range(64):
        x = rng.standard_normal(n)
        x /= float(np.linalg.norm(x))
        try:
            return project_to_constraints(x, n_target, weights)
        except (RankDeficientConstraintsError, RuntimeError):
            continue
    raise RuntimeError("could not sample a feasible starting point")


def optimize_probe(
    problem: OptimizationProblem,
    restarts: int = 8,
    seed: int = 0,
    extra_starts: tuple[np.ndarray, ...] = (),
    opts: SolverOptions = SolverOptions(),
) -> OptimizationResult:
    """Minimize the problem objective from the coherent initialization plus
    ``restarts`` random feasible initializations (and any caller-supplied
    warm starts), returning the best feasible converged result.

    Raises :class:`AllStartsFailedError` when no start converges; the best
    non-converged attempt rides along on the exception for diagnostics.
    """
    rng = np.random.default_rng(seed)
    d = problem.dim
    starts: list[np.ndarray] = []
    fixed = [coherent_start(problem.n_target, d)]
    if math.ceil(problem.n_target) < d:
        fixed.append(number_squeezed_start(problem.n_target, d))
    for x0 in fixed:
        if problem.complex_coeffs:
            x0 = np.concatenate([x0, np.zeros(d)])
        starts.append(x0)
    for extra in extra_starts:
        extra = np.asarray(extra, dtype=float).ravel()
        if extra.size == (2 * d if problem.complex_coeffs else d):
            starts.append(extra.copy())
    for _ in range(restarts):
        starts.append(
            random_feasible_start(rng, problem.n_target, d, problem.complex_coeffs)
        )

    best: OptimizationResult | None = None
    best_any: OptimizationResult | None = None
    for x0 in starts:
        result = sqp_minimize(problem, x0, opts)
        if best_any is None or result.objective_value < best_any.objective_value:
            best_any = result
        if result.converged and (best is None or result.objective_value < best.objective_value):
            best = result
    if best is None:
        raise AllStartsFailedError(
            f"none of {len(starts)} starts converged (best attempt: {best_any.message})",
            best=best_any,
        )
    coeffs = best.coeffs
    if not problem.complex_coeffs:
        coeffs = canonical_gauge(coeffs)
    else:
        coeffs = _canonical_gauge_complex(coeffs, d)
    return replace(best, coeffs=coeffs, restarts_used=restarts)


def _canonical_gauge_complex(x: np.ndarray, dim: int) -> np.ndarray:
    c = x[:dim] + 1j * x[dim:]
    moment = complex(np.vdot(c[:-1], c[1:])) if dim > 1 else 0j
    if abs(moment) > 1e-14:
        theta = -np.angle(moment)
        c = c * np.exp(1j * theta * np.arange(dim))
    k = int(np.argmax(np.abs(c)))
    if abs(c[k]) > 0:
        c = c * (np.conj(c[k]) / abs(c[k]))
    return np.concatenate([c.real, c.imag])
