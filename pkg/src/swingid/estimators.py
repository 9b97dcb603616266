"""Reconstruction of the one-step matrix A and noise scale B from data.

All estimators minimize (variants of) the least-squares objective

    J(A) = sum_t ||X_{t+1} - A X_t||^2,

which depends on the data only through the empirical covariances
Sigma_1 = (1/(T-1)) sum_t X_{t+1} X_t^T, Sigma_0 = (1/(T-1)) sum_t X_t X_t^T
and the constant sum_t ||X_{t+1}||^2.  The unrestricted minimizer is the
maximum-likelihood estimate A_hat = Sigma_1 Sigma_0^{-1}; the variants add
a support constraint (CML), a quadratic prior (Tikhonov), an entrywise l1
penalty (LASSO) or an l1 + nuclear-norm split (sparse plus low rank).

Penalties multiply the raw sum-over-t objective, so hyperparameters must
be re-tuned when T changes.

Everything here is a deterministic, thread-safe function of its inputs.
The row-separable solvers (CML, LASSO) are written as whole-matrix
operations; each matrix row only ever interacts with its own data so the
result is independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .sim import Trajectory

UML = "UML"
CML = "CML"
TIKHONOV = "TIKHONOV"
LASSO = "LASSO"
SPARSE_LOW_RANK = "SPARSE_LOW_RANK"

# Sigma_0 condition numbers above this raise instead of silently pseudo-inverting
COND_THRESHOLD = 1e12

# iterative-solver defaults, overridable per call
SOLVER_TOL = 1e-10
SOLVER_MAX_ITER = 100_000


class SingularCovarianceError(ValueError):
    """Sigma_0 (or a restricted block of it) is singular or near-singular."""


class ConvergenceError(RuntimeError):
    """Iterative solver failed; carries iteration diagnostics."""

    def __init__(self, message: str, iterations: int, objective: float,
                 last_decrease: float):
        super().__init__(
            f"{message} (iterations={iterations}, objective={objective:.6e}, "
            f"last_decrease={last_decrease:.3e})")
        self.iterations = iterations
        self.objective = objective
        self.last_decrease = last_decrease


@dataclass(frozen=True)
class CovariancePair:
    """Empirical covariances with and without one-step displacement.

    next_sq_sum carries sum_t ||X_{t+1}||^2 so the exact least-squares
    objective can be evaluated from the pair alone.
    """

    sigma0: np.ndarray
    sigma1: np.ndarray
    n_samples: int
    next_sq_sum: float

    def __post_init__(self):
        if self.sigma0.shape != self.sigma1.shape or self.sigma0.ndim != 2:
            raise ValueError("sigma0 and sigma1 must be square matrices of equal shape")
        if self.n_samples < 2:
            raise ValueError("need at least 2 samples")


@dataclass(frozen=True)
class EstimationResult:
    a_hat: np.ndarray
    estimator: str
    hyperparams: dict[str, float] = field(default_factory=dict)
    objective: float = 0.0
    l_hat: np.ndarray | None = None
    b_hat: np.ndarray | None = None
    objective_history: tuple[float, ...] | None = None


def covariances(traj: Trajectory) -> CovariancePair:
    """Sigma_1, Sigma_0 and the residual-objective constant, divisor T-1."""
    if traj.n_samples < 2:
        raise ValueError("trajectory must have at least 2 samples")
    x0 = traj.states[:-1]
    x1 = traj.states[1:]
    tm1 = traj.n_samples - 1
    sigma0 = x0.T @ x0 / tm1
    sigma0 = (sigma0 + sigma0.T) / 2.0
    sigma1 = x1.T @ x0 / tm1
    return CovariancePair(sigma0=sigma0, sigma1=sigma1,
                          n_samples=traj.n_samples,
                          next_sq_sum=float(np.sum(x1 * x1)))


def ls_objective(cov: CovariancePair, a: np.ndarray) -> float:
    """sum_t ||X_{t+1} - A X_t||^2 evaluated through the covariances."""
    tm1 = cov.n_samples - 1
    return float(cov.next_sq_sum
                 - 2.0 * tm1 * np.sum(a * cov.sigma1)
                 + tm1 * np.sum((a @ cov.sigma0) * a))


def _check_invertible(sigma0: np.ndarray, n_samples: int,
                      cond_threshold: float) -> None:
    n2 = sigma0.shape[0]
    cond = np.linalg.cond(sigma0)
    if not np.isfinite(cond) or cond > cond_threshold:
        raise SingularCovarianceError(
            f"sigma0 is singular or ill-conditioned (cond={cond:.3e}); "
            f"need T >= 2N+2 = {n2 + 2} samples for invertibility with "
            f"probability one (have T={n_samples})")


def estimate_uml(cov: CovariancePair, *, cond_threshold: float = COND_THRESHOLD,
                 allow_pseudo_inverse: bool = False) -> EstimationResult:
    """Unrestricted maximum likelihood: A_hat = Sigma_1 Sigma_0^{-1}.

    allow_pseudo_inverse swaps the singularity error for a Moore-Penrose
    solve; exploratory use only, the guarantees assume invertibility.
    """
    if allow_pseudo_inverse:
        a_hat = cov.sigma1 @ np.linalg.pinv(cov.sigma0)
    else:
        _check_invertible(cov.sigma0, cov.n_samples, cond_threshold)
        # A Sigma_0 = Sigma_1 transposed into a standard left-hand solve
        a_hat = np.linalg.solve(cov.sigma0.T, cov.sigma1.T).T
    return EstimationResult(a_hat=a_hat, estimator=UML,
                            objective=ls_objective(cov, a_hat))


def estimate_cml(traj: Trajectory, *,
                 cond_threshold: float = COND_THRESHOLD) -> EstimationResult:
    """Least squares restricted to a diagonal lower-right N x N block.

    The objective is row-separable, so each row solves its own restricted
    normal equations: rows 0..N-1 keep every column, row N+i keeps columns
    0..N-1 plus its own diagonal column.  Closed form, no iterative solver.
    """
    cov = covariances(traj)
    n2 = cov.sigma0.shape[0]
    n = traj.n_gen
    tm1 = cov.n_samples - 1
    a_hat = np.zeros((n2, n2))
    all_cols = list(range(n2))
    for i in range(n2):
        cols = all_cols if i < n else list(range(n)) + [i]
        block = cov.sigma0[np.ix_(cols, cols)]
        cond = np.linalg.cond(block)
        if not np.isfinite(cond) or cond > cond_threshold:
            raise SingularCovarianceError(
                f"restricted regressor for row {i} is rank-deficient "
                f"(cond={cond:.3e})")
        a_hat[i, cols] = np.linalg.solve(block, cov.sigma1[i, cols])
    # stationarity on the permitted support: restricted gradient must vanish
    grad = 2.0 * tm1 * (a_hat @ cov.sigma0 - cov.sigma1)
    scale = 2.0 * tm1 * max(1.0, float(np.max(np.abs(cov.sigma1))))
    for i in range(n2):
        cols = all_cols if i < n else list(range(n)) + [i]
        gap = float(np.max(np.abs(grad[i, cols])))
        if gap > 1e-8 * scale:
            raise SingularCovarianceError(
                f"row {i} normal equations left a residual gradient {gap:.3e}; "
                "restricted regressor is numerically rank-deficient")
    return EstimationResult(a_hat=a_hat, estimator=CML,
                            objective=ls_objective(cov, a_hat))


def estimate_tikhonov(cov: CovariancePair, a_prev: np.ndarray,
                      nu: float) -> EstimationResult:
    """Exact minimizer of J(A) + nu ||A - A_prev||_F^2.

    Closed form (Sigma_1 + (nu/(T-1)) A_prev)(Sigma_0 + (nu/(T-1)) I)^{-1}.
    """
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    n2 = cov.sigma0.shape[0]
    if a_prev.shape != (n2, n2):
        raise ValueError(f"a_prev must be {n2}x{n2}, got {a_prev.shape}")
    tm1 = cov.n_samples - 1
    lhs = cov.sigma0 + (nu / tm1) * np.eye(n2)
    rhs = cov.sigma1 + (nu / tm1) * a_prev
    if nu == 0:
        _check_invertible(cov.sigma0, cov.n_samples, COND_THRESHOLD)
    a_hat = np.linalg.solve(lhs.T, rhs.T).T
    obj = ls_objective(cov, a_hat) + nu * float(np.sum((a_hat - a_prev) ** 2))
    return EstimationResult(a_hat=a_hat, estimator=TIKHONOV,
                            hyperparams={"nu": nu}, objective=obj)


def soft_threshold(x: np.ndarray, threshold: float) -> np.ndarray:
    """Entrywise shrink toward zero: sign(x) * max(|x| - threshold, 0)."""
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def singular_value_threshold(x: np.ndarray, threshold: float) -> np.ndarray:
    """Soft-threshold the singular values; prox of the nuclear norm."""
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    s = np.maximum(s - threshold, 0.0)
    return (u * s) @ vt


def lasso_kill_threshold(cov: CovariancePair) -> float:
    """Smallest lambda at which the zero matrix is l1-optimal."""
    return 2.0 * (cov.n_samples - 1) * float(np.max(np.abs(cov.sigma1)))


def l1_optimality_gap(cov: CovariancePair, a: np.ndarray, lam: float) -> float:
    """Worst violation of the l1 subgradient conditions at A.

    Zero entries need |grad J| <= lambda, nonzero entries need
    grad J = -lambda sign(A); returns the largest excess over either.
    """
    grad = 2.0 * (cov.n_samples - 1) * (a @ cov.sigma0 - cov.sigma1)
    at_zero = np.maximum(np.abs(grad) - lam, 0.0)
    at_nonzero = np.abs(grad + lam * np.sign(a))
    return float(np.max(np.where(a == 0.0, at_zero, at_nonzero)))


def estimate_lasso(traj: Trajectory, lam: float, *,
                   tol: float = SOLVER_TOL,
                   max_iter: int = SOLVER_MAX_ITER) -> EstimationResult:
    """Minimize J(A) + lambda ||A||_1 by proximal gradient from A = 0.

    Step size 1/(2(T-1) lambda_max(Sigma_0)), the inverse Lipschitz
    constant of the smooth part; stops when the relative objective
    decrease falls below `tol`.  The returned matrix is checked against
    the entrywise subgradient optimality conditions.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    cov = covariances(traj)
    return _lasso_from_cov(cov, lam, tol=tol, max_iter=max_iter)


def _lasso_from_cov(cov: CovariancePair, lam: float, *, tol: float,
                    max_iter: int) -> EstimationResult:
    n2 = cov.sigma0.shape[0]
    tm1 = cov.n_samples - 1
    lip = 2.0 * tm1 * float(np.linalg.eigvalsh(cov.sigma0)[-1])
    if lip <= 0.0:
        # all-zero data: the zero matrix is trivially optimal
        return EstimationResult(a_hat=np.zeros((n2, n2)), estimator=LASSO,
                                hyperparams={"lambda": lam, "iterations": 0},
                                objective=0.0, objective_history=(0.0,))
    step = 1.0 / lip
    a = np.zeros((n2, n2))
    obj = ls_objective(cov, a)
    history = [obj]
    decrease = np.inf
    for it in range(1, max_iter + 1):
        grad = 2.0 * tm1 * (a @ cov.sigma0 - cov.sigma1)
        a = soft_threshold(a - step * grad, step * lam)
        new_obj = ls_objective(cov, a) + lam * float(np.sum(np.abs(a)))
        decrease = obj - new_obj
        history.append(new_obj)
        obj = new_obj
        if decrease < tol * max(1.0, abs(obj)):
            break
    else:
        raise ConvergenceError("LASSO proximal gradient did not converge",
                               iterations=max_iter, objective=obj,
                               last_decrease=decrease)
    gap = l1_optimality_gap(cov, a, lam)
    scale = max(lam, 2.0 * tm1 * float(np.max(np.abs(cov.sigma1))), 1.0)
    if gap > 1e-4 * scale:
        raise ConvergenceError(
            f"LASSO subgradient certificate failed (gap={gap:.3e})",
            iterations=it, objective=obj, last_decrease=decrease)
    return EstimationResult(a_hat=a, estimator=LASSO,
                            hyperparams={"lambda": lam, "iterations": it,
                                         "optimality_gap": gap},
                            objective=obj, objective_history=tuple(history))


def estimate_sparse_low_rank(traj: Trajectory, lam: float, eta: float, *,
                             tol: float = SOLVER_TOL,
                             max_iter: int = SOLVER_MAX_ITER) -> EstimationResult:
    """Minimize J(A+L) + lambda ||A||_1 + eta ||L||_* by alternating prox steps.

    Each sweep takes one proximal gradient step in A (entrywise
    soft-threshold) and one in L (singular-value soft-threshold) with the
    shared Lipschitz step size, so the objective never increases; the
    history is recorded and the monotone decrease is verified.
    """
    if lam < 0 or eta < 0:
        raise ValueError("penalties must be nonnegative")
    cov = covariances(traj)
    n2 = cov.sigma0.shape[0]
    tm1 = cov.n_samples - 1
    lip = 2.0 * tm1 * float(np.linalg.eigvalsh(cov.sigma0)[-1])
    if lip <= 0.0:
        zero = np.zeros((n2, n2))
        return EstimationResult(a_hat=zero, estimator=SPARSE_LOW_RANK,
                                hyperparams={"lambda": lam, "eta": eta,
                                             "iterations": 0},
                                objective=0.0, l_hat=zero.copy(),
                                objective_history=(0.0,))
    step = 1.0 / lip
    a = np.zeros((n2, n2))
    low = np.zeros((n2, n2))

    def objective(a_m, l_m):
        return (ls_objective(cov, a_m + l_m)
                + lam * float(np.sum(np.abs(a_m)))
                + eta * float(np.sum(np.linalg.svd(l_m, compute_uv=False))))

    obj = objective(a, low)
    history = [obj]
    decrease = np.inf
    for it in range(1, max_iter + 1):
        grad = 2.0 * tm1 * ((a + low) @ cov.sigma0 - cov.sigma1)
        a = soft_threshold(a - step * grad, step * lam)
        grad = 2.0 * tm1 * ((a + low) @ cov.sigma0 - cov.sigma1)
        low = singular_value_threshold(low - step * grad, step * eta)
        new_obj = objective(a, low)
        decrease = obj - new_obj
        if decrease < -1e-9 * max(1.0, abs(obj)):
            raise ConvergenceError("objective increased across a sweep",
                                   iterations=it, objective=new_obj,
                                   last_decrease=decrease)
        history.append(new_obj)
        obj = new_obj
        if decrease < tol * max(1.0, abs(obj)):
            break
    else:
        raise ConvergenceError("sparse-plus-low-rank solver did not converge",
                               iterations=max_iter, objective=obj,
                               last_decrease=decrease)
    return EstimationResult(a_hat=a, estimator=SPARSE_LOW_RANK,
                            hyperparams={"lambda": lam, "eta": eta,
                                         "iterations": it},
                            objective=obj, l_hat=low,
                            objective_history=tuple(history))


def estimate_b(traj: Trajectory, a_hat: np.ndarray) -> np.ndarray:
    """Per-row residual scale sqrt((1/(T-1)) sum_t (X_{t+1} - A_hat X_t)_i^2).

    Maximizes the per-row Gaussian likelihood in the noise scale with
    A_hat fixed.  Rows 0..N-1 carry no process noise, so on simulated
    data fitted by least squares they come back at roundoff level.
    """
    n2 = 2 * traj.n_gen
    if a_hat.shape != (n2, n2):
        raise ValueError(f"a_hat must be {n2}x{n2}, got {a_hat.shape}")
    if traj.n_samples < 2:
        raise ValueError("trajectory must have at least 2 samples")
    resid = traj.states[1:] - traj.states[:-1] @ a_hat.T
    return np.sqrt(np.mean(resid * resid, axis=0))


def threshold_structure(a_hat: np.ndarray, n_gen: int) -> np.ndarray:
    """Zero the lower-right off-diagonal entries; everything else untouched.

    The lower-right N x N block of the true one-step matrix is the diagonal
    I - dt M^-1 D, so its N(N-1) off-diagonal entries are known zeros.
    """
    n2 = 2 * n_gen
    if a_hat.shape != (n2, n2):
        raise ValueError(f"a_hat must be {n2}x{n2}, got {a_hat.shape}")
    out = a_hat.copy()
    block = out[n_gen:, n_gen:]
    out[n_gen:, n_gen:] = np.diag(np.diag(block))
    return out
