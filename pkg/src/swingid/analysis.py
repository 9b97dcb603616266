"""Error quantification and spectral diagnostics for reconstructed dynamics.

Discrete estimates map back to continuous time through A_d = (A - I)/dt.
Reconstruction quality is the relative Frobenius error against the ground
truth.  The probabilistic error envelopes (one for the discrete matrix,
one for the continuous matrix) involve expectations of Tr Sigma_0 and
||Sigma_0^{-1}||_F^2 that have no closed form; they are estimated here by
seeded Monte Carlo so that bound checks are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .estimators import COND_THRESHOLD, covariances
from .model import DiscreteSystem
from .sim import simulate, spawn_seeds, steady_start

DISCRETE = "DISCRETE"
CONTINUOUS = "CONTINUOUS"


@dataclass(frozen=True)
class BoundReport:
    """Monte Carlo evaluation of an error bound right-hand side.

    n_discarded counts trials dropped because Sigma_0 came out singular.
    """

    epsilon: float
    rhs: float
    trace_sigma0_mean: float
    inv_norm_mean: float
    n_trials: int
    which: str
    n_discarded: int = 0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.rhs < 0.0:
            raise ValueError("rhs must be nonnegative")
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.which not in (DISCRETE, CONTINUOUS):
            raise ValueError(f"unknown bound tag {self.which!r}")


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues of a continuous-time matrix with the critical ones singled out.

    `critical` holds the eigenvalue(s) of largest real part among those
    outside the zero-mode tolerance; a complex critical mode appears with
    its conjugate.
    """

    eigenvalues: tuple[complex, ...]
    critical: tuple[complex, ...]
    zero_mode_tol: float


def to_continuous(a_hat: np.ndarray, dt: float) -> np.ndarray:
    """Invert the forward-Euler map: (a_hat - I)/dt."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if a_hat.ndim != 2 or a_hat.shape[0] != a_hat.shape[1]:
        raise ValueError("a_hat must be square")
    return (a_hat - np.eye(a_hat.shape[0])) / dt


def relative_error(a_hat_d: np.ndarray, a_d: np.ndarray) -> float:
    """||a_hat_d - a_d||_F / ||a_d||_F."""
    if a_hat_d.shape != a_d.shape:
        raise ValueError(f"shape mismatch {a_hat_d.shape} vs {a_d.shape}")
    ref = np.linalg.norm(a_d)
    if ref == 0.0:
        raise ValueError("reference matrix has zero norm")
    return float(np.linalg.norm(a_hat_d - a_d) / ref)


def _sigma0_moments(sys: DiscreteSystem, n_samples: int, n_trials: int,
                    seed: int, burn_in: int,
                    cond_threshold: float) -> tuple[float, float, int]:
    """Monte Carlo means of Tr Sigma_0 and ||Sigma_0^{-1}||_F^2.

    Each trial draws a fresh steady-state trajectory.  Singular trials are
    discarded and counted.  Means use exact (fsum) aggregation so the
    result does not depend on accumulation order.
    """
    traces: list[float] = []
    inv_norms: list[float] = []
    discarded = 0
    for trial_seed in spawn_seeds(seed, n_trials):
        burn_seed, run_seed = spawn_seeds(trial_seed, 2)
        x0 = steady_start(sys, burn_in, burn_seed)
        traj = simulate(sys, n_samples - 1, x0, run_seed)
        sigma0 = covariances(traj).sigma0
        cond = np.linalg.cond(sigma0)
        if not np.isfinite(cond) or cond > cond_threshold:
            discarded += 1
            continue
        traces.append(float(np.trace(sigma0)))
        inv_norms.append(float(np.sum(np.linalg.inv(sigma0) ** 2)))
    if not traces:
        raise ValueError("all Monte Carlo trials produced singular sigma0")
    kept = len(traces)
    return math.fsum(traces) / kept, math.fsum(inv_norms) / kept, discarded


def default_bound_burn_in(sys: DiscreteSystem) -> int:
    """Burn-in of twice the slowest decaying mode's time constant."""
    eigs = np.linalg.eigvals(to_continuous(sys.a, sys.dt))
    radius = max(np.max(np.abs(eigs)), 1.0)
    decaying = [ev for ev in eigs if abs(ev) > 1e-9 * radius and ev.real < 0]
    if not decaying:
        return 0
    slowest = max(ev.real for ev in decaying)
    return math.ceil(2.0 / abs(slowest) / sys.dt)


def theorem1_bound(sys: DiscreteSystem, n_samples: int, epsilon: float,
                   n_trials: int, seed: int, *,
                   burn_in: int | None = None,
                   cond_threshold: float = COND_THRESHOLD) -> BoundReport:
    """Envelope on ||A_hat - A||_F holding with probability at least 1 - epsilon.

    rhs = (||B||_2 / (epsilon sqrt(T-1))) sqrt(E[Tr Sigma_0] E[||Sigma_0^{-1}||_F^2])
    with the expectations replaced by seeded Monte Carlo means over
    `n_trials` fresh steady-state trajectories of length T = n_samples.
    """
    n2 = 2 * sys.n_gen
    if n_samples <= n2 + 2:
        raise ValueError(f"need T > 2N+2 = {n2 + 2} samples, got {n_samples}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if burn_in is None:
        burn_in = default_bound_burn_in(sys)
    b_norm = float(np.max(np.abs(sys.b_diag)))
    if b_norm == 0.0:
        # noiseless system: the bound collapses to zero with no data needed
        return BoundReport(epsilon=epsilon, rhs=0.0, trace_sigma0_mean=0.0,
                           inv_norm_mean=0.0, n_trials=n_trials, which=DISCRETE)
    trace_mean, inv_mean, discarded = _sigma0_moments(
        sys, n_samples, n_trials, seed, burn_in, cond_threshold)
    rhs = b_norm / (epsilon * math.sqrt(n_samples - 1)) * math.sqrt(
        trace_mean * inv_mean)
    return BoundReport(epsilon=epsilon, rhs=rhs, trace_sigma0_mean=trace_mean,
                       inv_norm_mean=inv_mean, n_trials=n_trials,
                       which=DISCRETE, n_discarded=discarded)


def corollary2_bound(noise_sigma: np.ndarray, inertia: np.ndarray, dt: float,
                     n_samples: int, epsilon: float,
                     expectations: BoundReport) -> BoundReport:
    """Envelope on ||A_hat_d - A_d||_F for the continuous-time matrix.

    rhs = (1/epsilon) sqrt( (sum_i sigma_P_i^2 / M_i^2) / (dt (T-1))
                            * E[Tr Sigma_0] * E[||Sigma_0^{-1}||_F^2] ),
    reusing the Monte Carlo expectations of a theorem1_bound report.
    Depends on the sampling only through t_obs = T dt.
    """
    noise_sigma = np.asarray(noise_sigma, dtype=float)
    inertia = np.asarray(inertia, dtype=float)
    if noise_sigma.shape != inertia.shape:
        raise ValueError("noise and inertia lists must have equal length")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    power = float(np.sum((noise_sigma / inertia) ** 2))
    rhs = (1.0 / epsilon) * math.sqrt(
        power / (dt * (n_samples - 1))
        * expectations.trace_sigma0_mean * expectations.inv_norm_mean)
    return BoundReport(epsilon=epsilon, rhs=rhs,
                       trace_sigma0_mean=expectations.trace_sigma0_mean,
                       inv_norm_mean=expectations.inv_norm_mean,
                       n_trials=expectations.n_trials, which=CONTINUOUS,
                       n_discarded=expectations.n_discarded)


def spectrum(a_d: np.ndarray, zero_mode_tol: float | None = None) -> SpectralReport:
    """Full eigendecomposition with the critical eigenvalue(s) identified.

    Criticality means largest real part among eigenvalues with modulus
    above zero_mode_tol, which excludes the structural Laplacian zero mode;
    the default tolerance is 1e-6 times the spectral radius.
    """
    if not np.all(np.isfinite(a_d)):
        raise ValueError("matrix has non-finite entries")
    try:
        eigs = np.linalg.eigvals(a_d)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"eigensolver failed: {exc}") from exc
    radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    if zero_mode_tol is None:
        zero_mode_tol = 1e-6 * radius
    order = np.lexsort((eigs.imag, -eigs.real))
    eigs = eigs[order]
    eligible = eigs[np.abs(eigs) > zero_mode_tol]
    if eligible.size:
        max_re = float(np.max(eligible.real))
        re_tol = 1e-9 * max(radius, 1.0)
        critical = tuple(complex(ev) for ev in eligible
                         if ev.real >= max_re - re_tol)
    else:
        critical = ()
    return SpectralReport(eigenvalues=tuple(complex(ev) for ev in eigs),
                          critical=critical, zero_mode_tol=zero_mode_tol)


def spectral_distance(eigs_a, eigs_b) -> float:
    """Mean matched distance between two eigenvalue sets.

    Solves the minimum-cost perfect matching under absolute-difference
    cost, so permuted but equal spectra are at distance zero.
    """
    a = np.asarray(eigs_a, dtype=complex)
    b = np.asarray(eigs_b, dtype=complex)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("eigenvalue lists must be 1-d and of equal length")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean())
