"""Trajectory generation for the discrete swing model.

The recursion X_{t+1} = A X_t + B xi_t is driven by independent standard
normal vectors xi_t.  Data is always generated at the base step (1/60 s,
one AC cycle) and coarser sampling rates are produced by `subsample`,
so estimators never see the generation step directly.

Randomness: numpy's default_rng (PCG64 bit generator, ziggurat normal
transform).  Given the same integer seed the sampled noise, and hence the
trajectory, is bit-identical across platforms and runs.  Independent
streams (burn-in vs. main run, per-seed sweep cells) are derived through
numpy.random.SeedSequence spawning rather than seed arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ContinuousSystem, DiscreteSystem

# one AC cycle at 60 Hz; generation always runs at this step
DT_BASE = 1.0 / 60.0


@dataclass(frozen=True)
class Trajectory:
    """Sampled states X_t = [delta_1..delta_N, omega_1..omega_N], row per sample."""

    dt: float
    states: np.ndarray
    n_gen: int
    seed: int | None = None

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.states.ndim != 2 or self.states.shape[0] < 1:
            raise ValueError("states must be a nonempty 2-d array")
        if self.states.shape[1] != 2 * self.n_gen:
            raise ValueError(
                f"state dimension {self.states.shape[1]} != 2*n_gen = {2 * self.n_gen}")

    @property
    def n_samples(self) -> int:
        return self.states.shape[0]


def spawn_seeds(seed: int, n: int) -> list[int]:
    """n reproducible, statistically independent child seeds of `seed`."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1)[0]) for c in children]


def simulate(sys: DiscreteSystem, n_steps: int, x0: np.ndarray,
             seed: int) -> Trajectory:
    """Run the recursion for n_steps transitions; returns n_steps+1 samples.

    states[0] = x0 and states[t+1] = a states[t] + b_diag * xi_t with the
    xi_t drawn from default_rng(seed) in a single block, so the result is
    a deterministic function of (sys, n_steps, x0, seed).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    n2 = 2 * sys.n_gen
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n2,):
        raise ValueError(f"x0 must have shape ({n2},), got {x0.shape}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n_steps, n2)) * sys.b_diag
    states = np.empty((n_steps + 1, n2))
    states[0] = x0
    a = sys.a
    for t in range(n_steps):
        states[t + 1] = a @ states[t] + noise[t]
    return Trajectory(dt=sys.dt, states=states, n_gen=sys.n_gen, seed=seed)


def subsample(traj: Trajectory, stride: int) -> Trajectory:
    """Keep samples 0, k, 2k, ...; dt scales by k, length becomes ceil(T/k)."""
    if stride < 1:
        raise ValueError("stride must be at least 1")
    if stride == 1:
        return traj
    return Trajectory(dt=traj.dt * stride, states=traj.states[::stride].copy(),
                      n_gen=traj.n_gen, seed=traj.seed)


def steady_start(sys: DiscreteSystem, burn_in: int, seed: int) -> np.ndarray:
    """Initial condition in the stationary regime: end state of a burn-in run.

    burn_in = 0 returns the origin.  The caller should pass a seed distinct
    from the main run's (see spawn_seeds) so the burn-in noise is not reused.
    """
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    origin = np.zeros(2 * sys.n_gen)
    if burn_in == 0:
        return origin
    return simulate(sys, burn_in, origin, seed).states[-1]


def default_burn_in(sys: ContinuousSystem, dt: float = DT_BASE) -> int:
    """Steps covering twice the slowest mode's time constant, rounded up.

    The slowest mode is the eigenvalue of a_d with the largest nonzero real
    part; the structural zero mode (uniform angle shift) never decays and is
    excluded.
    """
    eigs = np.linalg.eigvals(sys.a_d)
    radius = max(np.max(np.abs(eigs)), 1.0)
    decaying = [ev for ev in eigs if abs(ev) > 1e-9 * radius and ev.real < 0]
    if not decaying:
        return 0
    slowest = max(ev.real for ev in decaying)
    return math.ceil(2.0 / abs(slowest) / dt)
