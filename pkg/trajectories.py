"""
Trajectory Simulation
Deterministic per-trajectory random streams and batched machine runs.

Each trajectory owns a Philox stream keyed on (master seed, trajectory index).
Draw order inside a stream is fixed: jitter pair, initial signs, then the
(roundtrip, pulse) noise block. Results therefore do not depend on how
trajectories are grouped into batches.
"""

from dataclasses import dataclass
from typing import Optional, Sequence
import logging

import numpy as np

from machine import CoherentIsingMachine, MachineParams, derive_params, jitter_params
from models import IsingProblem, UserParams

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def trajectory_generator(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for one trajectory."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


@dataclass
class TrajectoryDraws:
    """All random inputs of a batch of trajectories."""
    z_alpha: np.ndarray   # (B,)
    z_r: np.ndarray       # (B,)
    signs: np.ndarray     # (B, N) ±1
    noise: np.ndarray     # (B, T, N)


def draw_streams(seed: int, indices: Sequence[int], n: int, t_sim: int) -> TrajectoryDraws:
    """Draw the random inputs of the given trajectories."""
    z = np.empty((len(indices), 2))
    signs = np.empty((len(indices), n))
    noise = np.empty((len(indices), t_sim, n))
    for row, index in enumerate(indices):
        gen = trajectory_generator(seed, index)
        z[row] = gen.standard_normal(2)
        signs[row] = 2.0 * gen.integers(0, 2, size=n) - 1.0
        noise[row] = gen.standard_normal((t_sim, n))
    return TrajectoryDraws(z_alpha=z[:, 0], z_r=z[:, 1], signs=signs, noise=noise)


@dataclass
class TrajectoryBatch:
    """Output of a batched run; row b is trajectory indices[b]."""
    indices: np.ndarray
    signs: np.ndarray                       # (B, T, N) bool, True = +1
    records: Optional[np.ndarray] = None    # (B, T, N) raw w
    mean_q: Optional[np.ndarray] = None     # (B, T, N) after each roundtrip
    var_q: Optional[np.ndarray] = None
    terminated_at: Optional[np.ndarray] = None   # (B,) roundtrip or -1


def batch_params(user: UserParams, problem: IsingProblem, draws: TrajectoryDraws) -> MachineParams:
    """Machine parameters with per-trajectory jitter broadcast over pulses."""
    alpha, r = jitter_params(user, draws.z_alpha, draws.z_r)
    return derive_params(user, problem.coupling_abs_sum(), alpha_fb=alpha[:, None], pump_r=r[:, None])


def run_batch(problem: IsingProblem, user: UserParams, seed: int, indices: Sequence[int], t_sim: int,
              keep_records: bool = False, keep_moments: bool = False,
              draws: Optional[TrajectoryDraws] = None) -> TrajectoryBatch:
    """
    Simulate a batch of trajectories from empty cavities.

    Args:
        problem: Ising problem
        user: User parameters (jitter applied per trajectory)
        seed: Master seed
        indices: Trajectory indices (select the random streams)
        t_sim: Roundtrips per trajectory
        keep_records: Keep the raw homodyne values
        keep_moments: Keep per-roundtrip q-means and q-variances
        draws: Explicit random inputs overriding the streams

    Returns:
        TrajectoryBatch
    """
    indices = np.asarray(indices, dtype=np.int64)
    if draws is None:
        draws = draw_streams(seed, indices, problem.n, t_sim)
    params = batch_params(user, problem, draws)
    machine = CoherentIsingMachine(params, problem)

    batch = len(indices)
    n = problem.n
    state = machine.initial_state(batch, signs=draws.signs)
    signs = np.empty((batch, t_sim, n), dtype=bool)
    records = np.empty((batch, t_sim, n)) if keep_records else None
    mean_q = np.empty((batch, t_sim, n)) if keep_moments else None
    var_q = np.empty((batch, t_sim, n)) if keep_moments else None
    terminated_at = np.full(batch, -1, dtype=np.int64)

    for k in range(t_sim):
        frozen = state.terminated.copy() if state.terminated is not None else None
        state, w = machine.step(state, draws.noise[:, k, :])
        current = w >= 0.0
        if frozen is not None and np.any(frozen):
            current[frozen] = signs[frozen, k - 1]
            w = np.where(frozen[:, None], records[:, k - 1] if keep_records else w, w)
        if state.terminated is not None:
            newly = state.terminated & (terminated_at < 0)
            terminated_at[newly] = k + 1
        signs[:, k] = current
        if keep_records:
            records[:, k] = w
        if keep_moments:
            if state.pulses is not None:
                mean_q[:, k] = state.pulses.mean[..., 0]
                var_q[:, k] = state.pulses.cov[..., 0, 0]
            else:
                mean_q[:, k] = state.amplitudes
                var_q[:, k] = np.nan

    return TrajectoryBatch(
        indices=indices,
        signs=signs,
        records=records,
        mean_q=mean_q,
        var_q=var_q,
        terminated_at=terminated_at,
    )
