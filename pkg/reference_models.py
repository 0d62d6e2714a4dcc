"""
Reference Models
Continuous-time Gaussian SDE and mean-field ODE references for the high-finesse limit.

Time is measured in units of the roundtrip time Δt passed to from_discrete;
convergence studies use Δt = 1/T_decay so that t counts cavity decay times.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence
import logging

import numpy as np

from crystal import DivergenceError, rk4
from machine import MachineParams, derive_params
from models import ConvergenceReport, IsingProblem, UserParams
from trajectories import TrajectoryDraws, run_batch, trajectory_generator

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DEFAULT_FINE_STEP = 1.0 / 256
REFERENCE_FINESSE = 65536.0
GAUSSIAN_VALIDITY_RATIO = 0.1


@dataclass(frozen=True)
class ContTimeParams:
    """Continuous-time rates and the integration step."""
    gamma: float
    kappa: float
    p: float
    g: float
    lam: float
    dt: float

    def __post_init__(self):
        if self.gamma < 0 or self.kappa < 0 or self.g < 0:
            raise ValueError(f"Loss, outcoupling and nonlinear rates must be non-negative: {self}")
        if self.dt <= 0:
            raise ValueError(f"Integration step must be positive, got {self.dt}")

    @property
    def net_gain(self) -> float:
        return self.p - self.kappa - self.gamma


def from_discrete(params: MachineParams, roundtrip_time: float, step: float = DEFAULT_FINE_STEP) -> ContTimeParams:
    """
    Continuous-time rates for a roundtrip of duration `roundtrip_time`.

    Per-trajectory beta/j0 arrays are averaged.
    """
    if roundtrip_time <= 0:
        raise ValueError(f"Roundtrip time must be positive, got {roundtrip_time}")
    dt = roundtrip_time
    beta = float(np.mean(params.beta))
    j0 = float(np.mean(params.j0))
    rates = ContTimeParams(
        gamma=params.r_loss ** 2 / dt,
        kappa=params.r_out ** 2 / (2.0 * dt),
        p=beta * params.eps_tau / (np.sqrt(2.0) * dt),
        g=params.eps_tau ** 2 / (4.0 * dt),
        lam=j0 * params.r_out / dt,
        dt=step,
    )
    loss = rates.kappa + rates.gamma
    if rates.g >= GAUSSIAN_VALIDITY_RATIO * loss:
        logger.warning(f"Nonlinear rate g={rates.g:.4g} is not small against kappa+gamma={loss:.4g}; "
                       f"Gaussian-state approximation is questionable")
    return rates


def continuum_params(user: UserParams, coupling_sum: float, t_ref: float = REFERENCE_FINESSE,
                     step: float = DEFAULT_FINE_STEP) -> ContTimeParams:
    """Rates of the high-finesse limit, in decay-time units, for the user's n_sat, eta_esc, r and alpha."""
    reference = user.model_copy(update={"t_decay": float(t_ref), "jitter": None})
    return from_discrete(derive_params(reference, coupling_sum), 1.0 / t_ref, step)


@dataclass
class SdeTrajectory:
    """Sampled continuous-time trajectory; row k is time k·dt."""
    times: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    var_p: Optional[np.ndarray] = None


def integrate_gaussian_sde(problem: IsingProblem, params: ContTimeParams, horizon: float,
                           rng: Optional[np.random.Generator] = None, noise: Optional[np.ndarray] = None,
                           exact: bool = False, q0: Optional[np.ndarray] = None) -> SdeTrajectory:
    """
    Euler–Maruyama (Itô) integration of the continuous Gaussian-state equations.

    Args:
        problem: Ising problem (feedback matrix W = -J)
        params: Continuous-time rates and step
        horizon: Integration time
        rng: Generator for the white noise (ignored when `noise` is given)
        noise: Explicit standard-normal increments, shape (steps, N)
        exact: Keep the g-scaled squeezing corrections and track <δp²>
        q0: Initial means (vacuum by default)

    Returns:
        SdeTrajectory
    """
    n = problem.n
    steps = int(round(horizon / params.dt))
    if steps < 0:
        raise ValueError(f"Horizon must be non-negative, got {horizon}")
    if noise is None:
        rng = rng if rng is not None else np.random.default_rng()
        noise = rng.standard_normal((steps, n))
    noise = np.asarray(noise, dtype=float)
    if noise.shape != (steps, n):
        raise ValueError(f"Noise has shape {noise.shape}, expected {(steps, n)}")

    w = problem.feedback_matrix()
    dt = params.dt
    sqrt_dt = np.sqrt(dt)
    net = params.net_gain
    loss = params.kappa + params.gamma
    sqrt_kappa = np.sqrt(params.kappa)
    feedback_noise = params.lam / (2.0 * sqrt_kappa) if params.kappa > 0 else 0.0

    q = np.zeros(n) if q0 is None else np.array(q0, dtype=float)
    v = np.full(n, 0.5)
    vp = np.full(n, 0.5)
    means = np.empty((steps + 1, n))
    variances = np.empty((steps + 1, n))
    p_variances = np.empty((steps + 1, n)) if exact else None
    means[0], variances[0] = q, v
    if exact:
        p_variances[0] = vp

    for k in range(steps):
        dw = sqrt_dt * noise[k]
        g_q2 = params.g * q * q
        drift_q = net * q - 0.5 * params.g * q ** 3 + params.lam * (w @ q)
        if exact:
            drift_q = drift_q - 0.5 * params.g * q * (3.0 * v + vp - 2.0)
            drift_v = (2.0 * net * v - 4.0 * params.kappa * (v - 0.5) ** 2 + loss - 3.0 * g_q2 * v + g_q2
                       - params.g * (3.0 * v * (v + vp / 3.0 - 1.0) - vp + 1.0))
            drift_vp = (-2.0 * params.p * vp - 2.0 * loss * (vp - 0.5) + g_q2 * (1.0 - vp)
                        + params.g * vp * (v - vp))
            vp = vp + drift_vp * dt
        else:
            drift_v = (2.0 * params.p * v - 2.0 * loss * (v - 0.5) - 4.0 * params.kappa * (v - 0.5) ** 2
                       - 2.0 * g_q2 * (1.5 * v - 0.5))
        q = q + drift_q * dt + 2.0 * sqrt_kappa * (v - 0.5) * dw + feedback_noise * (w @ dw)
        v = v + drift_v * dt

        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
            logger.error(f"SDE integration diverged at step {k + 1} (t={(k + 1) * dt:.4g})")
            raise DivergenceError(f"Non-finite state at t={(k + 1) * dt:.4g}")
        if np.any(v <= 0) or (exact and np.any(vp <= 0)):
            logger.error(f"Variance lost positivity at step {k + 1}: min <δq²>={v.min():.4g}")
            raise DivergenceError(f"Non-positive quadrature variance at t={(k + 1) * dt:.4g}")
        means[k + 1], variances[k + 1] = q, v
        if exact:
            p_variances[k + 1] = vp

    return SdeTrajectory(times=dt * np.arange(steps + 1), mean=means, var=variances, var_p=p_variances)


def integrate_mean_field(problem: IsingProblem, params: ContTimeParams, horizon: float,
                         q0: np.ndarray) -> np.ndarray:
    """
    Deterministic mean-field ODE in rescaled amplitudes q̃ = √(g/κ)<q>.

    dq̃/dt = (p-κ-γ)q̃ - (κ/2)q̃³ + λWq̃, fixed-step RK4 with step params.dt.

    Returns:
        q̃ at t = horizon
    """
    w = problem.feedback_matrix()
    net = params.net_gain

    def rhs(q: np.ndarray) -> np.ndarray:
        return net * q - 0.5 * params.kappa * q ** 3 + params.lam * (q @ w)

    steps = max(1, int(round(horizon / params.dt)))
    return rk4(rhs, np.asarray(q0, dtype=float), horizon, steps)


def landscape_potential(q: np.ndarray, params: ContTimeParams, problem: IsingProblem) -> float:
    """Potential whose negative gradient is the deterministic drift of the mean equation."""
    q = np.asarray(q, dtype=float)
    if q.shape != (problem.n,):
        raise ValueError(f"Amplitude vector has shape {q.shape}, expected ({problem.n},)")
    w = problem.feedback_matrix()
    return float(-np.sum(0.5 * params.net_gain * q ** 2 - 0.125 * params.g * q ** 4)
                 - 0.5 * params.lam * (q @ w @ q))


def coarse_grain(fine_noise: np.ndarray, factor: int) -> np.ndarray:
    """Sum blocks of `factor` fine draws, scaled by 1/√factor."""
    steps = fine_noise.shape[0] // factor
    blocks = fine_noise[: steps * factor].reshape((steps, factor) + fine_noise.shape[1:])
    return blocks.sum(axis=1) / np.sqrt(factor)


def convergence_compare(problem: IsingProblem, user: UserParams, t_decays: Sequence[int], horizon: float,
                        noise_seed: int, fine_steps_per_decay: int = 256, exact: bool = False,
                        zero_noise: bool = False) -> List[float]:
    """
    RMS deviation of discrete <q_i> from the continuous reference for each finesse.

    All runs share one fine-grained noise path; the discrete roundtrip k uses
    the coarse-grained draw of fine block k.

    Args:
        problem: Ising problem
        user: Machine parameters (t_decay is overridden per finesse; jitter ignored)
        t_decays: Finesse values, each dividing fine_steps_per_decay
        horizon: Comparison horizon in decay times
        noise_seed: Seed of the shared noise path
        fine_steps_per_decay: Fine grid steps per decay time
        exact: Use the exact continuous variant
        zero_noise: Replace the noise path by zeros

    Returns:
        RMS deviation per finesse
    """
    for t_decay in t_decays:
        if t_decay < 1 or fine_steps_per_decay % t_decay != 0:
            raise ValueError(f"T_decay={t_decay} must divide the fine grid ({fine_steps_per_decay} steps per decay)")

    n = problem.n
    fine_steps = int(round(horizon * fine_steps_per_decay))
    if zero_noise:
        fine_noise = np.zeros((fine_steps, n))
    else:
        fine_noise = trajectory_generator(noise_seed, 0).standard_normal((fine_steps, n))

    base = user.model_copy(update={"jitter": None, "mode": "gaussian"})
    reference = integrate_gaussian_sde(
        problem,
        continuum_params(base, problem.coupling_abs_sum(), step=1.0 / fine_steps_per_decay),
        horizon,
        noise=fine_noise,
        exact=exact,
    )

    rms = []
    for t_decay in t_decays:
        factor = fine_steps_per_decay // int(t_decay)
        coarse = coarse_grain(fine_noise, factor)
        draws = TrajectoryDraws(z_alpha=np.zeros(1), z_r=np.zeros(1), signs=np.ones((1, n)), noise=coarse[None])
        finesse_user = base.model_copy(update={"t_decay": float(t_decay)})
        batch = run_batch(problem, finesse_user, noise_seed, [0], coarse.shape[0], keep_moments=True, draws=draws)
        discrete = batch.mean_q[0]
        continuous = reference.mean[factor::factor][: len(discrete)]
        rms.append(float(np.sqrt(np.mean((discrete - continuous) ** 2))))
    logger.info(f"Convergence (seed {noise_seed}): RMS {dict(zip(t_decays, rms))}")
    return rms


def convergence_study(problem: IsingProblem, user: UserParams, t_decays: Sequence[int], horizon: float,
                      noise_seeds: Sequence[int], fine_steps_per_decay: int = 256,
                      exact: bool = False) -> ConvergenceReport:
    """convergence_compare over several noise seeds."""
    rms = [convergence_compare(problem, user, t_decays, horizon, seed, fine_steps_per_decay, exact)
           for seed in noise_seeds]
    params = derive_params(user.model_copy(update={"jitter": None}), problem.coupling_abs_sum())
    return ConvergenceReport(
        t_decays=[int(t) for t in t_decays],
        horizon=horizon,
        seeds=list(noise_seeds),
        rms=rms,
        amplitude_scale=float(np.sqrt(params.n_sat_effective)),
        params={"machine": user.model_dump(), "n": problem.n, "exact": exact,
                "fine_steps_per_decay": fine_steps_per_decay},
    )
