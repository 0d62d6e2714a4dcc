"""
MFB-CIM Machine
Physical parametrization and the per-roundtrip pulse pipeline.

Roundtrip order: facet loss -> crystal -> facet loss -> outcoupling and
q-homodyne -> measurement feedback. Pulses are processed as a batch
(any leading axes, pulses on the last axis); cross-pulse correlations are
never stored.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union
import logging

import numpy as np

from crystal import CrystalState, DivergenceError, propagate_classical, propagate_reduced, SQRT2
from gaussian_core import (
    GaussianMode,
    apply_beamsplitter,
    displace,
    homodyne_q,
    partial_trace,
    tensor,
    vacuum,
)
from models import IsingProblem, UserParams

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

EPS_TAU_SQ_CAP = 1e-2
MEAN_FIELD_Q0 = 1e-3
OVERFLOW_LIMIT = 1e100

ArrayLike = Union[float, np.ndarray]


class InfeasibleOutcouplingError(ValueError):
    """Raised when the requested outcoupling exceeds the total roundtrip attenuation."""


@dataclass(frozen=True)
class MachineParams:
    """
    Derived physical parameters.

    `beta` and `j0` are scalars or per-trajectory arrays shaped (..., 1) so
    they broadcast over the pulse axis.
    """
    r_loss: float
    r_out: float
    eps_tau: float
    beta_th: float
    beta: ArrayLike
    j0: ArrayLike
    R_out: float
    R_loss: float
    n_sat_effective: float
    t_decay: float
    mode: str = "gaussian"
    sigma_fb: float = 0.0
    crystal_steps: int = 16
    capped: bool = False

    @property
    def t_loss(self) -> float:
        return float(np.sqrt(1.0 - self.r_loss ** 2))

    @property
    def t_out(self) -> float:
        return float(np.sqrt(1.0 - self.r_out ** 2))


def derive_params(user: UserParams, coupling_sum: float,
                  alpha_fb: Optional[ArrayLike] = None,
                  pump_r: Optional[ArrayLike] = None) -> MachineParams:
    """
    Map user-facing parameters onto the physical ones.

    Args:
        user: User parameters
        coupling_sum: Σ_{i≠j} |J_ij| of the problem
        alpha_fb: Optional override (scalar or per-trajectory array) of user.alpha_fb
        pump_r: Optional override (scalar or per-trajectory array) of user.pump_r

    Returns:
        MachineParams
    """
    if coupling_sum <= 0:
        raise ValueError("Problem has no couplings; the feedback gain is undefined")

    alpha_fb = user.alpha_fb if alpha_fb is None else alpha_fb
    pump_r = user.pump_r if pump_r is None else pump_r
    t_decay = user.t_decay

    decay = np.exp(-2.0 / t_decay)
    R_out = user.eta_esc * (1.0 - decay)
    if R_out >= 1.0:
        raise InfeasibleOutcouplingError(
            f"Outcoupling reflectivity {R_out:.4g} >= 1 for eta_esc={user.eta_esc}, T_decay={t_decay}"
        )
    R_loss = max(0.0, 1.0 - decay / (1.0 - R_out))
    r_loss = float(np.sqrt(1.0 - np.sqrt(1.0 - R_loss)))
    r_out = float(np.sqrt(R_out))

    eps_tau_sq = 8.0 / (user.n_sat * t_decay)
    capped = eps_tau_sq > EPS_TAU_SQ_CAP
    n_sat_effective = 800.0 / t_decay if capped else user.n_sat
    if capped:
        eps_tau_sq = EPS_TAU_SQ_CAP
        logger.info(f"Nonlinear strength capped at ετ=0.1; effective n_sat={n_sat_effective:.4g}")
    eps_tau = float(np.sqrt(eps_tau_sq))
    beta_th = SQRT2 / (eps_tau * t_decay)

    if user.mode == "coherent":
        eps_tau = 0.0
        beta = 0.0 * np.asarray(pump_r, dtype=float)
    else:
        beta = np.asarray(pump_r, dtype=float) * beta_th

    j0 = -np.asarray(alpha_fb, dtype=float) / (np.sqrt(t_decay) * np.sqrt(coupling_sum))

    return MachineParams(
        r_loss=r_loss,
        r_out=r_out,
        eps_tau=eps_tau,
        beta_th=beta_th,
        beta=beta if beta.ndim else float(beta),
        j0=j0 if j0.ndim else float(j0),
        R_out=float(R_out),
        R_loss=float(R_loss),
        n_sat_effective=float(n_sat_effective),
        t_decay=float(t_decay),
        mode=user.mode,
        sigma_fb=user.sigma_fb,
        crystal_steps=user.crystal_steps,
        capped=capped,
    )


def jitter_params(user: UserParams, z_alpha: ArrayLike, z_r: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-trajectory (alpha_fb, pump_r) perturbed by standard-normal draws.

    Clamped so alpha_fb stays positive and |pump_r| stays below 2.
    """
    alpha = np.full(np.shape(z_alpha), user.alpha_fb, dtype=float)
    r = np.full(np.shape(z_r), user.pump_r, dtype=float)
    if user.jitter is not None:
        alpha = alpha + user.jitter.alpha_fb * np.asarray(z_alpha)
        r = r + user.jitter.pump_r * np.asarray(z_r)
        alpha = np.maximum(alpha, 1e-6)
        r = np.clip(r, -1.999, 1.999)
    return alpha, r


def threshold_eigenvalue(params: MachineParams, problem: IsingProblem) -> float:
    """
    Largest eigenvalue of the small-signal one-roundtrip q-mean map.

    M = g·t_loss²·(t_out·I + J0·r_out·W), where g = exp(βετ/√2) is the
    undepleted crystal gain and W the feedback matrix.
    """
    gain = np.exp(float(np.mean(params.beta)) * params.eps_tau / SQRT2)
    attenuation = params.t_loss ** 2
    w = problem.feedback_matrix()
    m = gain * attenuation * (params.t_out * np.eye(problem.n) + float(np.mean(params.j0)) * params.r_out * w)
    return float(np.max(np.linalg.eigvalsh(m)))


def linear_threshold(params: MachineParams, problem: IsingProblem) -> bool:
    """True when the linearized roundtrip map has an eigenvalue above one."""
    return threshold_eigenvalue(params, problem) > 1.0


@dataclass(frozen=True)
class MachineState:
    """
    Ensemble of pulse states at roundtrip boundary k.

    Gaussian/coherent modes fill `pulses` (batch shape (..., N)); the
    mean-field mode fills `amplitudes` (..., N) with rescaled q̃ values.
    """
    roundtrip: int
    pulses: Optional[GaussianMode] = None
    amplitudes: Optional[np.ndarray] = None
    terminated: Optional[np.ndarray] = None


class CoherentIsingMachine:
    """Applies roundtrip maps for one problem and one parameter set."""

    def __init__(self, params: MachineParams, problem: IsingProblem):
        """
        Initialize the machine.

        Args:
            params: Derived machine parameters (beta/j0 may be per-trajectory arrays)
            problem: Ising problem embedded through the feedback matrix
        """
        self.params = params
        self.problem = problem
        self.n = problem.n
        self.feedback_matrix = problem.feedback_matrix()

    def initial_state(self, batch: int, signs: Optional[np.ndarray] = None) -> MachineState:
        """
        Empty-cavity initial state for `batch` trajectories.

        Args:
            batch: Number of trajectories
            signs: (batch, N) ±1 initial signs, used by the mean-field mode
        """
        if self.params.mode == "meanfield":
            if signs is None:
                signs = np.ones((batch, self.n))
            return MachineState(roundtrip=0, amplitudes=MEAN_FIELD_Q0 * np.asarray(signs, dtype=float))
        return MachineState(
            roundtrip=0,
            pulses=vacuum((batch, self.n)),
            terminated=np.zeros(batch, dtype=bool),
        )

    def feedback(self, records: np.ndarray) -> np.ndarray:
        """v_i = J0 Σ_j W_ij w_j for every trajectory in the batch."""
        return self.params.j0 * (records @ self.feedback_matrix)

    def _facet_loss(self, pulses: GaussianMode) -> GaussianMode:
        joint = apply_beamsplitter(tensor(pulses, vacuum(pulses.batch_shape)), self.params.r_loss)
        return partial_trace(joint, keep="a")

    def _crystal(self, pulses: GaussianMode) -> GaussianMode:
        state = CrystalState.from_signal(pulses, self.params.beta)
        out = propagate_reduced(state, self.params.eps_tau, self.params.crystal_steps)
        return out.to_signal()

    def _measure_and_feed_back(self, pulses: GaussianMode, noise: np.ndarray) -> Tuple[GaussianMode, np.ndarray]:
        joint = apply_beamsplitter(tensor(pulses, vacuum(pulses.batch_shape)), self.params.r_out)
        outcome = homodyne_q(joint, measured="b", noise=noise)
        records = outcome.value
        v = self.feedback(records)
        kick = np.stack([v, np.zeros_like(v)], axis=-1)
        return displace(outcome.conditioned, kick), records

    def roundtrip(self, state: MachineState, noise: np.ndarray) -> Tuple[MachineState, np.ndarray]:
        """
        One full Gaussian roundtrip.

        Args:
            state: Current ensemble state
            noise: Standard-normal homodyne draws, shape (..., N)

        Returns:
            (new state, homodyne records w)
        """
        pulses = self._facet_loss(state.pulses)
        if self.params.eps_tau > 0:
            pulses = self._crystal(pulses)
        pulses = self._facet_loss(pulses)
        pulses, records = self._measure_and_feed_back(pulses, noise)
        return replace(state, roundtrip=state.roundtrip + 1, pulses=pulses), records

    def coherent_state_roundtrip(self, state: MachineState, noise: np.ndarray) -> Tuple[MachineState, np.ndarray]:
        """
        Roundtrip with the crystal removed (linear dynamics).

        Trajectories whose means overflow are terminated: their state is reset to
        vacuum and flagged, and the caller repeats their last record.
        """
        pulses = self._facet_loss(state.pulses)
        pulses = self._facet_loss(pulses)
        pulses, records = self._measure_and_feed_back(pulses, noise)

        q = pulses.mean[..., 0]
        blown = ~np.all(np.isfinite(q) & (np.abs(q) < OVERFLOW_LIMIT), axis=-1)
        terminated = state.terminated if state.terminated is not None else np.zeros(blown.shape, dtype=bool)
        newly = blown & ~terminated
        if np.any(newly):
            logger.warning(f"Terminated {int(np.sum(newly))} trajectories on overflow at roundtrip {state.roundtrip + 1}")
        terminated = terminated | blown
        if np.any(terminated):
            reset = vacuum(pulses.batch_shape)
            mask = terminated[..., None, None]
            pulses = GaussianMode(
                mean=np.where(mask, reset.mean, pulses.mean),
                cov=np.where(mask[..., None], reset.cov, pulses.cov),
            )
        return MachineState(roundtrip=state.roundtrip + 1, pulses=pulses, terminated=terminated), records

    def mean_field_roundtrip(self, state: MachineState, noise: np.ndarray,
                             sigma_fb: Optional[float] = None) -> Tuple[MachineState, np.ndarray]:
        """
        Classical roundtrip on rescaled amplitudes q̃ = √(g/κ)·<q>.

        Args:
            state: Ensemble state with `amplitudes`
            noise: Standard-normal feedback-noise draws, shape (..., N)
            sigma_fb: Feedback noise root-variance (defaults to params.sigma_fb)

        Returns:
            (new state, records w̃ = r_out·q̃)
        """
        p = self.params
        sigma_fb = p.sigma_fb if sigma_fb is None else sigma_fb
        q = state.amplitudes * p.t_loss

        if p.eps_tau > 0:
            if p.r_out <= 0:
                raise ValueError("Mean-field rescaling needs a non-zero outcoupler")
            scale = p.eps_tau / (SQRT2 * p.r_out)   # √(g/κ)
            x = q / (SQRT2 * scale)
            xb = np.broadcast_to(np.asarray(p.beta, dtype=float) / SQRT2, x.shape)
            x, _ = propagate_classical(x, xb, p.eps_tau, p.crystal_steps)
            q = SQRT2 * scale * x

        q = q * p.t_loss
        records = p.r_out * q
        q = q * p.t_out
        q = q + self.feedback(records + sigma_fb * np.asarray(noise, dtype=float))
        if not np.all(np.isfinite(q)):
            logger.error("Mean-field amplitudes diverged")
            raise DivergenceError("Mean-field amplitudes became non-finite")
        return MachineState(roundtrip=state.roundtrip + 1, amplitudes=q), records

    def step(self, state: MachineState, noise: np.ndarray) -> Tuple[MachineState, np.ndarray]:
        """Dispatch on the configured mode."""
        if self.params.mode == "meanfield":
            return self.mean_field_roundtrip(state, noise)
        if self.params.mode == "coherent":
            return self.coherent_state_roundtrip(state, noise)
        return self.roundtrip(state, noise)
