"""
Gaussian-State Core
Mean/covariance algebra for single- and two-mode Gaussian states in (q, p) quadratures.

Every operation accepts leading batch axes: a GaussianMode may hold one pulse
(mean shape (2,)) or a whole ensemble of pulses (mean shape (..., 2)).
Vacuum covariance is diag(1/2, 1/2).
"""

from dataclasses import dataclass
from typing import Union
import logging

import numpy as np

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

VACUUM_VARIANCE = 0.5
MIN_MEASURED_VARIANCE = 1e-12

ArrayLike = Union[float, np.ndarray]


class NumericalDegeneracyError(ArithmeticError):
    """Raised when a homodyne measurement sees a vanishing q-variance."""


@dataclass(frozen=True)
class GaussianMode:
    """Single-mode Gaussian state: mean (..., 2) and covariance (..., 2, 2)."""
    mean: np.ndarray
    cov: np.ndarray

    @property
    def batch_shape(self) -> tuple:
        return self.mean.shape[:-1]

    def determinant(self) -> np.ndarray:
        return np.linalg.det(self.cov)


@dataclass(frozen=True)
class JointGaussianState:
    """
    Two-mode Gaussian state.

    `cross` is the covariance block V between the quadratures of mode a
    (rows) and mode b (columns).
    """
    mean_a: np.ndarray
    mean_b: np.ndarray
    cov_a: np.ndarray
    cov_b: np.ndarray
    cross: np.ndarray

    def full_mean(self) -> np.ndarray:
        return np.concatenate([self.mean_a, self.mean_b], axis=-1)

    def full_cov(self) -> np.ndarray:
        top = np.concatenate([self.cov_a, self.cross], axis=-1)
        bottom = np.concatenate([np.swapaxes(self.cross, -1, -2), self.cov_b], axis=-1)
        return np.concatenate([top, bottom], axis=-2)

    @classmethod
    def from_full(cls, mean: np.ndarray, cov: np.ndarray) -> "JointGaussianState":
        return cls(
            mean_a=mean[..., :2],
            mean_b=mean[..., 2:],
            cov_a=cov[..., :2, :2],
            cov_b=cov[..., 2:, 2:],
            cross=cov[..., :2, 2:],
        )


@dataclass(frozen=True)
class HomodyneOutcome:
    """Result of a q-homodyne measurement: record value w and the conditioned retained mode."""
    value: np.ndarray
    conditioned: GaussianMode


def _symmetrize(cov: np.ndarray) -> np.ndarray:
    return 0.5 * (cov + np.swapaxes(cov, -1, -2))


def vacuum(batch_shape: tuple = ()) -> GaussianMode:
    """Vacuum state, optionally broadcast over `batch_shape`."""
    mean = np.zeros(tuple(batch_shape) + (2,))
    cov = np.broadcast_to(np.eye(2) * VACUUM_VARIANCE, tuple(batch_shape) + (2, 2)).copy()
    return GaussianMode(mean=mean, cov=cov)


def coherent(q: ArrayLike, p: ArrayLike = 0.0) -> GaussianMode:
    """Coherent state with quadrature means (q, p) and vacuum covariance."""
    q, p = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
    state = vacuum(q.shape)
    return GaussianMode(mean=np.stack([q, p], axis=-1), cov=state.cov)


def check_mode(mode: GaussianMode, tol: float = 1e-12) -> None:
    """
    Validate the GaussianMode invariants.

    Raises:
        ValueError: if the state is non-finite, asymmetric or violates det(cov) >= 1/4
    """
    if not (np.all(np.isfinite(mode.mean)) and np.all(np.isfinite(mode.cov))):
        raise ValueError("Gaussian mode has non-finite entries")
    if not np.allclose(mode.cov, np.swapaxes(mode.cov, -1, -2), atol=tol, rtol=0.0):
        raise ValueError("Gaussian mode covariance is not symmetric")
    det = mode.determinant()
    if np.any(det < 0.25 - tol):
        raise ValueError(f"Heisenberg bound violated: min det(cov) = {np.min(det):.6g} < 1/4")


def joint_is_physical(state: JointGaussianState, tol: float = 1e-12) -> bool:
    """Check cov + (i/2)Ω >= 0 for the assembled 4x4 covariance."""
    omega = np.array([[0.0, 1.0, 0.0, 0.0],
                      [-1.0, 0.0, 0.0, 0.0],
                      [0.0, 0.0, 0.0, 1.0],
                      [0.0, 0.0, -1.0, 0.0]])
    cov = state.full_cov()
    if not np.all(np.isfinite(cov)):
        return False
    eigenvalues = np.linalg.eigvalsh(cov + 0.5j * omega)
    return bool(np.all(eigenvalues >= -tol))


def tensor(a: GaussianMode, b: GaussianMode) -> JointGaussianState:
    """Product state a ⊗ b with zero cross-covariance."""
    mean_a, mean_b = np.broadcast_arrays(a.mean, b.mean)
    cov_a, cov_b = np.broadcast_arrays(a.cov, b.cov)
    return JointGaussianState(
        mean_a=mean_a.copy(),
        mean_b=mean_b.copy(),
        cov_a=cov_a.copy(),
        cov_b=cov_b.copy(),
        cross=np.zeros_like(cov_a),
    )


def partial_trace(state: JointGaussianState, keep: str = "a") -> GaussianMode:
    """Marginal of the kept mode ('a' or 'b'); the cross block is discarded."""
    if keep == "a":
        return GaussianMode(mean=state.mean_a, cov=state.cov_a)
    if keep == "b":
        return GaussianMode(mean=state.mean_b, cov=state.cov_b)
    raise ValueError(f"Unknown mode selector: {keep!r} (expected 'a' or 'b')")


def beamsplitter_matrix(r: float) -> np.ndarray:
    """Symplectic beamsplitter on (q_a, p_a, q_b, p_b) with exchange amplitude r."""
    t = np.sqrt(1.0 - r * r)
    return np.array([[t, 0.0, -r, 0.0],
                     [0.0, t, 0.0, -r],
                     [r, 0.0, t, 0.0],
                     [0.0, r, 0.0, t]])


def apply_beamsplitter(state: JointGaussianState, r: float) -> JointGaussianState:
    """
    Mix the two modes with field-exchange amplitude r.

    Args:
        state: Joint two-mode state
        r: Exchange amplitude in [0, 1]

    Returns:
        Joint state with mean' = S·mean and cov' = S·cov·Sᵀ
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"Beamsplitter amplitude must lie in [0, 1], got {r}")

    s = beamsplitter_matrix(r)
    mean = np.einsum("ij,...j->...i", s, state.full_mean())
    cov = _symmetrize(np.einsum("ij,...jk,lk->...il", s, state.full_cov(), s))
    return JointGaussianState.from_full(mean, cov)


def displace(mode: GaussianMode, alpha: np.ndarray) -> GaussianMode:
    """Shift the mean by `alpha` (..., 2); covariance unchanged."""
    return GaussianMode(mean=mode.mean + np.asarray(alpha, dtype=float), cov=mode.cov)


def homodyne_q(state: JointGaussianState, measured: str, noise: ArrayLike) -> HomodyneOutcome:
    """
    Measure the q quadrature of one mode and condition the other.

    Args:
        state: Joint two-mode state
        measured: Which mode is measured ('a' or 'b')
        noise: Standard-normal draw(s), broadcast over the batch shape

    Returns:
        HomodyneOutcome with the record w = μ_q + √Σ_qq·noise and the retained mode
    """
    if measured == "b":
        mean_m, cov_m = state.mean_b, state.cov_b
        mean_k, cov_k = state.mean_a, state.cov_a
        v_q = state.cross[..., :, 0]
    elif measured == "a":
        mean_m, cov_m = state.mean_a, state.cov_a
        mean_k, cov_k = state.mean_b, state.cov_b
        v_q = state.cross[..., 0, :]
    else:
        raise ValueError(f"Unknown mode selector: {measured!r} (expected 'a' or 'b')")

    var = cov_m[..., 0, 0]
    if np.any(~(var >= MIN_MEASURED_VARIANCE)):
        logger.error(f"Homodyne on degenerate mode: min variance {np.min(var):.3g}")
        raise NumericalDegeneracyError("Measured q-variance is not positive")

    value = mean_m[..., 0] + np.sqrt(var) * np.asarray(noise, dtype=float)
    gain = (value - mean_m[..., 0]) / var
    mean = mean_k + gain[..., None] * v_q
    cov = cov_k - np.einsum("...i,...j->...ij", v_q, v_q) / var[..., None, None]
    return HomodyneOutcome(value=value, conditioned=GaussianMode(mean=mean, cov=_symmetrize(cov)))
