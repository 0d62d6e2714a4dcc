"""
Crystal Propagation
Gaussian-moment equations of motion for the signal–pump χ(2) interaction.

Integration runs in x/y units (x = q/√2, vacuum variance 1/4) over the
dimensionless interaction length s = ετ, with fixed-step classical RK4.
The reduced 8-moment system is the production path; the full 14-moment
system is kept as an oracle for it.
"""

from dataclasses import dataclass, fields
from typing import Callable, Tuple, Union
import logging

import numpy as np

from gaussian_core import GaussianMode

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

XY_VACUUM = 0.25
SQRT2 = np.sqrt(2.0)
DEFAULT_STEPS = 16

ArrayLike = Union[float, np.ndarray]


class DivergenceError(ArithmeticError):
    """Raised when an integrator produces non-finite values."""


def rk4(rhs: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, span: float, steps: int) -> np.ndarray:
    """
    Integrate an autonomous system dy/ds = rhs(y) from s=0 to s=span.

    Args:
        rhs: Vector field acting on arrays shaped like y0
        y0: Initial state
        span: Integration length (>= 0)
        steps: Number of fixed RK4 steps (>= 1)

    Returns:
        State at s = span
    """
    if span < 0:
        raise ValueError(f"Integration length must be non-negative, got {span}")
    if steps < 1:
        raise ValueError(f"Step count must be positive, got {steps}")

    y = np.asarray(y0, dtype=float)
    if span == 0:
        return y.copy()

    h = span / steps
    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            logger.error("Non-finite moments during crystal integration")
            raise DivergenceError("Integration produced non-finite values")
    return y


@dataclass(frozen=True)
class CrystalState:
    """Reduced signal/pump moments (zero y-means, no x–y correlations)."""
    mx_s: ArrayLike
    mx_b: ArrayLike
    vxx_s: ArrayLike
    vyy_s: ArrayLike
    vxx_b: ArrayLike
    vyy_b: ArrayLike
    cxx: ArrayLike
    cyy: ArrayLike

    def as_array(self) -> np.ndarray:
        values = np.broadcast_arrays(*[np.asarray(getattr(self, f.name), dtype=float) for f in fields(self)])
        return np.stack(values)

    @classmethod
    def from_array(cls, y: np.ndarray) -> "CrystalState":
        return cls(*[y[k] for k in range(len(fields(cls)))])

    @classmethod
    def from_signal(cls, mode: GaussianMode, beta: ArrayLike) -> "CrystalState":
        """Signal pulse meeting a fresh coherent pump with q-mean beta."""
        q = mode.mean[..., 0]
        beta = np.broadcast_to(np.asarray(beta, dtype=float), q.shape)
        return cls(
            mx_s=q / SQRT2,
            mx_b=beta / SQRT2,
            vxx_s=0.5 * mode.cov[..., 0, 0],
            vyy_s=0.5 * mode.cov[..., 1, 1],
            vxx_b=np.full(q.shape, XY_VACUUM),
            vyy_b=np.full(q.shape, XY_VACUUM),
            cxx=np.zeros(q.shape),
            cyy=np.zeros(q.shape),
        )

    def to_signal(self) -> GaussianMode:
        """Signal marginal back in q/p units; the pump is traced out."""
        q = SQRT2 * np.asarray(self.mx_s, dtype=float)
        zeros = np.zeros_like(q)
        cov = np.stack([
            np.stack([2.0 * np.asarray(self.vxx_s) + zeros, zeros], axis=-1),
            np.stack([zeros, 2.0 * np.asarray(self.vyy_s) + zeros], axis=-1),
        ], axis=-2)
        return GaussianMode(mean=np.stack([q, zeros], axis=-1), cov=cov)


@dataclass(frozen=True)
class FullCrystalState:
    """
    All 14 Gaussian moments of the signal/pump pair.

    mean is ordered (x_s, y_s, x_b, y_b); cov is the symmetric 4x4 covariance.
    """
    mean: np.ndarray
    cov: np.ndarray

    @classmethod
    def from_reduced(cls, state: CrystalState) -> "FullCrystalState":
        y = state.as_array()
        mx_s, mx_b, vxx_s, vyy_s, vxx_b, vyy_b, cxx, cyy = y
        zeros = np.zeros_like(mx_s)
        mean = np.stack([mx_s, zeros, mx_b, zeros], axis=-1)
        cov = np.stack([
            np.stack([vxx_s, zeros, cxx, zeros], axis=-1),
            np.stack([zeros, vyy_s, zeros, cyy], axis=-1),
            np.stack([cxx, zeros, vxx_b, zeros], axis=-1),
            np.stack([zeros, cyy, zeros, vyy_b], axis=-1),
        ], axis=-2)
        return cls(mean=mean, cov=cov)

    def to_reduced(self) -> CrystalState:
        c = self.cov
        return CrystalState(
            mx_s=self.mean[..., 0],
            mx_b=self.mean[..., 2],
            vxx_s=c[..., 0, 0],
            vyy_s=c[..., 1, 1],
            vxx_b=c[..., 2, 2],
            vyy_b=c[..., 3, 3],
            cxx=c[..., 2, 0],
            cyy=c[..., 3, 1],
        )

    def y_sector(self) -> np.ndarray:
        """Moments that vanish when the reduced-model invariants hold."""
        c = self.cov
        return np.stack([
            self.mean[..., 1], self.mean[..., 3],
            c[..., 0, 1], c[..., 0, 3], c[..., 1, 2], c[..., 2, 3],
        ], axis=-1)


def _reduced_rhs(y: np.ndarray) -> np.ndarray:
    mx, xb, vxx, vyy, vxxb, vyyb, cxx, cyy = y
    return np.stack([
        xb * mx + cxx + cyy,
        -0.5 * mx * mx - 0.5 * (vxx - vyy),
        2.0 * xb * vxx + 2.0 * mx * cxx,
        -2.0 * xb * vyy + 2.0 * mx * cyy,
        -2.0 * mx * cxx,
        -2.0 * mx * cyy,
        mx * (vxxb - vxx) + xb * cxx,
        mx * (vyyb - vyy) - xb * cyy,
    ])


def _undepleted_rhs(y: np.ndarray) -> np.ndarray:
    mx, xb, vxx, vyy = y[0], y[1], y[2], y[3]
    zeros = np.zeros_like(mx)
    return np.stack([xb * mx, zeros, 2.0 * xb * vxx, -2.0 * xb * vyy, zeros, zeros, zeros, zeros])


def propagate_reduced(state: CrystalState, strength: float, steps: int = DEFAULT_STEPS,
                      undepleted: bool = False) -> CrystalState:
    """
    Propagate the reduced moments through the crystal.

    Args:
        state: Input signal/pump moments
        strength: Nonlinear interaction strength ετ (>= 0)
        steps: RK4 steps
        undepleted: Freeze the pump and drop signal–pump correlations

    Returns:
        Output moments at ετ = strength
    """
    rhs = _undepleted_rhs if undepleted else _reduced_rhs
    return CrystalState.from_array(rk4(rhs, state.as_array(), strength, steps))


def _full_rhs(y: np.ndarray) -> np.ndarray:
    mu = y[..., :4]
    c = y[..., 4:].reshape(y.shape[:-1] + (4, 4))
    xs, ys, xb, yb = mu[..., 0], mu[..., 1], mu[..., 2], mu[..., 3]

    dmu = np.stack([
        xb * xs + yb * ys + c[..., 2, 0] + c[..., 3, 1],
        yb * xs - xb * ys + c[..., 3, 0] - c[..., 2, 1],
        -0.5 * (xs * xs - ys * ys) - 0.5 * (c[..., 0, 0] - c[..., 1, 1]),
        -xs * ys - c[..., 0, 1],
    ], axis=-1)

    # drift Jacobian at the mean; exact for a quadratic field under Gaussian closure
    zeros = np.zeros_like(xs)
    jac = np.stack([
        np.stack([xb, yb, xs, ys], axis=-1),
        np.stack([yb, -xb, -ys, xs], axis=-1),
        np.stack([-xs, ys, zeros, zeros], axis=-1),
        np.stack([-ys, -xs, zeros, zeros], axis=-1),
    ], axis=-2)
    jc = np.einsum("...ij,...jk->...ik", jac, c)
    dc = jc + np.swapaxes(jc, -1, -2)
    return np.concatenate([dmu, dc.reshape(dc.shape[:-2] + (16,))], axis=-1)


def propagate_full(state: FullCrystalState, strength: float, steps: int = DEFAULT_STEPS) -> FullCrystalState:
    """Propagate all 14 moments through the crystal (oracle path)."""
    mean = np.asarray(state.mean, dtype=float)
    cov = np.asarray(state.cov, dtype=float)
    y0 = np.concatenate([mean, cov.reshape(cov.shape[:-2] + (16,))], axis=-1)
    y = rk4(_full_rhs, y0, strength, steps)
    out_cov = y[..., 4:].reshape(y.shape[:-1] + (4, 4))
    return FullCrystalState(mean=y[..., :4], cov=0.5 * (out_cov + np.swapaxes(out_cov, -1, -2)))


def manley_rowe(state: Union[CrystalState, FullCrystalState]) -> np.ndarray:
    """Conserved photon combination <n_pump> + <n_signal>/2."""
    if isinstance(state, FullCrystalState):
        m, c = state.mean, state.cov
        n_s = m[..., 0] ** 2 + m[..., 1] ** 2 + c[..., 0, 0] + c[..., 1, 1] - 0.5
        n_b = m[..., 2] ** 2 + m[..., 3] ** 2 + c[..., 2, 2] + c[..., 3, 3] - 0.5
    else:
        n_s = np.asarray(state.mx_s) ** 2 + state.vxx_s + state.vyy_s - 0.5
        n_b = np.asarray(state.mx_b) ** 2 + state.vxx_b + state.vyy_b - 0.5
    return n_b + 0.5 * n_s


def picard_map(mean_q: ArrayLike, var_q: ArrayLike, var_p: ArrayLike, beta: ArrayLike,
               strength: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    First-order closed-form crystal map in q units.

    Returns:
        (mean_q', var_q')
    """
    s = strength
    s2 = s * s
    mean_q = np.asarray(mean_q, dtype=float)
    mean_out = (mean_q + beta * s / SQRT2 * mean_q - s2 / 8.0 * mean_q ** 3
                - s2 / 8.0 * mean_q * (3.0 * var_q + var_p - 2.0))
    var_out = (var_q + SQRT2 * beta * s * var_q - 0.75 * s2 * mean_q ** 2 * var_q
               + 0.25 * s2 * mean_q ** 2 - 0.25 * s2 * var_q * (var_q - var_p))
    return mean_out, np.asarray(var_out, dtype=float)


def _classical_rhs(y: np.ndarray) -> np.ndarray:
    x, xb = y
    return np.stack([xb * x, -0.5 * x * x])


def propagate_classical(x: ArrayLike, xb: ArrayLike, strength: float,
                        steps: int = DEFAULT_STEPS) -> Tuple[np.ndarray, np.ndarray]:
    """Means-only crystal EOMs (mean-field limit); returns (x', xb')."""
    y0 = np.stack(np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xb, dtype=float)))
    y = rk4(_classical_rhs, y0, strength, steps)
    return y[0], y[1]
