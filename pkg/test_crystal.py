"""
Tests for crystal propagation: reduced vs full moments, conservation and the Picard map.
"""

import numpy as np
import pytest

from crystal import (
    SQRT2,
    XY_VACUUM,
    CrystalState,
    DivergenceError,
    FullCrystalState,
    manley_rowe,
    picard_map,
    propagate_classical,
    propagate_full,
    propagate_reduced,
    rk4,
)
from gaussian_core import coherent


def random_reduced(rng: np.random.Generator, batch: int) -> CrystalState:
    return CrystalState(
        mx_s=rng.normal(0.0, 1.0, batch),
        mx_b=rng.normal(1.0, 0.5, batch),
        vxx_s=XY_VACUUM * rng.uniform(1.0, 4.0, batch),
        vyy_s=XY_VACUUM * rng.uniform(0.3, 1.0, batch),
        vxx_b=XY_VACUUM * rng.uniform(1.0, 2.0, batch),
        vyy_b=XY_VACUUM * rng.uniform(1.0, 2.0, batch),
        cxx=rng.normal(0.0, 0.05, batch),
        cyy=rng.normal(0.0, 0.05, batch),
    )


def test_reduced_matches_full_system():
    rng = np.random.default_rng(0)
    state = random_reduced(rng, 100)
    reduced = propagate_reduced(state, 0.1)
    full = propagate_full(FullCrystalState.from_reduced(state), 0.1)

    assert np.max(np.abs(full.to_reduced().as_array() - reduced.as_array())) < 1e-10
    assert np.all(full.y_sector() == 0.0)


def test_manley_rowe_is_conserved():
    rng = np.random.default_rng(1)
    state = random_reduced(rng, 50)
    before = manley_rowe(state)

    after_reduced = manley_rowe(propagate_reduced(state, 0.1))
    assert np.allclose(after_reduced, before, rtol=1e-8, atol=0.0)

    full = FullCrystalState.from_reduced(state)
    after_full = manley_rowe(propagate_full(full, 0.1))
    assert np.allclose(after_full, manley_rowe(full), rtol=1e-8, atol=0.0)


def test_step_doubling():
    state = CrystalState.from_signal(coherent(1.0), beta=2.0)
    coarse = propagate_reduced(state, 0.1, steps=16).as_array()
    fine = propagate_reduced(state, 0.1, steps=32).as_array()
    assert np.max(np.abs(coarse - fine)) < 1e-8


def test_undepleted_gain():
    beta = 3.0
    state = CrystalState.from_signal(coherent(np.array([0.5, -2.0])), beta=beta)
    out = propagate_reduced(state, 0.1, undepleted=True)

    gain = np.exp(beta * 0.1 / SQRT2)
    assert np.allclose(out.mx_s, state.mx_s * gain, rtol=1e-10)
    assert np.allclose(out.mx_b, state.mx_b)
    # q-variance amplified, p-variance squeezed by the same factor squared
    assert np.allclose(out.vxx_s, XY_VACUUM * gain ** 2, rtol=1e-10)
    assert np.allclose(out.vyy_s, XY_VACUUM / gain ** 2, rtol=1e-10)


def test_signal_round_trip_through_crystal_state():
    mode = coherent(np.array([0.3, 4.0]))
    back = CrystalState.from_signal(mode, beta=1.0).to_signal()
    assert np.allclose(back.mean, mode.mean)
    assert np.allclose(back.cov, mode.cov)


def test_zero_strength_is_identity():
    state = random_reduced(np.random.default_rng(2), 5)
    out = propagate_reduced(state, 0.0)
    assert np.array_equal(out.as_array(), state.as_array())


def picard_error(strength: float, beta: float) -> float:
    state = CrystalState.from_signal(coherent(1.0), beta=beta)
    exact = propagate_reduced(state, strength).to_signal().mean[..., 0]
    approx, _ = picard_map(1.0, 0.5, 0.5, beta, strength)
    return float(abs(exact - approx))


def test_picard_map_accuracy_and_order():
    beta = 2.0 * SQRT2
    coarse = picard_error(0.1, beta)
    fine = picard_error(0.05, beta)
    assert coarse < 0.03
    assert 3.5 <= coarse / fine <= 4.5


def test_picard_map_without_pump_or_signal():
    mean, var = picard_map(0.0, 0.5, 0.5, 0.0, 0.1)
    assert mean == 0.0
    assert var == pytest.approx(0.5)


def test_classical_propagation_conserves_energy():
    x = np.array([0.5, 2.0, 3.0])
    xb = np.array([3.0, 1.0, 2.0])
    x2, xb2 = propagate_classical(x, xb, 0.1)
    assert np.allclose(xb2 ** 2 + 0.5 * x2 ** 2, xb ** 2 + 0.5 * x ** 2, rtol=1e-8)
    assert np.all(np.abs(x2) > np.abs(x))


def test_rk4_argument_checks():
    with pytest.raises(ValueError):
        rk4(lambda y: y, np.ones(2), -1.0, 4)
    with pytest.raises(ValueError):
        rk4(lambda y: y, np.ones(2), 1.0, 0)


def test_rk4_reports_divergence():
    with pytest.raises(DivergenceError):
        rk4(lambda y: y * y, np.array([1e200]), 1.0, 4)


def test_picard_map_values():
    mean, var = picard_map(1.0, 0.5, 0.5, 2.0 * SQRT2, 0.1)
    assert mean == pytest.approx(1.19875, abs=1e-5)
    assert var == pytest.approx(0.69875, abs=1e-5)


def test_picard_map_error_halves_twice():
    beta = 2.0 * SQRT2
    errors = [picard_error(s, beta) for s in (0.1, 0.05, 0.025)]
    assert 3.5 <= errors[1] / errors[2] <= 4.5
    assert errors[0] > errors[1] > errors[2]


def test_picard_variance_tracks_reduced_system():
    beta = 2.0 * SQRT2
    state = CrystalState.from_signal(coherent(1.0), beta=beta)
    gaps = []
    for strength in (0.05, 0.025):
        exact = propagate_reduced(state, strength).to_signal().cov[..., 0, 0]
        _, var = picard_map(1.0, 0.5, 0.5, beta, strength)
        gaps.append(float(abs(exact - var)))
    assert gaps[0] > 2.0 * gaps[1]


def test_full_system_evolves_y_sector():
    mean = np.array([0.7, 0.0, 2.0, 0.1])
    state = FullCrystalState(mean=mean, cov=XY_VACUUM * np.eye(4))
    out = propagate_full(state, 0.1)

    assert abs(out.mean[1]) > 1e-3
    assert not np.allclose(out.y_sector(), 0.0)
    assert np.allclose(manley_rowe(out), manley_rowe(state), rtol=1e-8, atol=0.0)


def test_undepleted_gain_at_operating_pump():
    beta = 2.0 * SQRT2
    state = CrystalState.from_signal(coherent(1.0), beta=beta)
    out = propagate_reduced(state, 0.1, undepleted=True)

    assert float(out.mx_s / state.mx_s) == pytest.approx(1.22140, rel=1e-4)
    assert float(out.vxx_s) == pytest.approx(0.37296, rel=1e-4)
