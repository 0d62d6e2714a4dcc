"""
Tests for the continuous-time reference models.
"""

import numpy as np
import pytest

from machine import MachineParams, derive_params
from models import IsingProblem, UserParams
from reference_models import (
    ContTimeParams,
    coarse_grain,
    continuum_params,
    convergence_compare,
    convergence_study,
    from_discrete,
    integrate_gaussian_sde,
    integrate_mean_field,
    landscape_potential,
)


def ferromagnet(n: int) -> IsingProblem:
    return IsingProblem(n=n, couplings=[(i, j, 1.0) for i in range(n) for j in range(i + 1, n)])


def frustrated_triangle() -> IsingProblem:
    return IsingProblem(n=3, couplings=[(0, 1, 1.0), (0, 2, -1.0), (1, 2, 1.0)])


def test_from_discrete_without_crystal_or_outcoupler():
    params = MachineParams(r_loss=0.1, r_out=0.0, eps_tau=0.0, beta_th=0.0, beta=0.0, j0=-1.0,
                           R_out=0.0, R_loss=0.0199, n_sat_effective=200.0, t_decay=4.0)
    rates = from_discrete(params, roundtrip_time=0.5)
    assert rates.g == 0.0 and rates.p == 0.0
    assert rates.kappa == 0.0 and rates.lam == 0.0
    assert rates.gamma == pytest.approx(0.01 / 0.5)


def test_from_discrete_rejects_bad_time():
    params = derive_params(UserParams(), 2.0)
    with pytest.raises(ValueError):
        from_discrete(params, roundtrip_time=0.0)


@pytest.mark.parametrize("t_decay", [4.0, 16.0, 64.0])
def test_unit_pump_balances_losses(t_decay):
    params = derive_params(UserParams(t_decay=t_decay, pump_r=1.0), 2.0)
    rates = from_discrete(params, roundtrip_time=1.0)
    assert abs(rates.p / (rates.kappa + rates.gamma) - 1.0) <= 1.0 / t_decay


def test_continuum_limit_recovers_pump_ratio():
    rates = continuum_params(UserParams(pump_r=1.5, eta_esc=0.5), 2.0)
    assert rates.p / (rates.kappa + rates.gamma) == pytest.approx(1.5, rel=1e-3)
    # decay-time units: total power loss rate is 2
    assert 2.0 * (rates.kappa + rates.gamma) == pytest.approx(2.0, rel=1e-3)


def test_cont_time_params_validation():
    with pytest.raises(ValueError):
        ContTimeParams(gamma=-1.0, kappa=0.0, p=0.0, g=0.0, lam=0.0, dt=0.1)
    with pytest.raises(ValueError):
        ContTimeParams(gamma=0.0, kappa=0.0, p=0.0, g=0.0, lam=0.0, dt=0.0)


def test_sde_with_zero_rates_is_constant():
    rates = ContTimeParams(gamma=0.0, kappa=0.0, p=0.0, g=0.0, lam=0.0, dt=0.01)
    traj = integrate_gaussian_sde(ferromagnet(2), rates, 1.0, rng=np.random.default_rng(0), q0=[1.5, -0.5])
    assert traj.mean.shape == (101, 2)
    assert np.all(traj.mean == np.array([1.5, -0.5]))
    assert np.all(traj.var == 0.5)


def test_sde_noise_shape_check():
    rates = ContTimeParams(gamma=0.5, kappa=0.5, p=0.0, g=0.0, lam=0.0, dt=0.01)
    with pytest.raises(ValueError):
        integrate_gaussian_sde(ferromagnet(2), rates, 1.0, noise=np.zeros((10, 2)))


def test_sde_settles_at_saturation_amplitude():
    rates = ContTimeParams(gamma=0.5, kappa=0.5, p=2.0, g=0.01, lam=0.0, dt=1.0 / 256)
    traj = integrate_gaussian_sde(ferromagnet(2), rates, 20.0, rng=np.random.default_rng(1), q0=[10.0, -10.0])
    tail = traj.mean[len(traj.mean) // 2:]
    expected = 2.0 * rates.net_gain / rates.g
    assert np.allclose(np.mean(tail ** 2, axis=0), expected, rtol=0.05)
    assert np.all(np.sign(tail[-1]) == [1.0, -1.0])


def test_exact_variant_stays_close_to_simplified():
    rates = ContTimeParams(gamma=0.5, kappa=0.5, p=2.0, g=0.01, lam=0.0, dt=1.0 / 256)
    noise = np.random.default_rng(2).standard_normal((10 * 256, 2))
    simple = integrate_gaussian_sde(ferromagnet(2), rates, 10.0, noise=noise, q0=[10.0, 10.0])
    exact = integrate_gaussian_sde(ferromagnet(2), rates, 10.0, noise=noise, q0=[10.0, 10.0], exact=True)
    assert exact.var_p is not None and np.all(exact.var_p > 0)
    rms_diff = np.sqrt(np.mean((exact.mean - simple.mean) ** 2))
    assert rms_diff / np.sqrt(np.mean(simple.mean ** 2)) < 0.01


def test_mean_field_fixed_point():
    rates = ContTimeParams(gamma=0.5, kappa=0.5, p=2.0, g=0.01, lam=0.0, dt=0.01)
    final = integrate_mean_field(ferromagnet(2), rates, 40.0, q0=np.array([1e-3, -1e-3]))
    assert np.allclose(final, [2.0, -2.0], rtol=1e-6)


def test_mean_field_feedback_aligns_ferromagnet():
    rates = ContTimeParams(gamma=0.5, kappa=0.5, p=1.0, g=0.01, lam=-1.0, dt=0.01)
    final = integrate_mean_field(ferromagnet(2), rates, 40.0, q0=np.array([0.3, -0.1]))
    assert np.sign(final[0]) == np.sign(final[1])


def test_landscape_potential_symmetry_and_gradient():
    problem = frustrated_triangle()
    rates = ContTimeParams(gamma=0.4, kappa=0.6, p=1.7, g=0.05, lam=-0.3, dt=0.01)
    q = np.array([0.7, -1.2, 2.1])
    assert landscape_potential(np.zeros(3), rates, problem) == 0.0
    assert landscape_potential(q, rates, problem) == pytest.approx(landscape_potential(-q, rates, problem))

    w = problem.feedback_matrix()
    drift = rates.net_gain * q - 0.5 * rates.g * q ** 3 + rates.lam * (w @ q)
    h = 1e-6
    grad = np.array([
        (landscape_potential(q + h * e, rates, problem) - landscape_potential(q - h * e, rates, problem)) / (2 * h)
        for e in np.eye(3)
    ])
    assert np.allclose(-grad, drift, rtol=1e-5, atol=1e-6)
    with pytest.raises(ValueError):
        landscape_potential(np.zeros(2), rates, problem)


def test_coarse_grain_preserves_variance_scale():
    fine = np.arange(12, dtype=float).reshape(12, 1)
    coarse = coarse_grain(fine, 4)
    assert coarse.shape == (3, 1)
    assert coarse[0, 0] == pytest.approx((0 + 1 + 2 + 3) / 2.0)


def test_convergence_rejects_incommensurate_finesse():
    with pytest.raises(ValueError):
        convergence_compare(ferromagnet(2), UserParams(), [3], 1.0, noise_seed=0)


def test_convergence_with_zero_noise_is_exact():
    user = UserParams(eta_esc=0.5, pump_r=0.9, alpha_fb=5.0)
    rms = convergence_compare(ferromagnet(3), user, [4, 16], 2.0, noise_seed=0, zero_noise=True)
    assert rms == [0.0, 0.0]


def test_convergence_study_report():
    user = UserParams(eta_esc=0.5, pump_r=0.9, alpha_fb=5.0)
    report = convergence_study(frustrated_triangle(), user, [4, 16], 2.0, noise_seeds=[0, 1])
    assert report.t_decays == [4, 16]
    assert len(report.rms) == 2 and all(len(row) == 2 for row in report.rms)
    assert all(np.isfinite(v) for row in report.rms for v in row)
    assert report.amplitude_scale == pytest.approx(np.sqrt(200.0))
