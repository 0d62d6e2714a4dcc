"""
Long-running acceptance checks against the shipped experiment configurations.

Deselected by default; run with: pytest -m slow
"""

from pathlib import Path
import math

import numpy as np
import pytest

from cim_service import SamplingService
from data_io import load_config
from ising import enumerate_brute_force, generate_sk1
from models import IsingProblem, UserParams
from sampling import run_ensemble
from trajectories import run_batch

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).parent / "configs"


def test_saturation_amplitude():
    t_decay = 64
    problem = IsingProblem(n=2, couplings=[(0, 1, 1.0)])
    user = UserParams(t_decay=t_decay, pump_r=2.0, alpha_fb=0.0, n_sat=200.0, eta_esc=0.5)
    batch = run_batch(problem, user, seed=0, indices=range(32), t_sim=40 * t_decay, keep_moments=True)
    steady = batch.mean_q[:, -20 * t_decay:, :]
    assert 0.9 <= np.mean(steady ** 2) / user.n_sat <= 1.1


def test_sixteen_spin_instances_are_covered():
    user = UserParams(t_decay=4, eta_esc=0.2, pump_r=0.8, n_sat=200, alpha_fb=5)
    covered = 0
    for seed in range(10):
        problem = generate_sk1(16, seed)
        targets = enumerate_brute_force(problem, levels=2)
        report = run_ensemble(problem, user, 1000, 400, targets, seed=seed, workers=4)
        if not all(c.trajectories_sampled > 0 for c in report.configs):
            continue
        covered += 1
        for stats in report.configs:
            peak = int(np.argmax(stats.first_times_histogram)) * report.ensemble.histogram_bin
            assert peak < 10 * user.t_decay
    assert covered >= 9


def test_sampling_report_is_independent_of_workers():
    config = load_config(CONFIGS / "sampling_sk16.json")
    config.sampling.n_traj = 200
    config.sampling.workers = 1
    serial, _ = SamplingService(config).sample()
    config.sampling.workers = 4
    parallel, _ = SamplingService(config).sample()
    assert serial.model_dump_json() == parallel.model_dump_json()


def test_finite_sampling_times_lie_above_threshold():
    config = load_config(CONFIGS / "scan_grid.json")
    report = SamplingService(config).scan()
    exceptions = [p for p in report.points if p.max_t_samp is not None and not p.above_threshold]
    assert len(exceptions) <= 2


def test_convergence_improves_with_finesse():
    config = load_config(CONFIGS / "convergence.json")
    report = SamplingService(config).converge()
    assert report.t_decays == [4, 16, 64]
    improving = sum(1 for row in report.rms if row[0] > row[1] > row[2])
    assert improving >= 8


def test_scaling_trend():
    config = load_config(CONFIGS / "scaling.json")
    result = SamplingService(config).scaling().results[0]
    medians = [m.median_t_all for m in result.medians]
    assert all(m is not None for m in medians)
    assert np.all(np.diff(np.log(medians)) > 0)
    assert result.t_all_fit is not None and result.t_any_fit is not None
    assert 1.03 <= result.t_all_fit.base <= 1.15
    assert result.t_any_fit.base <= result.t_all_fit.base


def test_alternative_models_rank_as_expected():
    config = load_config(CONFIGS / "alternatives.json")
    report = SamplingService(config).compare()
    best = {v.name: math.inf if v.best_max_t_samp is None else v.best_max_t_samp for v in report.variants}

    positive = best["gaussian-positive-r"]
    gaussian = min(positive, best["gaussian-negative-r"])
    assert math.isfinite(positive)
    assert best["gaussian-negative-r"] <= 3 * positive
    assert best["coherent-state"] >= 2 * gaussian
    assert math.isfinite(best["meanfield-noisy"])
    assert best["meanfield-noisy"] < best["meanfield-noiseless"]


def test_finesse_study_runs_from_config():
    config = load_config(CONFIGS / "finesse.json")
    report = SamplingService(config).finesse()
    assert report.t_decays == [4.0, 16.0, 64.0]
    assert len(report.t_samp) == 5
    assert all(len(row) == 3 for row in report.t_samp)
    assert any(t is not None for row in report.t_samp for t in row)
