"""
Tests for Ising energies, SK1 generation and the level oracles.
"""

import itertools

import numpy as np
import pytest

from ising import (
    OracleBudgetError,
    ParallelTempering,
    canonicalize,
    config_to_string,
    energies,
    energy,
    energy_spectrum_fraction,
    enumerate_brute_force,
    enumerate_parallel_tempering,
    generate_sk1,
    solve_levels,
    string_to_config,
)
from models import IsingProblem


def ferromagnet(n: int) -> IsingProblem:
    return IsingProblem(n=n, couplings=[(i, j, 1.0) for i in range(n) for j in range(i + 1, n)])


def loop_energy(problem: IsingProblem, spins) -> float:
    j = problem.matrix()
    return -sum(j[a, b] * spins[a] * spins[b] for a in range(problem.n) for b in range(problem.n) if a != b)


def test_energy_examples():
    problem = ferromagnet(3)
    assert energy(problem, np.array([1, 1, 1])) == -6.0
    assert energy(problem, np.array([1, -1, 1])) == 2.0
    assert energy(problem, np.array([-1, -1, -1])) == -6.0


def test_energy_matches_pair_loop():
    problem = generate_sk1(7, seed=3)
    rng = np.random.default_rng(0)
    spins = rng.choice([-1.0, 1.0], size=(20, 7))
    batch = energies(problem, spins)
    for row, value in zip(spins, batch):
        assert value == pytest.approx(loop_energy(problem, row))
        assert energy(problem, row) == pytest.approx(value)


def test_energy_shape_check():
    with pytest.raises(ValueError):
        energy(ferromagnet(3), np.ones(4))
    with pytest.raises(ValueError):
        energies(ferromagnet(3), np.ones((2, 4)))


def test_sk1_generation_is_deterministic():
    a = generate_sk1(16, seed=7)
    b = generate_sk1(16, seed=7)
    c = generate_sk1(16, seed=8)
    assert a.model_dump() == b.model_dump()
    assert a.model_dump() != c.model_dump()
    assert len(a.couplings) == 120
    assert {v for _, _, v in a.couplings} <= {-1.0, 1.0}
    assert [(i, j) for i, j, _ in a.couplings] == list(itertools.combinations(range(16), 2))


def test_sk1_coupling_balance():
    values = np.concatenate([[v for _, _, v in generate_sk1(30, seed).couplings] for seed in range(500)])
    assert 0.49 <= np.mean(values > 0) <= 0.51


def test_sk1_rejects_tiny_instances():
    with pytest.raises(ValueError):
        generate_sk1(1, seed=0)


def test_canonical_strings():
    assert list(canonicalize(np.array([-1, 1, -1]))) == [1, -1, 1]
    assert config_to_string(np.array([1, -1, -1])) == "+--"
    assert list(string_to_config("+-+")) == [1.0, -1.0, 1.0]
    with pytest.raises(ValueError):
        string_to_config("+0-")


def test_brute_force_three_spin_ferromagnet():
    levels = enumerate_brute_force(ferromagnet(3), levels=2)
    assert levels.energies == [-6.0, 2.0]
    assert levels.levels[0].configs == ["+++"]
    assert levels.levels[1].configs == ["++-", "+-+", "+--"]
    assert levels.n_conf == 4


def test_brute_force_two_spins():
    levels = enumerate_brute_force(ferromagnet(2), levels=2)
    assert levels.energies == [-2.0, 2.0]
    assert [lvl.configs for lvl in levels.levels] == [["++"], ["+-"]]


def test_brute_force_matches_exhaustive_listing():
    problem = generate_sk1(9, seed=11)
    table = {}
    for bits in itertools.product([1.0, -1.0], repeat=8):
        config = np.array((1.0,) + bits)
        table.setdefault(round(energy(problem, config), 9), []).append(config_to_string(config))
    lowest = sorted(table)[:3]

    levels = enumerate_brute_force(problem, levels=3)
    assert levels.energies == lowest
    for entry in levels.levels:
        assert entry.configs == sorted(table[entry.energy])


def test_brute_force_budget():
    with pytest.raises(OracleBudgetError):
        enumerate_brute_force(generate_sk1(25, seed=0))
    with pytest.raises(ValueError):
        enumerate_brute_force(ferromagnet(3), levels=0)


def test_energy_spectrum_fraction():
    problem = ferromagnet(3)
    assert energy_spectrum_fraction(problem, -6.0) == 0.0
    assert energy_spectrum_fraction(problem, 0.0) == 0.25
    assert energy_spectrum_fraction(problem, 100.0) == 1.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_parallel_tempering_agrees_with_brute_force(seed):
    problem = generate_sk1(8, seed=seed)
    exact = enumerate_brute_force(problem, levels=2)
    heuristic = enumerate_parallel_tempering(problem, levels=2, sweeps=3000, seed=seed)
    assert heuristic.energies == exact.energies
    for found, truth in zip(heuristic.levels, exact.levels):
        assert found.configs == truth.configs


def test_parallel_tempering_results_are_verified():
    problem = generate_sk1(12, seed=4)
    found = ParallelTempering(problem, replicas=8, seed=1).run(sweeps=50, levels=2)
    for entry in found.levels:
        for config in entry.configs:
            assert energy(problem, string_to_config(config)) == pytest.approx(entry.energy)
            assert config[0] == "+"


def test_parallel_tempering_needs_replicas():
    with pytest.raises(ValueError):
        ParallelTempering(ferromagnet(3), replicas=1)


def test_solve_levels_dispatch():
    assert solve_levels(ferromagnet(3), 2, "brute").energies == [-6.0, 2.0]
    with pytest.raises(ValueError):
        solve_levels(ferromagnet(3), 2, "anneal")
