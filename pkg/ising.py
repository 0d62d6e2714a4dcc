"""
Ising Problems
SK1 instance generation, energy evaluation and low-energy level-set oracles.

Energies use the ordered-pair convention E(σ) = -Σ_{i≠j} J_ij σ_i σ_j.
Configurations are canonicalized up to a global flip (first spin +1) and
written as strings of '+' and '-'.
"""

from typing import Dict, Iterator, List, Optional, Set, Tuple
import logging

import numpy as np

from models import IsingProblem, LevelEntry, LevelSet

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_N = 24
ENERGY_DECIMALS = 9
_CHUNK_BITS = 16


class OracleBudgetError(ValueError):
    """Raised when exact enumeration is requested beyond its size budget."""


def energy(problem: IsingProblem, spins: np.ndarray) -> float:
    """
    Ising energy of one configuration.

    Args:
        problem: Ising problem
        spins: n-vector of ±1

    Returns:
        -Σ_{i≠j} J_ij σ_i σ_j
    """
    s = np.asarray(spins, dtype=float)
    if s.shape != (problem.n,):
        raise ValueError(f"Configuration has shape {s.shape}, expected ({problem.n},)")
    return float(-(s @ problem.matrix() @ s))


def energies(problem: IsingProblem, spins: np.ndarray) -> np.ndarray:
    """Vectorized energies for configurations stacked on the leading axes."""
    s = np.asarray(spins, dtype=float)
    if s.shape[-1] != problem.n:
        raise ValueError(f"Configurations have {s.shape[-1]} spins, expected {problem.n}")
    return -np.einsum("...i,...i->...", s @ problem.matrix(), s)


def generate_sk1(n: int, seed: int) -> IsingProblem:
    """SK1 instance: every pair i<j gets ±1 with probability 1/2, deterministic in seed."""
    if n < 2:
        raise ValueError(f"SK1 instances need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    values = 2 * rng.integers(0, 2, size=n * (n - 1) // 2) - 1
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    couplings = [(i, j, float(v)) for (i, j), v in zip(pairs, values)]
    return IsingProblem(n=n, couplings=couplings)


def canonicalize(spins: np.ndarray) -> np.ndarray:
    """Representative of the ± pair with first spin +1."""
    s = np.asarray(spins)
    return s * np.sign(s[..., :1] + 0.5)


def config_to_string(spins: np.ndarray) -> str:
    return "".join("+" if value > 0 else "-" for value in np.asarray(spins).ravel())


def string_to_config(config: str) -> np.ndarray:
    if any(ch not in "+-" for ch in config):
        raise ValueError(f"Configuration string may only contain '+' and '-': {config!r}")
    return np.array([1.0 if ch == "+" else -1.0 for ch in config])


def _canonical_chunks(n: int) -> Iterator[np.ndarray]:
    """All 2^(n-1) canonical configurations, in chunks of ±1 rows."""
    free = n - 1
    total = 1 << free
    step = 1 << min(_CHUNK_BITS, free)
    shifts = np.arange(free, dtype=np.int64)
    for start in range(0, total, step):
        codes = np.arange(start, min(start + step, total), dtype=np.int64)
        bits = (codes[:, None] >> shifts) & 1
        spins = np.ones((len(codes), n))
        spins[:, 1:] = 1.0 - 2.0 * bits
        yield spins


def _level_set(buckets: Dict[float, Set[str]], levels: int) -> LevelSet:
    kept = sorted(buckets)[:levels]
    return LevelSet(
        energies=kept,
        levels=[LevelEntry(energy=e, configs=sorted(buckets[e])) for e in kept],
    )


def enumerate_brute_force(problem: IsingProblem, levels: int = 2) -> LevelSet:
    """
    Exact lowest `levels` energies with all their canonical configurations.

    Raises:
        OracleBudgetError: if n exceeds the enumeration budget
    """
    if problem.n > BRUTE_FORCE_MAX_N:
        raise OracleBudgetError(
            f"Brute-force enumeration supports n <= {BRUTE_FORCE_MAX_N}, got n={problem.n}"
        )
    if levels < 1:
        raise ValueError("levels must be positive")

    matrix = problem.matrix()
    buckets: Dict[float, Set[str]] = {}
    for spins in _canonical_chunks(problem.n):
        e = np.round(-np.einsum("ij,ij->i", spins @ matrix, spins), ENERGY_DECIMALS)
        candidates = np.unique(np.concatenate([e, np.array(sorted(buckets), dtype=float)]))
        cutoff = candidates[min(levels, len(candidates)) - 1]
        for row in np.flatnonzero(e <= cutoff):
            buckets.setdefault(float(e[row]), set()).add(config_to_string(spins[row]))
        for stale in [k for k in buckets if k > cutoff]:
            del buckets[stale]

    result = _level_set(buckets, levels)
    logger.info(f"Brute force n={problem.n}: energies {result.energies}, N_conf={result.n_conf}")
    return result


def energy_spectrum_fraction(problem: IsingProblem, value: float) -> float:
    """Fraction of canonical configurations with energy strictly below `value`."""
    if problem.n > BRUTE_FORCE_MAX_N:
        raise OracleBudgetError(f"Spectrum enumeration supports n <= {BRUTE_FORCE_MAX_N}")
    matrix = problem.matrix()
    below = 0
    total = 0
    for spins in _canonical_chunks(problem.n):
        e = -np.einsum("ij,ij->i", spins @ matrix, spins)
        below += int(np.sum(e < value))
        total += len(e)
    return below / total


class ParallelTempering:
    """
    Replica-exchange Metropolis sampler collecting low-energy configurations.

    Temperatures form a geometric ladder in units of √n, the natural energy
    scale of an SK1 local field.
    """

    def __init__(self, problem: IsingProblem, replicas: int = 32, t_min: float = 0.3,
                 t_max: float = 3.0, seed: int = 0):
        """
        Initialize the sampler.

        Args:
            problem: Ising problem
            replicas: Number of temperature slots
            t_min: Coldest temperature (units of √n)
            t_max: Hottest temperature (units of √n)
            seed: RNG seed
        """
        if replicas < 2:
            raise ValueError("Parallel tempering needs at least two replicas")
        self.problem = problem
        self.matrix = problem.matrix()
        self.replicas = replicas
        self.temperatures = np.geomspace(t_min, t_max, replicas) * np.sqrt(problem.n)
        self.rng = np.random.default_rng(seed)

    def _sweep(self, spins: np.ndarray, fields: np.ndarray, half_energy: np.ndarray) -> None:
        """Sequential single-spin Metropolis sweep, vectorized over replicas (in place)."""
        uniforms = self.rng.random((self.problem.n, self.replicas))
        for k in range(self.problem.n):
            delta = 2.0 * spins[:, k] * fields[:, k]
            accept = (delta <= 0) | (uniforms[k] < np.exp(-np.maximum(delta, 0.0) / self.temperatures))
            if not np.any(accept):
                continue
            change = np.where(accept, -2.0 * spins[:, k], 0.0)
            spins[:, k] += change
            fields += change[:, None] * self.matrix[k][None, :]
            half_energy += np.where(accept, delta, 0.0)

    def _exchange(self, spins: np.ndarray, fields: np.ndarray, half_energy: np.ndarray, offset: int) -> None:
        """Attempt swaps between neighbouring temperatures starting at `offset`."""
        beta = 1.0 / self.temperatures
        for i in range(offset, self.replicas - 1, 2):
            j = i + 1
            log_p = (beta[i] - beta[j]) * (half_energy[i] - half_energy[j])
            if log_p >= 0 or self.rng.random() < np.exp(log_p):
                spins[[i, j]] = spins[[j, i]]
                fields[[i, j]] = fields[[j, i]]
                half_energy[[i, j]] = half_energy[[j, i]]

    def run(self, sweeps: int, levels: int = 2) -> LevelSet:
        """
        Run the sampler and collect the lowest `levels` energy levels seen.

        Every reported configuration is re-verified with energy().
        """
        n = self.problem.n
        spins = 2.0 * self.rng.integers(0, 2, size=(self.replicas, n)) - 1.0
        fields = spins @ self.matrix
        half_energy = -0.5 * np.einsum("ij,ij->i", fields, spins)

        buckets: Dict[float, Set[bytes]] = {}
        for sweep in range(sweeps):
            self._sweep(spins, fields, half_energy)
            self._exchange(spins, fields, half_energy, offset=sweep % 2)

            full = np.round(2.0 * half_energy, ENERGY_DECIMALS)
            known = sorted(buckets)
            cutoff = known[levels - 1] if len(known) >= levels else np.inf
            for row in np.flatnonzero(full <= cutoff):
                key = float(full[row])
                canon = canonicalize(spins[row]) > 0
                buckets.setdefault(key, set()).add(np.packbits(canon).tobytes())
            if len(buckets) > levels:
                for stale in sorted(buckets)[levels:]:
                    del buckets[stale]

        verified: Dict[float, Set[str]] = {}
        for level_energy, packed in buckets.items():
            for raw in packed:
                bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:n].astype(bool)
                config = np.where(bits, 1.0, -1.0)
                if round(energy(self.problem, config), ENERGY_DECIMALS) == level_energy:
                    verified.setdefault(level_energy, set()).add(config_to_string(config))
        result = _level_set(verified, levels)
        logger.info(f"Parallel tempering n={n}, {sweeps} sweeps: energies {result.energies}, N_conf={result.n_conf}")
        return result


def enumerate_parallel_tempering(problem: IsingProblem, levels: int = 2, replicas: int = 32,
                                 sweeps: int = 100_000, seed: int = 0) -> LevelSet:
    """Heuristic level set from parallel tempering (subset of the exact one)."""
    return ParallelTempering(problem, replicas=replicas, seed=seed).run(sweeps, levels)


def solve_levels(problem: IsingProblem, levels: int = 2, method: str = "brute",
                 replicas: int = 32, sweeps: int = 100_000, seed: int = 0) -> LevelSet:
    """Dispatch to the requested oracle ('brute' or 'pt')."""
    if method == "brute":
        return enumerate_brute_force(problem, levels)
    if method == "pt":
        return enumerate_parallel_tempering(problem, levels, replicas, sweeps, seed)
    raise ValueError(f"Unknown oracle method {method!r} (expected 'brute' or 'pt')")
