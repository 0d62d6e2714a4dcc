"""
Sampling Metrics
Trajectory ensembles, first-sampling times, T_samp/T_all/T_any and parameter studies.

Roundtrip records are numbered from 1: the sign vector measured during
roundtrip k has index k. Trajectories are simulated in fixed chunks in
index order, so worker count never changes a report.
"""

from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple
import logging
import math
import time

import numpy as np
import pandas as pd
from sklearn.linear_model import LinearRegression

from ising import OracleBudgetError, energies, generate_sk1, solve_levels
from machine import derive_params, threshold_eigenvalue
from models import (
    ComparisonReport,
    ConfigurationStats,
    EnsembleSummary,
    ExponentialFit,
    FinesseReport,
    IsingProblem,
    LevelEntry,
    LevelSet,
    ModelVariant,
    SamplingReport,
    ScalingInstance,
    ScalingPresetResult,
    ScalingReport,
    ScanPoint,
    ScanReport,
    SizeMedian,
    UserParams,
    VariantResult,
    preset_params,
)
from trajectories import run_batch

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

CHUNK_SIZE = 50
TRANSIENT_DECAY_TIMES = 10


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


def _sub_seed(*keys: int) -> int:
    """Deterministic 32-bit seed derived from integer keys."""
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


@dataclass
class TrajectoryRecord:
    """
    Output of one trajectory.

    Sign vectors are bit-packed along the pulse axis (True = +1).
    """
    index: int
    n: int
    packed_signs: np.ndarray                 # (T, ceil(N/8)) uint8
    records: Optional[np.ndarray] = None     # (T, N) raw homodyne values
    energies: Optional[np.ndarray] = None    # (T,) measured Ising energies
    terminated_at: int = -1

    @classmethod
    def from_signs(cls, index: int, signs: np.ndarray, records: Optional[np.ndarray] = None,
                   terminated_at: int = -1, problem: Optional[IsingProblem] = None) -> "TrajectoryRecord":
        signs = np.asarray(signs, dtype=bool)
        if records is not None and np.shape(records) != signs.shape:
            raise ValueError(f"Records shape {np.shape(records)} does not match signs {signs.shape}")
        record = cls(
            index=index,
            n=signs.shape[-1],
            packed_signs=np.packbits(signs, axis=-1),
            records=records,
            terminated_at=int(terminated_at),
        )
        if problem is not None:
            record.energies = record.measured_energy(problem)
        return record

    @property
    def t_sim(self) -> int:
        return self.packed_signs.shape[0]

    def signs(self) -> np.ndarray:
        return np.unpackbits(self.packed_signs, axis=-1, count=self.n).astype(bool)

    def spins(self) -> np.ndarray:
        return np.where(self.signs(), 1.0, -1.0)

    def measured_energy(self, problem: IsingProblem) -> np.ndarray:
        """Ising energy of the sign configuration of every roundtrip."""
        return energies(problem, self.spins())


def _match_targets(signs: np.ndarray, target_bits: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Compare sign vectors with canonical targets (± combined).

    Args:
        signs: (B, T, N) bool
        target_bits: (C, N) bool, first entry True

    Returns:
        (first times (B, C) with inf, raw +σ counts (C,), raw -σ counts (C,))
    """
    canonical = signs ^ ~signs[..., :1]
    packed = np.packbits(canonical, axis=-1)
    packed_targets = np.packbits(target_bits, axis=-1)
    plus = signs[..., 0]

    n_targets = len(target_bits)
    first = np.full((signs.shape[0], n_targets), np.inf)
    count_plus = np.zeros(n_targets, dtype=np.int64)
    count_minus = np.zeros(n_targets, dtype=np.int64)
    for c in range(n_targets):
        match = np.all(packed == packed_targets[c], axis=-1)
        hit = match.any(axis=1)
        first[hit, c] = np.argmax(match[hit], axis=1) + 1
        count_plus[c] = np.count_nonzero(match & plus)
        count_minus[c] = np.count_nonzero(match & ~plus)
    return first, count_plus, count_minus


def first_sampling_time(trajectory: TrajectoryRecord, target: np.ndarray) -> float:
    """
    Earliest roundtrip whose sign vector equals the target or its global flip.

    Returns:
        Roundtrip index (1-based) or math.inf if never sampled
    """
    target = np.asarray(target)
    if target.shape != (trajectory.n,):
        raise ValueError(f"Target has shape {target.shape}, expected ({trajectory.n},)")
    bits = target > 0
    bits = bits ^ ~bits[:1]
    first, _, _ = _match_targets(trajectory.signs()[None], bits[None])
    return float(first[0, 0])


def required_sampling_time(times: Sequence[float]) -> float:
    """
    Harmonic estimate T_samp with 1/T_samp = mean(1/T), 1/inf = 0.

    Returns:
        T_samp, or math.inf when no entry is finite
    """
    values = np.asarray(times, dtype=float)
    if values.size == 0:
        raise ValueError("Need at least one first-sampling time")
    if np.any(values <= 0):
        raise ValueError("First-sampling times must be positive")
    finite = np.isfinite(values)
    rate = np.sum(1.0 / values[finite])
    return float(values.size / rate) if rate > 0 else math.inf


def wall_clock_seconds(roundtrips: float, n: int, f_rep: float) -> float:
    """Wall-clock time of `roundtrips` roundtrips of an n-pulse cavity at rate f_rep."""
    return roundtrips * n / f_rep


@dataclass
class _ChunkTask:
    problem: IsingProblem
    user: UserParams
    seed: int
    indices: List[int]
    t_sim: int
    target_bits: np.ndarray
    transient: int
    keep_records: bool


@dataclass
class _ChunkResult:
    first_times: np.ndarray
    count_plus: np.ndarray
    count_minus: np.ndarray
    energy_sum: float
    energy_count: int
    terminated: int
    records: List[TrajectoryRecord] = field(default_factory=list)


def _simulate_chunk(task: _ChunkTask) -> _ChunkResult:
    batch = run_batch(task.problem, task.user, task.seed, task.indices, task.t_sim,
                      keep_records=task.keep_records)
    first, plus, minus = _match_targets(batch.signs, task.target_bits)

    spins = np.where(batch.signs[:, task.transient:], 1.0, -1.0)
    measured = energies(task.problem, spins)

    records = []
    if task.keep_records:
        for row, index in enumerate(batch.indices):
            records.append(TrajectoryRecord.from_signs(
                int(index), batch.signs[row], batch.records[row], batch.terminated_at[row],
            ))
    return _ChunkResult(
        first_times=first,
        count_plus=plus,
        count_minus=minus,
        energy_sum=float(np.sum(measured)),
        energy_count=int(measured.size),
        terminated=int(np.count_nonzero(batch.terminated_at > 0)),
        records=records,
    )


@dataclass
class EnsembleOutcome:
    """Sampling report plus optional raw trajectory records."""
    report: SamplingReport
    records: List[TrajectoryRecord]
    trajectories_run: int
    elapsed_s: float


def params_summary(user: UserParams, problem: IsingProblem) -> Dict:
    """User parameters plus the derived physical values, for report provenance."""
    params = derive_params(user, problem.coupling_abs_sum())
    return {
        "machine": user.model_dump(),
        "n": problem.n,
        "derived": {
            "r_loss": params.r_loss,
            "r_out": params.r_out,
            "eps_tau": params.eps_tau,
            "beta_th": params.beta_th,
            "j0": float(params.j0),
            "n_sat_effective": params.n_sat_effective,
            "eps_tau_capped": params.capped,
        },
    }


class EnsembleRunner:
    """Runs trajectory ensembles for one problem and aggregates sampling metrics."""

    def __init__(self, problem: IsingProblem, user: UserParams, targets: LevelSet,
                 workers: int = 1, chunk_size: int = CHUNK_SIZE):
        """
        Initialize the runner.

        Args:
            problem: Ising problem
            user: Machine parameters (jitter applied per trajectory)
            targets: Level set whose configurations are tracked
            workers: Worker processes (1 = in-process)
            chunk_size: Trajectories per work unit
        """
        if targets.n_conf == 0:
            raise ValueError("Target level set is empty")
        if workers < 1 or chunk_size < 1:
            raise ValueError("workers and chunk_size must be positive")
        self.problem = problem
        self.user = user
        self.targets = targets
        self.workers = workers
        self.chunk_size = chunk_size
        self.target_list = targets.targets()
        self.target_bits = np.array([[ch == "+" for ch in cfg] for cfg, _, _ in self.target_list])
        if self.target_bits.shape[1] != problem.n:
            raise ValueError(f"Targets have {self.target_bits.shape[1]} spins, problem has n={problem.n}")
        if not np.all(self.target_bits[:, 0]):
            raise ValueError("Target configurations must be canonical (first spin '+')")

    def _tasks(self, n_traj: int, t_sim: int, seed: int, keep_records: bool) -> Iterator[_ChunkTask]:
        transient = min(int(round(TRANSIENT_DECAY_TIMES * self.user.t_decay)), t_sim // 2)
        for start in range(0, n_traj, self.chunk_size):
            yield _ChunkTask(
                problem=self.problem,
                user=self.user,
                seed=seed,
                indices=list(range(start, min(start + self.chunk_size, n_traj))),
                t_sim=t_sim,
                target_bits=self.target_bits,
                transient=transient,
                keep_records=keep_records,
            )

    def _results(self, tasks: Iterable[_ChunkTask]) -> Iterator[_ChunkResult]:
        if self.workers == 1:
            for task in tasks:
                yield _simulate_chunk(task)
            return
        with Pool(processes=self.workers) as pool:
            yield from pool.imap(_simulate_chunk, tasks)

    def run(self, n_traj: int, t_sim: int, seed: int, keep_records: bool = False,
            stop_when_covered: bool = False) -> EnsembleOutcome:
        """
        Simulate the ensemble and compute the sampling report.

        Args:
            n_traj: Number of trajectories (upper bound when stop_when_covered)
            t_sim: Roundtrips per trajectory
            seed: Master seed
            keep_records: Keep raw homodyne records of every trajectory
            stop_when_covered: Stop after the chunk in which every target was seen

        Returns:
            EnsembleOutcome
        """
        if n_traj < 1 or t_sim < 1:
            raise ValueError(f"n_traj and t_sim must be positive, got {n_traj}, {t_sim}")

        logger.info(f"Running {n_traj} trajectories x {t_sim} roundtrips (N={self.problem.n}, "
                    f"mode={self.user.mode}, workers={self.workers})")
        started = time.perf_counter()

        n_targets = len(self.target_list)
        first_blocks: List[np.ndarray] = []
        count_plus = np.zeros(n_targets, dtype=np.int64)
        count_minus = np.zeros(n_targets, dtype=np.int64)
        energy_sum = 0.0
        energy_count = 0
        terminated = 0
        records: List[TrajectoryRecord] = []
        covered = np.zeros(n_targets, dtype=bool)

        for result in self._results(self._tasks(n_traj, t_sim, seed, keep_records)):
            first_blocks.append(result.first_times)
            count_plus += result.count_plus
            count_minus += result.count_minus
            energy_sum += result.energy_sum
            energy_count += result.energy_count
            terminated += result.terminated
            records.extend(result.records)
            covered |= np.any(np.isfinite(result.first_times), axis=0)
            if stop_when_covered and np.all(covered):
                break

        first = np.concatenate(first_blocks, axis=0)
        elapsed = time.perf_counter() - started
        report = self._report(first, count_plus, count_minus, t_sim, seed,
                              energy_sum / energy_count if energy_count else None, terminated)
        logger.info(f"Ensemble finished: {len(first)} trajectories in {elapsed:.1f}s, "
                    f"T_all={report.ensemble.t_all}, T_any={report.ensemble.t_any}")
        return EnsembleOutcome(report=report, records=records, trajectories_run=len(first), elapsed_s=elapsed)

    def _report(self, first: np.ndarray, count_plus: np.ndarray, count_minus: np.ndarray, t_sim: int,
                seed: int, mean_energy: Optional[float], terminated: int) -> SamplingReport:
        bin_width = max(1, int(round(self.user.t_decay)))
        n_bins = -(-t_sim // bin_width)

        configs = []
        first_index = np.full(len(self.target_list), np.inf)
        for c, (config, level_energy, level) in enumerate(self.target_list):
            times = first[:, c]
            finite = np.isfinite(times)
            if np.any(finite):
                first_index[c] = np.argmax(finite) + 1
            histogram = np.bincount(((times[finite] - 1) // bin_width).astype(np.int64), minlength=n_bins)
            configs.append(ConfigurationStats(
                config=config,
                energy=level_energy,
                level=level,
                count=int(count_plus[c] + count_minus[c]),
                count_plus=int(count_plus[c]),
                count_minus=int(count_minus[c]),
                trajectories_sampled=int(np.count_nonzero(finite)),
                t_samp=_finite_or_none(required_sampling_time(times)),
                first_times_histogram=[int(v) for v in histogram],
                never_sampled=int(np.count_nonzero(~finite)),
            ))

        params = derive_params(self.user, self.problem.coupling_abs_sum())
        eigenvalue = threshold_eigenvalue(params, self.problem)
        summary = EnsembleSummary(
            n_traj=len(first),
            t_sim=t_sim,
            seed=seed,
            t_all=_finite_or_none(float(np.max(first_index)) * t_sim),
            t_any=_finite_or_none(float(np.min(first_index)) * t_sim),
            n_targets=len(self.target_list),
            histogram_bin=bin_width,
            mean_measured_energy=mean_energy,
            terminated_trajectories=terminated,
            threshold_eigenvalue=eigenvalue,
            above_threshold=eigenvalue > 1.0,
        )
        return SamplingReport(configs=configs, ensemble=summary, params=params_summary(self.user, self.problem))


def run_ensemble(problem: IsingProblem, user: UserParams, n_traj: int, t_sim: int, targets: LevelSet,
                 seed: int, workers: int = 1) -> SamplingReport:
    """Run n_traj independent trajectories and report per-target and ensemble metrics."""
    return EnsembleRunner(problem, user, targets, workers=workers).run(n_traj, t_sim, seed).report


def max_sampling_time(report: SamplingReport) -> float:
    """Largest T_samp over the targets of a report (inf if any is never sampled)."""
    values = [math.inf if c.t_samp is None else c.t_samp for c in report.configs]
    return max(values)


def parameter_scan(problem: IsingProblem, user: UserParams, alpha_values: Sequence[float],
                   pump_r_values: Sequence[float], targets: LevelSet, n_traj: int, t_sim: int,
                   seed: int, workers: int = 1) -> ScanReport:
    """
    Max-over-targets T_samp on an (alpha_fb, pump_r) grid.

    Points are ordered alpha-major. Every point uses the same master seed.
    """
    if len(alpha_values) == 0 or len(pump_r_values) == 0:
        raise ValueError("Parameter grid is empty")

    points = []
    for alpha in alpha_values:
        for r in pump_r_values:
            point_user = user.model_copy(update={"alpha_fb": float(alpha), "pump_r": float(r)})
            report = run_ensemble(problem, point_user, n_traj, t_sim, targets, seed, workers)
            points.append(ScanPoint(
                alpha_fb=float(alpha),
                pump_r=float(r),
                max_t_samp=_finite_or_none(max_sampling_time(report)),
                threshold_eigenvalue=report.ensemble.threshold_eigenvalue,
                above_threshold=report.ensemble.above_threshold,
            ))
            logger.info(f"Scan point alpha={alpha}, r={r}: max T_samp={points[-1].max_t_samp}")
    return ScanReport(
        alpha_values=[float(a) for a in alpha_values],
        pump_r_values=[float(r) for r in pump_r_values],
        points=points,
        params=params_summary(user, problem),
    )


def compare_models(problem: IsingProblem, user: UserParams, variants: Sequence[ModelVariant],
                   targets: LevelSet, n_traj: int, t_sim: int, seed: int,
                   workers: int = 1) -> ComparisonReport:
    """
    Best max-over-targets T_samp of each machine model over its own parameter grid.

    Every variant overrides fields of `user` and is scanned with the same
    problem, targets and master seed.
    """
    if len(variants) == 0:
        raise ValueError("No model variants given")

    results = []
    for variant in variants:
        variant_user = UserParams.model_validate({**user.model_dump(), **variant.machine})
        pump_r_values = variant.pump_r_values or [variant_user.pump_r]
        scan = parameter_scan(problem, variant_user, variant.alpha_values, pump_r_values,
                              targets, n_traj, t_sim, seed, workers)
        finite = [p for p in scan.points if p.max_t_samp is not None]
        best = min(finite, key=lambda p: p.max_t_samp) if finite else None
        results.append(VariantResult(
            name=variant.name,
            machine=variant_user.model_dump(mode="json"),
            best_max_t_samp=best.max_t_samp if best else None,
            best_alpha_fb=best.alpha_fb if best else None,
            best_pump_r=best.pump_r if best else None,
            points=scan.points,
        ))
        logger.info(f"Model {variant.name}: best max T_samp={results[-1].best_max_t_samp}")
    return ComparisonReport(variants=results, params=params_summary(user, problem))


def fit_exponential(sizes: Sequence[int], values: Sequence[float]) -> Optional[ExponentialFit]:
    """Least-squares fit of log(value) = intercept + log(base)·N over finite values."""
    frame = pd.DataFrame({"n": sizes, "value": values})
    frame = frame[np.isfinite(frame["value"]) & (frame["value"] > 0)]
    if frame["n"].nunique() < 2:
        logger.warning("Fewer than two sizes with finite medians; exponential fit skipped")
        return None
    model = LinearRegression().fit(frame[["n"]].to_numpy(dtype=float), np.log(frame["value"].to_numpy()))
    return ExponentialFit(
        base=float(np.exp(model.coef_[0])),
        intercept=float(model.intercept_),
        sizes_used=[int(n) for n in frame["n"]],
    )


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Exponent of y ∝ x^k by least squares on log-log data."""
    frame = pd.DataFrame({"x": x, "y": y})
    frame = frame[np.isfinite(frame["y"]) & (frame["y"] > 0) & (frame["x"] > 0)]
    if frame["x"].nunique() < 2:
        return None
    model = LinearRegression().fit(np.log(frame[["x"]].to_numpy(dtype=float)), np.log(frame["y"].to_numpy()))
    return float(model.coef_[0])


def _scaling_for_preset(preset: str, sizes: Sequence[int], instances: int, max_trajectories: int,
                        t_sim: Optional[int], instance_seed: int, seed: int, levels: int, oracle: str,
                        pt_replicas: int, pt_sweeps: int, workers: int, f_rep: float) -> ScalingPresetResult:
    user = preset_params(preset)
    roundtrips = t_sim if t_sim is not None else int(round(50 * user.t_decay))
    rows = []
    results = []
    for n in sizes:
        for i in range(instances):
            problem_seed = _sub_seed(instance_seed, n, i)
            problem = generate_sk1(n, problem_seed)
            try:
                targets = solve_levels(problem, levels, oracle, pt_replicas, pt_sweeps, seed=problem_seed)
            except OracleBudgetError as exc:
                logger.warning(f"Skipping instance n={n}, #{i}: {exc}")
                results.append(ScalingInstance(n=n, instance_seed=problem_seed, n_conf=None, t_all=None,
                                               t_any=None, skipped=True, reason=str(exc)))
                continue
            if targets.n_conf == 0:
                logger.warning(f"Skipping instance n={n}, #{i}: oracle found no configurations")
                results.append(ScalingInstance(n=n, instance_seed=problem_seed, n_conf=0, t_all=None,
                                               t_any=None, skipped=True, reason="empty level set"))
                continue

            outcome = EnsembleRunner(problem, user, targets, workers=workers).run(
                max_trajectories, roundtrips, _sub_seed(seed, n, i), stop_when_covered=True,
            )
            t_all = outcome.report.ensemble.t_all
            t_any = outcome.report.ensemble.t_any
            rows.append({
                "n": n,
                "slot": len(results),
                "n_conf": targets.n_conf,
                "t_all": math.inf if t_all is None else t_all,
                "t_any": math.inf if t_any is None else t_any,
            })
            results.append(ScalingInstance(n=n, instance_seed=problem_seed, n_conf=targets.n_conf,
                                           t_all=t_all, t_any=t_any))

    frame = pd.DataFrame(rows, columns=["n", "slot", "n_conf", "t_all", "t_any"])
    medians = []
    wall_clock: Dict[str, Optional[float]] = {}
    for n in sizes:
        group = frame[frame["n"] == n]
        median_all = float(np.median(group["t_all"])) if len(group) else math.inf
        median_any = float(np.median(group["t_any"])) if len(group) else math.inf
        medians.append(SizeMedian(n=n, median_t_all=_finite_or_none(median_all),
                                  median_t_any=_finite_or_none(median_any), instances_used=len(group)))
        wall_clock[str(n)] = _finite_or_none(wall_clock_seconds(median_all, n, f_rep))
        if math.isfinite(median_all) and median_all > 0:
            for _, row in group.iterrows():
                if math.isfinite(row["t_all"]):
                    results[int(row["slot"])].t_all_normalized = row["t_all"] / median_all

    median_sizes = [m.n for m in medians]
    normalized = [(r.n_conf, r.t_all_normalized) for r in results if r.t_all_normalized is not None]
    return ScalingPresetResult(
        preset=preset,
        instances=results,
        medians=medians,
        t_all_fit=fit_exponential(median_sizes, [math.inf if m.median_t_all is None else m.median_t_all for m in medians]),
        t_any_fit=fit_exponential(median_sizes, [math.inf if m.median_t_any is None else m.median_t_any for m in medians]),
        n_conf_exponent=fit_power_law([c for c, _ in normalized], [t for _, t in normalized]),
        median_wall_clock_s=wall_clock,
    )


def scaling_study(sizes: Sequence[int], instances: int = 50, presets: Sequence[str] = ("negative-pump",),
                  max_trajectories: int = 2000, t_sim: Optional[int] = None, instance_seed: int = 0,
                  seed: int = 0, levels: int = 2, oracle: str = "brute", pt_replicas: int = 32,
                  pt_sweeps: int = 100_000, workers: int = 1, f_rep: float = 1e10) -> ScalingReport:
    """
    Median T_all/T_any versus N over random SK1 instances, with exponential fits.

    Each ensemble stops after the chunk in which every target was seen; T_all
    itself is still exact in trajectory order. Instances the oracle cannot
    solve are reported as skipped.
    """
    if len(set(sizes)) < 3:
        raise ValueError(f"Scaling study needs at least three distinct sizes, got {list(sizes)}")
    if len(presets) == 0:
        raise ValueError("Scaling study needs at least one preset")

    results = []
    for preset in presets:
        logger.info(f"Scaling study for preset {preset}: sizes {list(sizes)}, {instances} instances each")
        results.append(_scaling_for_preset(preset, sizes, instances, max_trajectories, t_sim, instance_seed,
                                           seed, levels, oracle, pt_replicas, pt_sweeps, workers, f_rep))
    return ScalingReport(
        results=results,
        params={
            "sizes": list(sizes), "instances": instances, "presets": list(presets),
            "max_trajectories": max_trajectories, "t_sim": t_sim, "instance_seed": instance_seed,
            "seed": seed, "levels": levels, "oracle": oracle, "f_rep": f_rep,
        },
    )


def finesse_study(problems: Sequence[IsingProblem], level_sets: Sequence[LevelSet], t_decays: Sequence[float],
                  user: UserParams, n_traj: int, seed: int = 0, t_sim_factor: int = 100,
                  workers: int = 1) -> FinesseReport:
    """
    T_samp of the lexicographically first ground configuration versus T_decay.

    Every finesse runs for t_sim_factor·T_decay roundtrips.
    """
    if len(problems) != len(level_sets):
        raise ValueError("Need one level set per problem")
    if len(t_decays) == 0:
        raise ValueError("No finesse values given")

    table = []
    for problem, levels in zip(problems, level_sets):
        if levels.n_conf == 0:
            raise ValueError("Level set is empty")
        ground = levels.levels[0]
        target = LevelSet(energies=[ground.energy],
                          levels=[LevelEntry(energy=ground.energy, configs=[min(ground.configs)])])
        row = []
        for t_decay in t_decays:
            finesse_user = user.model_copy(update={"t_decay": float(t_decay)})
            report = run_ensemble(problem, finesse_user, n_traj, int(round(t_sim_factor * t_decay)),
                                  target, seed, workers)
            row.append(report.configs[0].t_samp)
        table.append(row)
        logger.info(f"Finesse study instance (N={problem.n}): T_samp {row}")
    return FinesseReport(
        t_decays=[float(t) for t in t_decays],
        t_samp=table,
        params={"machine": user.model_dump(), "n_traj": n_traj, "seed": seed, "t_sim_factor": t_sim_factor},
    )
