"""
CIM Sampling Service
Orchestrates problem I/O, oracles, ensemble runners, studies and the report explainer.
"""

from typing import List, Optional, Tuple
import logging

import numpy as np

from data_io import load_level_set, load_problem, simulation_to_frame
from ising import energies, generate_sk1, solve_levels
from models import (
    ComparisonReport,
    ConvergenceReport,
    FinesseReport,
    IsingProblem,
    LevelSet,
    RunConfig,
    SamplingReport,
    ScalingReport,
    ScanReport,
)
from reference_models import convergence_study
from report_explainer import ReportExplainer
from sampling import (
    EnsembleRunner,
    TrajectoryRecord,
    compare_models,
    finesse_study,
    parameter_scan,
    scaling_study,
)
from trajectories import run_batch

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class SamplingService:
    """
    Runs the experiments described by one RunConfig.
    """

    def __init__(self, config: RunConfig, targets_path: Optional[str] = None):
        """
        Initialize the service.

        Args:
            config: Fully resolved run configuration
            targets_path: Optional level-set file used instead of running the oracle
        """
        self.config = config
        self.targets_path = targets_path
        self.explainer = ReportExplainer()
        self._problem: Optional[IsingProblem] = None
        self._targets: Optional[LevelSet] = None

    @property
    def problem(self) -> IsingProblem:
        if self._problem is None:
            section = self.config.problem
            if section is None:
                raise ValueError("No problem configured. Pass --problem or set 'problem' in the config.")
            if section.path is not None:
                self._problem = load_problem(section.path)
            else:
                self._problem = generate_sk1(section.sk1_n, section.sk1_seed)
                logger.info(f"Generated SK1 instance n={section.sk1_n}, seed={section.sk1_seed}")
        return self._problem

    @property
    def targets(self) -> LevelSet:
        if self._targets is None:
            if self.targets_path is not None:
                self._targets = load_level_set(self.targets_path)
            else:
                s = self.config.sampling
                self._targets = solve_levels(self.problem, s.levels, s.oracle, s.pt_replicas, s.pt_sweeps, s.seed)
        return self._targets

    def _provenance(self) -> dict:
        # worker count is excluded: reports must not depend on it
        return {"config": self.config.model_dump(mode="json", exclude={"sampling": {"workers"}})}

    def sample(self) -> Tuple[SamplingReport, List[TrajectoryRecord]]:
        """Run the configured ensemble; records are kept when emit_trajectory is set."""
        s = self.config.sampling
        runner = EnsembleRunner(self.problem, self.config.machine, self.targets, workers=s.workers)
        outcome = runner.run(s.n_traj, self.config.resolved_t_sim(), s.seed, keep_records=s.emit_trajectory)
        outcome.report.params.update(self._provenance())
        return outcome.report, outcome.records

    def scan(self) -> ScanReport:
        if self.config.scan is None:
            raise ValueError("Config has no 'scan' section")
        s = self.config.sampling
        report = parameter_scan(
            self.problem, self.config.machine, self.config.scan.alpha_values, self.config.scan.pump_r_values,
            self.targets, s.n_traj, self.config.resolved_t_sim(), s.seed, s.workers,
        )
        report.params.update(self._provenance())
        return report

    def scaling(self) -> ScalingReport:
        section = self.config.scaling
        if section is None:
            raise ValueError("Config has no 'scaling' section")
        s = self.config.sampling
        report = scaling_study(
            section.sizes, section.instances, section.presets, section.max_trajectories, section.t_sim,
            section.instance_seed, s.seed, s.levels, s.oracle, s.pt_replicas, s.pt_sweeps, s.workers,
            section.f_rep,
        )
        report.params.update(self._provenance())
        return report

    def converge(self) -> ConvergenceReport:
        section = self.config.convergence
        if section is None:
            raise ValueError("Config has no 'convergence' section")
        report = convergence_study(
            self.problem, self.config.machine, section.t_decays, section.horizon, section.noise_seeds,
            section.fine_steps_per_decay, section.exact,
        )
        report.params.update(self._provenance())
        return report

    def finesse(self) -> FinesseReport:
        section = self.config.finesse
        if section is None:
            raise ValueError("Config has no 'finesse' section")
        s = self.config.sampling
        if section.instances is None:
            problems, level_sets = [self.problem], [self.targets]
        else:
            n = self.problem.n
            problems = [generate_sk1(n, section.instance_seed + i) for i in range(section.instances)]
            level_sets = [solve_levels(p, 1, s.oracle, s.pt_replicas, s.pt_sweeps, s.seed) for p in problems]
        report = finesse_study(problems, level_sets, section.t_decays, self.config.machine, s.n_traj,
                               s.seed, section.t_sim_factor, s.workers)
        report.params.update(self._provenance())
        return report

    def compare(self) -> ComparisonReport:
        """Scan every configured model variant on the shared problem and targets."""
        section = self.config.comparison
        if section is None:
            raise ValueError("Config has no 'comparison' section")
        s = self.config.sampling
        report = compare_models(self.problem, self.config.machine, section.variants, self.targets,
                                s.n_traj, self.config.resolved_t_sim(), s.seed, s.workers)
        report.params.update(self._provenance())
        return report

    def simulate(self, index: int = 0):
        """
        One trajectory with records and per-roundtrip moments.

        Returns:
            (DataFrame, mean measured energy)
        """
        s = self.config.sampling
        t_sim = self.config.resolved_t_sim()
        batch = run_batch(self.problem, self.config.machine, s.seed, [index], t_sim,
                          keep_records=True, keep_moments=True)
        frame = simulation_to_frame(index, batch.records[0], batch.mean_q[0], batch.var_q[0])
        spins = np.where(batch.signs[0], 1.0, -1.0)
        mean_energy = float(np.mean(energies(self.problem, spins)))
        logger.info(f"Simulated trajectory {index}: {t_sim} roundtrips, mean measured energy {mean_energy:.3f}")
        if batch.terminated_at[0] > 0:
            logger.warning(f"Trajectory {index} terminated at roundtrip {batch.terminated_at[0]}")
        return frame, mean_energy
