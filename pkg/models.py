"""
Data models for the MFB-CIM sampler.
Pydantic models for run configuration, Ising problems, level sets and reports.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

Mode = Literal["gaussian", "coherent", "meanfield"]

_MODE_ALIASES = {
    "coherent-state": "coherent",
    "mean-field": "meanfield",
}


class StrictModel(BaseModel):
    """Base model rejecting unknown keys."""
    model_config = ConfigDict(extra="forbid")


class JitterSpec(StrictModel):
    """Per-trajectory N(0,1) perturbation scales."""
    alpha_fb: float = Field(0.0, ge=0)
    pump_r: float = Field(0.0, ge=0)


class UserParams(StrictModel):
    """User-facing machine parameters."""
    t_decay: float = Field(4.0, gt=0)       # roundtrips for 1/e² power decay
    eta_esc: float = Field(0.2, gt=0, le=1)
    pump_r: float = 0.8                      # may be zero or negative
    n_sat: float = Field(200.0, gt=0)
    alpha_fb: float = 5.0
    mode: Mode = "gaussian"
    sigma_fb: float = Field(0.0, ge=0)       # mean-field mode only
    jitter: Optional[JitterSpec] = None
    crystal_steps: int = Field(16, ge=1)

    @field_validator("mode", mode="before")
    @classmethod
    def _normalize_mode(cls, value: Any) -> Any:
        if isinstance(value, str):
            return _MODE_ALIASES.get(value, value)
        return value


# Named parameter sets. The "positive-pump" and "negative-pump" labels disagree with
# the signs of their pump_r values; the pump_r values are authoritative.
MACHINE_PRESETS: Dict[str, Dict[str, Any]] = {
    "positive-pump": {
        "t_decay": 4.0, "alpha_fb": 40.0, "pump_r": -0.8, "eta_esc": 0.2, "n_sat": 200.0,
        "mode": "gaussian", "jitter": {"alpha_fb": 10.0, "pump_r": 0.08},
    },
    "no-pump": {
        "t_decay": 4.0, "alpha_fb": 30.0, "pump_r": 0.0, "eta_esc": 0.5, "n_sat": 200.0,
        "mode": "gaussian", "jitter": {"alpha_fb": 5.0, "pump_r": 0.0},
    },
    "negative-pump": {
        "t_decay": 1.0, "alpha_fb": 4.0, "pump_r": 0.8, "eta_esc": 0.5, "n_sat": 200.0,
        "mode": "gaussian", "jitter": {"alpha_fb": 0.6, "pump_r": 0.05},
    },
    "no-nonlinearity": {
        "t_decay": 2.0, "alpha_fb": 10.0, "pump_r": 0.0, "eta_esc": 0.5, "n_sat": 200.0,
        "mode": "coherent", "jitter": {"alpha_fb": 2.0, "pump_r": 0.0},
    },
}


def preset_params(name: str, **overrides: Any) -> UserParams:
    """Build UserParams from a named preset with optional overrides."""
    if name not in MACHINE_PRESETS:
        raise ValueError(f"Unknown preset {name!r}; choose from {sorted(MACHINE_PRESETS)}")
    values = dict(MACHINE_PRESETS[name])
    values.update(overrides)
    return UserParams(**values)


class IsingProblem(StrictModel):
    """Ising instance: couplings over unordered pairs i < j."""
    n: int = Field(ge=2)
    couplings: List[Tuple[int, int, float]]

    _matrix: Optional[np.ndarray] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_pairs(self) -> "IsingProblem":
        seen = set()
        for i, j, _ in self.couplings:
            if not 0 <= i < j < self.n:
                raise ValueError(f"Coupling ({i}, {j}) must satisfy 0 <= i < j < n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"Duplicate coupling for pair ({i}, {j})")
            seen.add((i, j))
        return self

    def matrix(self) -> np.ndarray:
        """Dense symmetric coupling matrix with zero diagonal."""
        if self._matrix is None:
            mat = np.zeros((self.n, self.n))
            for i, j, value in self.couplings:
                mat[i, j] = value
                mat[j, i] = value
            mat.setflags(write=False)
            self._matrix = mat
        return self._matrix

    def feedback_matrix(self) -> np.ndarray:
        """Edge-weight form W = -J driven by the measurement feedback."""
        return -self.matrix()

    def coupling_abs_sum(self) -> float:
        """Sum of |J_ij| over ordered pairs i != j."""
        return 2.0 * float(sum(abs(value) for _, _, value in self.couplings))


class LevelEntry(StrictModel):
    """One energy level with its canonical configurations."""
    energy: float
    configs: List[str]


class LevelSet(StrictModel):
    """Lowest energy levels of an Ising problem."""
    energies: List[float]
    levels: List[LevelEntry]

    @model_validator(mode="after")
    def _check_levels(self) -> "LevelSet":
        if any(b <= a for a, b in zip(self.energies, self.energies[1:])):
            raise ValueError("Level energies must be strictly increasing")
        if [lvl.energy for lvl in self.levels] != list(self.energies):
            raise ValueError("Level entries must match the energies list")
        return self

    @property
    def n_conf(self) -> int:
        return sum(len(lvl.configs) for lvl in self.levels)

    def targets(self) -> List[Tuple[str, float, int]]:
        """Flat list of (config, energy, level index)."""
        return [(cfg, lvl.energy, k) for k, lvl in enumerate(self.levels) for cfg in lvl.configs]


# ---------------------------------------------------------------- run config

class ProblemSection(StrictModel):
    """Problem source: a JSON file or an inline SK1 instance."""
    path: Optional[str] = None
    sk1_n: Optional[int] = Field(None, ge=2)
    sk1_seed: int = 0

    @model_validator(mode="after")
    def _one_source(self) -> "ProblemSection":
        if self.path is None and self.sk1_n is None:
            raise ValueError("problem needs either 'path' or 'sk1_n'")
        return self


class SamplingSection(StrictModel):
    n_traj: int = Field(1000, ge=1)
    t_sim: Optional[int] = Field(None, ge=1)   # default 100·T_decay
    seed: int = 0
    levels: int = Field(2, ge=1)
    oracle: Literal["brute", "pt"] = "brute"
    pt_replicas: int = Field(32, ge=2)
    pt_sweeps: int = Field(100_000, ge=1)
    workers: int = Field(1, ge=1)
    emit_trajectory: bool = False


class ScanSection(StrictModel):
    alpha_values: List[float] = Field(min_length=1)
    pump_r_values: List[float] = Field(min_length=1)


class ScalingSection(StrictModel):
    sizes: List[int] = Field(min_length=3)
    instances: int = Field(50, ge=1)
    presets: List[str] = Field(default_factory=lambda: ["negative-pump"])
    max_trajectories: int = Field(2000, ge=1)
    t_sim: Optional[int] = Field(None, ge=1)   # default 50·T_decay
    instance_seed: int = 0
    f_rep: float = Field(1e10, gt=0)

    @field_validator("presets")
    @classmethod
    def _known_presets(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in MACHINE_PRESETS]
        if unknown:
            raise ValueError(f"Unknown presets: {unknown}")
        return value


class ConvergenceSection(StrictModel):
    t_decays: List[int] = Field(default_factory=lambda: [4, 16, 64], min_length=1)
    horizon: float = Field(10.0, gt=0)        # in decay times
    noise_seeds: List[int] = Field(default_factory=lambda: [0])
    fine_steps_per_decay: int = Field(256, ge=1)
    exact: bool = False


class FinesseSection(StrictModel):
    """T_samp of the first ground configuration versus T_decay."""
    t_decays: List[float] = Field(default_factory=lambda: [4.0, 16.0, 64.0], min_length=1)
    instances: Optional[int] = Field(None, ge=1)   # None = the configured problem only
    instance_seed: int = 0
    t_sim_factor: int = Field(100, ge=1)


class ModelVariant(StrictModel):
    """One machine model in a comparison; `machine` overrides the base machine section."""
    name: str
    machine: Dict[str, Any] = Field(default_factory=dict)
    alpha_values: List[float] = Field(min_length=1)
    pump_r_values: Optional[List[float]] = None   # None = the variant's own pump_r


class ComparisonSection(StrictModel):
    variants: List[ModelVariant] = Field(min_length=1)

    @field_validator("variants")
    @classmethod
    def _unique_names(cls, value: List[ModelVariant]) -> List[ModelVariant]:
        names = [v.name for v in value]
        if len(set(names)) != len(names):
            raise ValueError(f"Variant names must be unique, got {names}")
        return value


class OutputSection(StrictModel):
    report: str = "report.json"
    trajectory_csv: Optional[str] = None


class RunConfig(StrictModel):
    """Complete run configuration; `preset` fills machine fields left unset."""
    preset: Optional[str] = None
    machine: UserParams = Field(default_factory=UserParams)
    problem: Optional[ProblemSection] = None
    sampling: SamplingSection = Field(default_factory=SamplingSection)
    scan: Optional[ScanSection] = None
    scaling: Optional[ScalingSection] = None
    convergence: Optional[ConvergenceSection] = None
    finesse: Optional[FinesseSection] = None
    comparison: Optional[ComparisonSection] = None
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="before")
    @classmethod
    def _apply_preset(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("preset") is not None:
            name = data["preset"]
            if name not in MACHINE_PRESETS:
                raise ValueError(f"Unknown preset {name!r}; choose from {sorted(MACHINE_PRESETS)}")
            merged = dict(MACHINE_PRESETS[name])
            merged.update(data.get("machine") or {})
            data = {**data, "machine": merged}
        return data

    def resolved_t_sim(self, default_factor: int = 100) -> int:
        if self.sampling.t_sim is not None:
            return self.sampling.t_sim
        return int(round(default_factor * self.machine.t_decay))


# ------------------------------------------------------------------- reports

class ConfigurationStats(BaseModel):
    """Sampling statistics for one target configuration (± combined)."""
    config: str
    energy: float
    level: int
    count: int                    # occurrences of σ or -σ over all roundtrips
    count_plus: int               # occurrences of σ exactly
    count_minus: int              # occurrences of -σ exactly
    trajectories_sampled: int
    t_samp: Optional[float]       # None = never sampled
    first_times_histogram: List[int]
    never_sampled: int


class EnsembleSummary(BaseModel):
    n_traj: int
    t_sim: int
    seed: int
    t_all: Optional[float]
    t_any: Optional[float]
    n_targets: int
    histogram_bin: int
    mean_measured_energy: Optional[float] = None
    terminated_trajectories: int = 0
    threshold_eigenvalue: float
    above_threshold: bool


class SamplingReport(BaseModel):
    configs: List[ConfigurationStats]
    ensemble: EnsembleSummary
    params: Dict[str, Any]


class ScanPoint(BaseModel):
    alpha_fb: float
    pump_r: float
    max_t_samp: Optional[float]
    threshold_eigenvalue: float
    above_threshold: bool


class ScanReport(BaseModel):
    alpha_values: List[float]
    pump_r_values: List[float]
    points: List[ScanPoint]
    params: Dict[str, Any]


class ScalingInstance(BaseModel):
    n: int
    instance_seed: int
    n_conf: Optional[int]
    t_all: Optional[float]
    t_any: Optional[float]
    t_all_normalized: Optional[float] = None
    skipped: bool = False
    reason: Optional[str] = None


class SizeMedian(BaseModel):
    n: int
    median_t_all: Optional[float]
    median_t_any: Optional[float]
    instances_used: int


class ExponentialFit(BaseModel):
    """log(median) = intercept + log(base)·N."""
    base: float
    intercept: float
    sizes_used: List[int]


class ScalingPresetResult(BaseModel):
    preset: str
    instances: List[ScalingInstance]
    medians: List[SizeMedian]
    t_all_fit: Optional[ExponentialFit]
    t_any_fit: Optional[ExponentialFit]
    n_conf_exponent: Optional[float]
    median_wall_clock_s: Dict[str, Optional[float]]


class ScalingReport(BaseModel):
    results: List[ScalingPresetResult]
    params: Dict[str, Any]


class ConvergenceReport(BaseModel):
    t_decays: List[int]
    horizon: float
    seeds: List[int]
    rms: List[List[float]]        # rms[seed_index][finesse_index]
    amplitude_scale: float
    params: Dict[str, Any]


class FinesseReport(BaseModel):
    t_decays: List[float]
    t_samp: List[List[Optional[float]]]   # t_samp[instance_index][finesse_index]
    params: Dict[str, Any]


class VariantResult(BaseModel):
    name: str
    machine: Dict[str, Any]
    best_max_t_samp: Optional[float]     # None = no grid point sampled every target
    best_alpha_fb: Optional[float]
    best_pump_r: Optional[float]
    points: List[ScanPoint]


class ComparisonReport(BaseModel):
    variants: List[VariantResult]
    params: Dict[str, Any]
