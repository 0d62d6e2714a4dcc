"""
Data I/O Layer
Loads and writes problems, level sets, run configurations, reports and trajectory CSVs.
"""

from pathlib import Path
from typing import Any, Dict, List, Sequence, Type, TypeVar, Union
import json
import logging

import numpy as np
import pandas as pd
from pydantic import BaseModel

from models import IsingProblem, LevelSet, RunConfig

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Model = TypeVar("Model", bound=BaseModel)

TRAJECTORY_COLUMNS = ["trajectory", "roundtrip", "pulse", "w"]
SIMULATION_COLUMNS = TRAJECTORY_COLUMNS + ["mean_q", "var_q"]


def _read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        logger.error(f"File not found: {path}")
        raise
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in {path}: {e}")
        raise ValueError(f"Invalid JSON in {path}: {e}") from e


def _write_text(path: PathLike, text: str) -> None:
    path = Path(path)
    try:
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        logger.error(f"Could not write {path}: {e}")
        raise
    logger.info(f"Wrote {path}")


def _load_model(path: PathLike, model: Type[Model]) -> Model:
    data = _read_json(path)
    return model.model_validate(data)


def _dump_model(instance: BaseModel, path: PathLike) -> None:
    _write_text(path, instance.model_dump_json(indent=2) + "\n")


def load_problem(path: PathLike) -> IsingProblem:
    """Problem file: {"n": int, "couplings": [[i, j, J], ...]} with i < j."""
    problem = _load_model(path, IsingProblem)
    logger.info(f"Loaded problem with n={problem.n}, {len(problem.couplings)} couplings from {path}")
    return problem


def save_problem(problem: IsingProblem, path: PathLike) -> None:
    payload = {"n": problem.n, "couplings": [[i, j, value] for i, j, value in problem.couplings]}
    _write_text(path, json.dumps(payload, indent=2) + "\n")


def load_level_set(path: PathLike) -> LevelSet:
    levels = _load_model(path, LevelSet)
    logger.info(f"Loaded level set with energies {levels.energies} (N_conf={levels.n_conf}) from {path}")
    return levels


def save_level_set(levels: LevelSet, path: PathLike) -> None:
    _dump_model(levels, path)


def load_config(path: PathLike) -> RunConfig:
    """Run configuration; unknown keys are rejected by the schema."""
    config = _load_model(path, RunConfig)
    logger.info(f"Loaded run configuration from {path}")
    return config


def save_report(report: BaseModel, path: PathLike) -> None:
    _dump_model(report, path)


def load_report(path: PathLike) -> Dict[str, Any]:
    """Raw report dictionary (any report type)."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ValueError(f"Report {path} is not a JSON object")
    return data


def records_to_frame(records: Sequence) -> pd.DataFrame:
    """
    Long-format table of raw homodyne records.

    Args:
        records: TrajectoryRecord objects holding raw records

    Returns:
        DataFrame with columns trajectory, roundtrip, pulse, w
    """
    frames: List[pd.DataFrame] = []
    for record in records:
        if record.records is None:
            raise ValueError(f"Trajectory {record.index} has no raw records")
        t_sim, n = record.records.shape
        frames.append(pd.DataFrame({
            "trajectory": np.full(t_sim * n, record.index, dtype=np.int64),
            "roundtrip": np.repeat(np.arange(1, t_sim + 1), n),
            "pulse": np.tile(np.arange(n), t_sim),
            "w": record.records.ravel(),
        }))
    if not frames:
        return pd.DataFrame(columns=TRAJECTORY_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def simulation_to_frame(index: int, records: np.ndarray, mean_q: np.ndarray, var_q: np.ndarray) -> pd.DataFrame:
    """Single-trajectory table with per-roundtrip moments; arrays are (T, N)."""
    t_sim, n = records.shape
    return pd.DataFrame({
        "trajectory": np.full(t_sim * n, index, dtype=np.int64),
        "roundtrip": np.repeat(np.arange(1, t_sim + 1), n),
        "pulse": np.tile(np.arange(n), t_sim),
        "w": records.ravel(),
        "mean_q": mean_q.ravel(),
        "var_q": var_q.ravel(),
    })


def write_csv(frame: pd.DataFrame, path: PathLike) -> None:
    path = Path(path)
    try:
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.10g")
    except OSError as e:
        logger.error(f"Could not write {path}: {e}")
        raise
    logger.info(f"Wrote {len(frame)} rows to {path}")


def read_trajectory_csv(path: PathLike) -> pd.DataFrame:
    """Read a trajectory CSV and check its columns."""
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        logger.error(f"CSV file not found: {path}")
        raise
    missing = [c for c in TRAJECTORY_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"Trajectory CSV {path} lacks columns {missing}")
    return frame.sort_values(["trajectory", "roundtrip", "pulse"]).reset_index(drop=True)
