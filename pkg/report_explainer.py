"""
Report Explainer
Turns sampling, scan, scaling and convergence reports into readable text.
"""

from typing import Any, Dict, List, Optional
import logging

import pandas as pd

from models import (
    ComparisonReport,
    ConvergenceReport,
    FinesseReport,
    SamplingReport,
    ScalingReport,
    ScanReport,
)

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def _fmt(value: Optional[float], digits: int = 1) -> str:
    return "never" if value is None else f"{value:.{digits}f}"


class ReportExplainer:
    """
    Generates plain-language summaries of experiment reports.
    """

    def __init__(self, max_configs: int = 12):
        """
        Initialize the explainer.

        Args:
            max_configs: Configurations listed individually in sampling summaries
        """
        self.max_configs = max_configs
        self.level_names = {0: "ground", 1: "first-excited"}

    def explain_sampling(self, report: SamplingReport) -> str:
        ens = report.ensemble
        lines = [
            f"Ensemble of {ens.n_traj} trajectories x {ens.t_sim} roundtrips (seed {ens.seed}).",
            f"Linear threshold eigenvalue {ens.threshold_eigenvalue:.4f}: "
            + ("above threshold." if ens.above_threshold else "below threshold; sampling is expected to fail."),
        ]
        sampled = sum(1 for c in report.configs if c.t_samp is not None)
        lines.append(f"{sampled} of {ens.n_targets} target configurations were sampled.")
        if ens.t_all is not None:
            lines.append(f"All targets were seen after {ens.t_all:.0f} roundtrips (T_all).")
        else:
            lines.append("Not every target was seen (T_all infinite).")
        lines.append(f"First target hit after {_fmt(ens.t_any, 0)} roundtrips (T_any).")
        if ens.mean_measured_energy is not None:
            lines.append(f"Mean measured Ising energy after the transient: {ens.mean_measured_energy:.2f}.")
        if ens.terminated_trajectories:
            lines.append(f"{ens.terminated_trajectories} trajectories were terminated on numerical overflow.")

        lines.append("")
        for stats in report.configs[: self.max_configs]:
            level = self.level_names.get(stats.level, f"level {stats.level}")
            lines.append(
                f"  {stats.config} ({level}, E={stats.energy:g}): T_samp={_fmt(stats.t_samp)}, "
                f"count={stats.count} (+{stats.count_plus}/-{stats.count_minus}), "
                f"sampled in {stats.trajectories_sampled} trajectories"
            )
        hidden = len(report.configs) - self.max_configs
        if hidden > 0:
            lines.append(f"  ... {hidden} more configurations")
        lines.append("")
        lines.append("Recommendations:")
        lines.extend(f"  - {tip}" for tip in self.recommendations(report))
        return "\n".join(lines)

    def explain_scan(self, report: ScanReport) -> str:
        frame = pd.DataFrame([p.model_dump() for p in report.points])
        grid = frame.pivot(index="alpha_fb", columns="pump_r", values="max_t_samp")
        finite = frame["max_t_samp"].notna()
        below = finite & ~frame["above_threshold"]
        lines = [
            f"Parameter scan over {len(report.alpha_values)} alpha x {len(report.pump_r_values)} r values.",
            f"{int(finite.sum())} grid points sample every target; "
            f"{int(below.sum())} of them lie below the linear threshold.",
            "Max T_samp (rows alpha, columns r; empty = never):",
            grid.to_string(na_rep="-", float_format=lambda v: f"{v:.0f}"),
        ]
        return "\n".join(lines)

    def explain_scaling(self, report: ScalingReport) -> str:
        lines = []
        for result in report.results:
            lines.append(f"Preset {result.preset}:")
            skipped = sum(1 for inst in result.instances if inst.skipped)
            if skipped:
                lines.append(f"  {skipped} instances skipped by the oracle.")
            for median in result.medians:
                wall = result.median_wall_clock_s.get(str(median.n))
                lines.append(
                    f"  N={median.n}: median T_all={_fmt(median.median_t_all, 0)}, "
                    f"median T_any={_fmt(median.median_t_any, 0)} over {median.instances_used} instances"
                    + (f" ({wall:.3g} s at the repetition rate)" if wall is not None else "")
                )
            if result.t_all_fit is not None:
                lines.append(f"  T_all grows as {result.t_all_fit.base:.3f}^N")
            if result.t_any_fit is not None:
                lines.append(f"  T_any grows as {result.t_any_fit.base:.3f}^N")
            if result.n_conf_exponent is not None:
                lines.append(f"  Normalized T_all scales as N_conf^{result.n_conf_exponent:.2f}")
        return "\n".join(lines)

    def explain_convergence(self, report: ConvergenceReport) -> str:
        frame = pd.DataFrame(report.rms, columns=[f"T={t}" for t in report.t_decays], index=report.seeds)
        decreasing = sum(1 for row in report.rms if all(b < a for a, b in zip(row, row[1:])))
        lines = [
            f"RMS deviation from the continuous-time reference over {report.horizon:g} decay times "
            f"(amplitude scale {report.amplitude_scale:.2f}):",
            frame.to_string(float_format=lambda v: f"{v:.4f}"),
            f"RMS decreases with finesse for {decreasing} of {len(report.seeds)} seeds.",
        ]
        return "\n".join(lines)

    def explain_finesse(self, report: FinesseReport) -> str:
        frame = pd.DataFrame(report.t_samp, columns=[f"T={t:g}" for t in report.t_decays])
        return "T_samp of the first ground configuration per instance:\n" + frame.to_string(na_rep="never")

    def explain_comparison(self, report: ComparisonReport) -> str:
        lines = ["Best max T_samp per machine model (over its own alpha x r grid):"]
        for variant in report.variants:
            if variant.best_max_t_samp is None:
                lines.append(f"  {variant.name}: never sampled every target")
            else:
                lines.append(
                    f"  {variant.name}: {variant.best_max_t_samp:.0f} roundtrips "
                    f"at alpha={variant.best_alpha_fb:g}, r={variant.best_pump_r:g}"
                )
        return "\n".join(lines)

    def explain_trajectories(self, frame: pd.DataFrame) -> str:
        """Summary of a raw homodyne-record table (trajectory, roundtrip, pulse, w)."""
        signs = frame.assign(up=(frame["w"] > 0).astype(int)).pivot(
            index=["trajectory", "roundtrip"], columns="pulse", values="up")
        changed = signs.groupby(level="trajectory").diff().abs().sum(axis=1) > 0
        per_traj = frame.groupby("trajectory")["roundtrip"].max()
        lines = [
            f"{len(per_traj)} trajectories x {int(per_traj.max())} roundtrips, "
            f"{frame['pulse'].nunique()} pulses.",
            f"Mean |w| = {frame['w'].abs().mean():.3f}.",
            f"The sign vector changed in {changed.mean():.1%} of roundtrips.",
        ]
        return "\n".join(lines)

    def explain(self, data: Dict[str, Any]) -> str:
        """Detect the report type of a raw dictionary and summarize it."""
        if "variants" in data:
            return self.explain_comparison(ComparisonReport.model_validate(data))
        if "configs" in data and "ensemble" in data:
            return self.explain_sampling(SamplingReport.model_validate(data))
        if "points" in data:
            return self.explain_scan(ScanReport.model_validate(data))
        if "results" in data:
            return self.explain_scaling(ScalingReport.model_validate(data))
        if "rms" in data:
            return self.explain_convergence(ConvergenceReport.model_validate(data))
        if "t_samp" in data and "t_decays" in data:
            return self.explain_finesse(FinesseReport.model_validate(data))
        raise ValueError(f"Unrecognized report with keys {sorted(data)}")

    def recommendations(self, report: SamplingReport) -> List[str]:
        """Suggested parameter changes for a sampling run."""
        ens = report.ensemble
        tips = []
        if not ens.above_threshold:
            tips.append("Increase alpha_fb or pump_r to bring the machine above the linear threshold.")
        if ens.t_all is None:
            tips.append("Run more trajectories or longer trajectories; some targets were never sampled.")
        if ens.terminated_trajectories:
            tips.append("Reduce the feedback gain; linear dynamics overflowed in some trajectories.")
        if not tips:
            tips.append("All targets were sampled; no change needed.")
        return tips
