"""CSV and JSON export mixin."""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..models import ConditionResult, ConvergenceReport, PathSample, grid_column_names

LOGGER = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "n",
    "sup_mean_delta",
    "trace_cov_delta",
    "posterior_trace",
    "char_delta_max",
    "sup_mean_err_vs_truth",
]


def format_real(value: Optional[float]) -> str:
    """17 significant digits, enough to re-parse to the identical double; blank for None."""
    if value is None:
        return ""
    return format(float(value), ".17g")


def format_point(point: Sequence[float]) -> str:
    return " ".join(format_real(c) for c in point)


class ExportMixin:
    """Mixin writing workflow results as CSV files or JSON-ready dicts."""

    def write_report_csv(self, report: ConvergenceReport, path: Path) -> Path:
        rows = [
            [
                str(level.n),
                format_real(level.sup_mean_delta),
                format_real(level.trace_cov_delta),
                format_real(level.posterior_trace),
                format_real(level.char_delta_max),
                format_real(level.sup_mean_err_vs_truth),
            ]
            for level in report.levels
        ]
        return self._write_csv(path, REPORT_COLUMNS, rows)

    def write_condition_csv(self, result: ConditionResult, path: Path) -> Path:
        header = grid_column_names(result.grid.shape[1]) + ["posterior_mean", "posterior_var"]
        rows = [
            [format_real(c) for c in point] + [format_real(m), format_real(v)]
            for point, m, v in zip(result.grid, result.mean, result.variance)
        ]
        return self._write_csv(path, header, rows)

    def write_paths_csv(self, sample: PathSample, path: Path) -> Path:
        """Header of grid coordinates, then one row per sampled path."""
        header = [format_point(point) for point in sample.grid]
        rows = [[format_real(v) for v in values] for values in sample.values]
        return self._write_csv(path, header, rows)

    def _write_csv(self, path: Path, header: List[str], rows: List[List[str]]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        LOGGER.info("wrote %d rows to %s", len(rows), path)
        return path

    # =========================================================================
    # JSON-ready dicts
    # =========================================================================

    def report_to_dict(self, report: ConvergenceReport) -> Dict[str, Any]:
        result = {
            "converged": report.converged,
            "diverging": report.diverging,
            "mean_tol": report.tolerances.mean_tol,
            "cov_tol": report.tolerances.cov_tol,
            "levels": [
                {
                    "n": level.n,
                    "posterior_trace": level.posterior_trace,
                    "sup_mean_delta": level.sup_mean_delta,
                    "trace_cov_delta": level.trace_cov_delta,
                    "op_cov_delta": level.op_cov_delta,
                    "char_delta_max": level.char_delta_max,
                    "sup_mean_err_vs_truth": level.sup_mean_err_vs_truth,
                    "sup_err_on_region": level.sup_err_on_region,
                }
                for level in report.levels
            ],
        }
        if report.truth_path is not None:
            result["truth_path"] = self.paths_to_dict(report.truth_path)
        return result

    def condition_to_dict(self, result: ConditionResult) -> Dict[str, Any]:
        data = {
            "grid": _grid_list(result.grid),
            "mean": result.mean.tolist(),
            "variance": result.variance.tolist(),
        }
        if result.interpolation is not None:
            data["interpolation"] = {
                "max_mean_error": result.interpolation.max_mean_error,
                "max_variance": result.interpolation.max_variance,
                "passed": result.interpolation.passed,
            }
        return data

    def paths_to_dict(self, sample: PathSample) -> Dict[str, Any]:
        return {
            "seed": sample.seed,
            "grid": _grid_list(sample.grid),
            "paths": sample.values.tolist(),
        }


def _grid_list(grid: np.ndarray) -> List[Any]:
    if grid.shape[1] == 1:
        return grid[:, 0].tolist()
    return grid.tolist()
