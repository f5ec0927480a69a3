"""Refinement and contraction workflow mixin."""

import logging

import numpy as np

from ..kernels import GpPrior
from ..models import ConvergenceReport, ConvergenceTolerances, Domain, RefinementSchedule
from ..refinement import PathObservable, contraction_experiment, refine_and_monitor

LOGGER = logging.getLogger(__name__)


class RefinementMixin:
    """
    Mixin providing nested refinement runs.

    Requires on self:
        - pinv_tol: float
        - eigensolver: Eigensolver
        - seed: int
    """

    def refine_workflow(
        self,
        prior: GpPrior,
        region: Domain,
        g: PathObservable,
        schedule: RefinementSchedule,
        grid: np.ndarray,
        noise_variance: float = 0.0,
        tolerances: ConvergenceTolerances = ConvergenceTolerances(),
        snap_grid: np.ndarray = None,
    ) -> ConvergenceReport:
        report = refine_and_monitor(
            prior,
            region,
            g,
            schedule,
            grid,
            noise_variance=noise_variance,
            tolerances=tolerances,
            pinv_tol=self.pinv_tol,
            eigensolver=self.eigensolver,
            snap_grid=snap_grid,
        )
        self._log_outcome("refine", report)
        return report

    def contract_workflow(
        self,
        prior: GpPrior,
        schedule: RefinementSchedule,
        grid: np.ndarray,
        tolerances: ConvergenceTolerances = ConvergenceTolerances(),
    ) -> ConvergenceReport:
        """Observe a prior sample drawn with self.seed on the whole domain."""
        report = contraction_experiment(
            prior,
            self.seed,
            schedule,
            grid,
            tolerances=tolerances,
            pinv_tol=self.pinv_tol,
            eigensolver=self.eigensolver,
        )
        self._log_outcome("contract", report)
        return report

    def _log_outcome(self, label: str, report: ConvergenceReport) -> None:
        final = report.final
        if report.converged:
            LOGGER.info("%s: converged at n=%d", label, final.n)
        else:
            LOGGER.warning(
                "%s: tolerances (mean %.1e, cov %.1e) not met at n=%d",
                label,
                report.tolerances.mean_tol,
                report.tolerances.cov_tol,
                final.n,
            )
