"""Experiment runner composed from workflow mixins."""

import logging
from pathlib import Path
from typing import Union

import numpy as np

from .conditioning import ObservationSet, PosteriorGp, condition
from .config import ExperimentConfig
from .domain import uniform_grid
from .exceptions import InvalidArgumentError
from .kernels import GpPrior
from .linalg import DEFAULT_PINV_TOL
from .mixins import ConditionMixin, ExportMixin, RefinementMixin, SamplingMixin
from .models import Command, Domain, Eigensolver, RefinementSchedule
from .refinement import AnalyticFunction, PathObservable, SampledPath

LOGGER = logging.getLogger(__name__)

REPORT_FILE = "report.csv"
PATHS_FILE = "paths.csv"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class ExperimentRunner(
    ConditionMixin,
    RefinementMixin,
    SamplingMixin,
    ExportMixin,
):
    """
    Runs condition/refine/contract/sample experiments.

    Args:
        pinv_tol: relative eigenvalue cutoff of the noise-free pseudoinverse
        eigensolver: "jacobi" (default) or "lapack"
        seed: seed for every random draw the workflows make
    """

    def __init__(
        self,
        pinv_tol: float = DEFAULT_PINV_TOL,
        eigensolver: Union[str, Eigensolver] = Eigensolver.JACOBI,
        seed: int = 0,
    ):
        if pinv_tol <= 0:
            raise InvalidArgumentError(f"pinv_tol must be > 0, got {pinv_tol}")
        if seed < 0:
            raise InvalidArgumentError(f"seed must be >= 0, got {seed}")
        self.pinv_tol = pinv_tol
        self.eigensolver = Eigensolver(eigensolver)
        self.seed = seed

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "ExperimentRunner":
        return cls(pinv_tol=config.pinv_tol, eigensolver=config.eigensolver, seed=config.seed)

    def _condition(self, prior: GpPrior, obs: ObservationSet) -> PosteriorGp:
        return condition(prior, obs, self.pinv_tol, self.eigensolver)

    def observed_path(self, name: str, prior: GpPrior, grid: np.ndarray) -> PathObservable:
        """The function g a refine run observes."""
        if name == "prior_sample":
            sample = self.sample_workflow(prior, grid, 1)
            return SampledPath(sample.grid, sample.values[0])
        if name == "prior_mean":
            return AnalyticFunction(prior.mean_function)
        if name == "sine":
            return AnalyticFunction(lambda x: np.sin(2.0 * np.pi * np.sum(x, axis=1)))
        raise InvalidArgumentError(f"unknown observed path '{name}'")

    def execute(self, config: ExperimentConfig) -> int:
        """
        Run the workflow named by `config.command` and write its CSV files under
        `config.output_path`.

        Returns 0, or 2 when a refine/contract run ends outside its tolerances (the report
        is written either way). Errors propagate.
        """
        prior = config.build_prior()
        grid = uniform_grid(prior.domain, config.grid_size)
        out_dir = Path(config.output_path)
        LOGGER.info(
            "%s: %s kernel on %d-D domain, %d test points",
            config.command.value,
            config.kernel.value,
            prior.domain.dimension,
            grid.shape[0],
        )

        if config.command == Command.CONDITION:
            result = self.condition_workflow(prior, config.build_observations(), grid)
            self.write_condition_csv(result, out_dir / REPORT_FILE)
            return EXIT_OK

        if config.command == Command.SAMPLE:
            process = prior
            if config.has_observations:
                process = self._condition(prior, config.build_observations())
            sample = self.sample_workflow(process, grid, config.sample_count)
            self.write_paths_csv(sample, out_dir / PATHS_FILE)
            return EXIT_OK

        schedule = RefinementSchedule(config.schedule)
        tolerances = config.build_tolerances()
        if config.command == Command.REFINE:
            region = config.build_region()
            report = self.refine_workflow(
                prior,
                region,
                self.observed_path(config.observed_path, prior, grid),
                schedule,
                grid,
                noise_variance=config.noise_variance,
                tolerances=tolerances,
                snap_grid=self._refine_snap_grid(config, prior.domain, grid),
            )
        else:
            report = self.contract_workflow(prior, schedule, grid, tolerances)
            self.write_paths_csv(report.truth_path, out_dir / PATHS_FILE)

        self.write_report_csv(report, out_dir / REPORT_FILE)
        return EXIT_OK if report.converged else EXIT_NOT_CONVERGED

    @staticmethod
    def _refine_snap_grid(config: ExperimentConfig, domain: Domain, grid: np.ndarray):
        # a tabulated path in d > 1 can only be read at its grid points
        if config.observed_path == "prior_sample" and domain.dimension > 1:
            return grid
        return None
