"""Conditioning workflow mixin."""

import logging

import numpy as np

from ..conditioning import ObservationSet, interpolation_check
from ..kernels import GpPrior
from ..models import ConditionResult

LOGGER = logging.getLogger(__name__)

INTERPOLATION_TOL = 1e-6


class ConditionMixin:
    """
    Mixin providing the condition workflow.

    Requires on self:
        - _condition(prior, obs) -> PosteriorGp
    """

    def condition_workflow(
        self,
        prior: GpPrior,
        obs: ObservationSet,
        grid: np.ndarray,
    ) -> ConditionResult:
        """
        Condition `prior` on `obs` and tabulate the posterior mean and variance on `grid`.

        Noise-free point observations are also checked for interpolation.
        """
        post = self._condition(prior, obs)
        pts = prior.domain.as_points(grid)
        interpolation = None
        if obs.noise_variance == 0.0 and obs.all_point_evals:
            interpolation = interpolation_check(post, INTERPOLATION_TOL)
        LOGGER.info("conditioned on %d observations", len(obs))
        return ConditionResult(
            grid=pts,
            mean=post.mean(pts),
            variance=post.variance(pts),
            interpolation=interpolation,
        )
