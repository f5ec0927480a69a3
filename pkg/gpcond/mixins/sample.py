"""Path sampling workflow mixin."""

import numpy as np

from ..models import PathSample
from ..sampling import sample_paths


class SamplingMixin:
    """
    Mixin providing prior and posterior path sampling.

    Requires on self:
        - pinv_tol: float
        - eigensolver: Eigensolver
        - seed: int
    """

    def sample_workflow(self, process, grid: np.ndarray, count: int = 1) -> PathSample:
        """Draw `count` paths of a GpPrior or PosteriorGp on `grid` using self.seed."""
        return sample_paths(process, grid, count, self.seed, self.eigensolver, self.pinv_tol)
