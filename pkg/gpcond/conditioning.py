"""
Conditioning a Gaussian process prior on finitely many linear observations.

With K = K_{S,S} the covariance of the observed functionals and K_{t,S} their
covariances with the point evaluation at t, the posterior is

    m_post(t)      = m(t) + K_{t,S} K^+ (y - m(S))
    k_post(t1, t2) = k(t1, t2) - K_{t1,S} K^+ K_{S,t2}

where K^+ is the Moore-Penrose pseudoinverse in the noise-free case and
(K + sigma^2 I)^{-1} when the observations carry Gaussian noise of variance sigma^2.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import InvalidArgumentError, InvalidUsageError
from .kernels import (
    GpPrior,
    ObservationFunctional,
    cross_cov_matrix,
    mean_apply,
    mirror_upper,
    point_functionals,
    validate_functionals,
)
from .linalg import DEFAULT_PINV_TOL, PsdFactor, cholesky_factor, pinv_psd, psd_truncate
from .models import Eigensolver, InterpolationReport

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """
    Observed values of an ordered list of functionals.

    Args:
        functionals: the functionals a_1..a_n
        values: observed y_1..y_n
        noise_variance: sigma^2 >= 0 of i.i.d. Gaussian observation noise
    """

    functionals: Tuple[ObservationFunctional, ...] = ()
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    noise_variance: float = 0.0

    def __post_init__(self):
        functionals = tuple(self.functionals)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(functionals) != values.shape[0]:
            raise InvalidArgumentError(
                f"{len(functionals)} functionals but {values.shape[0]} observed values"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("observed values must be finite")
        if not (math.isfinite(self.noise_variance) and self.noise_variance >= 0):
            raise InvalidArgumentError(
                f"noise variance must be >= 0, got {self.noise_variance}"
            )
        object.__setattr__(self, "functionals", functionals)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @classmethod
    def point_evaluations(
        cls, points, values, noise_variance: float = 0.0
    ) -> "ObservationSet":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        return cls(tuple(point_functionals(pts)), values, noise_variance)

    def __len__(self) -> int:
        return len(self.functionals)

    @property
    def all_point_evals(self) -> bool:
        return all(f.is_point_eval for f in self.functionals)

    def point_locations(self) -> np.ndarray:
        return np.concatenate([f.points for f in self.functionals], axis=0)


@dataclass(frozen=True, eq=False)
class PosteriorGp:
    """
    A prior conditioned on an observation set.

    `factor` is None for an empty observation set, in which case the posterior is the
    prior itself. `pinv_tol` and `eigensolver` are the settings it was conditioned with.
    """

    prior: GpPrior
    obs: ObservationSet
    factor: Optional[PsdFactor]
    alpha: np.ndarray
    gram_obs: np.ndarray
    pinv_tol: float = DEFAULT_PINV_TOL
    eigensolver: Eigensolver = Eigensolver.JACOBI

    @property
    def domain(self):
        return self.prior.domain

    def _cross(self, points: np.ndarray) -> np.ndarray:
        return cross_cov_matrix(
            self.prior.kernel, point_functionals(points), self.obs.functionals
        )

    def _whitened(self, points: np.ndarray) -> np.ndarray:
        return self.factor.whiten(self._cross(points).T)

    def whitened(self, points) -> np.ndarray:
        """W with gram(points) = prior Gram - W^T W; zero rows for the prior itself."""
        pts = self.domain.as_points(points)
        if self.factor is None:
            return np.zeros((0, pts.shape[0]))
        return self._whitened(pts)

    def round_off_floor(self, points) -> float:
        """pinv_tol times the largest prior variance at `points`."""
        pts = self.domain.as_points(points)
        if pts.shape[0] == 0:
            return 0.0
        return self.pinv_tol * float(np.max(self.prior.variance(pts)))

    def mean(self, points) -> np.ndarray:
        pts = self.domain.as_points(points)
        prior_mean = self.prior.mean_function(pts)
        if self.factor is None or pts.shape[0] == 0:
            return prior_mean
        return prior_mean + self._cross(pts) @ self.alpha

    def cov(self, points1, points2) -> np.ndarray:
        x1 = self.domain.as_points(points1)
        x2 = self.domain.as_points(points2)
        prior_cov = self.prior.kernel.matrix(x1, x2)
        if self.factor is None or x1.shape[0] == 0 or x2.shape[0] == 0:
            return prior_cov
        return prior_cov - self._whitened(x1).T @ self._whitened(x2)

    def gram(self, points) -> np.ndarray:
        pts = self.domain.as_points(points)
        if pts.shape[0] == 0:
            return np.zeros((0, 0))
        prior_cov = self.prior.kernel.matrix(pts, pts)
        if self.factor is None:
            return mirror_upper(prior_cov)
        w = self._whitened(pts)
        return mirror_upper(prior_cov - w.T @ w)

    def variance(self, points) -> np.ndarray:
        pts = self.domain.as_points(points)
        prior_var = self.prior.variance(pts)
        if self.factor is None or pts.shape[0] == 0:
            return prior_var
        w = self._whitened(pts)
        return prior_var - np.sum(w * w, axis=0)


def condition(
    prior: GpPrior,
    obs: ObservationSet,
    pinv_tol: float = DEFAULT_PINV_TOL,
    eigensolver: Union[str, Eigensolver] = Eigensolver.JACOBI,
) -> PosteriorGp:
    """
    Condition `prior` on `obs`.

    Noise-free observations use the spectral pseudoinverse of K_{S,S}; noisy ones the
    Cholesky factor of K_{S,S} + sigma^2 I.
    """
    n = len(obs)
    if n == 0:
        return PosteriorGp(
            prior, obs, None, np.zeros(0), np.zeros((0, 0)), pinv_tol, Eigensolver(eigensolver)
        )

    validate_functionals(prior.domain, obs.functionals)
    kernel = prior.kernel
    gram_obs = mirror_upper(cross_cov_matrix(kernel, obs.functionals, obs.functionals))
    residual = obs.values - np.array(
        [mean_apply(prior.mean_function, f) for f in obs.functionals]
    )

    if obs.noise_variance == 0.0:
        factor = pinv_psd(gram_obs, pinv_tol, eigensolver)
        LOGGER.debug(
            "condition: %d noise-free observations, pinv rank %d", n, factor.rank
        )
    else:
        factor = cholesky_factor(gram_obs, obs.noise_variance)
        LOGGER.debug(
            "condition: %d observations with noise variance %.3g", n, obs.noise_variance
        )
    alpha = factor.apply(residual)
    return PosteriorGp(
        prior, obs, factor, alpha, gram_obs, pinv_tol, Eigensolver(eigensolver)
    )


def posterior_mean(post: PosteriorGp, t) -> float:
    return float(post.mean(post.domain.as_point(t)[None, :])[0])


def posterior_cov(post: PosteriorGp, t1, t2) -> float:
    p1 = post.domain.as_point(t1)[None, :]
    p2 = post.domain.as_point(t2)[None, :]
    return float(post.cov(p1, p2)[0, 0])


def posterior_variance(post: PosteriorGp, t) -> float:
    return float(post.variance(post.domain.as_point(t)[None, :])[0])


def posterior_gram(post: PosteriorGp, grid: Sequence) -> np.ndarray:
    """
    Posterior covariance matrix over a grid, exactly symmetric.

    Eigenvalues within round_off_floor(grid) of zero are set to zero, which removes the
    +-1e-13 noise a noise-free posterior leaves at observed points.
    """
    gram = post.gram(grid)
    if post.factor is None or gram.size == 0:
        return gram
    return psd_truncate(gram, post.round_off_floor(grid), post.eigensolver)


def interpolation_check(post: PosteriorGp, tol: float) -> InterpolationReport:
    """
    Check that a noise-free point-evaluation posterior interpolates its data.

    Reports the largest |m_post(s_j) - y_j| and the largest |k_post(s_j, s_j)|.
    """
    obs = post.obs
    if obs.noise_variance > 0:
        raise InvalidUsageError(
            "interpolation_check: needs noise-free observations (noise_variance = 0)"
        )
    if not obs.all_point_evals:
        raise InvalidUsageError(
            "interpolation_check: needs point-evaluation functionals only"
        )
    if len(obs) == 0:
        return InterpolationReport(0.0, 0.0, True)

    sites = obs.point_locations()
    mean_err = float(np.max(np.abs(post.mean(sites) - obs.values)))
    max_var = float(np.max(np.abs(post.variance(sites))))
    passed = mean_err <= tol and max_var <= tol
    if not passed:
        LOGGER.warning(
            "interpolation_check: mean error %.3e, variance %.3e exceed tol %.1e",
            mean_err,
            max_var,
            tol,
        )
    return InterpolationReport(mean_err, max_var, passed)
