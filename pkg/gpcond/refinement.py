"""
Nested refinement: condition on growing designs S_1 ⊂ S_2 ⊂ ... of an observation
region and track how the posteriors settle.

Per level the driver records the sup-norm change of the posterior mean on a test grid,
the trace-norm (and operator-norm) change of the posterior covariance on that grid, and
the change of the characteristic functional at a few fixed probes. Convergence is only
reported numerically; nothing here certifies the almost-sure limit.
"""

import cmath
import logging
from abc import ABC, abstractmethod
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .conditioning import ObservationSet, PosteriorGp, condition
from .domain import nested_design, snap_to_grid
from .exceptions import InvalidArgumentError
from .kernels import GpPrior
from .linalg import DEFAULT_PINV_TOL, gram_difference_eigenvalues
from .models import (
    CharProbe,
    ConvergenceReport,
    ConvergenceTolerances,
    Domain,
    Eigensolver,
    LevelRecord,
    RefinementSchedule,
    as_points,
)
from .sampling import sample_paths

LOGGER = logging.getLogger(__name__)

DIVERGENCE_WINDOW = 3


# =============================================================================
# Observed paths
# =============================================================================


class PathObservable(ABC):
    """A function g on the observation region, evaluated at design points."""

    @abstractmethod
    def __call__(self, points: np.ndarray) -> np.ndarray:
        ...


class SampledPath(PathObservable):
    """
    A path tabulated on a grid.

    In 1-D values between tabulation points are linearly interpolated; in higher
    dimensions only tabulation points can be evaluated.
    """

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        if grid.ndim == 1:
            grid = grid.reshape(-1, 1)
        values = np.asarray(values, dtype=float).reshape(-1)
        if grid.shape[0] != values.shape[0] or grid.shape[0] == 0:
            raise InvalidArgumentError("sampled path needs matching, non-empty grid and values")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("sampled path values must be finite")
        if grid.shape[1] == 1:
            order = np.argsort(grid[:, 0], kind="stable")
            grid, values = grid[order], values[order]
        self.grid = grid
        self.values = values

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = as_points(points, self.grid.shape[1])
        if self.grid.shape[1] == 1:
            return np.interp(pts[:, 0], self.grid[:, 0], self.values)
        out = np.empty(pts.shape[0])
        for i, p in enumerate(pts):
            hits = np.flatnonzero(np.all(self.grid == p, axis=1))
            if hits.size == 0:
                raise InvalidArgumentError(f"point {tuple(p)} is not a tabulation point")
            out[i] = self.values[hits[0]]
        return out


class AnalyticFunction(PathObservable):
    """A closed-form g taking an (n, d) array and returning n values."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray]):
        self.fn = fn

    def __call__(self, points: np.ndarray) -> np.ndarray:
        values = np.asarray(self.fn(np.asarray(points, dtype=float)), dtype=float).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("observed function returned non-finite values")
        return values


# =============================================================================
# Characteristic functionals
# =============================================================================


def char_functional(post: PosteriorGp, probe: CharProbe) -> complex:
    """
    Characteristic functional of the Gaussian posterior at x' = sum_j w_j delta_{t_j}:
    exp(i <w, mu> - w^T C w / 2).
    """
    pts = post.domain.as_points(probe.points)
    mu = post.mean(pts)
    cov = post.gram(pts)
    w = probe.weights
    quad = max(0.0, float(w @ cov @ w))
    return cmath.exp(complex(-0.5 * quad, float(w @ mu)))


def default_probes(domain: Domain) -> List[CharProbe]:
    """
    The fixed probe family: the domain center; alternating +-1 on five equispaced
    points along the box diagonal; all-ones on the quarter points of the diagonal.
    """
    lower, upper = domain.lower, domain.upper

    def along(fractions):
        return np.array([lower + f * (upper - lower) for f in fractions])

    return [
        CharProbe(np.array([domain.center]), np.ones(1)),
        CharProbe(along(np.linspace(0.0, 1.0, 5)), np.array([1.0, -1.0, 1.0, -1.0, 1.0])),
        CharProbe(along([0.25, 0.5, 0.75]), np.ones(3)),
    ]


# =============================================================================
# Drivers
# =============================================================================


def refine_and_monitor(
    prior: GpPrior,
    region: Domain,
    g: PathObservable,
    schedule: Union[RefinementSchedule, Sequence[int]],
    test_grid,
    noise_variance: float = 0.0,
    tolerances: ConvergenceTolerances = ConvergenceTolerances(),
    probes: Optional[Sequence[CharProbe]] = None,
    pinv_tol: float = DEFAULT_PINV_TOL,
    eigensolver: Union[str, Eigensolver] = Eigensolver.JACOBI,
    truth: Optional[np.ndarray] = None,
    snap_grid: Optional[np.ndarray] = None,
) -> ConvergenceReport:
    """
    Condition on nested designs of `region` and record level-to-level changes.

    Args:
        prior: the prior process on its domain T
        region: observation region S, a sub-box of T
        g: the observed function on S
        schedule: strictly increasing design sizes
        test_grid: points of T on which means and covariances are compared
        noise_variance: observation noise sigma^2
        tolerances: final-level thresholds for `converged`
        probes: characteristic-functional probes (default_probes(T) if None)
        truth: optional reference values on test_grid for sup_mean_err_vs_truth
        snap_grid: if given, design points are snapped onto those of its points that
            lie in `region`
    """
    if not isinstance(schedule, RefinementSchedule):
        schedule = RefinementSchedule(tuple(schedule))
    if not prior.domain.contains_domain(region):
        raise InvalidArgumentError("observation region must lie within the prior's domain")
    grid = prior.domain.as_points(test_grid)
    if grid.shape[0] == 0:
        raise InvalidArgumentError("refine_and_monitor needs a non-empty test grid")
    if truth is not None:
        truth = np.asarray(truth, dtype=float).reshape(-1)
        if truth.shape[0] != grid.shape[0]:
            raise InvalidArgumentError("truth values must match the test grid")
    if probes is None:
        probes = default_probes(prior.domain)

    if snap_grid is not None:
        snap_grid = prior.domain.as_points(snap_grid)
        snap_grid = snap_grid[region.contains(snap_grid)]
        if snap_grid.shape[0] == 0:
            raise InvalidArgumentError("no snap grid point lies in the observation region")

    in_region = region.contains(grid)
    g_on_region = g(grid[in_region]) if np.any(in_region) else None
    prior_trace = float(np.sum(prior.variance(grid)))

    levels: List[LevelRecord] = []
    prev_mean = prev_w = None
    prev_chars: List[complex] = []

    for n in schedule:
        design = nested_design(region, n).points
        if snap_grid is not None:
            design = snap_to_grid(design, snap_grid)
        obs = ObservationSet.point_evaluations(design, g(design), noise_variance)
        post = condition(prior, obs, pinv_tol, eigensolver)

        # posterior Gram on the grid is prior Gram - W^T W
        mean = post.mean(grid)
        w = post.whitened(grid)
        chars = [char_functional(post, probe) for probe in probes]
        record = LevelRecord(
            n=n, posterior_trace=prior_trace - float(np.sum(w * w)), char_values=chars
        )

        if prev_mean is not None:
            record.sup_mean_delta = float(np.max(np.abs(mean - prev_mean)))
            lam = gram_difference_eigenvalues(w, prev_w, eigensolver)
            record.trace_cov_delta = float(np.sum(np.abs(lam)))
            record.op_cov_delta = float(np.max(np.abs(lam)))
            record.char_deltas = [abs(c - p) for c, p in zip(chars, prev_chars)]
        if truth is not None:
            record.sup_mean_err_vs_truth = float(np.max(np.abs(mean - truth)))
        if g_on_region is not None:
            record.sup_err_on_region = float(np.max(np.abs(mean[in_region] - g_on_region)))

        LOGGER.debug(
            "level n=%d: trace %.3e, sup mean delta %s, trace cov delta %s",
            n,
            record.posterior_trace,
            record.sup_mean_delta,
            record.trace_cov_delta,
        )
        levels.append(record)
        prev_mean, prev_w, prev_chars = mean, w, chars

    report = ConvergenceReport(levels=levels, tolerances=tolerances)
    final = report.final
    report.converged = (
        final.has_deltas
        and final.sup_mean_delta <= tolerances.mean_tol
        and final.trace_cov_delta <= tolerances.cov_tol
    )
    report.diverging = _is_diverging(report.delta_records)
    if report.diverging:
        LOGGER.warning(
            "refinement deltas grew over the last %d levels", DIVERGENCE_WINDOW
        )
    return report


def _is_diverging(records: Sequence[LevelRecord]) -> bool:
    if len(records) < DIVERGENCE_WINDOW:
        return False
    tail = records[-DIVERGENCE_WINDOW:]
    for attr in ("sup_mean_delta", "trace_cov_delta"):
        values = [getattr(r, attr) for r in tail]
        if all(b > a for a, b in zip(values, values[1:])):
            return True
    return False


def contraction_experiment(
    prior: GpPrior,
    seed: int,
    schedule: Union[RefinementSchedule, Sequence[int]],
    fine_grid,
    tolerances: ConvergenceTolerances = ConvergenceTolerances(),
    probes: Optional[Sequence[CharProbe]] = None,
    pinv_tol: float = DEFAULT_PINV_TOL,
    eigensolver: Union[str, Eigensolver] = Eigensolver.JACOBI,
) -> ConvergenceReport:
    """
    Observe one sampled prior path on the whole domain (S = T) through nested designs
    snapped onto `fine_grid`, recording the sup error of the posterior mean against it.
    """
    grid = prior.domain.as_points(fine_grid)
    truth = sample_paths(prior, grid, 1, seed, eigensolver, pinv_tol)
    path = SampledPath(grid, truth.values[0])
    LOGGER.info("contraction experiment: seed %d, %d-point fine grid", seed, grid.shape[0])
    report = refine_and_monitor(
        prior,
        prior.domain,
        path,
        schedule,
        grid,
        noise_variance=0.0,
        tolerances=tolerances,
        probes=probes,
        pinv_tol=pinv_tol,
        eigensolver=eigensolver,
        truth=truth.values[0],
        snap_grid=grid,
    )
    report.truth_path = truth
    return report
