"""
Prior specification: covariance functions, mean functions and observation functionals.

Every functional is stored as a list of terms (weight, point, derivative order), so
cross-covariances between any two functionals are the bilinear extension of the kernel
and its analytic partial derivatives:

    cov(delta_s, delta_t) = k(s, t)
    cov(d_s, delta_t)     = d1 k(s, t)
    cov(d_s, d_t)         = d1 d2 k(s, t)
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InvalidArgumentError, UnsupportedFunctionalError
from .models import Domain, FunctionalKind, KernelFamily, MeanKind, as_points

SQRT3 = math.sqrt(3.0)
SQRT5 = math.sqrt(5.0)

_DIFFERENTIABLE = {
    KernelFamily.RBF,
    KernelFamily.MATERN32,
    KernelFamily.MATERN52,
    KernelFamily.LINEAR,
}


# =============================================================================
# Kernels
# =============================================================================


@dataclass(frozen=True)
class Kernel:
    """
    A covariance function k.

    Args:
        family: kernel family
        lengthscale: l > 0 (stationary families only)
        variance: sigma^2 > 0 (ignored by Brownian)
    """

    family: KernelFamily
    lengthscale: float = 1.0
    variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not (math.isfinite(self.lengthscale) and self.lengthscale > 0):
            raise InvalidArgumentError(f"lengthscale must be > 0, got {self.lengthscale}")
        if not (math.isfinite(self.variance) and self.variance > 0):
            raise InvalidArgumentError(f"variance must be > 0, got {self.variance}")

    @classmethod
    def brownian(cls) -> "Kernel":
        return cls(KernelFamily.BROWNIAN)

    @classmethod
    def rbf(cls, lengthscale: float = 1.0, variance: float = 1.0) -> "Kernel":
        return cls(KernelFamily.RBF, lengthscale, variance)

    @classmethod
    def matern12(cls, lengthscale: float = 1.0, variance: float = 1.0) -> "Kernel":
        return cls(KernelFamily.MATERN12, lengthscale, variance)

    @classmethod
    def matern32(cls, lengthscale: float = 1.0, variance: float = 1.0) -> "Kernel":
        return cls(KernelFamily.MATERN32, lengthscale, variance)

    @classmethod
    def matern52(cls, lengthscale: float = 1.0, variance: float = 1.0) -> "Kernel":
        return cls(KernelFamily.MATERN52, lengthscale, variance)

    @classmethod
    def linear(cls, variance: float = 1.0) -> "Kernel":
        return cls(KernelFamily.LINEAR, variance=variance)

    @property
    def differentiable(self) -> bool:
        return self.family in _DIFFERENTIABLE

    def matrix(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """Kernel values k(x1[i], x2[j]) for (n1, d) and (n2, d) point arrays."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if self.family == KernelFamily.BROWNIAN:
            return np.prod(np.minimum(x1[:, None, :], x2[None, :, :]), axis=-1)
        if self.family == KernelFamily.LINEAR:
            return self.variance * np.sum(x1[:, None, :] * x2[None, :, :], axis=-1)

        diff = x1[:, None, :] - x2[None, :, :]
        r2 = np.sum(diff * diff, axis=-1)
        ell = self.lengthscale
        if self.family == KernelFamily.RBF:
            return self.variance * np.exp(-r2 / (2.0 * ell * ell))
        r = np.sqrt(r2)
        if self.family == KernelFamily.MATERN12:
            return self.variance * np.exp(-r / ell)
        if self.family == KernelFamily.MATERN32:
            a = SQRT3 * r / ell
            return self.variance * (1.0 + a) * np.exp(-a)
        a = SQRT5 * r / ell
        return self.variance * (1.0 + a + a * a / 3.0) * np.exp(-a)

    def block(
        self, x1: np.ndarray, x2: np.ndarray, order1: int = 0, order2: int = 0
    ) -> np.ndarray:
        """
        Partial derivatives of k of the given orders in each argument.

        Derivatives are only defined on 1-D domains for differentiable families.
        """
        if order1 == 0 and order2 == 0:
            return self.matrix(x1, x2)
        if not self.differentiable:
            raise UnsupportedFunctionalError(
                f"derivative functionals need a differentiable kernel, "
                f"'{self.family.value}' is not"
            )
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if x1.shape[1] != 1 or x2.shape[1] != 1:
            raise UnsupportedFunctionalError(
                "derivative functionals are only supported on 1-D domains"
            )
        s = x1[:, 0][:, None]
        t = x2[:, 0][None, :]

        if self.family == KernelFamily.LINEAR:
            if order1 == 1 and order2 == 1:
                return np.full((s.shape[0], t.shape[1]), self.variance)
            if order1 == 1:
                return self.variance * np.broadcast_to(t, (s.shape[0], t.shape[1])).copy()
            return self.variance * np.broadcast_to(s, (s.shape[0], t.shape[1])).copy()

        r = s - t
        if order1 == 1 and order2 == 1:
            return -self._d2k_dr2(r)
        if order1 == 1:
            return self._dk_dr(r)
        return -self._dk_dr(r)

    def _dk_dr(self, r: np.ndarray) -> np.ndarray:
        ell2 = self.lengthscale * self.lengthscale
        v = self.variance
        if self.family == KernelFamily.RBF:
            return -(v / ell2) * r * np.exp(-(r * r) / (2.0 * ell2))
        if self.family == KernelFamily.MATERN32:
            a = SQRT3 * np.abs(r) / self.lengthscale
            return -(3.0 * v / ell2) * r * np.exp(-a)
        a = SQRT5 * np.abs(r) / self.lengthscale
        return -(5.0 * v / (3.0 * ell2)) * r * (1.0 + a) * np.exp(-a)

    def _d2k_dr2(self, r: np.ndarray) -> np.ndarray:
        ell2 = self.lengthscale * self.lengthscale
        v = self.variance
        if self.family == KernelFamily.RBF:
            return -(v / ell2) * (1.0 - r * r / ell2) * np.exp(-(r * r) / (2.0 * ell2))
        if self.family == KernelFamily.MATERN32:
            a = SQRT3 * np.abs(r) / self.lengthscale
            return -(3.0 * v / ell2) * (1.0 - a) * np.exp(-a)
        a = SQRT5 * np.abs(r) / self.lengthscale
        return -(5.0 * v / (3.0 * ell2)) * (1.0 + a - a * a) * np.exp(-a)


# =============================================================================
# Mean functions
# =============================================================================


@dataclass(frozen=True, eq=False)
class MeanFunction:
    """
    A mean function m.

    Callable means take an (n, d) point array and return n values; an optional
    derivative callable enables derivative functionals on 1-D domains.
    """

    kind: MeanKind = MeanKind.ZERO
    value: float = 0.0
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @classmethod
    def zero(cls) -> "MeanFunction":
        return cls(MeanKind.ZERO)

    @classmethod
    def constant(cls, value: float) -> "MeanFunction":
        if not math.isfinite(value):
            raise InvalidArgumentError(f"constant mean must be finite, got {value}")
        return cls(MeanKind.CONSTANT, value=float(value))

    @classmethod
    def from_callable(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> "MeanFunction":
        return cls(MeanKind.CALLABLE, fn=fn, derivative=derivative)

    @classmethod
    def tabulated(cls, grid: Sequence[float], values: Sequence[float]) -> "MeanFunction":
        """Piecewise-linear 1-D mean through (grid, values); not differentiable."""
        xs = np.asarray(grid, dtype=float).reshape(-1)
        ys = np.asarray(values, dtype=float).reshape(-1)
        if xs.shape != ys.shape or xs.size == 0:
            raise InvalidArgumentError("tabulated mean needs matching, non-empty grid and values")
        return cls.from_callable(lambda pts: np.interp(pts[:, 0], xs, ys))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        n = points.shape[0]
        if self.kind == MeanKind.ZERO:
            return np.zeros(n)
        if self.kind == MeanKind.CONSTANT:
            return np.full(n, self.value)
        values = np.asarray(self.fn(points), dtype=float).reshape(-1)
        if values.shape[0] != n or not np.all(np.isfinite(values)):
            raise InvalidArgumentError("mean function returned non-finite or misshaped values")
        return values

    def gradient(self, points: np.ndarray) -> np.ndarray:
        """Derivative of a 1-D mean at the given points."""
        points = np.asarray(points, dtype=float)
        n = points.shape[0]
        if self.kind in (MeanKind.ZERO, MeanKind.CONSTANT):
            return np.zeros(n)
        if self.derivative is None:
            raise UnsupportedFunctionalError(
                "derivative functional applied to a mean without a derivative"
            )
        return np.asarray(self.derivative(points), dtype=float).reshape(-1)


# =============================================================================
# Observation functionals
# =============================================================================


@dataclass(frozen=True, eq=False)
class ObservationFunctional:
    """
    A bounded linear functional on paths, stored as weighted (derivative) point terms.

    Use the point_eval / weighted_sum / deriv_eval constructors.
    """

    kind: FunctionalKind
    points: np.ndarray
    weights: np.ndarray
    order: int = 0

    @classmethod
    def point_eval(cls, t) -> "ObservationFunctional":
        point = np.atleast_1d(np.asarray(t, dtype=float))
        _check_finite(point, "point")
        return cls(FunctionalKind.POINT_EVAL, point.reshape(1, -1), np.ones(1))

    @classmethod
    def weighted_sum(cls, terms: Iterable[Tuple[float, Sequence[float]]]) -> "ObservationFunctional":
        terms = list(terms)
        if not terms:
            raise InvalidArgumentError("weighted sum needs at least one term")
        weights = np.array([float(w) for w, _ in terms])
        points = np.array([np.atleast_1d(np.asarray(t, dtype=float)) for _, t in terms])
        _check_finite(weights, "weight")
        _check_finite(points, "point")
        return cls(FunctionalKind.WEIGHTED_SUM, points, weights)

    @classmethod
    def deriv_eval(cls, t) -> "ObservationFunctional":
        point = np.atleast_1d(np.asarray(t, dtype=float))
        if point.shape[0] != 1:
            raise UnsupportedFunctionalError(
                "derivative functionals are only supported on 1-D domains"
            )
        _check_finite(point, "point")
        return cls(FunctionalKind.DERIV_EVAL, point.reshape(1, 1), np.ones(1), order=1)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def is_point_eval(self) -> bool:
        return self.kind == FunctionalKind.POINT_EVAL

    def terms(self) -> List[Tuple[float, np.ndarray, int]]:
        return [(float(w), p, self.order) for w, p in zip(self.weights, self.points)]


def _check_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{what} values must be finite")


# =============================================================================
# Prior
# =============================================================================


@dataclass(frozen=True, eq=False)
class GpPrior:
    """Prior Gaussian process: mean and covariance functions on a domain."""

    domain: Domain
    kernel: Kernel
    mean_function: MeanFunction = field(default_factory=MeanFunction.zero)

    def __post_init__(self):
        if self.kernel.family == KernelFamily.BROWNIAN and np.any(self.domain.lower < 0):
            raise InvalidArgumentError("the Brownian kernel is defined on [0, inf) only")

    def mean(self, points) -> np.ndarray:
        return self.mean_function(self.domain.as_points(points))

    def gram(self, points) -> np.ndarray:
        return gram(self.kernel, self.domain.as_points(points))

    def variance(self, points) -> np.ndarray:
        pts = self.domain.as_points(points)
        return np.diag(self.kernel.matrix(pts, pts)).copy()


# =============================================================================
# Operations
# =============================================================================


def kernel_eval(k: Kernel, t1, t2) -> float:
    """k(t1, t2) for two single points."""
    p1 = np.atleast_1d(np.asarray(t1, dtype=float))
    p2 = np.atleast_1d(np.asarray(t2, dtype=float))
    if p1.shape != p2.shape or p1.ndim != 1:
        raise InvalidArgumentError(f"points {t1!r} and {t2!r} differ in dimension")
    return float(k.matrix(p1[None, :], p2[None, :])[0, 0])


def mirror_upper(matrix: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower one so the result is exactly symmetric."""
    return np.triu(matrix) + np.triu(matrix, 1).T


def gram(k: Kernel, points) -> np.ndarray:
    """Gram matrix of k on a point list."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return np.zeros((0, 0))
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    return mirror_upper(k.matrix(pts, pts))


def cross_cov(k: Kernel, a: ObservationFunctional, b: ObservationFunctional) -> float:
    """Covariance of two functionals applied to the process."""
    total = 0.0
    for wa, ta, oa in a.terms():
        for wb, tb, ob in b.terms():
            total += wa * wb * k.block(ta[None, :], tb[None, :], oa, ob)[0, 0]
    return float(total)


def cross_cov_matrix(
    k: Kernel,
    left: Sequence[ObservationFunctional],
    right: Sequence[ObservationFunctional],
) -> np.ndarray:
    """Matrix of cross_cov(k, left[i], right[j])."""
    if not left or not right:
        return np.zeros((len(left), len(right)))
    pl, ol, wl, owner_l = _expand(left)
    pr, or_, wr, owner_r = _expand(right)

    terms = np.empty((pl.shape[0], pr.shape[0]))
    for o1 in np.unique(ol):
        rows = np.flatnonzero(ol == o1)
        for o2 in np.unique(or_):
            cols = np.flatnonzero(or_ == o2)
            terms[np.ix_(rows, cols)] = k.block(pl[rows], pr[cols], int(o1), int(o2))

    if _is_unit_points(left, owner_l) and _is_unit_points(right, owner_r):
        return terms
    lift_l = np.zeros((len(left), pl.shape[0]))
    lift_l[owner_l, np.arange(pl.shape[0])] = wl
    lift_r = np.zeros((len(right), pr.shape[0]))
    lift_r[owner_r, np.arange(pr.shape[0])] = wr
    return lift_l @ terms @ lift_r.T


def point_functionals(points: np.ndarray) -> List[ObservationFunctional]:
    return [ObservationFunctional.point_eval(p) for p in np.asarray(points, dtype=float)]


def mean_apply(m: MeanFunction, a: ObservationFunctional) -> float:
    """Apply a functional to the mean function."""
    if a.order == 0:
        values = m(a.points)
    else:
        values = m.gradient(a.points)
    return float(np.sum(a.weights * values))


def _expand(functionals: Sequence[ObservationFunctional]):
    points = np.concatenate([f.points for f in functionals], axis=0)
    orders = np.concatenate([np.full(len(f.weights), f.order) for f in functionals])
    weights = np.concatenate([f.weights for f in functionals])
    owners = np.concatenate(
        [np.full(len(f.weights), i) for i, f in enumerate(functionals)]
    )
    return points, orders, weights, owners


def _is_unit_points(functionals: Sequence[ObservationFunctional], owners: np.ndarray) -> bool:
    return len(owners) == len(functionals) and all(f.is_point_eval for f in functionals)


def validate_functionals(domain: Domain, functionals: Sequence[ObservationFunctional]) -> None:
    """Check every functional's points against the domain dimension."""
    for f in functionals:
        as_points(f.points, domain.dimension)
