"""Data models shared across gpcond modules."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InvalidArgumentError


class KernelFamily(str, Enum):
    """Covariance function families."""

    BROWNIAN = "brownian"
    RBF = "rbf"
    MATERN12 = "matern12"
    MATERN32 = "matern32"
    MATERN52 = "matern52"
    LINEAR = "linear"


class MeanKind(str, Enum):
    """Mean function variants."""

    ZERO = "zero"
    CONSTANT = "constant"
    CALLABLE = "callable"


class FunctionalKind(str, Enum):
    """Observation functional variants."""

    POINT_EVAL = "point"
    WEIGHTED_SUM = "weighted_sum"
    DERIV_EVAL = "derivative"


class Command(str, Enum):
    """Experiment workflows."""

    CONDITION = "condition"
    REFINE = "refine"
    CONTRACT = "contract"
    SAMPLE = "sample"


class Eigensolver(str, Enum):
    """Backends for the symmetric eigendecomposition."""

    JACOBI = "jacobi"
    LAPACK = "lapack"


Point = Tuple[float, ...]


@dataclass(frozen=True)
class Domain:
    """
    Axis-aligned box in R^d.

    Args:
        bounds: per-coordinate closed intervals (lower, upper) with lower <= upper
    """

    bounds: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        if not bounds:
            raise InvalidArgumentError("domain needs at least one coordinate")
        for i, (a, b) in enumerate(bounds):
            if not (math.isfinite(a) and math.isfinite(b)):
                raise InvalidArgumentError(f"domain bound {i} is not finite")
            if a > b:
                raise InvalidArgumentError(
                    f"domain bound {i} has lower {a} > upper {b}"
                )
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def interval(cls, lower: float = 0.0, upper: float = 1.0) -> "Domain":
        return cls(((lower, upper),))

    @property
    def dimension(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([a for a, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b for _, b in self.bounds])

    @property
    def center(self) -> Point:
        return tuple(0.5 * (a + b) for a, b in self.bounds)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of rows of `points` lying inside the box."""
        pts = self.as_points(points)
        return np.all((pts >= self.lower) & (pts <= self.upper), axis=1)

    def contains_domain(self, other: "Domain") -> bool:
        if other.dimension != self.dimension:
            return False
        return all(
            a <= c and d <= b for (a, b), (c, d) in zip(self.bounds, other.bounds)
        )

    def as_point(self, t) -> np.ndarray:
        """Validate a single point against this domain's dimension."""
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        if arr.ndim != 1 or arr.shape[0] != self.dimension:
            raise InvalidArgumentError(
                f"point {t!r} does not have dimension {self.dimension}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError(f"point {t!r} has non-finite coordinates")
        return arr

    def as_points(self, points) -> np.ndarray:
        """Validate a list of points, returning an (n, d) array."""
        return as_points(points, self.dimension)


def as_points(points, dimension: int) -> np.ndarray:
    """Coerce `points` to a finite (n, dimension) float array."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dimension == 1 else arr.reshape(1, -1)
    if arr.size == 0:
        return np.zeros((0, dimension))
    if arr.ndim != 2 or arr.shape[1] != dimension:
        raise InvalidArgumentError(
            f"points of shape {arr.shape} do not have dimension {dimension}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("points contain non-finite coordinates")
    return arr


@dataclass(frozen=True)
class NestedDesign:
    """The first n points s_1..s_n of a fixed dense enumeration of a domain."""

    domain: Domain
    points: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class RefinementSchedule:
    """Strictly increasing design sizes at which the posterior is evaluated."""

    sizes: Tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sizes)
        if not sizes:
            raise InvalidArgumentError("schedule is empty")
        if sizes[0] < 1:
            raise InvalidArgumentError("schedule sizes must be positive")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise InvalidArgumentError(f"schedule {list(sizes)} is not strictly increasing")
        object.__setattr__(self, "sizes", sizes)

    def __iter__(self):
        return iter(self.sizes)

    def __len__(self) -> int:
        return len(self.sizes)


@dataclass(frozen=True)
class CharProbe:
    """Dual element x' = sum_j w_j * delta_{t_j} used to probe characteristic functionals."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.shape[0] != weights.shape[0]:
            raise InvalidArgumentError(
                f"probe has {points.shape[0]} points but {weights.shape[0]} weights"
            )
        if not np.all(np.isfinite(weights)) or not np.any(weights != 0.0):
            raise InvalidArgumentError("probe weights must be finite and not all zero")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)


@dataclass(frozen=True)
class ConvergenceTolerances:
    mean_tol: float = 1e-3
    cov_tol: float = 1e-3


@dataclass
class LevelRecord:
    """
    Diagnostics for one refinement level.

    Delta fields compare against the previous level and are None on the first one.
    """

    n: int
    posterior_trace: float
    sup_mean_delta: Optional[float] = None
    trace_cov_delta: Optional[float] = None
    op_cov_delta: Optional[float] = None
    char_values: List[complex] = field(default_factory=list)
    char_deltas: List[float] = field(default_factory=list)
    sup_mean_err_vs_truth: Optional[float] = None
    sup_err_on_region: Optional[float] = None

    @property
    def char_delta_max(self) -> Optional[float]:
        if not self.char_deltas:
            return None
        return max(self.char_deltas)

    @property
    def has_deltas(self) -> bool:
        return self.sup_mean_delta is not None


@dataclass
class ConvergenceReport:
    """
    Per-level diagnostics of a nested refinement run.

    `truth_path` is set by contraction experiments to the sampled path being observed.
    """

    levels: List[LevelRecord]
    tolerances: ConvergenceTolerances
    converged: bool = False
    diverging: bool = False
    truth_path: Optional["PathSample"] = None

    @property
    def delta_records(self) -> List[LevelRecord]:
        """One record per schedule size after the first."""
        return [level for level in self.levels if level.has_deltas]

    @property
    def final(self) -> LevelRecord:
        return self.levels[-1]


@dataclass(frozen=True)
class InterpolationReport:
    max_mean_error: float
    max_variance: float
    passed: bool


@dataclass(frozen=True)
class ConditionResult:
    """Posterior mean and variance on a test grid, plus the interpolation check if it applies."""

    grid: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    interpolation: Optional[InterpolationReport] = None


@dataclass(frozen=True)
class PathSample:
    """Sample paths tabulated on a grid: one row per sample."""

    grid: np.ndarray
    values: np.ndarray
    seed: int

    @property
    def count(self) -> int:
        return self.values.shape[0]


def grid_column_names(dimension: int) -> List[str]:
    """Coordinate column headers: `t` in 1-D, `t1..td` otherwise."""
    if dimension == 1:
        return ["t"]
    return [f"t{i + 1}" for i in range(dimension)]


def bounds_from_flat(values: Sequence[float]) -> Tuple[Tuple[float, float], ...]:
    """Pair up a flat lower,upper,lower,upper,... list."""
    values = [float(v) for v in values]
    if not values or len(values) % 2:
        raise InvalidArgumentError(
            "bounds need an even, non-zero number of values (lower,upper pairs)"
        )
    return tuple((values[i], values[i + 1]) for i in range(0, len(values), 2))
