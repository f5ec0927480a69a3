"""
Index-set geometry: nested dense designs, the kernel pseudo-metric and fill distances.

Designs enumerate a box with the Halton sequence: coordinate i of point j is the
radical inverse of j in the i-th prime base, mapped affinely onto the coordinate's
interval. The enumeration is fixed, so the first m points of any n-point design are
exactly the m-point design.
"""

import logging
from typing import List, Union

import numpy as np

from .exceptions import InvalidArgumentError
from .models import Domain, NestedDesign, as_points

LOGGER = logging.getLogger(__name__)

EUCLIDEAN = "euclidean"


def van_der_corput(index: int, base: int = 2) -> float:
    """
    Radical inverse of `index` in `base`.

    The digits of index are mirrored about the radix point. Accumulated as an exact
    integer ratio so the result is the correctly rounded float.
    """
    if base < 2:
        raise InvalidArgumentError(f"van der Corput base must be >= 2, got {base}")
    if index < 0:
        raise InvalidArgumentError(f"van der Corput index must be >= 0, got {index}")
    numerator, denominator = 0, 1
    while index:
        index, digit = divmod(index, base)
        numerator = numerator * base + digit
        denominator *= base
    return numerator / denominator


def first_primes(count: int) -> List[int]:
    primes: List[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def halton_sequence(n: int, dimension: int) -> np.ndarray:
    """First n points of the unscrambled Halton sequence in [0, 1)^dimension."""
    bases = first_primes(dimension)
    out = np.empty((n, dimension))
    for i, base in enumerate(bases):
        out[:, i] = [van_der_corput(j, base) for j in range(n)]
    return out


def nested_design(domain: Domain, n: int) -> NestedDesign:
    """First n points of the Halton enumeration of `domain`."""
    if n < 1:
        raise InvalidArgumentError(f"design size must be >= 1, got {n}")
    unit = halton_sequence(n, domain.dimension)
    LOGGER.debug("nested design: %d points in dimension %d", n, domain.dimension)
    points = domain.lower + (domain.upper - domain.lower) * unit
    return NestedDesign(domain=domain, points=points)


def uniform_grid(domain: Domain, size: int) -> np.ndarray:
    """Tensor-product grid with `size` equispaced points per coordinate, bounds included."""
    if size < 1:
        raise InvalidArgumentError(f"grid size must be >= 1, got {size}")
    axes = [np.linspace(a, b, size) for a, b in domain.bounds]
    if domain.dimension == 1:
        return axes[0].reshape(-1, 1)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def snap_to_grid(points: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Replace each point by its nearest grid point (first one on ties)."""
    points = np.asarray(points, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if grid.shape[0] == 0:
        raise InvalidArgumentError("cannot snap onto an empty grid")
    dist2 = _squared_distances(points, grid)
    return grid[np.argmin(dist2, axis=1)]


def kernel_metric(k, t1, t2) -> float:
    """
    Kernel pseudo-metric d_k(t1, t2) = sqrt(k(t1,t1) - 2 k(t1,t2) + k(t2,t2)).

    Negative round-off under the root is clamped to zero.
    """
    from .kernels import kernel_eval

    d2 = (kernel_eval(k, t1, t1) + kernel_eval(k, t2, t2)) - 2.0 * kernel_eval(k, t1, t2)
    return float(np.sqrt(max(0.0, d2)))


def fill_distance(
    design: Union[NestedDesign, np.ndarray],
    probe_grid,
    metric="euclidean",
) -> float:
    """
    Largest distance from a probe point to its nearest design point.

    Args:
        design: design (or raw point array) whose density is measured
        probe_grid: points at which the distance to the design is taken
        metric: "euclidean" or a Kernel, in which case the kernel metric is used
    """
    points = design.points if isinstance(design, NestedDesign) else design
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.shape[0] == 0:
        raise InvalidArgumentError("fill distance needs a non-empty design")
    probes = as_points(probe_grid, points.shape[1])
    if probes.shape[0] == 0:
        raise InvalidArgumentError("fill distance needs a non-empty probe grid")

    if isinstance(metric, str):
        if metric != EUCLIDEAN:
            raise InvalidArgumentError(f"unknown metric '{metric}'")
        dist2 = _squared_distances(probes, points)
    else:
        dist2 = _kernel_squared_distances(metric, probes, points)
    return float(np.sqrt(np.max(np.min(dist2, axis=1))))


def _squared_distances(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    diff = x1[:, None, :] - x2[None, :, :]
    return np.sum(diff * diff, axis=-1)


def _kernel_squared_distances(k, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    diag1 = np.diag(k.matrix(x1, x1))
    diag2 = np.diag(k.matrix(x2, x2))
    d2 = (diag1[:, None] + diag2[None, :]) - 2.0 * k.matrix(x1, x2)
    return np.maximum(d2, 0.0)
