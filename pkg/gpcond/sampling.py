"""
Prior and posterior path sampling on finite grids.

Draws use an in-package xorshift64* generator seeded through splitmix64, so a seed
reproduces the same stream on every platform, and the Marsaglia polar method for
normals. Paths are mean + L z with L = V Lambda_+^{1/2} the spectral square root of the
grid covariance, which stays valid when the covariance is singular.
"""

import logging
import math
from typing import Union

import numpy as np

from .exceptions import InvalidArgumentError
from .linalg import DEFAULT_PINV_TOL, psd_sqrt
from .models import Eigensolver, PathSample

LOGGER = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_XORSHIFT_MULTIPLIER = 0x2545F4914F6CDD1D
_FALLBACK_STATE = 0x9E3779B97F4A7C15


def splitmix64(seed: int) -> int:
    z = (seed + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Rng:
    """
    xorshift64* generator.

    Not thread-safe: one owner per instance.
    """

    def __init__(self, seed: int = 0):
        if seed < 0:
            raise InvalidArgumentError(f"seed must be >= 0, got {seed}")
        self.seed = seed
        self._state = splitmix64(seed & _MASK64) or _FALLBACK_STATE
        self._spare = None

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * _XORSHIFT_MULTIPLIER) & _MASK64

    def uniform(self) -> float:
        """Uniform draw in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def normal(self) -> float:
        if self._spare is not None:
            value, self._spare = self._spare, None
            return value
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        scale = math.sqrt(-2.0 * math.log(s) / s)
        self._spare = v * scale
        return u * scale


def standard_normals(rng: Rng, count: int) -> np.ndarray:
    """`count` i.i.d. standard normal draws from `rng`."""
    if count < 0:
        raise InvalidArgumentError(f"count must be >= 0, got {count}")
    return np.array([rng.normal() for _ in range(count)], dtype=float)


def sample_paths(
    process,
    grid,
    count: int,
    seed: int,
    eigensolver: Union[str, Eigensolver] = Eigensolver.JACOBI,
    pinv_tol: float = DEFAULT_PINV_TOL,
) -> PathSample:
    """
    Draw `count` paths of a prior or posterior on `grid`.

    Args:
        process: GpPrior or PosteriorGp (anything with domain, mean() and gram())
        grid: points at which paths are tabulated
        count: number of paths
        seed: generator seed; identical arguments give identical samples
        pinv_tol: covariance eigenvalues up to pinv_tol times the largest prior variance
            on the grid are dropped, so noise-free observed points stay pinned
    """
    pts = process.domain.as_points(grid)
    if pts.shape[0] == 0:
        raise InvalidArgumentError("sample_paths needs a non-empty grid")
    if count < 1:
        raise InvalidArgumentError(f"sample count must be >= 1, got {count}")

    mean = process.mean(pts)
    prior = getattr(process, "prior", process)
    floor = pinv_tol * float(np.max(prior.variance(pts)))
    root = psd_sqrt(process.gram(pts), eigensolver, floor)
    z = standard_normals(Rng(seed), count * pts.shape[0]).reshape(count, pts.shape[0])
    values = mean[None, :] + z @ root.T
    LOGGER.debug("sample_paths: %d paths on %d grid points (seed %d)", count, pts.shape[0], seed)
    return PathSample(grid=pts, values=values, seed=seed)
