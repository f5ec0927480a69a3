#!/usr/bin/env python3
"""Tests for gpcond path sampling.

Covers the seeded generator (splitmix64 seeding, xorshift64* stream, polar normals)
and sample_paths for priors and posteriors, including singular covariances.

Usage:
    pytest tests/test_sampling.py
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from gpcond import (
    Domain,
    GpPrior,
    InvalidArgumentError,
    Kernel,
    MeanFunction,
    ObservationSet,
    Rng,
    condition,
    gram,
    nested_design,
    sample_paths,
    uniform_grid,
)
from gpcond.sampling import splitmix64, standard_normals

UNIT = Domain.interval(0.0, 1.0)


# =============================================================================
# Rng
# =============================================================================


def test_splitmix64_reference_value():
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_same_seed_same_stream():
    a, b = Rng(7), Rng(7)
    assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]


def test_different_seeds_differ():
    assert Rng(1).next_u64() != Rng(2).next_u64()


def test_uniform_range():
    rng = Rng(3)
    draws = [rng.uniform() for _ in range(10000)]
    assert min(draws) >= 0.0
    assert max(draws) < 1.0
    assert abs(np.mean(draws) - 0.5) < 0.02


def test_rng_rejects_negative_seed():
    with pytest.raises(InvalidArgumentError):
        Rng(-1)


def test_standard_normal_moments():
    z = standard_normals(Rng(42), 100000)
    assert abs(np.mean(z)) <= 0.02
    assert 0.98 <= np.var(z) <= 1.02


def test_standard_normals_edge_cases():
    assert standard_normals(Rng(0), 0).shape == (0,)
    with pytest.raises(InvalidArgumentError):
        standard_normals(Rng(0), -1)


# =============================================================================
# sample_paths
# =============================================================================


def test_sample_shape_and_seed():
    grid = uniform_grid(UNIT, 11)
    sample = sample_paths(GpPrior(UNIT, Kernel.rbf(0.3)), grid, 4, seed=5)
    assert sample.values.shape == (4, 11)
    assert sample.count == 4
    assert sample.seed == 5
    np.testing.assert_array_equal(sample.grid, grid)


def test_sampling_is_deterministic():
    prior = GpPrior(UNIT, Kernel.matern32(0.2))
    grid = uniform_grid(UNIT, 17)
    a = sample_paths(prior, grid, 3, seed=11)
    b = sample_paths(prior, grid, 3, seed=11)
    c = sample_paths(prior, grid, 3, seed=12)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_brownian_paths_start_at_zero():
    sample = sample_paths(GpPrior(UNIT, Kernel.brownian()), uniform_grid(UNIT, 9), 5, seed=1)
    np.testing.assert_array_equal(sample.values[:, 0], np.zeros(5))


def test_posterior_paths_are_pinned_at_observations():
    prior = GpPrior(UNIT, Kernel.brownian())
    post = condition(prior, ObservationSet.point_evaluations([1.0], [2.0]))
    sample = sample_paths(post, uniform_grid(UNIT, 11), 6, seed=3)
    np.testing.assert_array_equal(sample.values[:, -1], np.full(6, 2.0))


def test_zero_variance_posterior_returns_the_mean():
    grid = uniform_grid(UNIT, 6)
    prior = GpPrior(UNIT, Kernel.matern32(0.3))
    values = np.cos(2.0 * grid[:, 0])
    post = condition(prior, ObservationSet.point_evaluations(grid, values))
    sample = sample_paths(post, grid, 3, seed=9)
    for row in sample.values:
        np.testing.assert_allclose(row, values, atol=1e-8)


def test_posterior_paths_are_pinned_at_halton_points():
    prior = GpPrior(UNIT, Kernel.rbf(0.3))
    design = nested_design(UNIT, 9).points
    values = np.sin(5.0 * design[:, 0])
    post = condition(prior, ObservationSet.point_evaluations(design, values))
    grid = uniform_grid(UNIT, 17)
    sites = np.rint(design[:, 0] * 16).astype(int)
    np.testing.assert_array_equal(grid[sites, 0], design[:, 0])
    sample = sample_paths(post, grid, 50, seed=12)
    assert np.max(np.abs(sample.values[:, sites] - values)) <= 1e-8
    assert np.max(np.std(sample.values, axis=0)) > 1e-6


def test_prior_moment_recovery():
    prior = GpPrior(UNIT, Kernel.rbf(0.3), MeanFunction.constant(0.5))
    grid = uniform_grid(UNIT, 10)
    sample = sample_paths(prior, grid, 4000, seed=2024)
    empirical_cov = np.cov(sample.values, rowvar=False)
    assert np.max(np.abs(empirical_cov - gram(prior.kernel, grid))) <= 0.15
    assert np.max(np.abs(sample.values.mean(axis=0) - 0.5)) <= 0.1


def test_sample_paths_in_two_dimensions():
    domain = Domain(((0.0, 1.0), (0.0, 1.0)))
    grid = uniform_grid(domain, 4)
    sample = sample_paths(GpPrior(domain, Kernel.matern52(0.5)), grid, 2, seed=0)
    assert sample.values.shape == (2, 16)


def test_sample_paths_rejects_bad_arguments():
    prior = GpPrior(UNIT, Kernel.rbf(0.3))
    with pytest.raises(InvalidArgumentError):
        sample_paths(prior, [], 1, seed=0)
    with pytest.raises(InvalidArgumentError):
        sample_paths(prior, uniform_grid(UNIT, 3), 0, seed=0)
    with pytest.raises(InvalidArgumentError):
        sample_paths(prior, uniform_grid(UNIT, 3), 1, seed=-4)
