#!/usr/bin/env python3
"""Tests for gpcond conditioning.

Covers condition (noise-free pseudoinverse and noisy Cholesky paths), posterior mean,
covariance, variance and Gram evaluation, interpolation_check, derivative observations
and the nested-design variance monotonicity.

Usage:
    pytest tests/test_conditioning.py
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from gpcond import (
    Domain,
    GpPrior,
    InvalidArgumentError,
    InvalidUsageError,
    Kernel,
    MeanFunction,
    ObservationFunctional,
    ObservationSet,
    condition,
    eigh_sym,
    gram,
    interpolation_check,
    kernel_eval,
    nested_design,
    posterior_cov,
    posterior_gram,
    posterior_mean,
    posterior_variance,
    uniform_grid,
)

UNIT = Domain.interval(0.0, 1.0)


def brownian_bridge(y=0.0, noise=0.0):
    prior = GpPrior(UNIT, Kernel.brownian())
    return condition(prior, ObservationSet.point_evaluations([1.0], [y], noise))


def matern_posterior(seed=0, n=20, ell=0.3, noise=0.0):
    rng = np.random.default_rng(seed)
    pts = np.sort(rng.uniform(0.0, 1.0, size=n))
    values = np.sin(6.0 * pts) + 0.5 * np.cos(11.0 * pts)
    prior = GpPrior(UNIT, Kernel.matern32(ell))
    return condition(prior, ObservationSet.point_evaluations(pts, values, noise))


# =============================================================================
# condition
# =============================================================================


def test_empty_observations_give_the_prior():
    prior = GpPrior(UNIT, Kernel.rbf(0.3), MeanFunction.constant(1.5))
    post = condition(prior, ObservationSet())
    grid = uniform_grid(UNIT, 9)
    np.testing.assert_array_equal(post.mean(grid), np.full(9, 1.5))
    np.testing.assert_array_equal(posterior_gram(post, grid), gram(prior.kernel, grid))
    assert posterior_cov(post, 0.2, 0.7) == kernel_eval(prior.kernel, 0.2, 0.7)


def test_alpha_noise_free_and_noisy():
    np.testing.assert_allclose(brownian_bridge(2.0).alpha, [2.0])
    np.testing.assert_allclose(brownian_bridge(2.0, noise=1.0).alpha, [1.0])


def test_brownian_bridge_examples():
    post = brownian_bridge(2.0)
    assert posterior_mean(post, 0.5) == pytest.approx(1.0)
    assert posterior_mean(brownian_bridge(0.0), 0.5) == 0.0
    assert posterior_cov(post, 0.5, 0.5) == pytest.approx(0.25)
    assert posterior_cov(post, 0.25, 0.75) == pytest.approx(0.0625)
    np.testing.assert_allclose(posterior_gram(post, [0.5]), [[0.25]])
    assert posterior_gram(post, []).shape == (0, 0)


def test_brownian_bridge_closed_form_on_grid():
    post = brownian_bridge(0.0)
    grid = uniform_grid(UNIT, 101)
    t = grid[:, 0]
    expected = np.minimum.outer(t, t) - np.outer(t, t)
    assert np.max(np.abs(posterior_gram(post, grid) - expected)) <= 1e-10
    assert np.max(np.abs(post.mean(grid))) <= 1e-10


def test_observation_set_validation():
    with pytest.raises(InvalidArgumentError):
        ObservationSet.point_evaluations([0.1, 0.2], [1.0])
    with pytest.raises(InvalidArgumentError):
        ObservationSet.point_evaluations([0.1], [np.inf])
    with pytest.raises(InvalidArgumentError):
        ObservationSet.point_evaluations([0.1], [1.0], noise_variance=-1.0)


def test_observation_dimension_must_match_domain():
    prior = GpPrior(UNIT, Kernel.rbf(0.3))
    obs = ObservationSet.point_evaluations(np.array([[0.1, 0.2]]), [1.0])
    with pytest.raises(InvalidArgumentError):
        condition(prior, obs)


# =============================================================================
# Posterior invariants
# =============================================================================


@pytest.mark.parametrize("noise", [0.0, 0.05])
def test_posterior_covariance_invariants(noise):
    post = matern_posterior(seed=1, n=12, noise=noise)
    rng = np.random.default_rng(2)
    k = post.prior.kernel
    for t1, t2 in rng.uniform(0.0, 1.0, size=(30, 2)):
        assert posterior_cov(post, t1, t2) == pytest.approx(posterior_cov(post, t2, t1), abs=1e-12)
        var = posterior_variance(post, t1)
        assert var <= kernel_eval(k, t1, t1) + 1e-10
        assert var >= -1e-10
        assert var == pytest.approx(posterior_cov(post, t1, t1), abs=1e-12)


def test_posterior_gram_is_symmetric_psd():
    post = matern_posterior(seed=3, n=15)
    rng = np.random.default_rng(4)
    for size in (1, 10, 30):
        grid = rng.uniform(0.0, 1.0, size=(size, 1))
        g = posterior_gram(post, grid)
        np.testing.assert_array_equal(g, g.T)
        lam = eigh_sym(g).eigenvalues
        assert lam[0] >= -1e-9 * max(lam[-1], 1e-300)


def test_posterior_gram_at_observed_points_is_psd():
    prior = GpPrior(UNIT, Kernel.rbf(0.3))
    design = nested_design(UNIT, 9).points
    post = condition(prior, ObservationSet.point_evaluations(design, np.sin(5.0 * design[:, 0])))
    g = posterior_gram(post, design)
    lam = eigh_sym(g).eigenvalues
    assert lam[0] >= -1e-9 * max(lam[-1], 1e-300)
    assert np.max(np.abs(g)) <= 1e-10


def test_noisy_limit_matches_noise_free():
    rng = np.random.default_rng(5)
    pts = np.linspace(0.05, 0.95, 8)
    values = rng.normal(size=8)
    prior = GpPrior(UNIT, Kernel.matern32(0.3))
    exact = condition(prior, ObservationSet.point_evaluations(pts, values))
    noisy = condition(prior, ObservationSet.point_evaluations(pts, values, 1e-12))
    grid = uniform_grid(UNIT, 41)
    np.testing.assert_allclose(noisy.mean(grid), exact.mean(grid), atol=1e-5)


def test_lapack_and_jacobi_posteriors_agree():
    rng = np.random.default_rng(6)
    pts = np.linspace(0.05, 0.95, 10)
    obs = ObservationSet.point_evaluations(pts, rng.normal(size=10))
    prior = GpPrior(UNIT, Kernel.matern52(0.2))
    grid = uniform_grid(UNIT, 21)
    a = condition(prior, obs, eigensolver="jacobi")
    b = condition(prior, obs, eigensolver="lapack")
    np.testing.assert_allclose(a.mean(grid), b.mean(grid), atol=1e-8)
    np.testing.assert_allclose(a.gram(grid), b.gram(grid), atol=1e-8)


# =============================================================================
# Functional observations
# =============================================================================


def test_derivative_observation():
    prior = GpPrior(UNIT, Kernel.rbf(1.0))
    obs = ObservationSet((ObservationFunctional.deriv_eval(0.5),), [1.0])
    post = condition(prior, obs)
    assert posterior_mean(post, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert posterior_mean(post, 0.6) == pytest.approx(0.1 * math.exp(-0.005), abs=1e-12)


def test_weighted_sum_observation_pins_the_average():
    prior = GpPrior(UNIT, Kernel.matern32(0.3))
    avg = ObservationFunctional.weighted_sum([(0.5, 0.2), (0.5, 0.8)])
    post = condition(prior, ObservationSet((avg,), [3.0]))
    mean = post.mean(np.array([[0.2], [0.8]]))
    assert 0.5 * (mean[0] + mean[1]) == pytest.approx(3.0, abs=1e-10)


def test_mixed_functionals_with_constant_mean():
    prior = GpPrior(UNIT, Kernel.rbf(0.4), MeanFunction.constant(2.0))
    obs = ObservationSet(
        (ObservationFunctional.point_eval(0.3), ObservationFunctional.deriv_eval(0.3)),
        [2.0, 0.0],
    )
    post = condition(prior, obs)
    np.testing.assert_allclose(post.alpha, [0.0, 0.0], atol=1e-15)
    assert posterior_mean(post, 0.9) == pytest.approx(2.0)


# =============================================================================
# interpolation_check
# =============================================================================


def test_interpolation_check_examples():
    report = interpolation_check(brownian_bridge(2.0), 1e-10)
    assert report.max_mean_error == pytest.approx(0.0, abs=1e-15)
    assert report.max_variance == pytest.approx(0.0, abs=1e-15)
    assert report.passed

    assert interpolation_check(matern_posterior(n=10), 1e-6).passed

    empty = condition(GpPrior(UNIT, Kernel.rbf(0.3)), ObservationSet())
    report = interpolation_check(empty, 1e-12)
    assert (report.max_mean_error, report.max_variance, report.passed) == (0.0, 0.0, True)


def test_noise_free_interpolation_matern32():
    post = matern_posterior(seed=42, n=20, ell=0.3)
    sites = post.obs.point_locations()
    assert np.max(np.abs(post.mean(sites) - post.obs.values)) <= 1e-6
    assert np.max(post.variance(sites)) <= 1e-6
    assert interpolation_check(post, 1e-6).passed


def test_interpolation_check_invalid_usage():
    with pytest.raises(InvalidUsageError):
        interpolation_check(brownian_bridge(1.0, noise=0.1), 1e-6)
    prior = GpPrior(UNIT, Kernel.rbf(0.3))
    post = condition(prior, ObservationSet((ObservationFunctional.deriv_eval(0.5),), [1.0]))
    with pytest.raises(InvalidUsageError):
        interpolation_check(post, 1e-6)


def test_interpolation_check_reports_inconsistent_data():
    prior = GpPrior(UNIT, Kernel.brownian())
    post = condition(prior, ObservationSet.point_evaluations([0.5, 0.5], [0.0, 1.0]))
    report = interpolation_check(post, 1e-6)
    assert not report.passed
    assert report.max_mean_error == pytest.approx(0.5)


# =============================================================================
# Nested designs
# =============================================================================


def test_variance_monotone_under_nested_designs():
    prior = GpPrior(UNIT, Kernel.rbf(0.2))
    test_points = uniform_grid(UNIT, 50)
    previous = None
    for n in (4, 8, 16, 32, 64):
        design = nested_design(UNIT, n).points
        obs = ObservationSet.point_evaluations(design, np.cos(3.0 * design[:, 0]))
        var = condition(prior, obs).variance(test_points)
        if previous is not None:
            assert np.all(var <= previous + 1e-9)
        previous = var
