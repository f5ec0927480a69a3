#!/usr/bin/env python3
"""Tests for gpcond nested refinement.

Covers:
- char_functional and the default probe family
- refine_and_monitor: level records, convergence and divergence flags, partial observation
- contraction_experiment: mean contraction onto a sampled path, posterior trace decay,
  characteristic-functional deltas and determinism
- SampledPath / AnalyticFunction observables

Usage:
    pytest tests/test_refinement.py
"""

import cmath
import math
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from gpcond import (
    AnalyticFunction,
    CharProbe,
    ConvergenceTolerances,
    Domain,
    GpPrior,
    InvalidArgumentError,
    Kernel,
    LevelRecord,
    ObservationSet,
    SampledPath,
    char_functional,
    condition,
    contraction_experiment,
    default_probes,
    gram,
    interpolation_check,
    kernel_eval,
    nested_design,
    refine_and_monitor,
    sample_paths,
    uniform_grid,
)
from gpcond.refinement import _is_diverging

UNIT = Domain.interval(0.0, 1.0)
SCHEDULE = (3, 5, 9, 17, 33, 65)


def point_probe(t):
    return CharProbe(np.array([[t]]), np.ones(1))


# =============================================================================
# Characteristic functionals
# =============================================================================


def test_char_functional_brownian_bridge():
    prior = GpPrior(UNIT, Kernel.brownian())
    post = condition(prior, ObservationSet.point_evaluations([1.0], [0.0]))
    phi = char_functional(post, point_probe(0.5))
    assert phi.real == pytest.approx(math.exp(-0.125), abs=1e-12)
    assert phi.imag == 0.0


def test_char_functional_point_mass():
    prior = GpPrior(UNIT, Kernel.brownian())
    post = condition(prior, ObservationSet.point_evaluations([0.5], [1.3]))
    phi = char_functional(post, point_probe(0.5))
    assert abs(phi) == pytest.approx(1.0, abs=1e-12)
    assert abs(phi - cmath.exp(1.3j)) <= 1e-12


def test_char_functional_prior():
    post = condition(GpPrior(UNIT, Kernel.rbf(0.3)), ObservationSet())
    assert char_functional(post, point_probe(0.3)) == pytest.approx(math.exp(-0.5), abs=1e-12)


def test_char_probe_validation():
    with pytest.raises(InvalidArgumentError):
        CharProbe(np.array([[0.1], [0.2]]), np.ones(1))
    with pytest.raises(InvalidArgumentError):
        CharProbe(np.array([[0.1]]), np.zeros(1))


def test_default_probes():
    probes = default_probes(UNIT)
    assert len(probes) == 3
    np.testing.assert_array_equal(probes[0].points, [[0.5]])
    np.testing.assert_array_equal(probes[1].points[:, 0], [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_array_equal(probes[1].weights, [1.0, -1.0, 1.0, -1.0, 1.0])
    np.testing.assert_array_equal(probes[2].points[:, 0], [0.25, 0.5, 0.75])

    box = default_probes(Domain(((0.0, 2.0), (1.0, 3.0))))
    np.testing.assert_array_equal(box[0].points, [[1.0, 2.0]])


# =============================================================================
# Observables
# =============================================================================


def test_sampled_path_interpolates_in_one_dimension():
    path = SampledPath([1.0, 0.0], [2.0, 0.0])
    np.testing.assert_allclose(path(np.array([[0.25], [1.0]])), [0.5, 2.0])


def test_sampled_path_lookup_in_two_dimensions():
    path = SampledPath(np.array([[0.0, 0.0], [1.0, 1.0]]), [1.0, 2.0])
    np.testing.assert_array_equal(path(np.array([[1.0, 1.0]])), [2.0])
    with pytest.raises(InvalidArgumentError):
        path(np.array([[0.5, 0.5]]))


def test_observables_reject_bad_values():
    with pytest.raises(InvalidArgumentError):
        SampledPath([0.0, 1.0], [1.0])
    with pytest.raises(InvalidArgumentError):
        AnalyticFunction(lambda x: np.full(x.shape[0], np.nan))(np.array([[0.5]]))


# =============================================================================
# refine_and_monitor
# =============================================================================


def test_single_level_has_no_deltas():
    prior = GpPrior(UNIT, Kernel.rbf(0.3))
    g = AnalyticFunction(lambda x: np.sin(x[:, 0]))
    report = refine_and_monitor(prior, UNIT, g, [5], uniform_grid(UNIT, 17))
    assert len(report.levels) == 1
    assert report.delta_records == []
    assert report.final.sup_mean_delta is None
    assert report.final.char_delta_max is None
    assert not report.converged
    assert not report.diverging


def test_observing_the_mean_changes_nothing():
    prior = GpPrior(UNIT, Kernel.matern32(0.3))
    g = AnalyticFunction(lambda x: np.zeros(x.shape[0]))
    report = refine_and_monitor(prior, UNIT, g, [3, 5, 9], uniform_grid(UNIT, 33))
    for level in report.delta_records:
        assert level.sup_mean_delta == 0.0
    for level in report.levels:
        assert all(phi.imag == 0.0 for phi in level.char_values)


def test_refinement_rejects_bad_arguments():
    prior = GpPrior(UNIT, Kernel.rbf(0.3))
    g = AnalyticFunction(lambda x: x[:, 0])
    grid = uniform_grid(UNIT, 9)
    with pytest.raises(InvalidArgumentError):
        refine_and_monitor(prior, UNIT, g, [], grid)
    with pytest.raises(InvalidArgumentError):
        refine_and_monitor(prior, UNIT, g, [5, 3], grid)
    with pytest.raises(InvalidArgumentError):
        refine_and_monitor(prior, Domain.interval(0.5, 1.5), g, [3], grid)
    with pytest.raises(InvalidArgumentError):
        refine_and_monitor(prior, UNIT, g, [3], np.zeros((0, 1)))


def test_brownian_refinement_shrinks_posterior_trace():
    prior = GpPrior(UNIT, Kernel.brownian())
    grid = uniform_grid(UNIT, 257)
    truth = sample_paths(prior, grid, 1, seed=17)
    g = SampledPath(grid, truth.values[0])
    report = refine_and_monitor(prior, UNIT, g, SCHEDULE, grid)
    traces = [level.posterior_trace for level in report.levels]
    assert all(b < a for a, b in zip(traces, traces[1:]))
    assert traces[-1] <= 1e-2 * np.trace(gram(prior.kernel, grid))
    assert [level.n for level in report.levels] == list(SCHEDULE)


def test_loose_tolerances_report_convergence():
    prior = GpPrior(UNIT, Kernel.rbf(0.3))
    g = AnalyticFunction(lambda x: np.sin(3.0 * x[:, 0]))
    report = refine_and_monitor(
        prior, UNIT, g, [9, 17, 33], uniform_grid(UNIT, 65),
        tolerances=ConvergenceTolerances(mean_tol=1.0, cov_tol=1.0),
    )
    assert report.converged
    tight = refine_and_monitor(
        prior, UNIT, g, [9, 17, 33], uniform_grid(UNIT, 65),
        tolerances=ConvergenceTolerances(mean_tol=1e-300, cov_tol=1e-300),
    )
    assert not tight.converged


def test_partial_observation():
    region = Domain.interval(0.0, 0.5)
    prior = GpPrior(UNIT, Kernel.rbf(0.05))
    design = nested_design(region, 65).points
    post = condition(prior, ObservationSet.point_evaluations(design, np.sin(4.0 * design[:, 0])))
    assert np.max(post.variance(uniform_grid(region, 65))) <= 1e-4
    assert post.variance([1.0])[0] >= 0.5 * kernel_eval(prior.kernel, 1.0, 1.0)


def test_partial_observation_error_on_region():
    region = Domain.interval(0.0, 0.5)
    prior = GpPrior(UNIT, Kernel.rbf(0.05))
    g = AnalyticFunction(lambda x: np.sin(4.0 * x[:, 0]))
    report = refine_and_monitor(prior, region, g, [17, 33, 65], uniform_grid(UNIT, 65))
    assert report.final.sup_err_on_region <= 1e-3


def test_snapped_designs_stay_in_the_region():
    region = Domain.interval(0.0, 0.2)
    seen = []

    def record(x):
        seen.append(x.copy())
        return np.cos(x[:, 0])

    prior = GpPrior(UNIT, Kernel.rbf(0.3))
    coarse = uniform_grid(UNIT, 5)
    refine_and_monitor(
        prior, region, AnalyticFunction(record), [2, 4], uniform_grid(UNIT, 9), snap_grid=coarse
    )
    points = np.concatenate(seen)
    assert np.all(region.contains(points))

    box = Domain(((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(InvalidArgumentError):
        refine_and_monitor(
            GpPrior(box, Kernel.rbf(0.3)),
            Domain(((0.3, 0.4), (0.3, 0.4))),
            AnalyticFunction(lambda x: x[:, 0]),
            [2],
            uniform_grid(box, 3),
            snap_grid=uniform_grid(box, 3),
        )


def test_interpolation_holds_along_the_levels():
    prior = GpPrior(UNIT, Kernel.matern32(0.3))
    for n in (3, 5, 9, 17):
        design = nested_design(UNIT, n).points
        obs = ObservationSet.point_evaluations(design, np.cos(5.0 * design[:, 0]))
        assert interpolation_check(condition(prior, obs), 1e-6).passed


# =============================================================================
# Divergence heuristic
# =============================================================================


def records(mean_deltas, trace_deltas):
    return [
        LevelRecord(n=i + 2, posterior_trace=1.0, sup_mean_delta=m, trace_cov_delta=c)
        for i, (m, c) in enumerate(zip(mean_deltas, trace_deltas))
    ]


def test_divergence_needs_three_growing_deltas():
    assert not _is_diverging(records([1.0, 2.0], [1.0, 2.0]))
    assert _is_diverging(records([0.1, 0.2, 0.3], [0.3, 0.2, 0.1]))
    assert _is_diverging(records([0.3, 0.2, 0.1], [0.1, 0.2, 0.3]))
    assert not _is_diverging(records([0.3, 0.2, 0.1], [0.3, 0.2, 0.1]))
    assert not _is_diverging(records([0.1, 0.2, 0.2], [0.1, 0.1, 0.1]))
    assert _is_diverging(records([5.0, 0.1, 0.2, 0.3], [5.0, 4.0, 3.0, 2.0]))


# =============================================================================
# contraction_experiment
# =============================================================================


@pytest.fixture(scope="module")
def rbf_contraction():
    prior = GpPrior(UNIT, Kernel.rbf(0.2))
    grid = uniform_grid(UNIT, 257)
    start = time.perf_counter()
    report = contraction_experiment(prior, 31, SCHEDULE, grid)
    return prior, grid, report, time.perf_counter() - start


def test_contraction_of_the_mean(rbf_contraction):
    _, _, report, _ = rbf_contraction
    first, final = report.levels[0], report.final
    assert final.sup_mean_err_vs_truth <= 1e-2 * first.sup_mean_err_vs_truth


def test_contraction_of_the_covariance(rbf_contraction):
    prior, grid, report, _ = rbf_contraction
    traces = [level.posterior_trace for level in report.levels]
    assert all(b <= a + 1e-9 for a, b in zip(traces, traces[1:]))
    assert traces[-1] <= 1e-3 * np.trace(gram(prior.kernel, grid))


def test_contraction_of_characteristic_functionals(rbf_contraction):
    _, _, report, _ = rbf_contraction
    assert report.final.char_delta_max <= 1e-3
    for level in report.levels:
        assert all(abs(phi) <= 1.0 + 1e-15 for phi in level.char_values)


def test_contraction_records_the_truth_path(rbf_contraction):
    _, grid, report, _ = rbf_contraction
    assert report.truth_path.seed == 31
    assert report.truth_path.values.shape == (1, 257)
    np.testing.assert_array_equal(report.truth_path.grid, grid)


def test_contraction_runs_within_ten_seconds(rbf_contraction):
    _, _, _, elapsed = rbf_contraction
    assert elapsed < 10.0


def test_full_interpolation_of_the_truth_path():
    prior = GpPrior(UNIT, Kernel.matern32(0.3))
    fine_grid = np.arange(16.0) / 16.0
    report = contraction_experiment(prior, 4, [4, 8, 16], fine_grid)
    assert report.final.sup_mean_err_vs_truth <= 1e-6


def test_contraction_is_deterministic():
    prior = GpPrior(UNIT, Kernel.matern32(0.25))
    grid = uniform_grid(UNIT, 33)
    a = contraction_experiment(prior, 8, [3, 5, 9, 17], grid)
    b = contraction_experiment(prior, 8, [3, 5, 9, 17], grid)
    assert a.levels == b.levels
    np.testing.assert_array_equal(a.truth_path.values, b.truth_path.values)
    assert (a.converged, a.diverging) == (b.converged, b.diverging)
