"""
gpcond MCP Server (FastMCP)

2 action-based tools exposing Gaussian process conditioning, refinement and sampling.
All responses are JSON. Serves over stdio.

Environment Variables:
    GPCOND_EIGENSOLVER (optional): "jacobi" (default) or "lapack"
"""

import json
import logging
import os
import sys
from typing import List, Optional

from fastmcp import FastMCP

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from gpcond import ExperimentRunner, config_from_mapping, interpolation_check, uniform_grid
from gpcond.exceptions import (
    ConfigError,
    GpcondError,
    InvalidArgumentError,
    InvalidUsageError,
    NotPsdError,
    NotSpdError,
    NumericalFailureError,
    UnsupportedFunctionalError,
)

LOGGER = logging.getLogger(__name__)

# =============================================================================
# Configuration
# =============================================================================

EIGENSOLVER = os.environ.get("GPCOND_EIGENSOLVER", "jacobi")

INSTRUCTIONS = """
## What is gpcond?

Exact Gaussian process conditioning. A prior (kernel + mean on a box domain) is
conditioned on point observations; noise-free data uses the Moore-Penrose pseudoinverse,
noisy data (noise_variance > 0) a Cholesky solve.

- **gp_posterior**: condition / interpolation_check / sample on a uniform test grid.
- **gp_refinement**: condition on nested Halton designs of a region and report how the
  posterior mean and covariance change per level (refine), or observe a sampled prior
  path on the whole domain (contract).

Kernels: brownian, rbf, matern12, matern32, matern52, linear. rbf/matern need lengthscale.
Domains and regions are flat lists of lower,upper pairs, e.g. [0, 1].
Observations are rows [t1, ..., td, y].

## Response Format

`{"ok": true, ...}` or `{"error": {"code": "...", "message": "..."}}`
"""

mcp = FastMCP(name="gpcond", instructions=INSTRUCTIONS)

# =============================================================================
# JSON Response Helpers
# =============================================================================


def ok(**kw) -> str:
    """Success response."""
    return json.dumps({"ok": True, **kw})


def err(code: str, **kw) -> str:
    """Error response."""
    return json.dumps({"error": {"code": code, **kw}})


ERROR_CODES = [
    (ConfigError, "CONFIG"),
    (InvalidArgumentError, "INVALID_ARGUMENT"),
    (NotPsdError, "NOT_PSD"),
    (NotSpdError, "NOT_SPD"),
    (NumericalFailureError, "NUMERICAL_FAILURE"),
    (UnsupportedFunctionalError, "UNSUPPORTED_FUNCTIONAL"),
    (InvalidUsageError, "INVALID_USAGE"),
]


def handle_error(e: Exception) -> str:
    """Convert exception to error response."""
    for cls, code in ERROR_CODES:
        if isinstance(e, cls):
            extra = {}
            if isinstance(e, ConfigError) and e.key:
                extra["key"] = e.key
            return err(code, message=str(e), **extra)
    if isinstance(e, GpcondError):
        return err("GPCOND", message=str(e))
    if isinstance(e, ValueError):
        return err("INVALID_ARGUMENT", message=str(e))
    LOGGER.exception("unexpected tool failure")
    return err("UNKNOWN", message=str(e))


def to_observation_pairs(rows: Optional[List[List[float]]]):
    """[t1, ..., td, y] rows -> ([t1, ..., td], y) pairs."""
    if not rows:
        return None
    pairs = []
    for row in rows:
        if len(row) < 2:
            raise InvalidArgumentError(f"observation row {row} needs coordinates and a value")
        pairs.append((list(row[:-1]), row[-1]))
    return pairs


COMMAND_BY_ACTION = {
    "condition": "condition",
    "interpolation_check": "condition",
    "sample": "sample",
}


def build_config(command: str, **values):
    return config_from_mapping(
        {"command": command, "eigensolver": EIGENSOLVER, **values}
    )


# =============================================================================
# Tool logic
# =============================================================================


def posterior_tool(
    action: str,
    kernel: str = "rbf",
    lengthscale: Optional[float] = None,
    variance: float = 1.0,
    mean: str = "zero",
    mean_value: float = 0.0,
    domain: Optional[List[float]] = None,
    observations: Optional[List[List[float]]] = None,
    noise_variance: float = 0.0,
    grid_size: int = 33,
    sample_count: int = 1,
    seed: int = 0,
    pinv_tol: float = 1e-10,
    tol: float = 1e-6,
) -> str:
    try:
        if action not in COMMAND_BY_ACTION:
            return err("INVALID_ARGUMENT", message=f"Unknown action: {action}")
        config = build_config(
            COMMAND_BY_ACTION[action],
            kernel=kernel,
            lengthscale=lengthscale,
            variance=variance,
            mean=mean,
            mean_value=mean_value,
            domain=domain or [0.0, 1.0],
            observations=to_observation_pairs(observations),
            noise_variance=noise_variance,
            test_grid_size=grid_size,
            sample_count=sample_count,
            seed=seed,
            pinv_tol=pinv_tol,
        )
        runner = ExperimentRunner.from_config(config)
        prior = config.build_prior()
        grid = uniform_grid(prior.domain, config.grid_size)

        if action == "condition":
            result = runner.condition_workflow(prior, config.build_observations(), grid)
            return ok(**runner.condition_to_dict(result))

        if action == "interpolation_check":
            post = runner._condition(prior, config.build_observations())
            report = interpolation_check(post, tol)
            return ok(
                max_mean_error=report.max_mean_error,
                max_variance=report.max_variance,
                passed=report.passed,
            )

        process = prior
        if config.has_observations:
            process = runner._condition(prior, config.build_observations())
        sample = runner.sample_workflow(process, grid, config.sample_count)
        return ok(**runner.paths_to_dict(sample))
    except Exception as e:
        return handle_error(e)


def refinement_tool(
    action: str,
    schedule: List[int],
    kernel: str = "rbf",
    lengthscale: Optional[float] = None,
    variance: float = 1.0,
    domain: Optional[List[float]] = None,
    region: Optional[List[float]] = None,
    observed_path: str = "prior_sample",
    noise_variance: float = 0.0,
    grid_size: int = 65,
    mean_tol: float = 1e-3,
    cov_tol: float = 1e-3,
    seed: int = 0,
    pinv_tol: float = 1e-10,
) -> str:
    try:
        if action not in ("refine", "contract"):
            return err("INVALID_ARGUMENT", message=f"Unknown action: {action}")
        config = build_config(
            action,
            schedule=schedule,
            kernel=kernel,
            lengthscale=lengthscale,
            variance=variance,
            domain=domain or [0.0, 1.0],
            region=region,
            observed_path=observed_path,
            noise_variance=noise_variance,
            test_grid_size=grid_size,
            mean_tol=mean_tol,
            cov_tol=cov_tol,
            seed=seed,
            pinv_tol=pinv_tol,
        )
        runner = ExperimentRunner.from_config(config)
        prior = config.build_prior()
        grid = uniform_grid(prior.domain, config.grid_size)
        tolerances = config.build_tolerances()
        if action == "refine":
            report = runner.refine_workflow(
                prior,
                config.build_region(),
                runner.observed_path(config.observed_path, prior, grid),
                config.schedule,
                grid,
                noise_variance=config.noise_variance,
                tolerances=tolerances,
                snap_grid=runner._refine_snap_grid(config, prior.domain, grid),
            )
        else:
            report = runner.contract_workflow(prior, config.schedule, grid, tolerances)
        return ok(**runner.report_to_dict(report))
    except Exception as e:
        return handle_error(e)


# =============================================================================
# Tools
# =============================================================================


@mcp.tool
def gp_posterior(
    action: str,
    kernel: str = "rbf",
    lengthscale: Optional[float] = None,
    variance: float = 1.0,
    mean: str = "zero",
    mean_value: float = 0.0,
    domain: Optional[List[float]] = None,
    observations: Optional[List[List[float]]] = None,
    noise_variance: float = 0.0,
    grid_size: int = 33,
    sample_count: int = 1,
    seed: int = 0,
    pinv_tol: float = 1e-10,
    tol: float = 1e-6,
) -> str:
    """
    Condition a GP prior on point observations.

    Actions:
    - condition: Posterior mean and variance on a grid_size uniform grid (per axis).
    - interpolation_check: Largest |mean - y| and posterior variance at the observed
      points. Needs noise_variance = 0.
    - sample: sample_count paths of the posterior (or the prior without observations),
      reproducible from seed.
    """
    return posterior_tool(
        action,
        kernel=kernel,
        lengthscale=lengthscale,
        variance=variance,
        mean=mean,
        mean_value=mean_value,
        domain=domain,
        observations=observations,
        noise_variance=noise_variance,
        grid_size=grid_size,
        sample_count=sample_count,
        seed=seed,
        pinv_tol=pinv_tol,
        tol=tol,
    )


@mcp.tool
def gp_refinement(
    action: str,
    schedule: List[int],
    kernel: str = "rbf",
    lengthscale: Optional[float] = None,
    variance: float = 1.0,
    domain: Optional[List[float]] = None,
    region: Optional[List[float]] = None,
    observed_path: str = "prior_sample",
    noise_variance: float = 0.0,
    grid_size: int = 65,
    mean_tol: float = 1e-3,
    cov_tol: float = 1e-3,
    seed: int = 0,
    pinv_tol: float = 1e-10,
) -> str:
    """
    Nested refinement diagnostics.

    Actions:
    - refine: Observe observed_path (prior_sample/prior_mean/sine) on nested designs of
      region of the sizes in schedule. Returns per-level deltas and converged/diverging.
    - contract: Observe one sampled prior path (seed) on the whole domain and report the
      sup error of the posterior mean against it per level.
    """
    return refinement_tool(
        action,
        schedule,
        kernel=kernel,
        lengthscale=lengthscale,
        variance=variance,
        domain=domain,
        region=region,
        observed_path=observed_path,
        noise_variance=noise_variance,
        grid_size=grid_size,
        mean_tol=mean_tol,
        cov_tol=cov_tol,
        seed=seed,
        pinv_tol=pinv_tol,
    )


def main():
    mcp.run()


if __name__ == "__main__":
    main()
