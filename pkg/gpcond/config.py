"""
Experiment configuration.

A config file holds one `key = value` per line; `#` starts a comment and lists are
comma separated:

    command = refine
    kernel = rbf
    lengthscale = 0.2
    schedule = 3, 5, 9, 17, 33, 65

Every error names the offending key and, for files, the line it came from.
"""

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .conditioning import ObservationSet
from .exceptions import ConfigError, InvalidArgumentError
from .kernels import GpPrior, Kernel, MeanFunction, ObservationFunctional
from .models import (
    Command,
    ConvergenceTolerances,
    Domain,
    Eigensolver,
    KernelFamily,
    MeanKind,
    RefinementSchedule,
    bounds_from_flat,
)

OBSERVED_PATHS = ("prior_sample", "prior_mean", "sine")

DEFAULT_GRID_SIZE_1D = 257
DEFAULT_GRID_SIZE_2D = 17

Observation = Tuple[Tuple[float, ...], float]


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment description."""

    command: Command
    kernel: KernelFamily
    lengthscale: Optional[float] = None
    variance: float = 1.0
    mean: MeanKind = MeanKind.ZERO
    mean_value: float = 0.0
    domain: Tuple[Tuple[float, float], ...] = ((0.0, 1.0),)
    region: Optional[Tuple[Tuple[float, float], ...]] = None
    observations: Tuple[Observation, ...] = ()
    derivative_observations: Tuple[Observation, ...] = ()
    observation_file: Optional[str] = None
    observed_path: str = "prior_sample"
    schedule: Tuple[int, ...] = ()
    test_grid_size: Optional[int] = None
    noise_variance: float = 0.0
    pinv_tol: float = 1e-10
    eigensolver: Eigensolver = Eigensolver.JACOBI
    mean_tol: float = 1e-3
    cov_tol: float = 1e-3
    seed: int = 0
    sample_count: int = 1
    output_path: str = "."
    base_dir: str = "."
    lines: Dict[str, int] = field(default_factory=dict, compare=False)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """Copy with the non-None overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @property
    def grid_size(self) -> int:
        """Test grid points per axis: `test_grid_size` if set, else default_grid_size(d)."""
        if self.test_grid_size is not None:
            return self.test_grid_size
        return default_grid_size(len(self.domain))

    @property
    def has_observations(self) -> bool:
        return bool(
            self.observations or self.derivative_observations or self.observation_file
        )

    def build_domain(self) -> Domain:
        return Domain(self.domain)

    def build_region(self) -> Domain:
        return Domain(self.region) if self.region else self.build_domain()

    def build_kernel(self) -> Kernel:
        if self.kernel in (KernelFamily.BROWNIAN, KernelFamily.LINEAR):
            return Kernel(self.kernel, variance=self.variance)
        return Kernel(self.kernel, self.lengthscale, self.variance)

    def build_mean(self) -> MeanFunction:
        if self.mean == MeanKind.CONSTANT:
            return MeanFunction.constant(self.mean_value)
        return MeanFunction.zero()

    def build_prior(self) -> GpPrior:
        try:
            return GpPrior(self.build_domain(), self.build_kernel(), self.build_mean())
        except InvalidArgumentError as e:
            raise ConfigError(str(e), key="kernel", line=self.lines.get("kernel")) from e

    def build_tolerances(self) -> ConvergenceTolerances:
        return ConvergenceTolerances(self.mean_tol, self.cov_tol)

    def build_observations(self) -> ObservationSet:
        """Inline point and derivative observations, then the observation file."""
        functionals: List[ObservationFunctional] = []
        values: List[float] = []
        for point, y in self.observations:
            functionals.append(ObservationFunctional.point_eval(point))
            values.append(y)
        for point, y in self.derivative_observations:
            functionals.append(ObservationFunctional.deriv_eval(point))
            values.append(y)
        if self.observation_file:
            for point, y in self._read_observation_file():
                functionals.append(ObservationFunctional.point_eval(point))
                values.append(y)
        return ObservationSet(tuple(functionals), np.array(values), self.noise_variance)

    def _read_observation_file(self) -> List[Observation]:
        path = Path(self.base_dir) / self.observation_file
        line = self.lines.get("observation_file")
        try:
            table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except (OSError, ValueError) as e:
            raise ConfigError(
                f"cannot read observations from {path}: {e}",
                key="observation_file",
                line=line,
            ) from e
        dim = len(self.domain)
        if table.size and table.shape[1] != dim + 1:
            raise ConfigError(
                f"{path} needs {dim + 1} columns (coordinates then y), found {table.shape[1]}",
                key="observation_file",
                line=line,
            )
        return [(tuple(row[:-1]), float(row[-1])) for row in table]


# =============================================================================
# Value converters
# =============================================================================


def _text(value: Any) -> str:
    return str(value).strip()


def _float(value: Any) -> float:
    result = float(_text(value) if isinstance(value, str) else value)
    if not math.isfinite(result):
        raise ValueError(f"expected a finite number, got {value!r}")
    return result


def _int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f"expected an integer, got {value!r}")
    if isinstance(value, str):
        return int(_text(value))
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _split(value: Any) -> List[Any]:
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",")]
        if any(not p for p in parts):
            raise ValueError(f"empty entry in list {value!r}")
        return parts
    return list(value)


def _float_list(value: Any) -> Tuple[float, ...]:
    return tuple(_float(v) for v in _split(value))


def _int_list(value: Any) -> Tuple[int, ...]:
    return tuple(_int(v) for v in _split(value))


def _schedule(value: Any) -> Tuple[int, ...]:
    sizes = _int_list(value)
    try:
        return RefinementSchedule(sizes).sizes
    except InvalidArgumentError as e:
        raise ValueError(f"non-increasing schedule: {e}") from e


def _bounds(value: Any) -> Tuple[Tuple[float, float], ...]:
    try:
        return Domain(bounds_from_flat(_float_list(value))).bounds
    except InvalidArgumentError as e:
        raise ValueError(str(e)) from e


def _enum(enum_cls, label: str) -> Callable[[Any], Any]:
    def convert(value: Any):
        text = _text(value).lower()
        try:
            return enum_cls(text)
        except ValueError:
            choices = ", ".join(e.value for e in enum_cls)
            raise ValueError(f"unknown {label} '{text}' (expected one of: {choices})")

    return convert


def _observed_path(value: Any) -> str:
    text = _text(value).lower()
    if text not in OBSERVED_PATHS:
        raise ValueError(
            f"unknown observed path '{text}' (expected one of: {', '.join(OBSERVED_PATHS)})"
        )
    return text


def _observations(value: Any) -> Tuple[Observation, ...]:
    """`t:y` entries (coordinates space separated) or [point, y] pairs."""
    result = []
    for entry in _split(value):
        if isinstance(entry, str):
            if entry.count(":") != 1:
                raise ValueError(f"observation {entry!r} is not of the form t:y")
            coords, y = entry.split(":")
            point = tuple(_float(c) for c in coords.split())
            if not point:
                raise ValueError(f"observation {entry!r} has no coordinates")
            result.append((point, _float(y)))
        else:
            point, y = entry
            point = tuple(_float(c) for c in np.atleast_1d(point))
            result.append((point, _float(y)))
    return tuple(result)


CONVERTERS: Dict[str, Callable[[Any], Any]] = {
    "command": _enum(Command, "command"),
    "kernel": _enum(KernelFamily, "kernel"),
    "lengthscale": _float,
    "variance": _float,
    "mean": _enum(MeanKind, "mean"),
    "mean_value": _float,
    "domain": _bounds,
    "region": _bounds,
    "observations": _observations,
    "derivative_observations": _observations,
    "observation_file": _text,
    "observed_path": _observed_path,
    "schedule": _schedule,
    "test_grid_size": _int,
    "noise_variance": _float,
    "pinv_tol": _float,
    "eigensolver": _enum(Eigensolver, "eigensolver"),
    "mean_tol": _float,
    "cov_tol": _float,
    "seed": _int,
    "sample_count": _int,
    "output_path": _text,
}

REQUIRED_BY_COMMAND = {
    Command.CONDITION: (),
    Command.REFINE: ("schedule",),
    Command.CONTRACT: ("schedule",),
    Command.SAMPLE: (),
}


# =============================================================================
# Parsing
# =============================================================================


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    """Parse flat `key = value` config text."""
    raw: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"malformed line {content!r} (expected key = value)", line=lineno)
        key, value = (part.strip() for part in content.split("=", 1))
        if not key:
            raise ConfigError("missing key before '='", line=lineno)
        if key in raw:
            raise ConfigError(
                f"duplicate key (first set on line {lines[key]})", key=key, line=lineno
            )
        if not value:
            raise ConfigError("missing value", key=key, line=lineno)
        raw[key] = value
        lines[key] = lineno
    return config_from_mapping(raw, lines=lines, base_dir=base_dir)


def config_from_mapping(
    values: Mapping[str, Any],
    lines: Optional[Dict[str, int]] = None,
    base_dir: str = ".",
) -> ExperimentConfig:
    """Build a config from raw values (strings or already-typed values)."""
    lines = dict(lines or {})
    typed: Dict[str, Any] = {}
    for key, value in values.items():
        if key not in CONVERTERS:
            raise ConfigError("unknown key", key=key, line=lines.get(key))
        if value is None:
            continue
        try:
            typed[key] = CONVERTERS[key](value)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), key=key, line=lines.get(key)) from e

    for key in ("command", "kernel"):
        if key not in typed:
            raise ConfigError("missing required key", key=key)
    command = typed["command"]
    for key in REQUIRED_BY_COMMAND[command]:
        if key not in typed:
            raise ConfigError(f"missing required key for '{command.value}'", key=key)
    if typed["kernel"] not in (KernelFamily.BROWNIAN, KernelFamily.LINEAR):
        if "lengthscale" not in typed:
            raise ConfigError(
                f"missing required key for kernel '{typed['kernel'].value}'",
                key="lengthscale",
            )

    config = ExperimentConfig(**typed, base_dir=str(base_dir), lines=lines)
    _validate(config)
    return config


def _validate(config: ExperimentConfig) -> None:
    def fail(key: str, message: str):
        raise ConfigError(message, key=key, line=config.lines.get(key))

    if config.lengthscale is not None and config.lengthscale <= 0:
        fail("lengthscale", "must be > 0")
    for key in ("variance", "pinv_tol", "mean_tol", "cov_tol"):
        if getattr(config, key) <= 0:
            fail(key, "must be > 0")
    if config.noise_variance < 0:
        fail("noise_variance", "must be >= 0")
    if config.test_grid_size is not None and config.test_grid_size < 2:
        fail("test_grid_size", "must be >= 2")
    if config.seed < 0:
        fail("seed", "must be >= 0")
    if config.sample_count < 1:
        fail("sample_count", "must be >= 1")

    domain = config.build_domain()
    if config.region is not None and not domain.contains_domain(config.build_region()):
        fail("region", "observation region must lie within the domain")
    for key in ("observations", "derivative_observations"):
        for point, _ in getattr(config, key):
            if len(point) != domain.dimension:
                fail(key, f"point {point} does not have dimension {domain.dimension}")
    if config.derivative_observations and domain.dimension != 1:
        fail("derivative_observations", "derivative observations need a 1-D domain")
    if config.command == Command.CONDITION and not config.has_observations:
        fail("observations", "condition needs observations or an observation_file")


def default_grid_size(dimension: int) -> int:
    """257 points in 1-D, 17 per axis in 2-D, and about 17^2 points in total beyond that."""
    if dimension == 1:
        return DEFAULT_GRID_SIZE_1D
    return max(2, int(round(DEFAULT_GRID_SIZE_2D ** (2.0 / dimension))))
