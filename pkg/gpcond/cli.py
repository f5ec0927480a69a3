"""
Command-line entry point.

    gpcond <config-path> [--pinv-tol X] [--seed N] [--out DIR] [-v]

Flags override the matching config keys. Diagnostics go to stderr; results go to
report.csv (and paths.csv for sample/contract) under the output directory.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import ExperimentConfig, parse_config
from .exceptions import ConfigError, GpcondError
from .runner import EXIT_ERROR, ExperimentRunner

LOGGER = logging.getLogger(__name__)


def run(config: ExperimentConfig) -> int:
    """Execute `config`, mapping library and I/O errors to exit status 1."""
    try:
        runner = ExperimentRunner.from_config(config)
        return runner.execute(config)
    except GpcondError as e:
        LOGGER.error("%s failed: %s", config.command.value, e)
    except OSError as e:
        LOGGER.error("%s failed writing output: %s", config.command.value, e)
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpcond",
        description="Condition Gaussian process priors on observations and track refinement.",
    )
    parser.add_argument("config", help="experiment config file (key = value lines)")
    parser.add_argument("--pinv-tol", type=float, help="override pinv_tol")
    parser.add_argument("--seed", type=int, help="override seed")
    parser.add_argument("--out", help="override output_path")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    path = Path(args.config)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        LOGGER.error("cannot read config %s: %s", path, e)
        return EXIT_ERROR

    try:
        config = parse_config(text, base_dir=str(path.parent))
        config = config.with_overrides(
            pinv_tol=args.pinv_tol, seed=args.seed, output_path=args.out
        )
        if config.pinv_tol <= 0:
            raise ConfigError("must be > 0", key="pinv_tol")
        if config.seed < 0:
            raise ConfigError("must be >= 0", key="seed")
    except ConfigError as e:
        LOGGER.error("%s: %s", path, e)
        return EXIT_ERROR

    return run(config)


if __name__ == "__main__":
    sys.exit(main())
