"""Mixin classes for ExperimentRunner."""

from .condition import ConditionMixin
from .refine import RefinementMixin
from .sample import SamplingMixin
from .export import ExportMixin

__all__ = [
    "ConditionMixin",
    "RefinementMixin",
    "SamplingMixin",
    "ExportMixin",
]
