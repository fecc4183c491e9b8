"""
Fiberwise linear algebra: bundles, metrics, operator norms.
"""

from .fiber import (FiberMap, FiberMetric, NeumannReport, SubmultiplicativityReport,
                    VectorBundle, neumann_inverse_bound, operator_norm, safe_inverse,
                    submultiplicativity_check)

__all__ = [
    "FiberMap", "FiberMetric", "NeumannReport", "SubmultiplicativityReport", "VectorBundle",
    "neumann_inverse_bound", "operator_norm", "safe_inverse", "submultiplicativity_check",
]
