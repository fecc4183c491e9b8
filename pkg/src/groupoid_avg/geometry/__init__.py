"""
Invariant metrics by Haar averaging.
"""

from .invariant_metric import (InvariantMetricReport, average_metric, check_isometry,
                               check_support, search_near_metric)

__all__ = ["InvariantMetricReport", "average_metric", "check_isometry", "check_support",
           "search_near_metric"]
