"""
Pseudo-representations, the mean ratio and averaging iterates.
"""

from .iteration import ConvergenceTrace, TraceRecord, iterate_average, quadratic_bound
from .pseudorep import (DefectReport, InverseEstimateReport, NearRepReport, PseudoRep, check_rep_shapes,
                        defects, gate_threshold, gauge_rep, identity_rep, inverse_bound_report,
                        inverse_estimates, invert,
                        is_representation_over, local_defects, mean_ratio,
                        multiplicativity_identity_residual, near_representation_gate,
                        perturb_representation, restrict_rep, scalar_rep, sup_distance)

__all__ = [
    "ConvergenceTrace", "TraceRecord", "iterate_average", "quadratic_bound",
    "DefectReport", "InverseEstimateReport", "NearRepReport", "PseudoRep", "check_rep_shapes",
    "defects", "gate_threshold", "gauge_rep", "identity_rep", "inverse_bound_report",
    "inverse_estimates", "invert",
    "is_representation_over", "local_defects", "mean_ratio",
    "multiplicativity_identity_residual", "near_representation_gate",
    "perturb_representation", "restrict_rep", "scalar_rep", "sup_distance",
]
