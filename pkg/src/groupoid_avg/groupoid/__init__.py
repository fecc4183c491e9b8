"""
Finite groupoids, their generators and Haar systems.
"""

from .core import (FiberKind, FiberSlice, FiniteGroupoid, OrbitPartition, Restriction,
                   ValidationReport, Violation, arrows_over, check_left_translation,
                   composable_pairs, composable_triples, fiber, is_invariant, orbits,
                   restrict, restrict_with_maps, saturation, validate)
from .generators import (FiniteGroup, cyclic_group, gen_action_groupoid, gen_group_bundle,
                         gen_pair_groupoid, group_from_table, parse_group_spec,
                         rotation_action, symmetric_group, trivial_action)
from .haar import (CutoffFunction, HaarSystem, NormalizingFunction, check_left_invariance,
                   check_normalizing, counting_haar, haar_integrate, normalize_cutoff,
                   require_left_invariance)

__all__ = [
    "FiberKind", "FiberSlice", "FiniteGroupoid", "OrbitPartition", "Restriction",
    "ValidationReport", "Violation", "arrows_over", "check_left_translation",
    "composable_pairs", "composable_triples", "fiber", "is_invariant", "orbits",
    "restrict", "restrict_with_maps", "saturation", "validate",
    "FiniteGroup", "cyclic_group", "gen_action_groupoid", "gen_group_bundle",
    "gen_pair_groupoid", "group_from_table", "parse_group_spec", "rotation_action",
    "symmetric_group", "trivial_action",
    "CutoffFunction", "HaarSystem", "NormalizingFunction", "check_left_invariance",
    "check_normalizing", "counting_haar", "haar_integrate", "normalize_cutoff",
    "require_left_invariance",
]
