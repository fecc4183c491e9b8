"""
Cochains, coboundaries and Haar contractions.
"""

from .cochains import (Cochain0, Cochain1, Cochain2, Cochain3, CocycleReport, CoefficientSystem,
                       DefectConsistencyReport, coboundary0, coboundary1, coboundary2,
                       cocycle_report, contract1, contract2, defect_cochain, defect_consistency,
                       is_cocycle, make_cochain0, make_cochain1, make_cochain2, random_cochain,
                       sup_norm)

__all__ = [
    "Cochain0", "Cochain1", "Cochain2", "Cochain3", "CocycleReport", "CoefficientSystem",
    "DefectConsistencyReport", "coboundary0", "coboundary1", "coboundary2", "cocycle_report",
    "contract1", "contract2", "defect_cochain", "defect_consistency", "is_cocycle",
    "make_cochain0", "make_cochain1", "make_cochain2", "random_cochain", "sup_norm",
]
