"""
Artifact files and scenario loading.
"""

from .artifacts import ArtifactStore
from .scenario import Scenario, load_scenario, scenario_from_dict

__all__ = ["ArtifactStore", "Scenario", "load_scenario", "scenario_from_dict"]
