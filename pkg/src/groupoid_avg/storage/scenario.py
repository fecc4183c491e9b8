"""
Scenario files: one JSON document naming a groupoid, a bundle with its
metric, a Haar system, a cut-off function, a pseudo-representation and run
parameters. References to other files are resolved relative to the scenario.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..errors import ScenarioError
from ..groupoid.core import FiniteGroupoid
from ..groupoid.generators import (gen_action_groupoid, gen_group_bundle, gen_pair_groupoid,
                                   parse_group_spec, rotation_action, trivial_action)
from ..groupoid.haar import (NORMALIZATION_TOL, CutoffFunction, HaarSystem, NormalizingFunction,
                             counting_haar, normalize_cutoff)
from ..linalg.fiber import FiberMetric, VectorBundle
from ..reps.pseudorep import PseudoRep, gauge_rep, identity_rep, perturb_representation
from .artifacts import ArtifactStore, bundle_from_dict, metric_from_dict, rep_from_dict

logger = logging.getLogger(__name__)


@dataclass
class Scenario:
    groupoid: FiniteGroupoid
    bundle: VectorBundle
    metric: FiberMetric
    haar: HaarSystem
    cutoff: CutoffFunction
    rep: Optional[PseudoRep]
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    subset: Optional[List[int]] = None
    coefficients: Dict[str, Any] = field(default_factory=lambda: {"kind": "trivial", "dim": 1})
    source: Optional[str] = None
    base_rep: Optional[PseudoRep] = None

    def normalizing(self, tol: float = NORMALIZATION_TOL) -> NormalizingFunction:
        """
        The cut-off divided by its fiber sums.

        Raises PreconditionError when the Haar system is not left invariant and
        StarvedOrbitError on a dead orbit.
        """
        return normalize_cutoff(self.groupoid, self.haar, self.cutoff, tol=tol)


def build_groupoid(spec: Dict[str, Any], base_dir: Path) -> FiniteGroupoid:
    """Inline groupoid JSON, {"file": ...} or {"generator": "pair" | "action" | "bundle", ...}."""
    if "file" in spec:
        return ArtifactStore().load_groupoid(base_dir / spec["file"])
    kind = spec.get("generator")
    if kind is None:
        return FiniteGroupoid.from_dict(spec)
    if kind == "pair":
        return gen_pair_groupoid(int(spec["n"]))
    if kind == "action":
        group = parse_group_spec(spec["group"])
        action = spec.get("action", "rotation")
        if action == "rotation":
            table = rotation_action(group.order)
        elif action == "trivial":
            table = trivial_action(group, int(spec.get("points", 1)))
        else:
            table = np.asarray(action, dtype=np.int64)
        return gen_action_groupoid(group, table)
    if kind == "bundle":
        groups = spec["groups"]
        if isinstance(groups, str):
            groups = groups.split(",")
        return gen_group_bundle([parse_group_spec(s) for s in groups])
    raise ScenarioError(f"Unknown groupoid generator '{kind}'")


def build_haar(spec: Dict[str, Any], groupoid: FiniteGroupoid) -> HaarSystem:
    kind = spec.get("kind", "counting")
    if kind == "counting":
        return counting_haar(groupoid)
    if kind == "weights":
        return HaarSystem(np.asarray(spec["values"], dtype=float))
    raise ScenarioError(f"Unknown haar kind '{kind}'")


def build_rep(spec: Dict[str, Any], groupoid: FiniteGroupoid, bundle: VectorBundle,
              base_dir: Path, seed: Optional[int] = None) -> Tuple[PseudoRep, Optional[PseudoRep]]:
    """
    The pseudo-representation and, for generated ones, the representation it perturbs.

    Generator form: {"generator": {"base_rep": "identity" | "gauge", "magnitude": m,
    "seed": s, "keep_units": false, "gauge_seed": s0}}. A non-None ``seed``
    replaces the perturbation seed of the file.
    """
    if "file" in spec:
        return ArtifactStore().load_rep(base_dir / spec["file"], groupoid, bundle), None
    if "generator" in spec:
        gen = spec["generator"]
        base_kind = gen.get("base_rep", "identity")
        if base_kind == "identity":
            base = identity_rep(groupoid, bundle)
        elif base_kind == "gauge":
            base = gauge_rep(groupoid, bundle, seed=int(gen.get("gauge_seed", 0)))
        else:
            raise ScenarioError(f"Unknown base representation '{base_kind}'")
        if seed is None:
            seed = int(gen.get("seed", 0))
        lam = perturb_representation(base, float(gen.get("magnitude", 0.0)), seed,
                                     keep_units=bool(gen.get("keep_units", False)))
        return lam, base
    return rep_from_dict(spec, groupoid, bundle), None


def scenario_from_dict(data: Dict[str, Any], base_dir: Path = Path("."),
                       source: Optional[str] = None, seed: Optional[int] = None) -> Scenario:
    """Resolve every section of a parsed scenario document; ``seed`` overrides rep.generator.seed."""
    try:
        groupoid = build_groupoid(data["groupoid"], base_dir)
        bundle = bundle_from_dict(data["bundle"]) if "bundle" in data else \
            VectorBundle.constant(groupoid.n_objects, 1)
        bundle.check_orbit_constant(groupoid)
        metric = metric_from_dict(data.get("metric", {"kind": "euclidean"}), bundle)
        haar = build_haar(data.get("haar", {"kind": "counting"}), groupoid)
        cutoff = CutoffFunction(np.asarray(data.get("cutoff", [1.0] * groupoid.n_objects), dtype=float))
        rep, base = build_rep(data["rep"], groupoid, bundle, base_dir, seed) if "rep" in data else (None, None)
        run = data.get("run", {})
        subset = run.get("subset")
    except KeyError as e:
        raise ScenarioError(f"missing key {e}", path=source)
    except TypeError as e:
        raise ScenarioError(str(e), path=source)
    return Scenario(
        groupoid=groupoid, bundle=bundle, metric=metric, haar=haar, cutoff=cutoff, rep=rep,
        tol=run.get("tol"), max_iter=run.get("max_iter"),
        subset=[int(x) for x in subset] if subset is not None else None,
        coefficients=data.get("coefficients", {"kind": "trivial", "dim": 1}),
        source=source, base_rep=base,
    )


def load_scenario(path: str, seed: Optional[int] = None) -> Scenario:
    """Read and resolve a scenario file; parse errors carry the file and line."""
    p = Path(path)
    data = ArtifactStore.read_json(p)
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object", path=str(p), line=1)
    scenario = scenario_from_dict(data, base_dir=p.parent, source=str(p), seed=seed)
    logger.info("Loaded scenario %s: %d objects, %d arrows", p, scenario.groupoid.n_objects,
                scenario.groupoid.n_arrows)
    return scenario
