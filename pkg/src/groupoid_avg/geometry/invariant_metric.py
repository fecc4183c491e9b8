"""
Invariant fiber metrics by Haar averaging.

Averaging an arbitrary metric over the target fibers, transported back by the
maps of the inverse arrows, yields a metric for which a representation over S
acts isometrically between fibers over S.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
import scipy.linalg

from ..errors import MetricError, PreconditionError
from ..groupoid.core import arrows_over, saturation
from ..groupoid.haar import CutoffFunction, HaarSystem, haar_integrate
from ..linalg.fiber import FiberMetric
from ..reps.pseudorep import NearRepReport, PseudoRep, near_representation_gate

logger = logging.getLogger(__name__)

EIG_FLOOR = 1e-8
MAX_BLEND_EXPONENT = 60


@dataclass
class InvariantMetricReport:
    metric: FiberMetric
    invariance_defect: float
    min_eigenvalues: List[float]
    subset: Tuple[int, ...]
    tau: float = 0.0
    certified_on: Tuple[int, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "invariance_defect": self.invariance_defect,
            "min_eigenvalues": self.min_eigenvalues,
            "tau": self.tau,
            "subset": list(self.subset),
            "certified_on": list(self.certified_on),
        }


def _min_eig(m: np.ndarray) -> float:
    return float(scipy.linalg.eigh(m, eigvals_only=True)[0]) if len(m) else float("inf")


def check_support(lam: PseudoRep, c: CutoffFunction, subset: Iterable[int]) -> None:
    """Raise PreconditionError unless supp(c) meets saturation(S) only inside S."""
    objs = sorted(set(int(x) for x in subset))
    outside = [x for x in saturation(lam.groupoid, objs) if c.values[x] > 0 and x not in objs]
    if outside:
        raise PreconditionError(f"Cut-off is positive at object {outside[0]}, which lies in the "
                                f"saturation of S but not in S")


def _invariance_defect(lam: PseudoRep, gram: List[np.ndarray], objects: Iterable[int]) -> float:
    g = lam.groupoid
    worst = 0.0
    for a in arrows_over(g, objects):
        x, y = int(g.source[a]), int(g.target[a])
        diff = lam[a].T @ gram[y] @ lam[a] - gram[x]
        if diff.size:
            worst = max(worst, float(np.abs(diff).max()))
    return worst


def average_metric(metric: FiberMetric, lam: PseudoRep, mu: HaarSystem, c: CutoffFunction,
                   subset: Optional[Iterable[int]] = None, certify: bool = True,
                   certify_saturation: bool = False, eig_floor: float = EIG_FLOOR,
                   max_parallel: int = 1) -> InvariantMetricReport:
    """
    Average ``metric`` into one that ``lam`` preserves over ``subset``.

    Gram_hat(x) = sum over h with t(h) = x of c(s h) weight(h) lam_{h^-1}^T Gram(s h) lam_{h^-1},
    symmetrized after summation. Objects outside S whose averaged Gram matrix
    falls below ``eig_floor`` are blended with the input metric, Gram_hat + tau Gram,
    with the smallest tau in {0, 2^-k} restoring the floor.

    Args:
        metric: starting fiber metric
        lam: pseudo-representation, a representation over S for the invariance claim
        mu: left-invariant Haar system
        c: normalizing function
        subset: object set S (all objects if None)
        certify: check the support condition on c
        certify_saturation: require positivity on saturation(S) instead of S
        eig_floor: smallest eigenvalue accepted off S

    Returns:
        The averaged metric with its invariance defect over the restriction to S.

    Raises:
        PreconditionError: support condition fails
        MetricError: the averaged Gram matrix is not positive definite at an
                     object where positivity is certified
    """
    g = lam.groupoid
    objs = tuple(range(g.n_objects)) if subset is None else tuple(sorted(set(int(x) for x in subset)))
    if certify:
        check_support(lam, c, objs)

    def integrand(x: int, h: int) -> np.ndarray:
        back = lam[int(g.inverse[h])]
        return back.T @ metric.gram[int(g.source[h])] @ back

    sums = haar_integrate(g, mu, c, integrand, list(range(g.n_objects)), base_map=lambda x: x,
                          max_parallel=max_parallel)
    gram = [0.5 * (m + m.T) for m in sums]

    certified_on = tuple(saturation(g, objs)) if certify_saturation else objs
    for x in certified_on:
        if _min_eig(gram[x]) <= 0:
            raise MetricError(f"Averaged metric is not positive definite at object {x}", obj=x)

    off = [x for x in range(g.n_objects) if x not in set(certified_on)]
    tau = _blend_weight([gram[x] for x in off], [metric.gram[x] for x in off], eig_floor)
    if tau > 0:
        logger.warning("Blending averaged metric off S with tau = %g", tau)
        for x in off:
            gram[x] = gram[x] + tau * metric.gram[x]

    result = FiberMetric(gram)
    return InvariantMetricReport(
        metric=result,
        invariance_defect=_invariance_defect(lam, result.gram, objs),
        min_eigenvalues=[_min_eig(m) for m in result.gram],
        subset=objs,
        tau=tau,
        certified_on=certified_on,
    )


def _blend_weight(averaged: List[np.ndarray], base: List[np.ndarray], floor: float) -> float:
    """Smallest tau in {0} u {2^-k} with min eig(averaged + tau base) >= floor everywhere."""
    def ok(tau: float) -> bool:
        return all(_min_eig(a + tau * b) >= floor for a, b in zip(averaged, base))

    if ok(0.0):
        return 0.0
    for k in range(MAX_BLEND_EXPONENT, -MAX_BLEND_EXPONENT - 1, -1):
        tau = 2.0 ** -k
        if ok(tau):
            return tau
    raise MetricError("No blend weight restores the eigenvalue floor off S")


def check_isometry(lam: PseudoRep, metric: FiberMetric, subset: Iterable[int], tol: float = 1e-11) -> bool:
    """True iff |lam_g^T Gram(t g) lam_g - Gram(s g)|_2 <= tol on every arrow over S."""
    g = lam.groupoid
    for a in arrows_over(g, subset):
        x, y = int(g.source[a]), int(g.target[a])
        diff = lam[a].T @ metric.gram[y] @ lam[a] - metric.gram[x]
        if diff.size and scipy.linalg.norm(diff, 2) > tol:
            return False
    return True


def search_near_metric(lam: PseudoRep, mu: HaarSystem, c: CutoffFunction,
                       metric: Optional[FiberMetric] = None) -> Tuple[FiberMetric, NearRepReport, str]:
    """
    Try the given metric, the Euclidean metric and the orbit-averaged
    Euclidean metric in turn; return the first that passes the gate.

    Falls back to the first candidate's report when none passes.
    """
    euclid = FiberMetric.euclidean(lam.bundle)
    candidates = [("given", metric)] if metric is not None else []
    candidates.append(("euclidean", euclid))
    try:
        averaged = average_metric(euclid, lam, mu, c, certify=False).metric
        candidates.append(("orbit_averaged", averaged))
    except MetricError as exc:
        logger.debug("Orbit-averaged metric unavailable: %s", exc)

    first = None
    for label, candidate in candidates:
        report = near_representation_gate(lam, candidate)
        logger.debug("metric %s: r=%.6g threshold=%.6g", label, report.r, report.threshold)
        if report.is_near:
            return candidate, report, label
        if first is None:
            first = (candidate, report, label)
    return first
