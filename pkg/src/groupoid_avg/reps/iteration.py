"""
Averaging iterates: repeated mean ratios with a recorded convergence trace.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ..errors import GateRefusedError, SingularMapError
from ..groupoid.haar import CutoffFunction, HaarSystem
from ..linalg.fiber import COND_LIMIT, FiberMetric
from .pseudorep import (NearRepReport, PseudoRep, defects, gate_threshold, mean_ratio,
                        sup_distance)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 60
DIVERGENCE_STREAK = 3


@dataclass
class TraceRecord:
    """
    One averaging iterate. ``step`` and ``quad_slack`` compare it with the next
    iterate and are None on the last record.
    """
    i: int
    b: float
    r: float
    step: Optional[float] = None
    quad_slack: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"i": self.i, "b": self.b, "r": self.r, "step": self.step, "quad_slack": self.quad_slack}


@dataclass
class ConvergenceTrace:
    records: List[TraceRecord] = field(default_factory=list)
    epsilon: float = 0.0
    b0: float = 0.0
    r0: float = 0.0
    certified: bool = True
    terminated_reason: str = "max_iter"

    @property
    def iterations(self) -> int:
        """Number of mean ratios taken."""
        return max(0, len(self.records) - 1)

    def summary(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "b0": self.b0,
            "r0": self.r0,
            "iterations": self.iterations,
            "reason": self.terminated_reason,
            "certified": self.certified,
        }


def quadratic_bound(b: float, r: float) -> float:
    """2 (b / (1 - r))^2 r^2, the one-step bound on the next r."""
    return 2.0 * (b / (1.0 - r)) ** 2 * r * r


def _rising(records: List[TraceRecord], streak: int) -> bool:
    if len(records) <= streak:
        return False
    tail = [rec.r for rec in records[-(streak + 1):]]
    return all(later > earlier for earlier, later in zip(tail, tail[1:]))


def iterate_average(lam: PseudoRep, mu: HaarSystem, c: CutoffFunction,
                    metric: Optional[FiberMetric] = None, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER, force: bool = False,
                    max_parallel: int = 1, cond_limit: float = COND_LIMIT) -> Tuple[PseudoRep, ConvergenceTrace]:
    """
    Take mean ratios until r_i <= tol or max_iter steps have been taken.

    Args:
        lam: starting pseudo-representation
        mu: left-invariant Haar system
        c: normalizing function
        metric: fiber metric for b, r and step sizes (Euclidean if None)
        tol: stopping threshold on r_i
        max_iter: maximal number of mean ratios
        force: run even when the near-representation gate fails; the trace is
               then marked uncertified
        max_parallel: worker threads for the per-arrow fiber sums
        cond_limit: condition number above which an iterate counts as singular

    Returns:
        The last iterate and its trace.

    Raises:
        GateRefusedError: the gate fails and ``force`` is False.
    """
    metric = metric if metric is not None else FiberMetric.euclidean(lam.bundle)
    d = defects(lam, metric)
    threshold = gate_threshold(d.b)
    gate = NearRepReport(b=d.b, r=d.r, threshold=threshold, is_near=d.r <= threshold)
    if not gate.is_near:
        if not force:
            raise GateRefusedError(
                f"Not a near representation: r = {d.r:.6g} > threshold {threshold:.6g}", report=gate)
        logger.warning("Gate failed (r = %.6g > %.6g); iterating without certificates", d.r, threshold)

    trace = ConvergenceTrace(epsilon=6.0 * d.b ** 2 * d.r, b0=d.b, r0=d.r, certified=gate.is_near)
    current = lam
    record = TraceRecord(i=0, b=d.b, r=d.r)
    trace.records.append(record)
    logger.info("Averaging: b0=%.6g r0=%.6g epsilon=%.6g", d.b, d.r, trace.epsilon)

    while True:
        if record.r <= tol:
            trace.terminated_reason = "converged"
            break
        if record.i >= max_iter:
            trace.terminated_reason = "max_iter"
            break
        if not gate.is_near and (not math.isfinite(record.r) or _rising(trace.records, DIVERGENCE_STREAK)):
            trace.terminated_reason = "diverged"
            break
        try:
            nxt = mean_ratio(current, mu, c, max_parallel=max_parallel, cond_limit=cond_limit)
        except SingularMapError:
            if gate.is_near:
                raise
            logger.warning("Iterate %d became singular; stopping", record.i)
            trace.terminated_reason = "diverged"
            break
        dn = defects(nxt, metric)
        record.step = sup_distance(nxt, current, metric)
        if record.r < 1:
            record.quad_slack = quadratic_bound(record.b, record.r) - dn.r
        logger.debug("iterate %d: b=%.6g r=%.6g step=%.6g", record.i + 1, dn.b, dn.r, record.step)
        current = nxt
        record = TraceRecord(i=record.i + 1, b=dn.b, r=dn.r)
        trace.records.append(record)

    logger.info("Averaging stopped after %d iterations: %s (r=%.3e)",
                trace.iterations, trace.terminated_reason, record.r)
    return current, trace
