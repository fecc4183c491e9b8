"""
Pseudo-representations of finite groupoids on vector bundles.

A pseudo-representation assigns to each arrow g a linear map
lambda_g: E_{s g} -> E_{t g} with no multiplicativity required. This module
measures how far such an assignment is from a representation (the defects
b and r), decides the near-representation gate, and computes the mean ratio
averaging operator.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from ..errors import PreconditionError, ShapeError
from ..groupoid.core import FiniteGroupoid, ValidationReport, arrows_over, restrict_with_maps
from ..groupoid.haar import CutoffFunction, HaarSystem, haar_integrate
from ..linalg.fiber import COND_LIMIT, FiberMetric, VectorBundle, safe_inverse

logger = logging.getLogger(__name__)

REPRESENTATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PseudoRep:
    """One matrix per arrow; maps[g] has shape dim(t g) x dim(s g)."""
    groupoid: FiniteGroupoid
    bundle: VectorBundle
    maps: Tuple[np.ndarray, ...]

    def __post_init__(self):
        g = self.groupoid
        if len(self.bundle.dims) != g.n_objects:
            raise ShapeError(f"Bundle has {len(self.bundle.dims)} fibers for {g.n_objects} objects")
        if len(self.maps) != g.n_arrows:
            raise ShapeError(f"Got {len(self.maps)} maps for {g.n_arrows} arrows")
        frozen = []
        for a, raw in enumerate(self.maps):
            m = np.array(raw, dtype=float)
            expected = (self.bundle.dims[g.target[a]], self.bundle.dims[g.source[a]])
            if m.size == 0:
                m = np.zeros(expected)
            if m.shape != expected:
                raise ShapeError(f"Map at arrow {a} has shape {m.shape}, expected {expected}",
                                 witness=(a,))
            m.setflags(write=False)
            frozen.append(m)
        object.__setattr__(self, "maps", tuple(frozen))

    def __getitem__(self, a: int) -> np.ndarray:
        return self.maps[a]

    def replace_maps(self, maps: Sequence[np.ndarray]) -> "PseudoRep":
        return PseudoRep(self.groupoid, self.bundle, tuple(maps))


def check_rep_shapes(lam: PseudoRep) -> ValidationReport:
    """Every map has shape dim(t g) x dim(s g) and finite entries."""
    g = lam.groupoid
    report = ValidationReport("rep_shapes")
    for a, m in enumerate(lam.maps):
        expected = (lam.bundle.dims[g.target[a]], lam.bundle.dims[g.source[a]])
        if m.shape != expected:
            report.add("rep_shape", (a,), f"shape {m.shape}, expected {expected}")
        elif not np.isfinite(m).all():
            report.add("rep_finite", (a,), "non-finite entry")
    return report


@dataclass
class DefectReport:
    """
    b = sup of arrow norms; r = unit part + multiplicative part.

    Witnesses are the arrow, object and composable pair achieving each sup,
    or None when the sup runs over an empty set.
    """
    b: float
    r: float
    r_unit_part: float
    r_mult_part: float
    b_witness: Optional[int] = None
    unit_witness: Optional[int] = None
    mult_witness: Optional[Tuple[int, int]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "b": self.b, "r": self.r,
            "r_unit_part": self.r_unit_part, "r_mult_part": self.r_mult_part,
            "b_witness": self.b_witness, "unit_witness": self.unit_witness,
            "mult_witness": list(self.mult_witness) if self.mult_witness else None,
        }


@dataclass
class NearRepReport:
    b: float
    r: float
    threshold: float
    is_near: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"b": self.b, "r": self.r, "threshold": self.threshold, "is_near": self.is_near}


def _euclidean_if_none(lam: PseudoRep, metric: Optional[FiberMetric]) -> FiberMetric:
    return metric if metric is not None else FiberMetric.euclidean(lam.bundle)


def _scan_defects(lam: PseudoRep, metric: FiberMetric, arrows: Iterable[int],
                  objects: Iterable[int]) -> DefectReport:
    g = lam.groupoid
    if metric.n_objects != g.n_objects:
        raise ShapeError(f"Metric has {metric.n_objects} fibers for {g.n_objects} objects")
    arrow_set = set(arrows)

    b, b_wit = 0.0, None
    for a in sorted(arrow_set):
        norm = metric.op_norm(lam[a], int(g.source[a]), int(g.target[a]))
        if b_wit is None or norm > b:
            b, b_wit = norm, a

    unit, unit_wit = 0.0, None
    for x in sorted(set(objects)):
        u = int(g.unit[x])
        d = metric.op_norm(np.eye(lam.bundle.dims[x]) - lam[u], x, x)
        if unit_wit is None or d > unit:
            unit, unit_wit = d, x

    mult, mult_wit = 0.0, None
    for a, h in g._composable_pairs:
        if a not in arrow_set or h not in arrow_set:
            continue
        ah = int(g.compose[a, h])
        d = metric.op_norm(lam[ah] - lam[a] @ lam[h], int(g.source[h]), int(g.target[a]))
        if mult_wit is None or d > mult:
            mult, mult_wit = d, (a, h)

    return DefectReport(b=b, r=unit + mult, r_unit_part=unit, r_mult_part=mult,
                        b_witness=b_wit, unit_witness=unit_wit, mult_witness=mult_wit)


def defects(lam: PseudoRep, metric: Optional[FiberMetric] = None) -> DefectReport:
    """Compute b(lambda) and r(lambda) over the whole groupoid."""
    metric = _euclidean_if_none(lam, metric)
    g = lam.groupoid
    return _scan_defects(lam, metric, range(g.n_arrows), range(g.n_objects))


def local_defects(lam: PseudoRep, metric: Optional[FiberMetric],
                  objects: Iterable[int]) -> DefectReport:
    """
    Defects with every sup restricted to the arrows between objects of U,
    the objects of U and the composable pairs among those arrows.
    """
    metric = _euclidean_if_none(lam, metric)
    objs = list(objects)
    return _scan_defects(lam, metric, arrows_over(lam.groupoid, objs), objs)


def gate_threshold(b: float) -> float:
    """min(1/4, 1/(9 b^2)); b = 0 only happens for zero-dimensional bundles."""
    if b <= 0:
        return 0.25
    return min(0.25, 1.0 / (9.0 * b * b))


def near_representation_gate(lam: PseudoRep, metric: Optional[FiberMetric] = None) -> NearRepReport:
    report = defects(lam, metric)
    threshold = gate_threshold(report.b)
    is_near = report.r <= threshold
    logger.debug("gate: b=%.6g r=%.6g threshold=%.6g near=%s", report.b, report.r, threshold, is_near)
    return NearRepReport(b=report.b, r=report.r, threshold=threshold, is_near=is_near)


def inverse_bound_report(lam: PseudoRep, inverses: Sequence[np.ndarray],
                         metric: Optional[FiberMetric] = None) -> ValidationReport:
    """
    Arrows g with |inverses[g]| > b/(1 - r) beyond rounding.

    The bound holds for the true inverses whenever r < 1; for r >= 1 nothing is
    checked and the report is empty.
    """
    metric = _euclidean_if_none(lam, metric)
    report = ValidationReport("inverse_bound")
    d = defects(lam, metric)
    if d.r >= 1:
        return report
    bound = d.b / (1 - d.r)
    g = lam.groupoid
    for a, inv in enumerate(inverses):
        norm = metric.op_norm(inv, int(g.target[a]), int(g.source[a]))
        if norm > bound * (1 + 1e-9):
            report.add("inverse_bound", (a,), f"|inverse| = {norm:.6g} > {bound:.6g}")
    return report


def invert(lam: PseudoRep, metric: Optional[FiberMetric] = None,
           cond_limit: float = COND_LIMIT, strict: bool = False) -> PseudoRep:
    """
    Arrow-wise matrix inverse; entry g is lambda_g^-1: E_{t g} -> E_{s g}.
    Invertible maps are square, so the result has the same shapes as lambda.

    With a metric, the inverses are checked against b/(1 - r) (see
    ``inverse_bound_report``). A violation is logged, or raised as
    PreconditionError naming the arrow when ``strict`` is set.
    """
    inverses = tuple(safe_inverse(lam[a], cond_limit=cond_limit, arrow=a)
                     for a in range(lam.groupoid.n_arrows))
    if metric is not None or strict:
        report = inverse_bound_report(lam, inverses, metric)
        if not report.ok:
            first = report.violations[0]
            if strict:
                raise PreconditionError(f"Inverse bound exceeded at arrow {first.witness[0]}: {first.detail}",
                                        witness=first.witness)
            logger.warning("Inverse bound exceeded at arrow %d: %s", first.witness[0], first.detail)
    return lam.replace_maps(inverses)


def mean_ratio(lam: PseudoRep, mu: HaarSystem, c: CutoffFunction,
               metric: Optional[FiberMetric] = None, max_parallel: int = 1,
               cond_limit: float = COND_LIMIT) -> PseudoRep:
    """
    The averaging operator.

    lambda_hat_g = sum over h with t(h) = s(g) of c(s h) * weight(h) * lambda_{g h} lambda_h^-1,
    accumulated in ascending order of h.

    Args:
        lam: invertible pseudo-representation
        mu: left-invariant Haar system
        c: normalizing function
        metric: optional; enables the inverse-bound check in ``invert``
        max_parallel: worker threads across arrows

    Returns:
        The mean ratio, a unital pseudo-representation.
    """
    g = lam.groupoid
    inv = invert(lam, metric, cond_limit=cond_limit)

    def integrand(a: int, h: int) -> np.ndarray:
        return lam[int(g.compose[a, h])] @ inv[h]

    maps = haar_integrate(g, mu, c, integrand, list(range(g.n_arrows)),
                          base_map=lambda a: int(g.source[a]), max_parallel=max_parallel)
    return lam.replace_maps(maps)


def sup_distance(lam: PseudoRep, rho: PseudoRep, metric: Optional[FiberMetric] = None) -> float:
    """max over arrows of |lambda_g - rho_g|."""
    if lam.groupoid.n_arrows != rho.groupoid.n_arrows:
        raise ShapeError("Pseudo-representations live on different groupoids")
    if lam.bundle.dims != rho.bundle.dims:
        raise ShapeError(f"Bundle dims differ: {lam.bundle.dims} vs {rho.bundle.dims}")
    metric = _euclidean_if_none(lam, metric)
    g = lam.groupoid
    dist = 0.0
    for a in range(g.n_arrows):
        dist = max(dist, metric.op_norm(lam[a] - rho[a], int(g.source[a]), int(g.target[a])))
    return dist


def perturb_representation(rho: PseudoRep, magnitude: float, seed: int,
                           keep_units: bool = False,
                           metric: Optional[FiberMetric] = None) -> PseudoRep:
    """
    Add magnitude * N_g to every arrow map, N_g with seeded uniform entries in [-1, 1].

    Noise is drawn for every arrow in ascending order, including units, so the
    stream does not depend on ``keep_units``.
    """
    report = defects(rho, metric)
    if report.r > REPRESENTATION_TOL:
        raise PreconditionError(f"Base is not a representation: r = {report.r:.3e}")
    rng = np.random.default_rng(seed)
    units = set(int(u) for u in rho.groupoid.unit)
    maps = []
    for a, m in enumerate(rho.maps):
        noise = rng.uniform(-1.0, 1.0, size=m.shape)
        maps.append(m.copy() if keep_units and a in units else m + magnitude * noise)
    return rho.replace_maps(maps)


def restrict_rep(lam: PseudoRep, objects: Iterable[int],
                 allow_non_invariant: bool = False) -> Optional[PseudoRep]:
    """Pseudo-representation of the restricted groupoid; None for an empty object set."""
    res = restrict_with_maps(lam.groupoid, objects, allow_non_invariant)
    if res.groupoid is None:
        return None
    bundle = VectorBundle(tuple(lam.bundle.dims[x] for x in res.objects))
    return PseudoRep(res.groupoid, bundle, tuple(lam[a] for a in res.arrows))


def is_representation_over(lam: PseudoRep, objects: Iterable[int], tol: float = REPRESENTATION_TOL,
                           metric: Optional[FiberMetric] = None) -> bool:
    """Unit and multiplicative defects over the restriction to ``objects`` are within tol."""
    objs = list(objects)
    if not objs:
        return True
    return local_defects(lam, metric, objs).r <= tol


@dataclass
class InverseEstimateReport:
    """Worst ratio of each inverse estimate to its bound, with the arrow (or pair) achieving it."""
    b: float
    r: float
    inverse_deviation_ratio: float = 0.0
    inverse_norm_ratio: float = 0.0
    ratio_deviation_ratio: float = 0.0
    witnesses: Dict[str, Any] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        slack = 1 + 1e-9
        return (self.inverse_deviation_ratio <= slack and self.inverse_norm_ratio <= slack
                and self.ratio_deviation_ratio <= slack)


def inverse_estimates(lam: PseudoRep, metric: Optional[FiberMetric] = None) -> InverseEstimateReport:
    """
    Check the inverse estimates that hold when r < 1:

    |lambda_g^-1 - lambda_{g^-1}| <= r/(1 - r) |lambda_{g^-1}|,
    |lambda_g^-1| <= b/(1 - r) and |lambda_{gh} lambda_h^-1 - lambda_g| <= r b/(1 - r).
    """
    metric = _euclidean_if_none(lam, metric)
    d = defects(lam, metric)
    if d.r >= 1:
        raise PreconditionError(f"Inverse estimates need r < 1, got r = {d.r:.6g}")
    g = lam.groupoid
    inv = invert(lam)
    report = InverseEstimateReport(b=d.b, r=d.r)

    def ratio(value: float, bound: float) -> float:
        if bound > 0:
            return value / bound
        return 0.0 if value <= 1e-15 else float("inf")

    for a in range(g.n_arrows):
        x, y = int(g.source[a]), int(g.target[a])
        ia = int(g.inverse[a])
        dev = metric.op_norm(inv[a] - lam[ia], y, x)
        q = ratio(dev, d.r / (1 - d.r) * metric.op_norm(lam[ia], y, x))
        if q > report.inverse_deviation_ratio:
            report.inverse_deviation_ratio = q
            report.witnesses["inverse_deviation"] = a
        q = ratio(metric.op_norm(inv[a], y, x), d.b / (1 - d.r))
        if q > report.inverse_norm_ratio:
            report.inverse_norm_ratio = q
            report.witnesses["inverse_norm"] = a
    for a, h in g._composable_pairs:
        ah = int(g.compose[a, h])
        dev = metric.op_norm(lam[ah] @ inv[h] - lam[a], int(g.source[a]), int(g.target[a]))
        q = ratio(dev, d.r * d.b / (1 - d.r))
        if q > report.ratio_deviation_ratio:
            report.ratio_deviation_ratio = q
            report.witnesses["ratio_deviation"] = (a, h)
    return report


def multiplicativity_identity_residual(lam: PseudoRep, mu: HaarSystem, c: CutoffFunction,
                                       metric: Optional[FiberMetric] = None) -> float:
    """
    Largest gap between both sides of the expansion

        hat_{g1 g2} - hat_{g1} hat_{g2}
            = sum_h c w A(h) B(h) - (sum_h c w A(h)) (sum_k c w B(k)),

    with A(h) = lambda_{g1 g2 h} lambda_{g2 h}^-1 - lambda_{g1},
    B(h) = lambda_{g2 h} lambda_h^-1 - lambda_{g2} and h, k running over the
    target fiber at s(g2). Requires a left-invariant Haar system and a
    normalizing function.
    """
    metric = _euclidean_if_none(lam, metric)
    g = lam.groupoid
    inv = invert(lam)
    hat = mean_ratio(lam, mu, c)
    cv, w = c.values, mu.weight
    worst = 0.0
    for g1, g2 in g._composable_pairs:
        g12 = int(g.compose[g1, g2])
        x, z = int(g.source[g2]), int(g.target[g1])
        y = int(g.target[g2])
        single = np.zeros((lam.bundle.dims[z], lam.bundle.dims[x]))
        int_a = np.zeros((lam.bundle.dims[z], lam.bundle.dims[y]))
        int_b = np.zeros((lam.bundle.dims[y], lam.bundle.dims[x]))
        for h in g.target_fibers[x]:
            g2h = int(g.compose[g2, h])
            weight = cv[g.source[h]] * w[h]
            a_h = lam[int(g.compose[g12, h])] @ inv[g2h] - lam[g1]
            b_h = lam[g2h] @ inv[h] - lam[g2]
            single += weight * (a_h @ b_h)
            int_a += weight * a_h
            int_b += weight * b_h
        lhs = hat[g12] - hat[g1] @ hat[g2]
        rhs = single - int_a @ int_b
        worst = max(worst, metric.op_norm(lhs - rhs, x, z))
    return worst


def identity_rep(groupoid: FiniteGroupoid, bundle: VectorBundle) -> PseudoRep:
    """lambda_g = id for every arrow; needs dims constant along arrows."""
    bundle.check_orbit_constant(groupoid)
    return PseudoRep(groupoid, bundle,
                     tuple(np.eye(bundle.dims[groupoid.source[a]]) for a in range(groupoid.n_arrows)))


def gauge_rep(groupoid: FiniteGroupoid, bundle: VectorBundle, seed: int,
              spread: float = 0.3) -> PseudoRep:
    """
    The representation rho_g = P_{t g} P_{s g}^-1 for seeded invertible P_x.

    P_x = id + spread * N_x with N_x uniform in [-1, 1]; spread below
    1/dim keeps every P_x invertible.
    """
    bundle.check_orbit_constant(groupoid)
    rng = np.random.default_rng(seed)
    gauges = [np.eye(d) + spread * rng.uniform(-1.0, 1.0, size=(d, d)) for d in bundle.dims]
    gauge_inv = [safe_inverse(p) for p in gauges]
    maps = [gauges[groupoid.target[a]] @ gauge_inv[groupoid.source[a]] for a in range(groupoid.n_arrows)]
    return PseudoRep(groupoid, bundle, tuple(maps))


def scalar_rep(groupoid: FiniteGroupoid, values: Sequence[float]) -> PseudoRep:
    """Rank-one pseudo-representation with lambda_g = values[g]."""
    if len(values) != groupoid.n_arrows:
        raise ShapeError(f"Got {len(values)} scalars for {groupoid.n_arrows} arrows")
    bundle = VectorBundle.constant(groupoid.n_objects, 1)
    return PseudoRep(groupoid, bundle, tuple(np.array([[float(v)]]) for v in values))
