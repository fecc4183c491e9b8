"""
Haar systems on finite groupoids, cut-off and normalizing functions, and
Haar integration depending on parameters.

A Haar system is a positive weight per arrow, read as the mass of the arrow
inside its target fiber. Integrals over a target fiber are weighted sums taken
in ascending arrow order.
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Any, Callable, Iterable, List, Optional, Sequence

import numpy as np

from ..errors import PreconditionError, ShapeError, StarvedOrbitError
from .core import FiniteGroupoid, ValidationReport, orbits, saturation

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class HaarSystem:
    """Per-arrow weights; weight[h] is the mass of h in the target fiber at t(h)."""
    weight: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=float)
        if w.ndim != 1:
            raise ShapeError("Haar weights must be a flat array, one per arrow")
        bad = np.flatnonzero(~(w > 0))
        if bad.size:
            raise PreconditionError(f"Haar weight of arrow {bad[0]} is not strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "weight", w)


@dataclass(frozen=True, eq=False)
class CutoffFunction:
    """Nonnegative object weights meeting every orbit."""
    values: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.values, dtype=float)
        if c.ndim != 1:
            raise ShapeError("Cut-off values must be a flat array, one per object")
        if (c < 0).any():
            raise PreconditionError("Cut-off function must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "values", c)


class NormalizingFunction(CutoffFunction):
    """A cut-off function c with sum over h in the target fiber at x of c(sh)*weight(h) == 1."""


def counting_haar(g: FiniteGroupoid) -> HaarSystem:
    """Unit mass on every arrow."""
    return HaarSystem(np.ones(g.n_arrows))


def _check_sizes(g: FiniteGroupoid, mu: HaarSystem, c: Optional[CutoffFunction] = None) -> None:
    if len(mu.weight) != g.n_arrows:
        raise ShapeError(f"Haar system has {len(mu.weight)} weights for {g.n_arrows} arrows")
    if c is not None and len(c.values) != g.n_objects:
        raise ShapeError(f"Cut-off has {len(c.values)} values for {g.n_objects} objects")


def check_left_invariance(g: FiniteGroupoid, mu: HaarSystem,
                          tol: float = NORMALIZATION_TOL) -> ValidationReport:
    """List every (g, h) with h in the target fiber at s(g) and |weight(gh) - weight(h)| > tol."""
    _check_sizes(g, mu)
    report = ValidationReport("left_invariance")
    w = mu.weight
    for a, h in g._composable_pairs:
        gh = int(g.compose[a, h])
        diff = abs(w[gh] - w[h])
        if diff > tol:
            report.add("left_invariance", (a, h), f"|w(gh) - w(h)| = {diff:.3e}")
    return report


def normalizer_denominator(g: FiniteGroupoid, mu: HaarSystem, c: CutoffFunction) -> np.ndarray:
    """D(x) = sum over h with t(h) = x of c(s h) * weight(h), ascending arrow order."""
    _check_sizes(g, mu, c)
    d = np.zeros(g.n_objects)
    for x in range(g.n_objects):
        total = 0.0
        for h in g.target_fibers[x]:
            total += c.values[g.source[h]] * mu.weight[h]
        d[x] = total
    return d


def check_normalizing(g: FiniteGroupoid, mu: HaarSystem, c: CutoffFunction,
                      tol: float = NORMALIZATION_TOL) -> ValidationReport:
    """Report objects where the normalizing identity fails by more than ``tol``."""
    report = ValidationReport("normalizing_identity")
    for x, dx in enumerate(normalizer_denominator(g, mu, c)):
        if abs(dx - 1.0) > tol:
            report.add("normalizing_identity", (x,), f"fiber sum = {dx!r}")
    return report


def check_denominator_invariance(g: FiniteGroupoid, mu: HaarSystem, c: CutoffFunction,
                                 tol: float = NORMALIZATION_TOL) -> ValidationReport:
    """The denominator D is constant along orbits whenever mu is left invariant."""
    report = ValidationReport("denominator_invariance")
    d = normalizer_denominator(g, mu, c)
    for a in range(g.n_arrows):
        x, y = int(g.source[a]), int(g.target[a])
        if abs(d[x] - d[y]) > tol * max(1.0, abs(d[x])):
            report.add("denominator_invariance", (a,), f"D({x}) = {d[x]!r}, D({y}) = {d[y]!r}")
    return report


def require_left_invariance(g: FiniteGroupoid, mu: HaarSystem, tol: float = NORMALIZATION_TOL) -> None:
    """Raise PreconditionError naming the first (g, h) where mu is not left invariant."""
    report = check_left_invariance(g, mu, tol)
    if not report.ok:
        first = report.violations[0]
        raise PreconditionError(f"Haar system is not left invariant at (g, h) = {first.witness}: "
                                f"{first.detail}", witness=first.witness)


def normalize_cutoff(g: FiniteGroupoid, mu: HaarSystem, c: CutoffFunction,
                     support: Optional[Iterable[int]] = None,
                     tol: float = NORMALIZATION_TOL) -> NormalizingFunction:
    """
    Divide a cut-off function by its (orbit-constant) denominator D.

    Args:
        g: the groupoid
        mu: a left-invariant Haar system
        c: cut-off function
        support: optional object set B; c must vanish off B and B must meet
                 every orbit
        tol: tolerance of the left-invariance and normalizing checks

    Returns:
        The normalizing function c / D.

    Raises:
        PreconditionError: mu is not left invariant, or the support constraint fails
        StarvedOrbitError: c vanishes on a whole orbit
    """
    _check_sizes(g, mu, c)
    require_left_invariance(g, mu, tol)
    if support is not None:
        allowed = set(int(x) for x in support)
        outside = [x for x in range(g.n_objects) if c.values[x] > 0 and x not in allowed]
        if outside:
            raise PreconditionError(f"Cut-off is positive at object {outside[0]} outside the support set")
        if saturation(g, allowed) != list(range(g.n_objects)):
            raise PreconditionError("Support set does not meet every orbit")
    d = normalizer_denominator(g, mu, c)
    starved = np.flatnonzero(d <= 0)
    if starved.size:
        part = orbits(g)
        orbit = part.orbits[part.orbit_of[int(starved[0])]]
        raise StarvedOrbitError(f"Cut-off function vanishes on the whole orbit {list(orbit)}", orbit=orbit)
    result = NormalizingFunction(c.values / d)
    check = check_normalizing(g, mu, result, tol=max(tol, NORMALIZATION_TOL))
    if not check.ok:
        first = check.violations[0]
        raise PreconditionError(f"Normalized cut-off fails the normalizing identity at object "
                                f"{first.witness[0]}: {first.detail}", witness=first.witness)
    return result


def haar_integrate(g: FiniteGroupoid, mu: HaarSystem, c: CutoffFunction,
                   f: Callable[[Any, int], Any], params: Sequence[Any],
                   base_map: Callable[[Any], int], max_parallel: int = 1) -> List[np.ndarray]:
    """
    Haar integral depending on parameters.

    For each parameter z returns the sum over h with t(h) = base_map(z) of
    c(s h) * weight(h) * f(z, h), accumulated in ascending arrow order.

    Args:
        g: the groupoid
        mu: Haar system
        c: normalizing (or cut-off) function
        f: integrand, f(z, h) -> scalar or array; shapes must agree at fixed z
        params: finite parameter list
        base_map: parameter -> object whose target fiber is integrated over
        max_parallel: worker threads across parameters (1 = sequential)

    Returns:
        List of integrals aligned with ``params``.
    """
    _check_sizes(g, mu, c)

    def integrate_one(z: Any) -> np.ndarray:
        acc = None
        for h in g.target_fibers[base_map(z)]:
            value = np.asarray(f(z, h), dtype=float)
            if acc is None:
                acc = np.zeros_like(value)
            elif value.shape != acc.shape:
                raise ShapeError(f"Integrand shape {value.shape} at arrow {h} differs from {acc.shape}",
                                 witness=(h,))
            acc += (c.values[g.source[h]] * mu.weight[h]) * value
        return acc

    if max_parallel <= 1:
        return [integrate_one(z) for z in params]

    results: List[Optional[np.ndarray]] = [None] * len(params)
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_parallel) as executor:
        future_to_index = {executor.submit(integrate_one, z): i for i, z in enumerate(params)}
        for future in concurrent.futures.as_completed(future_to_index):
            results[future_to_index[future]] = future.result()
    return results
