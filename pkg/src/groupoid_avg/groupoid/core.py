"""
Finite groupoids: structure tables, axiom validation and structural queries.

Every enumeration here (fibers, composable pairs and triples) is in ascending
arrow-index order; downstream floating-point sums rely on that order being
fixed.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import GroupoidError

logger = logging.getLogger(__name__)

UNDEFINED = -1


@dataclass
class Violation:
    """One failed check, with the tuple of ids that witnesses it."""
    check: str
    witness: Tuple[int, ...]
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"check": self.check, "witness": list(self.witness), "detail": self.detail}


@dataclass
class ValidationReport:
    """
    Collection of violations found by a validator.

    An empty report means every checked property holds.
    """
    subject: str
    violations: List[Violation] = field(default_factory=list)

    def add(self, check: str, witness: Iterable[int], detail: str = "") -> None:
        self.violations.append(Violation(check, tuple(int(w) for w in witness), detail))

    @property
    def ok(self) -> bool:
        return not self.violations

    def checks_failed(self) -> List[str]:
        """Distinct names of the failed checks, in first-seen order."""
        return list(dict.fromkeys(v.check for v in self.violations))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "violations": [v.to_dict() for v in self.violations],
        }


class FiberKind(str, Enum):
    SOURCE = "source"
    TARGET = "target"
    ISOTROPY = "isotropy"


@dataclass(frozen=True)
class FiberSlice:
    kind: FiberKind
    base: int
    arrows: Tuple[int, ...]


@dataclass(frozen=True)
class OrbitPartition:
    orbit_of: Tuple[int, ...]
    orbits: Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    """
    A finite groupoid given by its structure tables.

    Attributes:
        n_objects: number of objects, ids are 0..n_objects-1
        source, target: arrow -> object
        unit: object -> identity arrow
        inverse: arrow -> inverse arrow
        compose: dense (n_arrows, n_arrows) table; compose[g1, g2] is g1*g2
                 when s(g1) == t(g2), UNDEFINED otherwise
    """
    n_objects: int
    source: np.ndarray
    target: np.ndarray
    unit: np.ndarray
    inverse: np.ndarray
    compose: np.ndarray

    def __post_init__(self):
        if self.n_objects < 1:
            raise GroupoidError("A groupoid needs at least one object")
        n = len(self.source)
        for name, arr, size, bound in (
            ("source", self.source, n, self.n_objects),
            ("target", self.target, n, self.n_objects),
            ("unit", self.unit, self.n_objects, n),
            ("inverse", self.inverse, n, n),
        ):
            if arr.shape != (size,):
                raise GroupoidError(f"Table '{name}' has shape {arr.shape}, expected ({size},)")
            bad = np.flatnonzero((arr < 0) | (arr >= bound))
            if bad.size:
                raise GroupoidError(f"Table '{name}' has out-of-range entry at index {bad[0]}",
                                    witness=(int(bad[0]),))
        if self.compose.shape != (n, n):
            raise GroupoidError(f"Composition table has shape {self.compose.shape}, expected ({n}, {n})")
        bad = np.argwhere((self.compose < UNDEFINED) | (self.compose >= n))
        if bad.size:
            raise GroupoidError("Composition table has out-of-range entry",
                                witness=tuple(int(i) for i in bad[0]))
        for arr in (self.source, self.target, self.unit, self.inverse, self.compose):
            arr.setflags(write=False)

    @classmethod
    def from_tables(cls, n_objects: int, source: Sequence[int], target: Sequence[int],
                    unit: Sequence[int], inverse: Sequence[int],
                    compose_triples: Iterable[Tuple[int, int, int]]) -> "FiniteGroupoid":
        """Build a groupoid from plain lists and (g1, g2, g1*g2) triples."""
        n = len(source)
        table = np.full((n, n), UNDEFINED, dtype=np.int64)
        for g1, g2, g12 in compose_triples:
            if not (0 <= g1 < n and 0 <= g2 < n):
                raise GroupoidError(f"Composition entry ({g1}, {g2}) refers to unknown arrows",
                                    witness=(g1, g2))
            table[g1, g2] = g12
        return cls(
            n_objects=int(n_objects),
            source=np.asarray(source, dtype=np.int64),
            target=np.asarray(target, dtype=np.int64),
            unit=np.asarray(unit, dtype=np.int64),
            inverse=np.asarray(inverse, dtype=np.int64),
            compose=table,
        )

    @property
    def n_arrows(self) -> int:
        return len(self.source)

    def mul(self, g1: int, g2: int) -> int:
        """Return g1*g2; raises for non-composable pairs."""
        g12 = int(self.compose[g1, g2])
        if g12 == UNDEFINED:
            raise GroupoidError(f"Arrows {g1} and {g2} are not composable", witness=(g1, g2))
        return g12

    @cached_property
    def target_fibers(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(int(a) for a in np.flatnonzero(self.target == x))
                     for x in range(self.n_objects))

    @cached_property
    def source_fibers(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(tuple(int(a) for a in np.flatnonzero(self.source == x))
                     for x in range(self.n_objects))

    @cached_property
    def _composable_pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((g1, g2) for g1 in range(self.n_arrows)
                     for g2 in self.target_fibers[int(self.source[g1])])

    @cached_property
    def _composable_triples(self) -> Tuple[Tuple[int, int, int], ...]:
        return tuple((g, h, k) for g, h in self._composable_pairs
                     for k in self.target_fibers[int(self.source[h])])

    def to_dict(self) -> Dict[str, Any]:
        """Serialize to the groupoid JSON layout."""
        return {
            "n_objects": self.n_objects,
            "arrows": [{"id": a, "src": int(self.source[a]), "tgt": int(self.target[a])}
                       for a in range(self.n_arrows)],
            "units": [int(u) for u in self.unit],
            "inverse": [int(i) for i in self.inverse],
            "compose": [[g1, g2, int(self.compose[g1, g2])] for g1, g2 in self._composable_pairs],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FiniteGroupoid":
        """Parse the groupoid JSON layout; ids must be the dense indices."""
        try:
            arrows = sorted(data["arrows"], key=lambda a: a["id"])
            if [a["id"] for a in arrows] != list(range(len(arrows))):
                raise GroupoidError("Arrow ids must be dense indices 0..n_arrows-1")
            return cls.from_tables(
                n_objects=data["n_objects"],
                source=[a["src"] for a in arrows],
                target=[a["tgt"] for a in arrows],
                unit=data["units"],
                inverse=data["inverse"],
                compose_triples=[tuple(c) for c in data["compose"]],
            )
        except KeyError as e:
            raise GroupoidError(f"Groupoid description is missing field {e}")


def validate(g: FiniteGroupoid) -> ValidationReport:
    """
    Check every groupoid axiom exhaustively.

    Returns a report listing each violated axiom with the offending arrow
    tuple; the report is empty iff the tables define a groupoid.
    """
    report = ValidationReport("groupoid")
    s, t, u, inv, comp = g.source, g.target, g.unit, g.inverse, g.compose

    for x in range(g.n_objects):
        if s[u[x]] != x or t[u[x]] != x:
            report.add("unit_endpoints", (x,), f"unit arrow {int(u[x])} is not a loop at {x}")

    composable = s[:, None] == t[None, :]
    defined = comp != UNDEFINED
    for g1, g2 in np.argwhere(composable != defined):
        detail = ("composable pair has no composite" if composable[g1, g2]
                  else "composite defined on non-composable pair")
        report.add("compose_domain", (g1, g2), detail)

    for g1, g2 in g._composable_pairs:
        g12 = comp[g1, g2]
        if g12 == UNDEFINED:
            continue
        if s[g12] != s[g2] or t[g12] != t[g1]:
            report.add("compose_endpoints", (g1, g2, g12), "s(gh) != s(h) or t(gh) != t(g)")

    for a in range(g.n_arrows):
        left = comp[u[t[a]], a]
        right = comp[a, u[s[a]]]
        if left != a or right != a:
            report.add("unit_law", (a,), f"1*g = {int(left)}, g*1 = {int(right)}")
        b = inv[a]
        if s[b] != t[a] or t[b] != s[a]:
            report.add("inverse_endpoints", (a, b), "inverse does not reverse endpoints")
            continue
        if comp[a, b] != u[t[a]] or comp[b, a] != u[s[a]]:
            report.add("inverse_law", (a, b),
                       f"g*g^-1 = {int(comp[a, b])}, g^-1*g = {int(comp[b, a])}")

    for a, b, c in g._composable_triples:
        ab, bc = comp[a, b], comp[b, c]
        if ab == UNDEFINED or bc == UNDEFINED:
            continue
        lhs, rhs = comp[ab, c], comp[a, bc]
        if lhs == UNDEFINED or rhs == UNDEFINED or lhs != rhs:
            report.add("associativity", (a, b, c), f"(gh)k = {int(lhs)}, g(hk) = {int(rhs)}")

    if not report.ok:
        logger.debug("groupoid validation found %d violations", len(report.violations))
    return report


def check_left_translation(g: FiniteGroupoid) -> ValidationReport:
    """Check that h -> g*h is a bijection of the target fiber at s(g) onto that at t(g)."""
    report = ValidationReport("left_translation")
    for a in range(g.n_arrows):
        domain = g.target_fibers[int(g.source[a])]
        image = sorted(int(g.compose[a, h]) for h in domain)
        if image != list(g.target_fibers[int(g.target[a])]):
            report.add("left_translation", (a,), "translation is not a bijection of target fibers")
    return report


def _check_objects(g: FiniteGroupoid, objects: Iterable[int]) -> List[int]:
    objs = sorted(set(int(x) for x in objects))
    bad = [x for x in objs if not 0 <= x < g.n_objects]
    if bad:
        raise GroupoidError(f"Object id {bad[0]} out of range [0, {g.n_objects})", witness=(bad[0],))
    return objs


def orbits(g: FiniteGroupoid) -> OrbitPartition:
    """Partition the objects into orbits (x ~ y iff some arrow x -> y exists)."""
    orbit_of = [-1] * g.n_objects
    parts: List[Tuple[int, ...]] = []
    for x in range(g.n_objects):
        if orbit_of[x] >= 0:
            continue
        members = tuple(sorted(set(int(g.target[a]) for a in g.source_fibers[x])))
        for y in members:
            orbit_of[y] = len(parts)
        parts.append(members)
    return OrbitPartition(orbit_of=tuple(orbit_of), orbits=tuple(parts))


def saturation(g: FiniteGroupoid, objects: Iterable[int]) -> List[int]:
    """Least invariant set containing ``objects``: all targets of arrows sourced there."""
    objs = _check_objects(g, objects)
    mask = np.isin(g.source, objs)
    return sorted(set(int(y) for y in g.target[mask]))


def is_invariant(g: FiniteGroupoid, objects: Iterable[int]) -> bool:
    objs = _check_objects(g, objects)
    return saturation(g, objs) == objs


def arrows_over(g: FiniteGroupoid, objects: Iterable[int]) -> List[int]:
    """Arrows of the full subgroupoid on ``objects`` (source and target both inside)."""
    objs = _check_objects(g, objects)
    mask = np.isin(g.source, objs) & np.isin(g.target, objs)
    return [int(a) for a in np.flatnonzero(mask)]


@dataclass(frozen=True)
class Restriction:
    """A restricted groupoid with the embedding of its ids into the parent."""
    groupoid: Optional[FiniteGroupoid]
    objects: Tuple[int, ...]
    arrows: Tuple[int, ...]


def restrict_with_maps(g: FiniteGroupoid, objects: Iterable[int],
                       allow_non_invariant: bool = False) -> Restriction:
    """
    Restrict to the arrows whose source and target lie in ``objects``.

    Objects and arrows are renumbered densely in ascending parent order. The
    groupoid is None when ``objects`` is empty.
    """
    objs = _check_objects(g, objects)
    if not allow_non_invariant and saturation(g, objs) != objs:
        raise GroupoidError(f"Object set {objs} is not invariant; pass allow_non_invariant=True "
                            "to take the full subgroupoid")
    arrows = arrows_over(g, objs)
    if not objs:
        return Restriction(groupoid=None, objects=(), arrows=())
    obj_index = {x: i for i, x in enumerate(objs)}
    arrow_index = {a: i for i, a in enumerate(arrows)}
    triples = [(arrow_index[a], arrow_index[b], arrow_index[int(g.compose[a, b])])
               for a in arrows for b in arrows if g.compose[a, b] != UNDEFINED]
    sub = FiniteGroupoid.from_tables(
        len(objs),
        [obj_index[int(g.source[a])] for a in arrows],
        [obj_index[int(g.target[a])] for a in arrows],
        [arrow_index[int(g.unit[x])] for x in objs],
        [arrow_index[int(g.inverse[a])] for a in arrows],
        triples,
    )
    return Restriction(groupoid=sub, objects=tuple(objs), arrows=tuple(arrows))


def restrict(g: FiniteGroupoid, objects: Iterable[int],
             allow_non_invariant: bool = False) -> Optional[FiniteGroupoid]:
    return restrict_with_maps(g, objects, allow_non_invariant).groupoid


def fiber(g: FiniteGroupoid, kind: FiberKind, x: int) -> FiberSlice:
    """Source fiber, target fiber or isotropy group at object ``x``."""
    _check_objects(g, [x])
    kind = FiberKind(kind)
    if kind is FiberKind.SOURCE:
        arrows = g.source_fibers[x]
    elif kind is FiberKind.TARGET:
        arrows = g.target_fibers[x]
    else:
        arrows = tuple(a for a in g.target_fibers[x] if g.source[a] == x)
    return FiberSlice(kind=kind, base=x, arrows=tuple(arrows))


def composable_pairs(g: FiniteGroupoid) -> List[Tuple[int, int]]:
    """All (g1, g2) with s(g1) == t(g2), lexicographic in arrow ids."""
    return list(g._composable_pairs)


def composable_triples(g: FiniteGroupoid) -> List[Tuple[int, int, int]]:
    """All (g, h, k) with s(g) == t(h) and s(h) == t(k), lexicographic in arrow ids."""
    return list(g._composable_triples)
