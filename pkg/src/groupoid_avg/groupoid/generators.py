"""
Generators for standard finite groupoids: pair groupoids, action groupoids
and group bundles, plus the small finite groups they are built from.
"""

import itertools
import re
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..errors import GroupoidError
from .core import FiniteGroupoid


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its Cayley table; table[a, b] is the product a*b."""
    name: str
    table: np.ndarray
    identity: int
    inverse: np.ndarray

    @property
    def order(self) -> int:
        return len(self.table)


def group_from_table(table: Sequence[Sequence[int]], name: str = "G") -> FiniteGroup:
    """
    Validate a Cayley table and wrap it as a FiniteGroup.

    Raises GroupoidError naming the failed group law.
    """
    t = np.asarray(table, dtype=np.int64)
    n = len(t)
    if n == 0 or t.shape != (n, n):
        raise GroupoidError(f"Group table for {name} must be a non-empty square array")
    if (t < 0).any() or (t >= n).any():
        raise GroupoidError(f"Group table for {name} is not closed")
    identities = [e for e in range(n) if (t[e] == np.arange(n)).all() and (t[:, e] == np.arange(n)).all()]
    if not identities:
        raise GroupoidError(f"Group table for {name} has no identity element")
    e = identities[0]
    inverse = np.full(n, -1, dtype=np.int64)
    for a in range(n):
        candidates = np.flatnonzero((t[a] == e) & (t[:, a] == e))
        if candidates.size == 0:
            raise GroupoidError(f"Element {a} of {name} has no inverse", witness=(a,))
        inverse[a] = candidates[0]
    # (ab)c == a(bc) for all triples
    lhs = t[t[:, :, None], np.arange(n)[None, None, :]]
    rhs = t[np.arange(n)[:, None, None], t[None, :, :]]
    bad = np.argwhere(lhs != rhs)
    if bad.size:
        raise GroupoidError(f"Group table for {name} is not associative",
                            witness=tuple(int(i) for i in bad[0]))
    t.setflags(write=False)
    inverse.setflags(write=False)
    return FiniteGroup(name=name, table=t, identity=e, inverse=inverse)


def cyclic_group(n: int) -> FiniteGroup:
    """Z/n with elements 0..n-1 under addition mod n."""
    if n < 1:
        raise GroupoidError("Cyclic group order must be at least 1")
    idx = np.arange(n)
    return group_from_table((idx[:, None] + idx[None, :]) % n, name=f"z{n}")


def symmetric_group(n: int) -> FiniteGroup:
    """S_n as permutations in lexicographic order; product is composition p*q = p(q(.))."""
    if n < 1:
        raise GroupoidError("Symmetric group degree must be at least 1")
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[k]] for k in range(n))] for q in perms] for p in perms]
    return group_from_table(table, name=f"s{n}")


_GROUP_SPEC = re.compile(r"^\s*([zs])(\d+)\s*$", re.IGNORECASE)


def parse_group_spec(spec: str) -> FiniteGroup:
    """Parse 'z3' (cyclic) or 's3' (symmetric) group names used on the command line."""
    match = _GROUP_SPEC.match(spec)
    if not match:
        raise GroupoidError(f"Unknown group spec '{spec}' (expected zN or sN)")
    kind, n = match.group(1).lower(), int(match.group(2))
    return cyclic_group(n) if kind == "z" else symmetric_group(n)


def gen_pair_groupoid(n: int) -> FiniteGroupoid:
    """
    Pair groupoid over n objects.

    Arrow (y, x) goes from x to y and has index y*n + x; (z, y)*(y, x) = (z, x).
    """
    if n < 1:
        raise GroupoidError("Pair groupoid needs n >= 1")
    arrows = [(y, x) for y in range(n) for x in range(n)]
    index = {a: i for i, a in enumerate(arrows)}
    triples = [(index[(z, y)], index[(y, x)], index[(z, x)])
               for z in range(n) for y in range(n) for x in range(n)]
    return FiniteGroupoid.from_tables(
        n,
        source=[x for _, x in arrows],
        target=[y for y, _ in arrows],
        unit=[index[(x, x)] for x in range(n)],
        inverse=[index[(x, y)] for y, x in arrows],
        compose_triples=triples,
    )


def check_action(group: FiniteGroup, action: np.ndarray) -> None:
    """Raise GroupoidError with a witness unless ``action`` is a left action."""
    n_points = action.shape[1]
    if action.shape[0] != group.order:
        raise GroupoidError("Action table needs one row per group element")
    if (action < 0).any() or (action >= n_points).any():
        raise GroupoidError("Action table maps outside the point set")
    for x in range(n_points):
        if action[group.identity, x] != x:
            raise GroupoidError(f"Identity does not fix point {x}", witness=(group.identity, x))
    for a in range(group.order):
        for b in range(group.order):
            ab = group.table[a, b]
            for x in range(n_points):
                if action[a, action[b, x]] != action[ab, x]:
                    raise GroupoidError(f"Action is not compatible: g={a}, h={b}, x={x}",
                                        witness=(a, b, x))


def gen_action_groupoid(group: FiniteGroup, action: Sequence[Sequence[int]]) -> FiniteGroupoid:
    """
    Action groupoid of a left action; ``action[g][x]`` is g.x.

    Arrow (g, x) goes from x to g.x and has index g*n_points + x.
    """
    act = np.asarray(action, dtype=np.int64)
    if act.ndim != 2 or act.shape[1] < 1:
        raise GroupoidError("Action table must be 2-D with at least one point")
    check_action(group, act)
    n_points = act.shape[1]

    def idx(a: int, x: int) -> int:
        return a * n_points + x

    source, target, inverse = [], [], []
    for a in range(group.order):
        for x in range(n_points):
            source.append(x)
            target.append(int(act[a, x]))
            inverse.append(idx(int(group.inverse[a]), int(act[a, x])))
    triples = [(idx(a2, int(act[a1, x])), idx(a1, x), idx(int(group.table[a2, a1]), x))
               for a2 in range(group.order) for a1 in range(group.order) for x in range(n_points)]
    return FiniteGroupoid.from_tables(
        n_points, source, target,
        unit=[idx(group.identity, x) for x in range(n_points)],
        inverse=inverse,
        compose_triples=triples,
    )


def rotation_action(n: int) -> np.ndarray:
    """Action table of Z/n rotating the points 0..n-1."""
    idx = np.arange(n)
    return (idx[:, None] + idx[None, :]) % n


def trivial_action(group: FiniteGroup, n_points: int) -> np.ndarray:
    return np.tile(np.arange(n_points), (group.order, 1))


def gen_group_bundle(groups: List[FiniteGroup]) -> FiniteGroupoid:
    """Group bundle with isotropy ``groups[i]`` at object i; s == t everywhere."""
    if not groups:
        raise GroupoidError("A group bundle needs at least one group")
    source, unit, inverse, triples = [], [], [], []
    offset = 0
    for x, grp in enumerate(groups):
        source.extend([x] * grp.order)
        unit.append(offset + grp.identity)
        inverse.extend(offset + int(grp.inverse[a]) for a in range(grp.order))
        triples.extend((offset + a, offset + b, offset + int(grp.table[a, b]))
                       for a in range(grp.order) for b in range(grp.order))
        offset += grp.order
    return FiniteGroupoid.from_tables(len(groups), source, list(source), unit, inverse, triples)
