"""
Groupoid cochains with twisted coefficients, their coboundaries and the Haar
contractions that trivialize cocycles.

A k-cochain takes its value at the target of the first arrow of the simplex:
Y(x) in C_x, X(g) in C_{t g}, Z(g, h) in C_{t g}.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ShapeError
from ..groupoid.core import FiniteGroupoid
from ..groupoid.haar import CutoffFunction, HaarSystem, haar_integrate
from ..linalg.fiber import COND_LIMIT, VectorBundle, safe_inverse
from ..reps.pseudorep import PseudoRep, invert, mean_ratio

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]
Triple = Tuple[int, int, int]


class CoefficientSystem:
    """
    A representation rho of the groupoid on a bundle of coefficient spaces C.

    Two forms are supported. With plain action maps, C_x is a vector space of
    dimension dims[x] and rho_g is a matrix. In factored form C_x is the space
    of linear maps U_x -> W_x and rho_g(X) = alpha_g X lambda_g^-1.
    """

    def __init__(self, groupoid: FiniteGroupoid, shapes: Sequence[Tuple[int, ...]],
                 act: Callable[[int, np.ndarray], np.ndarray], factored: bool = False):
        self.groupoid = groupoid
        self.shapes = tuple(tuple(s) for s in shapes)
        self._act = act
        self.factored = factored
        if len(self.shapes) != groupoid.n_objects:
            raise ShapeError(f"Coefficient system has {len(self.shapes)} fibers for "
                             f"{groupoid.n_objects} objects")

    @classmethod
    def from_action(cls, groupoid: FiniteGroupoid, bundle: VectorBundle,
                    maps: Sequence[np.ndarray]) -> "CoefficientSystem":
        """Linear action on vectors; maps[g] is dim(t g) x dim(s g)."""
        rho = PseudoRep(groupoid, bundle, tuple(maps))
        return cls(groupoid, [(d,) for d in bundle.dims], lambda g, v: rho[g] @ v)

    @classmethod
    def trivial(cls, groupoid: FiniteGroupoid, dim: int = 1) -> "CoefficientSystem":
        """Identity action on constant fibers R^dim."""
        bundle = VectorBundle.constant(groupoid.n_objects, dim)
        return cls.from_action(groupoid, bundle, [np.eye(dim)] * groupoid.n_arrows)

    @classmethod
    def factored_system(cls, alpha: PseudoRep, lam: PseudoRep,
                        cond_limit: float = COND_LIMIT) -> "CoefficientSystem":
        """rho_g(X) = alpha_g X lambda_g^-1 on C_x = L(U_x, W_x)."""
        if alpha.groupoid.n_arrows != lam.groupoid.n_arrows:
            raise ShapeError("alpha and lambda live on different groupoids")
        g = lam.groupoid
        for a in range(g.n_arrows):
            safe_inverse(alpha[a], cond_limit=cond_limit, arrow=a)  # alpha must be invertible too
        lam_inv = invert(lam, cond_limit=cond_limit)
        shapes = [(alpha.bundle.dims[x], lam.bundle.dims[x]) for x in range(g.n_objects)]
        return cls(g, shapes, lambda a, v: alpha[a] @ v @ lam_inv[a], factored=True)

    def act(self, g: int, value: np.ndarray) -> np.ndarray:
        """rho_g applied to a value in C_{s g}."""
        return self._act(g, value)

    def zeros(self, x: int) -> np.ndarray:
        return np.zeros(self.shapes[x])

    def action_matrix(self, g: int) -> np.ndarray:
        """Matrix of rho_g in the standard bases of C_{s g} and C_{t g} (row-major flattening)."""
        x, y = int(self.groupoid.source[g]), int(self.groupoid.target[g])
        n_in = int(np.prod(self.shapes[x], dtype=int))
        n_out = int(np.prod(self.shapes[y], dtype=int))
        mat = np.zeros((n_out, n_in))
        for k in range(n_in):
            basis = np.zeros(n_in)
            basis[k] = 1.0
            mat[:, k] = np.asarray(self.act(g, basis.reshape(self.shapes[x]))).ravel()
        return mat

    @cached_property
    def _action_matrices(self) -> List[np.ndarray]:
        return [self.action_matrix(a) for a in range(self.groupoid.n_arrows)]

    def representation_defect(self) -> float:
        """max of |rho_{1x} - id| and |rho_{gh} - rho_g rho_h| in the spectral norm."""
        g = self.groupoid
        mats = self._action_matrices
        worst = 0.0
        for x in range(g.n_objects):
            m = mats[int(g.unit[x])]
            if m.size:
                worst = max(worst, float(np.linalg.norm(m - np.eye(len(m)), 2)))
        for a, h in g._composable_pairs:
            diff = mats[int(g.compose[a, h])] - mats[a] @ mats[h]
            if diff.size:
                worst = max(worst, float(np.linalg.norm(diff, 2)))
        return worst


@dataclass
class Cochain0:
    values: Tuple[np.ndarray, ...]


@dataclass
class Cochain1:
    values: Tuple[np.ndarray, ...]


@dataclass
class Cochain2:
    """Values keyed by composable pair, in lexicographic pair order."""
    values: Dict[Pair, np.ndarray]


@dataclass
class Cochain3:
    values: Dict[Triple, np.ndarray]


Cochain = Any


def sup_norm(cochain: Cochain) -> float:
    """Largest Frobenius norm of a value; 0 for an empty cochain."""
    vals = cochain.values.values() if isinstance(cochain.values, dict) else cochain.values
    return max((float(np.linalg.norm(np.asarray(v))) for v in vals), default=0.0)


def _check_placement(rho: CoefficientSystem, value: np.ndarray, x: int, where: Any) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != rho.shapes[x]:
        raise ShapeError(f"Cochain value at {where} has shape {v.shape}, expected {rho.shapes[x]}",
                         witness=where)
    return v


def make_cochain0(rho: CoefficientSystem, values: Sequence[np.ndarray]) -> Cochain0:
    g = rho.groupoid
    if len(values) != g.n_objects:
        raise ShapeError(f"0-cochain needs {g.n_objects} values, got {len(values)}")
    return Cochain0(tuple(_check_placement(rho, v, x, (x,)) for x, v in enumerate(values)))


def make_cochain1(rho: CoefficientSystem, values: Sequence[np.ndarray]) -> Cochain1:
    g = rho.groupoid
    if len(values) != g.n_arrows:
        raise ShapeError(f"1-cochain needs {g.n_arrows} values, got {len(values)}")
    return Cochain1(tuple(_check_placement(rho, v, int(g.target[a]), (a,)) for a, v in enumerate(values)))


def make_cochain2(rho: CoefficientSystem, values: Sequence[np.ndarray]) -> Cochain2:
    """Values listed in composable-pair order."""
    g = rho.groupoid
    pairs = g._composable_pairs
    if len(values) != len(pairs):
        raise ShapeError(f"2-cochain needs {len(pairs)} values, got {len(values)}")
    return Cochain2({p: _check_placement(rho, v, int(g.target[p[0]]), p) for p, v in zip(pairs, values)})


def random_cochain(rho: CoefficientSystem, degree: int, seed: int) -> Cochain:
    """Seeded cochain with uniform entries in [-1, 1]."""
    rng = np.random.default_rng(seed)
    g = rho.groupoid
    if degree == 0:
        return Cochain0(tuple(rng.uniform(-1, 1, size=rho.shapes[x]) for x in range(g.n_objects)))
    if degree == 1:
        return Cochain1(tuple(rng.uniform(-1, 1, size=rho.shapes[int(g.target[a])])
                              for a in range(g.n_arrows)))
    if degree == 2:
        return Cochain2({p: rng.uniform(-1, 1, size=rho.shapes[int(g.target[p[0]])])
                         for p in g._composable_pairs})
    raise ValueError(f"Cochains of degree {degree} are not supported")


def coboundary0(y: Cochain0, rho: CoefficientSystem) -> Cochain1:
    """(dY)(g) = rho_g(Y(s g)) - Y(t g)."""
    g = rho.groupoid
    return Cochain1(tuple(rho.act(a, y.values[int(g.source[a])]) - y.values[int(g.target[a])]
                          for a in range(g.n_arrows)))


def coboundary1(x: Cochain1, rho: CoefficientSystem) -> Cochain2:
    """(dX)(g, h) = rho_g(X(h)) - X(gh) + X(g)."""
    g = rho.groupoid
    out = {}
    for a, h in g._composable_pairs:
        out[(a, h)] = rho.act(a, x.values[h]) - x.values[int(g.compose[a, h])] + x.values[a]
    return Cochain2(out)


def coboundary2(z: Cochain2, rho: CoefficientSystem) -> Cochain3:
    """(dZ)(g, h, k) = rho_g(Z(h, k)) - Z(gh, k) + Z(g, hk) - Z(g, h)."""
    g = rho.groupoid
    out = {}
    for a, h, k in g._composable_triples:
        ah, hk = int(g.compose[a, h]), int(g.compose[h, k])
        out[(a, h, k)] = (rho.act(a, z.values[(h, k)]) - z.values[(ah, k)]
                          + z.values[(a, hk)] - z.values[(a, h)])
    return Cochain3(out)


@dataclass
class CocycleReport:
    holds: bool
    sup: float
    witness: Optional[Tuple[int, ...]] = None


def cocycle_report(z: Cochain, rho: CoefficientSystem, tol: float = 1e-11) -> CocycleReport:
    """Sup norm of the coboundary of a 1- or 2-cochain, with the worst simplex."""
    if isinstance(z, Cochain1):
        d = coboundary1(z, rho)
    elif isinstance(z, Cochain2):
        d = coboundary2(z, rho)
    else:
        raise TypeError(f"Cocycle test needs a 1- or 2-cochain, got {type(z).__name__}")
    sup, witness = 0.0, None
    for simplex, value in d.values.items():
        n = float(np.linalg.norm(value))
        if n > sup:
            sup, witness = n, simplex
    return CocycleReport(holds=sup <= tol, sup=sup, witness=witness)


def is_cocycle(z: Cochain, rho: CoefficientSystem, tol: float = 1e-11) -> bool:
    return cocycle_report(z, rho, tol).holds


def contract2(z: Cochain2, mu: HaarSystem, c: CutoffFunction, rho: CoefficientSystem,
              max_parallel: int = 1) -> Cochain1:
    """Z_hat(g) = sum over h with t(h) = s(g) of c(s h) weight(h) Z(g, h)."""
    g = rho.groupoid
    values = haar_integrate(g, mu, c, lambda a, h: z.values[(a, h)], list(range(g.n_arrows)),
                            base_map=lambda a: int(g.source[a]), max_parallel=max_parallel)
    return Cochain1(tuple(values))


def contract1(x: Cochain1, mu: HaarSystem, c: CutoffFunction, rho: CoefficientSystem,
              max_parallel: int = 1) -> Cochain0:
    """Y(x) = - sum over h with t(h) = x of c(s h) weight(h) X(h)."""
    g = rho.groupoid
    values = haar_integrate(g, mu, c, lambda obj, h: x.values[h], list(range(g.n_objects)),
                            base_map=lambda obj: obj, max_parallel=max_parallel)
    return Cochain0(tuple(-v for v in values))


def defect_cochain(lam: PseudoRep) -> Tuple[Cochain2, CoefficientSystem]:
    """
    Delta(g, h) = (lambda_{gh} - lambda_g lambda_h) lambda_h^-1 lambda_g^-1,
    in the factored system rho_g(X) = lambda_g X lambda_g^-1.

    Delta(g, h) lambda_g = lambda_{gh} lambda_h^-1 - lambda_g.
    """
    g = lam.groupoid
    inv = invert(lam)
    rho = CoefficientSystem.factored_system(lam, lam)
    values = {}
    for a, h in g._composable_pairs:
        ah = int(g.compose[a, h])
        values[(a, h)] = (lam[ah] - lam[a] @ lam[h]) @ inv[h] @ inv[a]
    return Cochain2(values), rho


@dataclass
class DefectConsistencyReport:
    """Residuals of the two identities tying the defect cochain to the mean ratio."""
    ratio_identity: float
    mean_ratio_identity: float

    @property
    def worst(self) -> float:
        return max(self.ratio_identity, self.mean_ratio_identity)


def defect_consistency(lam: PseudoRep, mu: HaarSystem, c: CutoffFunction) -> DefectConsistencyReport:
    """
    Check Delta(g, h) lambda_g = lambda_{gh} lambda_h^-1 - lambda_g on every pair and
    lambda_hat_g = lambda_g + contract2(Delta)(g) lambda_g on every arrow (Frobenius norms).
    """
    g = lam.groupoid
    delta, rho = defect_cochain(lam)
    inv = invert(lam)
    ratio_res = 0.0
    for (a, h), value in delta.values.items():
        ah = int(g.compose[a, h])
        ratio_res = max(ratio_res, float(np.linalg.norm(value @ lam[a] - (lam[ah] @ inv[h] - lam[a]))))
    hat = mean_ratio(lam, mu, c)
    z_hat = contract2(delta, mu, c, rho)
    mean_res = 0.0
    for a in range(g.n_arrows):
        mean_res = max(mean_res, float(np.linalg.norm(hat[a] - (lam[a] + z_hat.values[a] @ lam[a]))))
    logger.debug("defect consistency: ratio=%.3e mean=%.3e", ratio_res, mean_res)
    return DefectConsistencyReport(ratio_identity=ratio_res, mean_ratio_identity=mean_res)
