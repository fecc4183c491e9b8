"""
Vector bundles over the object set, fiber metrics and metric-adapted
operator norms between fibers.

The operator norm of A: E_x -> E_y is the largest singular value of
R_y A R_x^-1, where R_z is the upper Cholesky factor of the Gram matrix at z.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..errors import MetricError, PreconditionError, ShapeError, SingularMapError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
COND_LIMIT = 1e12


@dataclass(frozen=True)
class VectorBundle:
    """Fiber dimension per object."""
    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 0 for d in dims):
            raise ShapeError("Fiber dimensions must be nonnegative")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def constant(cls, n_objects: int, dim: int) -> "VectorBundle":
        return cls(tuple([dim] * n_objects))

    def check_orbit_constant(self, groupoid) -> None:
        """Raise ShapeError unless every arrow joins fibers of equal dimension."""
        if len(self.dims) != groupoid.n_objects:
            raise ShapeError(f"Bundle has {len(self.dims)} fibers for {groupoid.n_objects} objects")
        for a in range(groupoid.n_arrows):
            x, y = int(groupoid.source[a]), int(groupoid.target[a])
            if self.dims[x] != self.dims[y]:
                raise ShapeError(f"Fiber dimension changes along arrow {a} ({x} -> {y})", witness=(a,))


@dataclass(frozen=True)
class FiberMap:
    """Linear map E_src -> E_dst stored as a dim(dst) x dim(src) matrix."""
    src: int
    dst: int
    matrix: np.ndarray


class FiberMetric:
    """
    Inner product per fiber, given by symmetric positive-definite Gram matrices.

    Cholesky factors are computed once at construction; a failure names the
    offending object.
    """

    def __init__(self, gram: Sequence[np.ndarray]):
        self.gram: List[np.ndarray] = []
        self._chol: List[np.ndarray] = []
        self._chol_inv: List[np.ndarray] = []
        for x, raw in enumerate(gram):
            m = np.array(raw, dtype=float, ndmin=2) if np.size(raw) else np.zeros((0, 0))
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise MetricError(f"Gram matrix at object {x} is not square", obj=x)
            if not np.allclose(m, m.T, rtol=0.0, atol=SYMMETRY_TOL):
                raise MetricError(f"Gram matrix at object {x} is not symmetric", obj=x)
            if m.shape[0] == 0:
                r = np.zeros((0, 0))
                r_inv = np.zeros((0, 0))
            else:
                try:
                    r = scipy.linalg.cholesky(m, lower=False)
                except np.linalg.LinAlgError:
                    raise MetricError(f"Gram matrix at object {x} is not positive definite", obj=x)
                r_inv = scipy.linalg.solve_triangular(r, np.eye(len(r)), lower=False)
            m.setflags(write=False)
            self.gram.append(m)
            self._chol.append(r)
            self._chol_inv.append(r_inv)

    @classmethod
    def euclidean(cls, bundle: VectorBundle) -> "FiberMetric":
        return cls([np.eye(d) for d in bundle.dims])

    @property
    def n_objects(self) -> int:
        return len(self.gram)

    @cached_property
    def bundle(self) -> VectorBundle:
        return VectorBundle(tuple(len(m) for m in self.gram))

    def whiten(self, matrix: np.ndarray, src: int, dst: int) -> np.ndarray:
        """R_dst @ matrix @ R_src^-1: the map in orthonormal coordinates."""
        return self._chol[dst] @ matrix @ self._chol_inv[src]

    def op_norm(self, matrix: np.ndarray, src: int, dst: int) -> float:
        """Operator norm of ``matrix`` viewed as a map E_src -> E_dst."""
        expected = (len(self.gram[dst]), len(self.gram[src]))
        if matrix.shape != expected:
            raise ShapeError(f"Map {src}->{dst} has shape {matrix.shape}, expected {expected}")
        if matrix.size == 0:
            return 0.0
        return float(scipy.linalg.svdvals(self.whiten(matrix, src, dst))[0])

    def min_eigenvalues(self) -> List[float]:
        return [float(scipy.linalg.eigh(m, eigvals_only=True)[0]) if len(m) else float("inf")
                for m in self.gram]


def operator_norm(a: FiberMap, metric: FiberMetric) -> float:
    """sup over |e|_src <= 1 of |A e|_dst."""
    return metric.op_norm(np.asarray(a.matrix, dtype=float), a.src, a.dst)


@dataclass
class SubmultiplicativityReport:
    norm_product: float
    product_of_norms: float
    holds: bool


def submultiplicativity_check(a: FiberMap, b: FiberMap, metric: FiberMetric,
                              slack: float = 1e-12) -> SubmultiplicativityReport:
    """Check |B A| <= |A| |B| + slack for A: x -> y, B: y -> z."""
    if a.dst != b.src or b.matrix.shape[1] != a.matrix.shape[0]:
        raise ShapeError(f"Maps are not composable: A ends at {a.dst}, B starts at {b.src}")
    lhs = operator_norm(FiberMap(a.src, b.dst, b.matrix @ a.matrix), metric)
    rhs = operator_norm(a, metric) * operator_norm(b, metric)
    return SubmultiplicativityReport(norm_product=lhs, product_of_norms=rhs, holds=lhs <= rhs + slack)


def safe_inverse(matrix: np.ndarray, cond_limit: float = COND_LIMIT,
                 arrow: Optional[int] = None) -> np.ndarray:
    """
    Invert a square matrix by LU with partial pivoting.

    Raises SingularMapError when the 2-norm condition number exceeds ``cond_limit``.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"Cannot invert non-square map of shape {m.shape}", witness=arrow)
    if m.size == 0:
        return np.zeros((0, 0))
    where = f" at arrow {arrow}" if arrow is not None else ""
    if not np.isfinite(m).all():
        raise SingularMapError(f"Map{where} has non-finite entries", arrow=arrow)
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularMapError(f"Map{where} is singular or ill-conditioned (cond = {cond:.3e})",
                               arrow=arrow)
    lu_piv = scipy.linalg.lu_factor(m)
    return scipy.linalg.lu_solve(lu_piv, np.eye(len(m)))


@dataclass
class NeumannReport:
    norm_a: float
    r: float
    deviation: float
    bound: float
    holds: bool


def neumann_inverse_bound(a: FiberMap, metric: FiberMetric, r: float,
                          slack: float = 1e-12) -> Tuple[np.ndarray, NeumannReport]:
    """
    Invert 1 - a and check |(1 - a)^-1 - 1| <= r / (1 - r).

    Requires |a| <= r < 1 in the metric norm of the fiber.
    """
    if a.src != a.dst:
        raise ShapeError("Neumann bound needs an endomorphism of one fiber")
    if not 0 <= r < 1:
        raise PreconditionError(f"Neumann bound needs 0 <= r < 1, got r = {r}")
    norm_a = operator_norm(a, metric)
    if norm_a >= 1:
        raise PreconditionError(f"|a| = {norm_a:.6g} >= 1; 1 - a need not be invertible")
    if norm_a > r + slack:
        raise PreconditionError(f"|a| = {norm_a:.6g} exceeds the supplied r = {r}")
    eye = np.eye(len(a.matrix))
    inverse = safe_inverse(eye - a.matrix)
    deviation = metric.op_norm(inverse - eye, a.src, a.dst)
    bound = r / (1 - r)
    return inverse, NeumannReport(norm_a=norm_a, r=r, deviation=deviation, bound=bound,
                                  holds=deviation <= bound + slack)
