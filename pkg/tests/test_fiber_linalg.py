import numpy as np
import pytest
import scipy.linalg
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from groupoid_avg.errors import MetricError, PreconditionError, ShapeError, SingularMapError
from groupoid_avg.linalg import (FiberMap, FiberMetric, VectorBundle, neumann_inverse_bound,
                                 operator_norm, safe_inverse, submultiplicativity_check)

DIM = 3
entries = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)


def spd(raw: np.ndarray) -> np.ndarray:
    return raw @ raw.T + 0.5 * np.eye(len(raw))


def test_operator_norm_in_scaled_metric():
    # |e|_0 = 2|e|, |e|_1 = |e|: the identity 0 -> 1 has norm 1/2
    metric = FiberMetric([np.array([[4.0]]), np.array([[1.0]])])
    assert operator_norm(FiberMap(0, 1, np.array([[1.0]])), metric) == pytest.approx(0.5)


def test_euclidean_operator_norm_is_spectral():
    metric = FiberMetric.euclidean(VectorBundle((2,)))
    m = np.array([[3.0, 0.0], [4.0, 5.0]])
    assert operator_norm(FiberMap(0, 0, m), metric) == pytest.approx(np.linalg.norm(m, 2), rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(a=arrays(np.float64, (DIM, DIM), elements=entries),
       b=arrays(np.float64, (DIM, DIM), elements=entries),
       g0=arrays(np.float64, (DIM, DIM), elements=entries),
       g1=arrays(np.float64, (DIM, DIM), elements=entries),
       g2=arrays(np.float64, (DIM, DIM), elements=entries))
def test_submultiplicativity(a, b, g0, g1, g2):
    metric = FiberMetric([spd(g0), spd(g1), spd(g2)])
    report = submultiplicativity_check(FiberMap(0, 1, a), FiberMap(1, 2, b), metric, slack=1e-9)
    assert report.holds


def test_dimension_zero_fibers():
    metric = FiberMetric.euclidean(VectorBundle((0, 2)))
    assert metric.op_norm(np.zeros((0, 0)), 0, 0) == 0.0
    assert metric.op_norm(np.zeros((2, 0)), 0, 1) == 0.0
    assert safe_inverse(np.zeros((0, 0))).shape == (0, 0)


def test_shape_mismatch():
    metric = FiberMetric.euclidean(VectorBundle((2, 3)))
    with pytest.raises(ShapeError):
        metric.op_norm(np.zeros((2, 2)), 0, 1)


@pytest.mark.parametrize("gram, reason", [
    ([[1.0, 0.5], [0.0, 1.0]], "symmetric"),
    ([[1.0, 2.0], [2.0, 1.0]], "positive definite"),
    ([[1.0, 0.0, 0.0]], "square"),
])
def test_bad_gram_matrix_names_object(gram, reason):
    with pytest.raises(MetricError) as exc:
        FiberMetric([np.eye(2), np.array(gram)])
    assert exc.value.obj == 1
    assert reason in str(exc.value)


def test_safe_inverse():
    m = np.array([[2.0, 1.0], [1.0, 1.0]])
    np.testing.assert_allclose(safe_inverse(m) @ m, np.eye(2), atol=1e-15)
    with pytest.raises(SingularMapError) as exc:
        safe_inverse(np.array([[1.0, 2.0], [2.0, 4.0]]), arrow=7)
    assert exc.value.arrow == 7
    with pytest.raises(SingularMapError):
        safe_inverse(np.array([[np.inf]]))
    with pytest.raises(ShapeError):
        safe_inverse(np.zeros((2, 3)))


def test_neumann_bound_example():
    metric = FiberMetric.euclidean(VectorBundle((2,)))
    a = FiberMap(0, 0, np.diag([0.3, -0.2]))
    inverse, report = neumann_inverse_bound(a, metric, r=0.3)
    np.testing.assert_allclose(inverse, np.diag([1 / 0.7, 1 / 1.2]))
    assert report.deviation == pytest.approx(3 / 7)
    assert report.bound == pytest.approx(3 / 7)
    assert report.holds


def test_neumann_bound_preconditions():
    metric = FiberMetric.euclidean(VectorBundle((1,)))
    with pytest.raises(PreconditionError):
        neumann_inverse_bound(FiberMap(0, 0, np.array([[1.0]])), metric, r=0.5)
    with pytest.raises(PreconditionError):
        neumann_inverse_bound(FiberMap(0, 0, np.array([[0.5]])), metric, r=0.2)
    with pytest.raises(PreconditionError):
        neumann_inverse_bound(FiberMap(0, 0, np.array([[0.1]])), metric, r=1.0)


@settings(max_examples=50, deadline=None)
@given(a=arrays(np.float64, (DIM, DIM), elements=entries),
       g=arrays(np.float64, (DIM, DIM), elements=entries),
       r=st.floats(min_value=0.05, max_value=0.95))
def test_neumann_bound_holds_in_any_metric(a, g, r):
    metric = FiberMetric([spd(g)])
    norm = operator_norm(FiberMap(0, 0, a), metric)
    assume(norm > 1e-6)
    scaled = FiberMap(0, 0, a * (r / norm) * 0.999)
    _, report = neumann_inverse_bound(scaled, metric, r=r, slack=1e-9)
    assert report.holds


def test_neumann_bound_on_seeded_contractions():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        raw = rng.uniform(-1, 1, size=(DIM, DIM))
        metric = FiberMetric([spd(rng.uniform(-1, 1, size=(DIM, DIM)))])
        r = rng.uniform(0.05, 0.95)
        norm = operator_norm(FiberMap(0, 0, raw), metric)
        a = FiberMap(0, 0, raw * (r / norm) * rng.uniform(0.0, 0.999))
        _, report = neumann_inverse_bound(a, metric, r=r, slack=1e-9)
        assert report.holds


def _metric_isometry(gram: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """R^-1 Q R with G = R^T R and Q orthogonal, so that U^T G U = G."""
    r = scipy.linalg.cholesky(gram, lower=False)
    q, _ = scipy.linalg.qr(rng.standard_normal((len(gram), len(gram))))
    return scipy.linalg.solve_triangular(r, q @ r, lower=False)


@pytest.mark.parametrize("seed", range(20))
def test_operator_norm_is_invariant_under_metric_isometries(seed):
    rng = np.random.default_rng(seed)
    metric = FiberMetric([spd(rng.uniform(-1, 1, size=(DIM, DIM))),
                          spd(rng.uniform(-1, 1, size=(2, 2)))])
    a = rng.uniform(-2, 2, size=(2, DIM))
    u = _metric_isometry(metric.gram[0], rng)
    v = _metric_isometry(metric.gram[1], rng)
    np.testing.assert_allclose(u.T @ metric.gram[0] @ u, metric.gram[0], atol=1e-10)
    before = metric.op_norm(a, 0, 1)
    assert metric.op_norm(v @ a @ u, 0, 1) == pytest.approx(before, rel=1e-10)
