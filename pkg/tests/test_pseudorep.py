import numpy as np
import pytest
from oracles import naive_defects, naive_mean_ratio

import groupoid_avg.reps.pseudorep as pseudorep
from groupoid_avg.errors import PreconditionError, ShapeError, SingularMapError
from groupoid_avg.groupoid import cyclic_group, gen_group_bundle, gen_pair_groupoid
from groupoid_avg.linalg import FiberMetric, VectorBundle
from groupoid_avg.reps import (PseudoRep, check_rep_shapes, defects, gate_threshold, identity_rep,
                               inverse_bound_report, inverse_estimates, invert, is_representation_over,
                               local_defects, mean_ratio,
                               multiplicativity_identity_residual, near_representation_gate,
                               perturb_representation, restrict_rep, scalar_rep, sup_distance)


def test_eta_family_defects(eta_family):
    lam, _, _ = eta_family(0.04)
    d = defects(lam)
    assert d.b == pytest.approx(1.04)
    assert d.r_unit_part == pytest.approx(0.04)
    assert d.r_mult_part == pytest.approx(0.0416)
    assert d.r == pytest.approx(0.0816)
    assert d.b_witness == 3
    assert d.unit_witness == 1
    assert d.mult_witness == (3, 3)


def test_eta_family_gate(eta_family):
    near = near_representation_gate(eta_family(0.04)[0])
    assert near.is_near
    assert near.threshold == pytest.approx(1 / (9 * 1.0816))
    far = near_representation_gate(eta_family(0.1)[0])
    assert far.r == pytest.approx(0.21)
    assert not far.is_near


@pytest.mark.parametrize("b, expected", [(0.0, 0.25), (0.5, 0.25), (1.0, 1 / 9), (2.0, 1 / 36)])
def test_gate_threshold(b, expected):
    assert gate_threshold(b) == pytest.approx(expected)


def test_defects_agree_with_naive_loops(small_groupoid, seeded_rep):
    g, _, _ = small_groupoid
    lam = perturb_representation(seeded_rep(g, seed=3), 0.05, seed=1)
    b, r = naive_defects(g, lam.maps)
    d = defects(lam)
    assert d.b == pytest.approx(b, rel=1e-12)
    assert d.r == pytest.approx(r, rel=1e-12)


def test_mean_ratio_of_eta_family(eta_family):
    lam, mu, c = eta_family(0.04)
    hat = mean_ratio(lam, mu, c)
    values = [float(m[0, 0]) for m in hat.maps]
    np.testing.assert_allclose(values, [1.0, 0.5 * (1 + 1 / 1.04), 1.02, 1.0], rtol=1e-15)


def test_mean_ratio_fixes_representations(small_groupoid, seeded_rep):
    g, mu, c = small_groupoid
    rho = seeded_rep(g, dim=2, seed=5)
    assert sup_distance(mean_ratio(rho, mu, c), rho) <= 1e-12


def test_mean_ratio_is_unital(small_groupoid, seeded_rep):
    g, mu, c = small_groupoid
    lam = perturb_representation(seeded_rep(g, seed=2), 0.2, seed=9)
    hat = mean_ratio(lam, mu, c)
    for x in range(g.n_objects):
        u = int(g.unit[x])
        assert np.linalg.norm(hat[u] - np.eye(2), 2) <= 1e-12


def test_mean_ratio_matches_naive_loops(small_groupoid, seeded_rep):
    g, mu, c = small_groupoid
    lam = perturb_representation(seeded_rep(g, seed=4), 0.05, seed=8)
    expected = naive_mean_ratio(g, lam.maps, mu.weight, c.values)
    for got, want in zip(mean_ratio(lam, mu, c).maps, expected):
        np.testing.assert_allclose(got, want, rtol=1e-13, atol=1e-15)


def test_mean_ratio_is_independent_of_worker_count(small_groupoid, seeded_rep):
    g, mu, c = small_groupoid
    lam = perturb_representation(seeded_rep(g, seed=4), 0.05, seed=8)
    seq = mean_ratio(lam, mu, c)
    par = mean_ratio(lam, mu, c, max_parallel=3)
    for a, b in zip(seq.maps, par.maps):
        np.testing.assert_array_equal(a, b)


def test_singular_map_is_named():
    g = gen_pair_groupoid(2)
    lam = scalar_rep(g, [1.0, 0.0, 1.0, 1.0])
    with pytest.raises(SingularMapError) as exc:
        invert(lam)
    assert exc.value.arrow == 1


def test_invert_scalar():
    lam = scalar_rep(gen_pair_groupoid(2), [1.0, 2.0, 0.5, 4.0])
    np.testing.assert_allclose([m[0, 0] for m in invert(lam).maps], [1.0, 0.5, 2.0, 0.25])


def test_wrong_map_shape_names_arrow():
    g = gen_pair_groupoid(2)
    maps = [np.eye(2)] * 3 + [np.eye(3)]
    with pytest.raises(ShapeError) as exc:
        PseudoRep(g, VectorBundle.constant(2, 2), tuple(maps))
    assert exc.value.witness == (3,)


def test_defects_in_scaled_metric():
    g = gen_pair_groupoid(2)
    lam = scalar_rep(g, [1.0, 1.0, 1.0, 1.0])
    # |e|_0 = 2|e|: the arrow 0 -> 1 shrinks by 2, the arrow 1 -> 0 stretches by 2
    metric = FiberMetric([np.array([[4.0]]), np.array([[1.0]])])
    d = defects(lam, metric)
    assert d.b == pytest.approx(2.0)
    assert d.r == 0.0


def test_sup_distance(eta_family):
    lam, _, _ = eta_family(0.04)
    rho = scalar_rep(lam.groupoid, [1.0] * 4)
    assert sup_distance(lam, rho) == pytest.approx(0.04)
    assert sup_distance(lam, lam) == 0.0


def test_sup_distance_rejects_other_bundle(eta_family):
    lam, _, _ = eta_family(0.04)
    other = identity_rep(lam.groupoid, VectorBundle.constant(2, 2))
    with pytest.raises(ShapeError):
        sup_distance(lam, other)


def test_perturbation_defaults():
    g = gen_pair_groupoid(3)
    rho = identity_rep(g, VectorBundle.constant(3, 2))
    same = perturb_representation(rho, 0.0, seed=7)
    assert sup_distance(same, rho) == 0.0
    lam = perturb_representation(rho, 0.01, seed=7)
    again = perturb_representation(rho, 0.01, seed=7)
    for a, b in zip(lam.maps, again.maps):
        np.testing.assert_array_equal(a, b)
    assert 0 < defects(lam).r <= 0.1


def test_perturbation_keeping_units():
    g = gen_pair_groupoid(3)
    rho = identity_rep(g, VectorBundle.constant(3, 2))
    lam = perturb_representation(rho, 0.01, seed=7, keep_units=True)
    full = perturb_representation(rho, 0.01, seed=7)
    for a in range(g.n_arrows):
        if a in set(int(u) for u in g.unit):
            np.testing.assert_array_equal(lam[a], np.eye(2))
        else:
            np.testing.assert_array_equal(lam[a], full[a])
    assert defects(lam).r_unit_part == 0.0


def test_perturbation_needs_a_representation(eta_family):
    lam, _, _ = eta_family(0.04)
    with pytest.raises(PreconditionError):
        perturb_representation(lam, 0.01, seed=0)


def test_representation_over_invariant_subset():
    g = gen_group_bundle([cyclic_group(2), cyclic_group(3)])
    # unit of the Z/3 component (arrow 2) is broken
    lam = scalar_rep(g, [1.0, 1.0, 1.5, 1.0, 1.0])
    assert is_representation_over(lam, [0])
    assert not is_representation_over(lam, [0, 1])
    assert is_representation_over(lam, [])
    sub = restrict_rep(lam, [0])
    assert sub.groupoid.n_arrows == 2
    assert defects(sub).r == 0.0
    assert restrict_rep(lam, []) is None


def test_local_defects_are_dominated(small_groupoid, seeded_rep):
    g, _, _ = small_groupoid
    lam = perturb_representation(seeded_rep(g, seed=6), 0.05, seed=2)
    full = defects(lam)
    for objects in ([0], [0, 1], list(range(g.n_objects))):
        local = local_defects(lam, None, objects)
        assert local.b <= full.b
        assert local.r <= full.r


def test_local_one_step_bound(small_groupoid, seeded_rep):
    g, mu, c = small_groupoid
    lam = perturb_representation(seeded_rep(g, seed=6), 0.02, seed=2)
    d = defects(lam)
    bound = 2 * (d.b / (1 - d.r)) ** 2 * d.r ** 2
    hat = mean_ratio(lam, mu, c)
    assert local_defects(hat, None, [0]).r <= bound * (1 + 1e-9)


def test_inverse_estimates_hold(small_groupoid, seeded_rep):
    g, _, _ = small_groupoid
    lam = perturb_representation(seeded_rep(g, seed=1), 0.03, seed=4)
    report = inverse_estimates(lam)
    assert report.holds
    assert report.inverse_norm_ratio > 0


def test_inverse_estimates_need_small_defect():
    lam = scalar_rep(gen_pair_groupoid(2), [1.0, 1.0, 1.0, 3.0])
    with pytest.raises(PreconditionError):
        inverse_estimates(lam)


def test_multiplicativity_identity(small_groupoid, seeded_rep, eta_family):
    g, mu, c = small_groupoid
    lam = perturb_representation(seeded_rep(g, seed=3), 0.05, seed=5)
    assert multiplicativity_identity_residual(lam, mu, c) <= 1e-12
    assert multiplicativity_identity_residual(*eta_family(0.04)) <= 1e-12


def test_inverse_bound_report_on_eta_family(eta_family):
    lam, _, _ = eta_family(0.04)
    metric = FiberMetric.euclidean(lam.bundle)
    inverses = invert(lam, metric, strict=True).maps
    assert inverse_bound_report(lam, inverses, metric).ok
    inflated = [10.0 * m for m in inverses]
    report = inverse_bound_report(lam, inflated, metric)
    assert [v.witness for v in report.violations] == [(0,), (1,), (2,), (3,)]


def test_strict_invert_raises_on_bound_violation(eta_family, monkeypatch):
    lam, _, _ = eta_family(0.04)
    exact = pseudorep.safe_inverse
    monkeypatch.setattr(pseudorep, "safe_inverse", lambda m, **kw: 10.0 * exact(m, **kw))
    invert(lam, FiberMetric.euclidean(lam.bundle))
    with pytest.raises(PreconditionError) as exc:
        invert(lam, strict=True)
    assert exc.value.witness == (0,)


def test_inverse_bound_is_skipped_far_from_representations():
    lam = scalar_rep(gen_pair_groupoid(2), [1.0, 2.0, 0.5, 4.0])
    assert defects(lam).r >= 1
    assert inverse_bound_report(lam, [np.eye(1) * 1e6] * 4).ok


def test_rep_shape_check_flags_non_finite_maps():
    g = gen_pair_groupoid(2)
    assert check_rep_shapes(identity_rep(g, VectorBundle.constant(2, 1))).ok
    report = check_rep_shapes(scalar_rep(g, [1.0, 1.0, np.nan, 1.0]))
    assert [(v.check, v.witness) for v in report.violations] == [("rep_finite", (2,))]
