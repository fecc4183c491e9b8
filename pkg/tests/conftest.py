"""Shared fixtures: the scalar eta-family on the pair groupoid and seeded representations."""

import numpy as np
import pytest

from groupoid_avg.groupoid import (CutoffFunction, counting_haar, cyclic_group, gen_action_groupoid,
                                   gen_group_bundle, gen_pair_groupoid, normalize_cutoff,
                                   rotation_action)
from groupoid_avg.linalg.fiber import VectorBundle
from groupoid_avg.reps import gauge_rep, identity_rep, scalar_rep


def eta_rep(eta: float):
    """Pair groupoid on two objects, lambda = 1 except lambda_{(1,1)} = 1 + eta."""
    g = gen_pair_groupoid(2)
    return scalar_rep(g, [1.0, 1.0, 1.0, 1.0 + eta])


def haar_and_normalizer(g):
    mu = counting_haar(g)
    c = normalize_cutoff(g, mu, CutoffFunction(np.ones(g.n_objects)))
    return mu, c


def small_groupoids():
    """A pair, an action and a group-bundle groupoid, all with at most 12 arrows."""
    return [
        gen_pair_groupoid(3),
        gen_action_groupoid(cyclic_group(3), rotation_action(3)),
        gen_group_bundle([cyclic_group(2), cyclic_group(3)]),
    ]


@pytest.fixture
def eta_family():
    def build(eta):
        lam = eta_rep(eta)
        mu, c = haar_and_normalizer(lam.groupoid)
        return lam, mu, c
    return build


@pytest.fixture
def pair2():
    g = gen_pair_groupoid(2)
    mu, c = haar_and_normalizer(g)
    return g, mu, c


@pytest.fixture(params=["pair3", "action_z3", "bundle_z2_z3"])
def small_groupoid(request):
    g = dict(zip(["pair3", "action_z3", "bundle_z2_z3"], small_groupoids()))[request.param]
    mu, c = haar_and_normalizer(g)
    return g, mu, c


@pytest.fixture
def seeded_rep():
    """rho = gauge representation of rank ``dim`` on ``g``; identity when seed is None."""
    def build(g, dim=2, seed=0):
        bundle = VectorBundle.constant(g.n_objects, dim)
        if seed is None:
            return identity_rep(g, bundle)
        return gauge_rep(g, bundle, seed=seed)
    return build


@pytest.fixture
def counting():
    """Counting Haar system and the normalized constant cut-off for any groupoid."""
    return haar_and_normalizer
