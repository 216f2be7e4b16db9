import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexval.convex_fn import ConvexFn, restrict_to
from convexval.geom import Polytope, hausdorff_distance
from convexval.harness import GenConfig, gen_convex_fn
from convexval.measures import DensityFn
from convexval.sublevel import (beta_integral, concavity_slack, profile, sublevel_closed,
                                sublevel_strict_closure)


def test_linf_profile():
    u = ConvexFn.linf_norm(2)
    for k, expect in ((0, lambda t: 1.0), (1, lambda t: 4 * t), (2, lambda t: 4 * t * t)):
        prof = profile(u, k)
        for t in (0.25, 1.0, 3.0):
            assert prof(t) == pytest.approx(expect(t), abs=1e-12)
        # strict sub-level set is empty at the minimum
        assert prof(0.0) == 0.0


def test_atom_is_argmin_volume():
    box = Polytope.box([0, 0], [2, 3])
    prof = profile(ConvexFn.indicator(box, level=1.0), 1)
    assert prof.m_value == 1.0
    assert prof.atom_mass == pytest.approx(5.0)
    assert prof(1.0) == 0.0 and prof(1.5) == pytest.approx(5.0)


def test_derivative_of_profile():
    prof = profile(ConvexFn.linf_norm(2), 2)
    assert prof.derivative(np.array([0.5, 2.0])) == pytest.approx([4.0, 16.0], rel=1e-8)


def test_beta_integral_step():
    # int 1_{t < 2} dbeta_1(|x|) = v_1(2) = 4
    assert beta_integral(ConvexFn.abs(), 1, DensityFn.step(2.0)) == pytest.approx(4.0, abs=1e-9)
    # the atom at the minimum carries the argmin
    u = ConvexFn.indicator(Polytope.box([0], [3]), level=0.0)
    assert beta_integral(u, 1, DensityFn.step(1.0)) == pytest.approx(3.0)


def test_closure_and_empty_below_minimum():
    u = restrict_to(ConvexFn.l1_norm(2), Polytope.box([-1, -1], [2, 2]))
    assert sublevel_strict_closure(u, u.minimum).is_empty
    assert not sublevel_closed(u, u.minimum).is_empty
    t = u.minimum + 0.5
    assert hausdorff_distance(sublevel_strict_closure(u, t), sublevel_closed(u, t)) == 0.0


def test_profile_csv():
    text = profile(ConvexFn.abs(), 1).to_csv([0.0, 1.0])
    assert text.splitlines()[-1] == "1.000000000,2.000000000"


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(1, 3), kind=st.sampled_from(["box", "free", "simplex"]))
def test_brunn_minkowski_concavity(seed, dim, kind):
    u = gen_convex_fn(GenConfig(seed, dim, (2, 4), kind))
    for k in range(1, dim + 1):
        assert concavity_slack(u, k, span=6.0, points=32) >= -1e-9


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(1, 3))
def test_profiles_are_nondecreasing(seed, dim):
    u = gen_convex_fn(GenConfig(seed, dim, (2, 4), "box"))
    ts = np.linspace(u.minimum + 1e-6, u.minimum + 6, 25)
    for k in range(dim + 1):
        assert np.all(np.diff(profile(u, k)(ts)) >= -1e-10)
