import math

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from convexval.convex_fn import (ConvexFn, add, apply_motion, coercivity_check, evaluate, extend_dim, join,
                                 lift_undergraph, meet_glued, min_info, restrict_dim, restrict_to,
                                 scale_horizontal, shift)
from convexval.exceptions import EuclideanNormNotPL, NonConvexUnion, NonPositiveLambda, NotCoercive
from convexval.geom import Polytope, RigidMotion, hausdorff_distance
from convexval.harness import GenConfig, gen_convex_fn


def test_coercivity():
    assert coercivity_check([[1.0], [-1.0]]).coercive
    assert not coercivity_check([[1.0], [2.0]]).coercive
    assert coercivity_check(ConvexFn.l1_norm(2).slopes).coercive
    # origin on the boundary of the slope hull: growth is only sublinear in one direction
    assert not coercivity_check([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]).coercive
    with pytest.raises(NotCoercive):
        ConvexFn([[1.0], [2.0]], [0.0, 0.0])


def test_coercive_witness_bounds_u():
    u = ConvexFn([[2.0, 0.0], [-1.0, 1.0], [0.0, -3.0]], [0.5, -1.0, 0.0])
    res = coercivity_check(u.slopes, u.intercepts)
    X = np.random.default_rng(0).normal(scale=5, size=(500, 2))
    assert np.all(u(X) >= res.a * np.linalg.norm(X, axis=1) + res.b - 1e-12)


def test_evaluate_and_infinity_off_domain():
    u = ConvexFn.linf_norm(2)
    assert u([[1, -3], [0.5, 0.2]]) == pytest.approx([3, 0.5])
    v = restrict_to(ConvexFn.abs(), Polytope.box([1], [2]))
    assert evaluate(v, [[1.5], [3.0]]).tolist() == [1.5, math.inf]
    assert ConvexFn.infty(2)([[0, 0]])[0] == math.inf


def test_minimum_and_argmin():
    u = restrict_to(ConvexFn.abs(), Polytope.box([1], [2]))
    info = min_info(u)
    assert info.value == pytest.approx(1.0)
    assert info.argmin.vertices.ravel() == pytest.approx([1.0])
    box = Polytope.box([0, 0], [2, 1])
    flat = ConvexFn.indicator(box, level=3.0)
    info = min_info(flat)
    assert info.value == 3.0
    assert info.argmin.intrinsic_volumes == pytest.approx(box.intrinsic_volumes)


def test_sublevel_of_l1_is_diamond():
    K = ConvexFn.l1_norm(2).sublevel_polytope(1.0)
    assert K.intrinsic_volumes == pytest.approx([1, 2 * math.sqrt(2), 2])


def test_breakpoints_of_abs():
    assert ConvexFn.abs().breakpoints.tolist() == [0.0]


def test_scale_horizontal():
    u = ConvexFn.l1_norm(2)
    X = np.random.default_rng(1).normal(size=(20, 2))
    assert scale_horizontal(u, 2.0)(X) == pytest.approx(u(X / 2.0))
    with pytest.raises(NonPositiveLambda):
        scale_horizontal(u, 0.0)


def test_apply_motion_composes():
    rng = np.random.default_rng(2)
    u = ConvexFn.l1_norm(3)
    T = RigidMotion.random(3, rng, shift=1.0)
    X = rng.normal(size=(10, 3))
    assert apply_motion(u, T)(X) == pytest.approx(u(T(X)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(1, 3))
def test_join_add_pointwise(seed, dim):
    u = gen_convex_fn(GenConfig(seed, dim, (2, 4), "free"))
    v = gen_convex_fn(GenConfig(seed + 1, dim, (2, 4), "free"))
    X = np.random.default_rng(seed).normal(size=(30, dim))
    assert join(u, v)(X) == pytest.approx(np.maximum(u(X), v(X)))
    assert add(u, v)(X) == pytest.approx(u(X) + v(X))
    assert shift(u, 1.5)(X) == pytest.approx(u(X) + 1.5)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(1, 3))
@example(seed=9741, dim=1)  # cut misses the box, one side is +inf
def test_minimum_of_join_is_max_of_minima_on_glued_pairs(seed, dim):
    rng = np.random.default_rng(seed)
    h = gen_convex_fn(GenConfig(seed, dim, (2, 4), "free"))
    fam = meet_glued(h, Polytope.box(-np.ones(dim), np.ones(dim)), rng.normal(size=dim), 0.1)
    assert not fam.meet.is_infty
    if not fam.join.is_infty:
        assert fam.join.minimum == pytest.approx(max(fam.u.minimum, fam.v.minimum), abs=1e-9)
    assert fam.meet.minimum == pytest.approx(min(fam.u.minimum, fam.v.minimum), abs=1e-9)


def test_meet_glued_rejects_zero_normal():
    with pytest.raises(NonConvexUnion):
        meet_glued(ConvexFn.abs(), Polytope.box([-1], [1]), [0.0], 0.0)


def test_lift_undergraph():
    u = ConvexFn.abs()
    uh = lift_undergraph(u)
    pts = np.array([[0.5, -2.0], [-1.0, 0.25]])
    assert uh(pts) == pytest.approx([2.5, 1.25])
    with pytest.raises(EuclideanNormNotPL):
        lift_undergraph(u, 2)


def test_extend_restrict_roundtrip():
    u = ConvexFn.l1_norm(2)
    e = extend_dim(u, 3)
    assert e([[0.5, -0.5, 0.0]])[0] == pytest.approx(1.0)
    assert e([[0.5, -0.5, 0.1]])[0] == math.inf
    r = restrict_dim(e, 2)
    X = np.random.default_rng(3).normal(size=(10, 2))
    assert r(X) == pytest.approx(u(X))


def test_growth_witness():
    for u in (ConvexFn.l1_norm(3), restrict_to(ConvexFn([[1.0, 0.0]], [0.0], validate=False),
                                                Polytope.box([0, 0], [1, 1]))):
        a, b = u.growth_witness()
        X = np.random.default_rng(4).normal(scale=3, size=(200, u.dim))
        vals = u(X)
        ok = np.isinf(vals) | (vals >= a * np.linalg.norm(X, axis=1) + b - 1e-9)
        assert a > 0 and ok.all()


def test_json_roundtrip():
    u = restrict_to(ConvexFn.l1_norm(2), Polytope.box([-1, 0], [2, 1]))
    w = ConvexFn.from_dict(u.to_dict())
    X = np.random.default_rng(5).uniform(-2, 3, size=(50, 2))
    assert np.array_equal(np.isinf(u(X)), np.isinf(w(X)))
    fin = np.isfinite(u(X))
    assert w(X)[fin] == pytest.approx(u(X)[fin])
    assert ConvexFn.from_dict(ConvexFn.infty(2).to_dict()).is_infty


def test_unbounded_domain_with_coercive_growth():
    # x / 2 on [0, inf)
    v = ConvexFn([[0.5]], [0.0], domain=(np.array([[-1.0]]), np.array([0.0])), dim=1)
    assert v.minimum == 0.0
    assert hausdorff_distance(v.sublevel_polytope(1.0), Polytope.box([0], [2])) < 1e-12
