import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexval.convex_fn import ConvexFn, join, restrict_to, shift
from convexval.exceptions import ConvexValError, DimensionMismatch, IllConditioned
from convexval.geom import Polytope
from convexval.harness import GenConfig, gen_convex_fn, glued_trial
from convexval.measures import ExpTail, MollifiedDensity, PolyPiece, RadonMeasure, random_measure, tail
from convexval.valuation import (IntegralValuation, check_homogeneity, check_mcontinuity, check_monotone,
                                 check_valuation_identity, eval_beta, eval_layercake, eval_sublevel,
                                 eval_zero_homogeneous, mollified_valuation, oracle_from_dict,
                                 recover_densities)
from convexval.convex_fn import Hyperplane

ROUTES = (eval_sublevel, eval_beta, eval_layercake)


def test_linf_lebesgue_area():
    # int_0^1 4 t^2 dt
    v = IntegralValuation(2, RadonMeasure.lebesgue(0, 1))
    for route in ROUTES:
        assert route(v, ConvexFn.linf_norm(2)) == pytest.approx(4 / 3, abs=1e-9)


def test_linf_exponential_area():
    # int_0^inf 4 t^2 e^-t dt
    v = IntegralValuation(2, RadonMeasure.exponential())
    for route in ROUTES:
        assert route(v, ConvexFn.linf_norm(2)) == pytest.approx(8.0, rel=1e-9)


def test_abs_perimeter_atoms():
    # v_1(|x|; t) = 2t, atoms at 1 and 3
    v = IntegralValuation(1, RadonMeasure(atoms=((1.0, 1.0), (3.0, 0.5))))
    assert eval_sublevel(v, ConvexFn.abs()) == pytest.approx(2 + 3)
    assert eval_beta(v, ConvexFn.abs()) == pytest.approx(5, abs=1e-8)


def test_l1_cube_mixed_measure_routes_agree():
    nu = RadonMeasure(atoms=((0.5, 1.0),), polys=(PolyPiece(0, 2, (1.0, 0.5)),), exp_tail=ExpTail(2.5, 1.0))
    v = IntegralValuation(3, nu)
    vals = [route(v, ConvexFn.l1_norm(3)) for route in ROUTES]
    # volume of the cross-polytope {|x|_1 <= t} is 4 t^3 / 3
    exact = 4 / 3 * (0.5**3 + (2**4 / 4 + 0.5 * 2**5 / 5) + math.exp(-2.5) * (2.5**3 + 3 * 2.5**2 + 6 * 2.5 + 6))
    assert vals == pytest.approx([exact] * 3, rel=1e-9)


def test_indicator_gives_density_times_volume():
    K = Polytope.box([0, 0], [1, 2])
    nu = RadonMeasure(polys=(PolyPiece(-1, 3, (1.0,)),))
    for k in range(3):
        v = IntegralValuation(k, nu)
        assert eval_beta(v, ConvexFn.indicator(K, 0.5)) == pytest.approx(tail(nu, 0.5) * K.intrinsic_volumes[k])


def test_infinite_function_is_zero():
    v = IntegralValuation(1, RadonMeasure.lebesgue(0, 1))
    assert eval_sublevel(v, ConvexFn.infty(2)) == 0.0
    assert eval_beta(v, ConvexFn.infty(2)) == 0.0


def test_zero_homogeneous_formula():
    nu = RadonMeasure.lebesgue(-1, 2)
    v = IntegralValuation(0, nu)
    assert eval_zero_homogeneous(v, ConvexFn.abs()) == pytest.approx(2.0)
    assert eval_zero_homogeneous(v, shift(ConvexFn.abs(), 0.5)) == pytest.approx(1.5)
    assert eval_sublevel(v, shift(ConvexFn.abs(), 0.5)) == pytest.approx(1.5, abs=1e-12)
    with pytest.raises(DimensionMismatch):
        eval_zero_homogeneous(IntegralValuation(1, nu), ConvexFn.abs())


def test_layercake_requires_top_degree():
    with pytest.raises(DimensionMismatch):
        eval_layercake(IntegralValuation(1, RadonMeasure.lebesgue(0, 1)), ConvexFn.linf_norm(2))


def test_integrability_condition():
    with pytest.raises(ConvexValError):
        IntegralValuation(4, RadonMeasure.lebesgue(0, 1))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(1, 3))
def test_routes_agree(seed, dim):
    rng = np.random.default_rng(seed)
    u = gen_convex_fn(GenConfig(seed, dim, (2, 4), ["box", "free", "simplex"][seed % 3]))
    nu = random_measure(rng)
    v = IntegralValuation(dim, nu)
    val = eval_sublevel(v, u)
    assert abs(val - eval_layercake(v, u)) <= 1e-8 * (1 + abs(val))
    assert abs(val - eval_beta(v, u)) <= 1e-6 * (1 + abs(val))


def test_recover_densities_from_integral_valuation():
    nu = RadonMeasure(atoms=((0.3, 1.0),), polys=(PolyPiece(0, 1, (2.0,)),), exp_tail=ExpTail(1.0, 0.5))
    for k in range(4):
        oracle = IntegralValuation(k, nu).as_oracle(3)
        for t in (-0.5, 0.1, 0.6, 2.0):
            d = recover_densities(oracle, t, r=1.0)
            expect = np.zeros(4)
            expect[k] = tail(nu, t)
            assert d.values == pytest.approx(expect, abs=1e-10)


def test_recover_densities_warns_on_tiny_box():
    oracle = IntegralValuation(1, RadonMeasure.lebesgue(0, 1)).as_oracle(2)
    with pytest.warns(IllConditioned):
        recover_densities(oracle, 0.5, r=1e-4)


def test_homogeneity():
    v = IntegralValuation(2, RadonMeasure.exponential())
    u = restrict_to(ConvexFn.l1_norm(2), Polytope.box([-1, -2], [3, 1]))
    assert check_homogeneity(v, u, [0.5, 2, 4], 2) < 1e-8
    # claiming degree 3 misses by |1 - lam| = 1 at lam = 2
    assert check_homogeneity(v, u, [2], 3) == pytest.approx(1.0, rel=1e-8)


def test_identity_on_glued_family(rng):
    for dim in (1, 2, 3):
        fam = glued_trial(rng, dim)
        v = IntegralValuation(dim, random_measure(rng))
        h = fam.meet
        Q = Polytope.box(-np.ones(dim), np.ones(dim))
        res = check_valuation_identity(v, h, Q, Hyperplane(rng.normal(size=dim), 0.1))
        assert res.residual <= 1e-8 * res.scale


def test_monotone_pairs(rng):
    v = IntegralValuation(2, random_measure(rng))
    pairs = []
    for s in range(10):
        lo = gen_convex_fn(GenConfig(s, 2, (2, 4), "free"))
        hi = join(lo, gen_convex_fn(GenConfig(s + 100, 2, (2, 4), "box")))
        pairs.append((hi, lo))
    assert check_monotone(v, pairs) == []


def test_mcontinuity_on_exhaustion():
    v = IntegralValuation(2, RadonMeasure.exponential())
    u = ConvexFn.l1_norm(2)
    table = check_mcontinuity(v, u, [Polytope.box([-R, -R], [R, R]) for R in (1, 2, 4, 8, 16, 32)])
    assert table.nonincreasing
    assert table.diffs[-1] < 1e-6


def test_mollified_densities():
    nu = RadonMeasure(atoms=((0.5, 1.0),), polys=(PolyPiece(1.0, 2.0, (1.0,)),))
    base = IntegralValuation(1, nu)
    eps = 0.1
    moll = mollified_valuation(base.as_oracle(2), eps)
    g = MollifiedDensity(base.f, eps)
    for t in (0.0, 0.45, 0.75, 1.5):
        assert recover_densities(moll, t)[1] == pytest.approx(g(t), abs=1e-6)


def test_oracle_json():
    spec = {"kind": "integral", "k": 1, "dim": 2, "measure": RadonMeasure.exponential().to_dict()}
    oracle = oracle_from_dict(spec)
    assert oracle(ConvexFn.linf_norm(2)) == pytest.approx(4.0, rel=1e-9)
    with pytest.raises(DimensionMismatch):
        oracle_from_dict({**spec, "k": 3})
