import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexval.convex_fn import ConvexFn, Hyperplane
from convexval.exceptions import ConvexValError, NotComplete
from convexval.geom import Polytope
from convexval.measures import RadonMeasure, random_measure
from convexval.partitions import (InductiveCertificate, PolytopalPartition, complete, grid_partition,
                                  inductive_certificate, is_complete, random_rectangular_partition,
                                  refine_by_hyperplane, riemann_sandwich, uniform_refinement,
                                  verify_decomposition)
from convexval.valuation import IntegralValuation


def square():
    return Polytope.box([0, 0], [2, 2])


def three_cells():
    # left column plus a right column cut in half: the cut does not extend left
    return PolytopalPartition(square(), (Polytope.box([0, 0], [1, 2]), Polytope.box([1, 0], [2, 1]),
                                         Polytope.box([1, 1], [2, 2])))


def three_rays():
    # sectors of 120 degrees around the centre of [-1, 1]^2
    S = Polytope.box([-1, -1], [1, 1])
    d = [np.array([math.cos(a), math.sin(a)]) for a in (math.pi / 2, 7 * math.pi / 6, 11 * math.pi / 6)]
    cells = []
    for i in range(3):
        d1, d2 = d[i], d[(i + 1) % 3]
        cells.append(S.with_halfspace([d1[1], -d1[0]], 0.0).with_halfspace([-d2[1], d2[0]], 0.0))
    return PolytopalPartition(S, tuple(cells))


def test_refine_square():
    p = PolytopalPartition(square(), (square(),))
    q = refine_by_hyperplane(p, Hyperplane([1.0, 0.0], 1.0))
    assert sorted(q.volumes()) == pytest.approx([2.0, 2.0])
    assert len(refine_by_hyperplane(p, Hyperplane([1.0, 0.0], 5.0))) == 1
    # re-refining by the interface changes nothing
    assert len(refine_by_hyperplane(q, Hyperplane([1.0, 0.0], 1.0))) == 2


def test_validate_catches_gaps_and_overlaps():
    with pytest.raises(ConvexValError):
        PolytopalPartition(square(), (Polytope.box([0, 0], [1, 2]),)).validate()
    with pytest.raises(ConvexValError):
        PolytopalPartition(square(), (Polytope.box([0, 0], [1.5, 2]), Polytope.box([0.5, 0], [2, 2]))).validate()
    three_cells().validate()
    three_rays().validate()


def test_completion_of_three_cells():
    p = three_cells()
    assert not is_complete(p)
    q = complete(p)
    assert len(q) == 4 and is_complete(q)
    assert sorted(q.volumes()) == pytest.approx([1.0] * 4)


def test_single_cell_is_complete():
    p = PolytopalPartition(square(), (square(),))
    assert is_complete(p) and len(complete(p)) == 1
    cert = inductive_certificate(p)
    assert [e.tag for e in cert.entries] == ["leaf"]
    assert cert.validate(p)


def test_three_rays_not_complete():
    p = three_rays()
    assert not is_complete(p)
    with pytest.raises(NotComplete):
        inductive_certificate(p)
    assert is_complete(complete(p))


def test_two_cell_certificate():
    p = refine_by_hyperplane(PolytopalPartition(square(), (square(),)), Hyperplane([0.0, 1.0], 0.5))
    cert = inductive_certificate(p)
    assert [e.tag for e in cert.entries] == ["leaf", "leaf", "merge"]
    assert cert.entries[-1].ref == (0, 1)
    assert cert.validate(p)


def test_grid_certificate_length():
    p = grid_partition([0, 0], [1, 1], [2, 2])
    cert = inductive_certificate(p)
    assert len(cert) == 7 and cert.validate(p)
    again = InductiveCertificate.from_dict(cert.to_dict())
    assert again.validate(p)


def test_tampered_certificate_fails():
    p = grid_partition([0, 0], [1, 1], [2, 2])
    cert = inductive_certificate(p)
    cert.entries[0] = cert.entries[0]._replace(polytope=Polytope.box([0, 0], [0.4, 0.5]))
    assert not cert.validate(p)


def test_rectangular_stays_rectangular(rng):
    p = complete(random_rectangular_partition(rng, 2, 4))
    for c in p.cells:
        assert len(c.vertices) == 4
        assert c.volume == pytest.approx(np.prod(np.ptp(c.vertices, axis=0)))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(1, 3), cuts=st.integers(1, 5))
def test_complete_is_idempotent_and_certified(seed, dim, cuts):
    rng = np.random.default_rng(seed)
    p = random_rectangular_partition(rng, dim, cuts)
    p.validate()
    q = complete(p)
    q.validate()
    r = complete(q)
    assert sorted(r.volumes()) == pytest.approx(sorted(q.volumes()), abs=1e-12)
    cert = inductive_certificate(q)
    assert cert.validate(q)
    assert len(cert) == 2 * len(q) - 1


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6), dim=st.integers(1, 3))
def test_simple_valuation_decomposes(seed, dim):
    rng = np.random.default_rng(seed)
    q = complete(random_rectangular_partition(rng, dim, 3))
    v = IntegralValuation(dim, random_measure(rng))
    u = ConvexFn.l1_norm(dim)
    assert verify_decomposition(v, u, q, inductive_certificate(q)) <= 1e-8 * (1 + abs(v(u)))


def test_vanishing_decomposition():
    p = grid_partition([0, 0], [1, 1], [2, 2])
    v = IntegralValuation(2, RadonMeasure.dirac(-1.0))
    u = ConvexFn.indicator(Polytope.box([-5, -5], [5, 5]))
    assert v(u) == 0.0
    assert verify_decomposition(v, u, p) == 0.0


def test_sandwich_abs():
    seg = Polytope.box([-1], [1])
    p = refine_by_hyperplane(PolytopalPartition(seg, (seg,)), Hyperplane([1.0], 0.0))
    v = IntegralValuation(1, RadonMeasure.dirac(1.0))
    s = riemann_sandwich(v, ConvexFn.abs(), p)
    assert (s.lower, s.value, s.upper) == pytest.approx((0.0, 2.0, 2.0))


def test_sandwich_constant():
    K = Polytope.box([0, 0], [1, 2])
    v = IntegralValuation(2, RadonMeasure.lebesgue(0, 3))
    s = riemann_sandwich(v, ConvexFn.indicator(K, 1.0), grid_partition([0, 0], [1, 2], [3, 2]))
    assert s.lower == pytest.approx(4.0) and s.upper == pytest.approx(4.0) and s.value == pytest.approx(4.0)


def test_sandwich_shrinks_under_refinement():
    v = IntegralValuation(2, RadonMeasure.lebesgue(0, 3))
    u = ConvexFn([[1.0, 0.5], [-1.0, 0.2], [0.1, -1.0]], [0.0, 0.3, 0.1])
    p = grid_partition([-1, -1], [1, 1], [1, 2])
    gaps = []
    for _ in range(3):
        s = riemann_sandwich(v, u, p)
        assert s.holds()
        gaps.append(s.gap)
        p = uniform_refinement(p)
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))


def test_interior_minimum_is_used():
    # |x| on [-1, 1] as a single cell: vertex minimum would be 1, true minimum is 0
    seg = Polytope.box([-1], [1])
    v = IntegralValuation(1, RadonMeasure.dirac(0.5))
    s = riemann_sandwich(v, ConvexFn.abs(), PolytopalPartition(seg, (seg,)))
    assert s.upper == pytest.approx(2.0)
    assert s.holds()


def test_partition_json():
    p = three_cells()
    q = PolytopalPartition.from_dict(p.to_dict())
    assert sorted(q.volumes()) == pytest.approx(sorted(p.volumes()))
