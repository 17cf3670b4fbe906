"""Geometry of 1-D open sets."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraceig import (
    EmptyDomainError,
    InvalidDomainError,
    InvalidScaleError,
    dist_to_boundary,
    exterior_cone_params,
    intersect_ball,
    make_open_set,
    parse_domain,
    scale_set,
)


class TestMakeOpenSet:
    def test_sorts_and_keeps_disjoint(self):
        om = make_open_set([(2.0, 3.0), (0.0, 1.0)])
        assert om.intervals == ((0.0, 1.0), (2.0, 3.0))

    def test_merges_overlapping(self):
        om = make_open_set([(0.0, 1.5), (1.0, 2.0)])
        assert om.intervals == ((0.0, 2.0),)
        assert om.notes  # the merge is recorded

    def test_merges_touching(self):
        om = make_open_set([(0.0, 1.0), (1.0, 2.0)])
        assert om.intervals == ((0.0, 2.0),)

    @pytest.mark.parametrize("pairs", [[], [(1.0, 1.0)], [(2.0, 1.0)]])
    def test_rejects_degenerate(self, pairs):
        with pytest.raises(InvalidDomainError):
            make_open_set(pairs)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidDomainError):
            make_open_set([(0.0, math.inf)])

    def test_measure_diameter_gaps(self):
        om = make_open_set([(0.0, 1.0), (1.2, 2.0)])
        assert om.measure == pytest.approx(1.8)
        assert om.diameter == pytest.approx(2.0)
        assert om.gaps == pytest.approx((0.2,))

    def test_contains_is_open(self):
        om = make_open_set([(0.0, 1.0)])
        assert om.contains(0.5)
        assert not om.contains(0.0)
        assert not om.contains(1.0)

    def test_includes(self):
        big = make_open_set([(0.0, 1.0), (2.0, 3.0)])
        assert big.includes(make_open_set([(0.1, 0.9)]))
        assert big.includes(big)
        assert not big.includes(make_open_set([(0.5, 2.5)]))


class TestParseDomain:
    def test_round_trip(self):
        om = parse_domain("0,1;1.2,2")
        assert om.intervals == ((0.0, 1.0), (1.2, 2.0))
        assert parse_domain(str(om)) == om

    @pytest.mark.parametrize("text", ["", "0", "0,1,2", "a,b"])
    def test_rejects_malformed(self, text):
        with pytest.raises(InvalidDomainError):
            parse_domain(text)


class TestScaleSet:
    def test_scales_endpoints(self):
        om = scale_set(make_open_set([(0.0, 1.0), (2.0, 3.0)]), 2.0)
        assert om.intervals == ((0.0, 2.0), (4.0, 6.0))

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_rejects_nonpositive(self, t):
        with pytest.raises(InvalidScaleError):
            scale_set(make_open_set([(0.0, 1.0)]), t)

    @given(t=st.floats(0.01, 100.0))
    @settings(max_examples=30, deadline=None)
    def test_measure_and_diameter_scale_linearly(self, t):
        om = make_open_set([(0.0, 1.0), (1.5, 2.0)])
        sc = scale_set(om, t)
        assert sc.measure == pytest.approx(t * om.measure, rel=1e-12)
        assert sc.diameter == pytest.approx(t * om.diameter, rel=1e-12)


class TestDistToBoundary:
    def test_interior_point(self):
        om = make_open_set([(0.0, 1.0)])
        assert dist_to_boundary(om, 0.3) == pytest.approx(0.3)
        assert dist_to_boundary(om, 0.9) == pytest.approx(0.1)

    def test_outside_is_zero(self):
        om = make_open_set([(0.0, 1.0)])
        assert dist_to_boundary(om, -0.5) == 0.0
        assert dist_to_boundary(om, 1.0) == 0.0

    def test_union_uses_nearest_endpoint(self):
        om = make_open_set([(0.0, 1.0), (1.2, 2.0)])
        assert dist_to_boundary(om, 1.3) == pytest.approx(0.1)

    def test_array_input(self):
        om = make_open_set([(0.0, 1.0)])
        out = dist_to_boundary(om, np.array([0.25, 2.0]))
        np.testing.assert_allclose(out, [0.25, 0.0])


class TestIntersectBall:
    def test_cuts_interval(self):
        om = make_open_set([(-0.5, 0.5)])
        cut = intersect_ball(om, 0.25)
        assert cut.intervals == ((-0.25, 0.25),)

    def test_whole_domain_when_ball_covers(self):
        om = make_open_set([(-0.5, 0.5)])
        assert intersect_ball(om, 1.0) == om
        assert intersect_ball(om, 2.0) == om

    def test_center_offset(self):
        om = make_open_set([(0.0, 1.0)])
        cut = intersect_ball(om, 0.25, center=0.5)
        assert cut.intervals == ((0.25, 0.75),)

    def test_empty_raises(self):
        om = make_open_set([(0.0, 1.0)])
        with pytest.raises(EmptyDomainError):
            intersect_ball(om, 0.5, center=5.0)

    def test_bad_radius(self):
        with pytest.raises(InvalidScaleError):
            intersect_ball(make_open_set([(0.0, 1.0)]), 0.0)


class TestExteriorConeParams:
    def test_interval_has_full_length(self):
        ell, theta, D = exterior_cone_params(make_open_set([(0.0, 1.0)]))
        assert (ell, theta, D) == (1.0, 1.0, 1.0)

    def test_union_uses_smallest_gap(self):
        ell, theta, D = exterior_cone_params(make_open_set([(0.0, 1.0), (1.2, 2.0)]))
        assert ell == pytest.approx(0.2)
        assert D == pytest.approx(2.0)

    def test_ratio_is_scale_invariant(self):
        om = make_open_set([(0.0, 1.0), (1.2, 2.0)])
        e1, _, d1 = exterior_cone_params(om)
        e2, _, d2 = exterior_cone_params(scale_set(om, 3.0))
        assert e1 / d1 == pytest.approx(e2 / d2, rel=1e-12)
