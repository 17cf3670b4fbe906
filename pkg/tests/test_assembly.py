"""Discrete form assembly: closed-form weights, scaling covariance, serialization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraceig import (
    DiscreteGagliardoForm,
    EmptyGridError,
    GridMismatchError,
    InvalidParameterError,
    UniformGridSpec,
    apply_stiffness,
    assemble_form,
    assemble_form_subgrid,
    energy,
    form_from_json,
    form_to_json,
    lq_norm,
    make_open_set,
    scale_set,
    tail,
)
from fraceig.util import Lcg


def unit_interval_form(h, s):
    return assemble_form(make_open_set([(0.0, 1.0)]), UniformGridSpec(h), s)


class TestSingleNodeOracle:
    """One cell on (0,1): every quantity is available in closed form."""

    def test_exterior_weight_half(self):
        # E = 0.5^(-2s)/s at s = 1/2: both rays contribute 1/0.5 - 0 = 2
        form = unit_interval_form(1.0, 0.5)
        assert form.n == 1
        assert form.E[0] == pytest.approx(4.0, abs=1e-14)

    def test_exterior_weight_quarter(self):
        # E = 0.5^(-1/2) / (1/4) ... per-ray (0.5^(-1/2))/(2s) summed twice
        form = unit_interval_form(1.0, 0.25)
        assert form.E[0] == pytest.approx(4.0 * math.sqrt(2.0), rel=1e-14)

    def test_energy_is_2E(self):
        form = unit_interval_form(1.0, 0.5)
        u = form.function([1.0])
        assert energy(form, u) == pytest.approx(8.0, abs=1e-14)


class TestTwoCellOracle:
    def test_interaction_and_exterior_weights(self):
        form = unit_interval_form(0.5, 0.5)
        assert form.n == 2
        # K_12 = m^2 / d^2 = 0.25 / 0.25 = 1
        assert form.K[0, 1] == pytest.approx(1.0, abs=1e-15)
        # E_1 = 0.5 * (1/0.25 + 1/0.75) = 8/3
        assert form.E[0] == pytest.approx(8.0 / 3.0, rel=1e-14)
        np.testing.assert_allclose(form.E, form.E[::-1], rtol=0, atol=0)

    def test_dense_matrix_matches_action(self):
        form = unit_interval_form(0.5, 0.5)
        A = form.dense_matrix()
        v = np.array([0.3, -1.2])
        np.testing.assert_allclose(
            A @ v, apply_stiffness(form, form.function(v)).values, rtol=1e-14
        )


class TestAssemblyValidation:
    @pytest.mark.parametrize("s", [0.0, 1.0, -0.5, 1.5])
    def test_rejects_s_outside_open_interval(self, s):
        with pytest.raises(InvalidParameterError):
            unit_interval_form(0.5, s)

    def test_rejects_bad_h(self):
        with pytest.raises(InvalidParameterError):
            UniformGridSpec(0.0)

    def test_tiny_component_still_gets_one_cell(self):
        om = make_open_set([(0.0, 1.0), (2.0, 2.001)])
        form = assemble_form(om, UniformGridSpec(0.5), 0.5)
        assert form.n == 3  # 2 cells + forced single cell

    def test_grid_mismatch_detected(self):
        f1 = unit_interval_form(0.5, 0.5)
        f2 = unit_interval_form(0.25, 0.5)
        with pytest.raises(GridMismatchError):
            energy(f1, f2.function(np.zeros(f2.n)))


class TestScalingCovariance:
    @given(
        s=st.floats(0.05, 0.95),
        t=st.sampled_from([0.5, 2.0, 3.0]),
    )
    @settings(max_examples=25, deadline=None)
    def test_weights_scale_exactly(self, s, t):
        """K and E pick up t^(1-2s) under x -> t x with matched cells."""
        om = make_open_set([(0.0, 1.0), (1.5, 2.0)])
        base = assemble_form(om, UniformGridSpec(0.125), s)
        scaled = assemble_form(scale_set(om, t), UniformGridSpec(0.125 * t), s)
        factor = t ** (1.0 - 2.0 * s)
        np.testing.assert_allclose(scaled.K, factor * base.K, rtol=1e-12)
        np.testing.assert_allclose(scaled.E, factor * base.E, rtol=1e-12)

    def test_lq_norm_scales(self):
        om = make_open_set([(0.0, 1.0)])
        base = assemble_form(om, UniformGridSpec(0.1), 0.5)
        scaled = assemble_form(scale_set(om, 2.0), UniformGridSpec(0.2), 0.5)
        v = Lcg(7).vector(base.n)
        q = 1.5
        assert lq_norm(scaled, scaled.function(v), q) == pytest.approx(
            2.0 ** (1.0 / q) * lq_norm(base, base.function(v), q), rel=1e-12
        )


class TestEnergyProperties:
    @given(seed=st.integers(0, 2**32))
    @settings(max_examples=25, deadline=None)
    def test_energy_nonnegative_and_zero_only_at_zero(self, seed):
        form = unit_interval_form(0.1, 0.5)
        v = Lcg(seed).vector(form.n)
        e = energy(form, form.function(v))
        assert e >= 0.0
        if np.any(v != 0):
            assert e > 0.0

    def test_bilinear_symmetry(self):
        form = unit_interval_form(0.05, 0.3)
        rng = Lcg(3)
        u, v = rng.vector(form.n), rng.vector(form.n)
        au = apply_stiffness(form, form.function(u)).values
        av = apply_stiffness(form, form.function(v)).values
        assert float(v @ au) == pytest.approx(float(u @ av), rel=1e-12)

    def test_matrix_is_spd_and_diagonally_dominant(self):
        form = assemble_form(
            make_open_set([(0.0, 1.0), (1.2, 2.0)]), UniformGridSpec(0.05), 0.75
        )
        A = form.dense_matrix()
        # strict diagonal dominance with positive diagonal
        off = np.sum(np.abs(A), axis=1) - np.abs(np.diag(A))
        assert np.all(np.diag(A) > off)
        assert np.all(np.linalg.eigvalsh(A) > 0)

    def test_mirror_symmetry_is_exact(self):
        form = unit_interval_form(0.01, 0.5)
        A = form.dense_matrix()
        np.testing.assert_array_equal(A, A[::-1, ::-1])


class TestSubgrid:
    def test_subgrid_selects_contained_cells(self):
        ambient = unit_interval_form(0.1, 0.5)
        sub, sel = assemble_form_subgrid(ambient, make_open_set([(0.0, 0.6)]))
        assert sub.n == 6
        np.testing.assert_array_equal(ambient.nodes[sel], sub.nodes)

    def test_energy_monotone_under_inclusion(self):
        """Zero-extension costs nothing: the sub-form energy dominates."""
        ambient = unit_interval_form(0.05, 0.5)
        sub, sel = assemble_form_subgrid(ambient, make_open_set([(0.0, 0.6)]))
        v = Lcg(11).vector(sub.n)
        full = np.zeros(ambient.n)
        full[sel] = v
        e_sub = energy(sub, sub.function(v))
        e_amb = energy(ambient, ambient.function(full))
        assert e_sub >= e_amb - 1e-12 * e_sub

    def test_empty_subgrid_raises(self):
        ambient = unit_interval_form(0.1, 0.5)
        with pytest.raises(EmptyGridError):
            assemble_form_subgrid(ambient, make_open_set([(0.001, 0.002)]))


class TestTail:
    def test_single_node_oracle(self):
        # node at 0.5, x0 = 3, rho = 1: 1 * |w| / 2.5^2 = 0.16
        form = unit_interval_form(1.0, 0.5)
        w = form.function([1.0])
        assert tail(form, w, 3.0, 1.0) == pytest.approx(0.16, rel=1e-14)

    def test_near_field_excluded(self):
        form = unit_interval_form(0.1, 0.5)
        w = form.function(np.ones(form.n))
        assert tail(form, w, 0.5, 10.0) == 0.0


class TestSerialization:
    def test_round_trip_preserves_operator(self):
        form = assemble_form(
            make_open_set([(0.0, 1.0), (1.2, 2.0)]), UniformGridSpec(0.1), 0.3
        )
        back = form_from_json(form_to_json(form))
        assert isinstance(back, DiscreteGagliardoForm)
        np.testing.assert_array_equal(back.K, form.K)
        np.testing.assert_array_equal(back.E, form.E)
        v = Lcg(5).vector(form.n)
        assert energy(back, back.function(v)) == energy(form, form.function(v))

    def test_version_flag_checked(self):
        form = unit_interval_form(0.5, 0.5)
        with pytest.raises(InvalidParameterError):
            form_from_json(form_to_json(form).replace("fraceig-form-1", "v0"))
