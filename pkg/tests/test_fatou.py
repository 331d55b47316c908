import math

import numpy as np
import pytest

from snb.core.compensators import a_of
from snb.core.errors import DomainError, FixedPointInIntervalError, RangeError
from snb.core.fatou import (CLOSED_FORM_MODEL, NUMERIC_QUADRATURE, displacement,
                            displacement_inverse, displacement_jet, fatou_coordinate, fatou_model,
                            fatou_numeric, flow, flow_rk, multiplier, time_one_map,
                            variational_jet)
from snb.core.fatou import _singular_part
from snb.core.field import Field, ModelParams


def tanh_flow(x0: float, nu: float, t: float) -> float:
    s = math.sqrt(nu)
    th = math.tanh(s * t)
    return s * (x0 + s * th) / (s + x0 * th)


def stencil(fn, x, h):
    return (8.0 * (fn(x + h) - fn(x - h)) - (fn(x + 2 * h) - fn(x - 2 * h))) / (12.0 * h)


class TestFatouModel:
    def test_parabolic_closed_form(self):
        assert fatou_model(0.5, 0.0, ModelParams()) == 2.0

    def test_hyperbolic_closed_form(self):
        assert fatou_model(0.4, 0.04, ModelParams()) == pytest.approx(2.5 * math.log(3.0), rel=1e-14)
        assert fatou_model(0.4, 0.04, ModelParams()) == pytest.approx(2.746531, abs=1e-6)

    def test_residual_term_matches_quadrature(self, model_residual):
        params = ModelParams((0.3,))
        base = fatou_model(1.0, 0.04, params)
        for x in (0.25, 0.4, 0.7):
            closed = fatou_model(x, 0.04, params) - base
            assert closed == pytest.approx(fatou_numeric(model_residual, 0.04, x), abs=1e-8)

    def test_left_of_fixed_point(self):
        with pytest.raises(DomainError):
            fatou_model(0.1, 0.04, ModelParams())

    @pytest.mark.parametrize("rho", [0.0, 0.3, -0.3])
    @pytest.mark.parametrize("nu", [0.0, 1e-4, 1e-2, 0.04])
    def test_antiderivative_and_abel_identity(self, rho, nu):
        field = Field.model(rho)
        coord = fatou_coordinate(field, nu)
        assert coord.branch == CLOSED_FORM_MODEL
        for x in np.linspace(coord.x1 + 0.01, 1.0, 12):
            h = 1e-4 * (x - coord.x1)
            assert abs(stencil(coord.value, x, h) * field.F(x, nu) - 1.0) <= 1e-8
            assert abs(coord.value(flow_rk(field, nu, x, 1.0)) - coord.value(x) - 1.0) <= 1e-8

    def test_parabolic_asymptotics(self, model):
        coord = fatou_coordinate(model, 0.0)
        assert abs(1e-9 * coord.value_offset(1e-9) - 1.0) <= 1e-6

    @pytest.mark.parametrize("nu", [1e-4, 0.04])
    def test_hyperbolic_asymptotics(self, model_residual, nu):
        coord = fatou_coordinate(model_residual, nu)
        limit = -1.0 / (2.0 * math.sqrt(nu)) - 0.15
        u = 1e-300
        assert coord.value_offset(u) / math.log(u) == pytest.approx(limit, rel=1e-2)


class TestFatouNumeric:
    def test_parabolic_model(self, model):
        assert fatou_numeric(model, 0.0, 0.5, 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_matches_closed_form(self, model):
        base = fatou_model(1.0, 0.04, ModelParams())
        for x in (0.21, 0.3, 0.6):
            assert fatou_numeric(model, 0.04, x, 1.0) == pytest.approx(
                fatou_model(x, 0.04, ModelParams()) - base, abs=1e-9)

    def test_fixed_point_inside_interval(self, model):
        with pytest.raises(FixedPointInIntervalError):
            fatou_numeric(model, 0.04, 0.1, 1.0)

    @pytest.mark.parametrize("nu", [0.0, 1e-4, 0.04])
    def test_table_matches_quadrature(self, cubic, nu):
        coord = fatou_coordinate(cubic, nu)
        assert coord.branch == NUMERIC_QUADRATURE
        xs = np.linspace(coord.x1 + 0.01, 1.0, 12)
        values = coord.value(xs)
        for x, value in zip(xs, values):
            assert value == pytest.approx(fatou_numeric(cubic, nu, x), abs=1e-9)
        assert np.all(np.diff(values) < 0.0)
        assert coord.value(1.0) == pytest.approx(0.0, abs=1e-12)

    def test_table_abel_identity(self, cubic):
        coord = fatou_coordinate(cubic, 0.0)
        for x in (0.05, 0.3, 0.9):
            assert abs(coord.value(flow_rk(cubic, 0.0, x, 1.0)) - coord.value(x) - 1.0) <= 1e-8

    def test_degenerate_double_point_is_rejected(self):
        with pytest.raises(DomainError, match="Fxx = 0"):
            _singular_part(Field.generic("-x^3 + nu"), 0.0, 0.0, True)

    def test_degenerate_simple_point_is_rejected(self):
        with pytest.raises(DomainError, match="Fx = 0"):
            _singular_part(Field.generic("-x^3 + nu"), 0.0, 0.0, False)


class TestFlow:
    def test_parabolic_time_one_map(self, model):
        assert time_one_map(model, 0.0, 1.0) == pytest.approx(0.5, rel=1e-14)
        assert time_one_map(model, 0.0, 0.5) == pytest.approx(1.0 / 3.0, rel=1e-14)
        assert flow(model, 0.0, 0.5, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-10)

    def test_tanh_solution(self, model):
        expected = tanh_flow(0.4, 0.04, 1.0)
        assert expected == pytest.approx(0.315090, abs=1e-6)
        assert flow(model, 0.04, 0.4, 1.0) == pytest.approx(expected, rel=1e-12)
        assert time_one_map(model, 0.04, 0.4) == pytest.approx(expected, rel=1e-12)

    def test_zero_time_and_fixed_point(self, model, cubic):
        assert flow(model, 0.04, 0.7, 0.0) == 0.7
        assert flow(cubic, 0.04, 0.7, 0.0) == 0.7
        assert time_one_map(model, 0.04, 0.2) == pytest.approx(0.2, abs=1e-10)

    def test_negative_time(self, model):
        with pytest.raises(DomainError):
            flow(model, 0.04, 0.7, -1.0)

    @pytest.mark.parametrize("field_name", ["model", "model_residual", "cubic"])
    def test_group_law(self, request, field_name):
        field = request.getfixturevalue(field_name)
        times = (0.25, 0.5, 1.0)
        for nu in (0.0, 1e-2):
            for s in times:
                for t in times:
                    x = 0.8
                    composed = flow(field, nu, flow(field, nu, x, s), t)
                    assert abs(flow(field, nu, x, s + t) - composed) <= 1e-9

    @pytest.mark.parametrize("rho", [0.0, 0.3, -0.3])
    def test_fatou_flow_matches_runge_kutta(self, rho):
        field = Field.model(rho)
        for nu in (0.0, 1e-4, 0.04):
            for x in (0.25, 0.5, 1.0):
                assert abs(flow(field, nu, x, 1.0) - flow_rk(field, nu, x, 1.0)) <= 1e-8

    def test_generic_flow_cross_check(self, cubic):
        assert flow(cubic, 0.04, 0.8, 1.0) == pytest.approx(flow_rk(cubic, 0.04, 0.8, 1.0), abs=1e-8)


class TestDisplacement:
    def test_parabolic_values(self, model):
        assert displacement(model, 0.0, 0.5) == pytest.approx(1.0 / 6.0, rel=1e-13)
        assert displacement(model, 0.0, 0.0) == 0.0

    def test_hyperbolic_value(self, model):
        expected = 0.4 - tanh_flow(0.4, 0.04, 1.0)
        assert expected == pytest.approx(0.084910, abs=1e-6)
        assert displacement(model, 0.04, 0.4) == pytest.approx(expected, rel=1e-12)

    def test_inverse_quadratic_formula(self, model):
        assert displacement_inverse(model, 0.0, 0.05) == pytest.approx(0.25, rel=1e-13)

    def test_inverse_round_trip(self, model_residual, cubic):
        for field in (model_residual, cubic):
            for nu in (0.0, 0.04):
                for x in (0.25, 0.5, 0.9):
                    y = displacement(field, nu, x)
                    assert displacement_inverse(field, nu, y) == pytest.approx(x, abs=1e-10)

    def test_inverse_tends_to_fixed_point(self, model):
        assert displacement_inverse(model, 0.04, 1e-14) - 0.2 < 1e-12
        assert displacement_inverse(model, 0.0, 1e-20) < 1e-9

    def test_inverse_above_range(self, model):
        with pytest.raises(RangeError, match="y above range"):
            displacement_inverse(model, 0.0, 0.6)
        with pytest.raises(RangeError):
            displacement_inverse(model, 0.0, 10.0)


class TestJets:
    def test_multiplier(self, model, cubic):
        assert multiplier(model, 0.04) == pytest.approx(math.exp(-0.4), rel=1e-14)
        assert multiplier(model, 0.0) == 1.0
        x1 = fatou_coordinate(cubic, 0.04).x1
        assert multiplier(cubic, 0.04) == pytest.approx(math.exp(cubic.Fx(x1, 0.04)), rel=1e-14)

    def test_parabolic_jet(self, model):
        jet = displacement_jet(model, 0.0, 3)
        assert jet.coeffs[0] == pytest.approx(0.0, abs=1e-11)
        assert jet.coeffs[1] == pytest.approx(0.0, abs=1e-8)
        assert jet.coeffs[2] == pytest.approx(1.0, abs=1e-6)
        assert jet.coeffs[3] == pytest.approx(-1.0, abs=1e-5)

    def test_hyperbolic_jet(self, model):
        lam = math.exp(-0.4)
        b = (1.0 - lam) / 0.4
        jet = displacement_jet(model, 0.04, 3)
        assert jet.x1 == pytest.approx(0.2)
        assert jet.coeffs[1] == pytest.approx(1.0 - lam, rel=1e-8)
        assert jet.coeffs[2] == pytest.approx(lam * a_of(0.4), rel=1e-6)
        assert jet.coeffs[2] == pytest.approx(0.552477, abs=1e-6)
        assert jet.coeffs[3] == pytest.approx(-lam * b * b, rel=1e-5)

    @pytest.mark.parametrize("field_name", ["model", "model_residual", "cubic"])
    @pytest.mark.parametrize("nu", [0.0, 1e-4, 1e-2, 0.04])
    def test_jet_matches_variational_equations(self, request, field_name, nu):
        field = request.getfixturevalue(field_name)
        jet = displacement_jet(field, nu, 3)
        oracle = variational_jet(field, nu, 3)
        assert oracle.method == "variational"
        for a, b in zip(jet.coeffs, oracle.coeffs):
            assert abs(a - b) <= 1e-6 * max(1.0, abs(b))
        assert abs(jet.coeffs[1] - (1.0 - multiplier(field, nu))) <= 1e-6

    def test_order_limit(self, model):
        with pytest.raises(ValueError):
            displacement_jet(model, 0.0, 5)
