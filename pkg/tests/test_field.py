import numpy as np
import pytest

from snb.core.errors import DomainError, FieldConfigError, NoRootError, UnknownIdentifierError
from snb.core.field import (AnalysisBox, Field, attracting_fixed_point, fixed_points,
                            genericity_check)


class TestValues:
    def test_model_fixed_point(self, model):
        assert model.F(0.2, 0.04) == pytest.approx(0.0, abs=1e-16)

    def test_model_residual_derivatives_at_origin(self, model_residual):
        assert model_residual.Fx(0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert model_residual.Fxx(0.0, 0.0) == pytest.approx(-2.0, rel=1e-14)

    def test_generic_parameter_derivative(self):
        assert Field.generic("-x^2+nu").Fnu(0.0, 0.0) == 1.0

    def test_model_matches_its_rational_expression(self):
        field = Field.model((0.3, -1.0))
        expr = Field.generic("(-x^2+nu)/(1+(0.3-nu)*x)")
        for x in (-0.4, 0.1, 0.9):
            for nu in (0.0, 0.05):
                assert field.F(x, nu) == pytest.approx(expr.F(x, nu), rel=1e-14, abs=1e-16)
                assert field.Fnu(x, nu) == pytest.approx(expr.Fnu(x, nu), rel=1e-12)

    def test_model_Fx_matches_central_differences(self, model_residual):
        h = 1e-6
        for x in np.linspace(-0.5 + 2 * h, 1.0 - 2 * h, 50):
            for nu in np.linspace(0.0, 0.1, 10):
                fd = (model_residual.F(x + h, nu) - model_residual.F(x - h, nu)) / (2 * h)
                assert abs(model_residual.Fx(x, nu) - fd) <= 1e-8

    def test_offset_function_is_factored_at_attracting_point(self, model):
        offset = model.offset_function(0.04, 0.2)
        u = np.array([1e-300, 1e-12, 0.3])
        np.testing.assert_allclose(offset(u), -u * (0.4 + u), rtol=1e-15)

    def test_taylor_coefficients_of_model(self, model_residual):
        # F(u) = -u (2s + u)/(1 + rho (s + u)) expanded at u = 0, s = 0.2
        coeffs = model_residual.taylor_coefficients(0.2, 0.04, 3)
        d0 = 1.06
        assert coeffs[0] == pytest.approx(0.0, abs=1e-16)
        assert coeffs[1] == pytest.approx(-0.4 / d0, rel=1e-14)
        assert coeffs[2] == pytest.approx((-1.0 + 0.3 * 0.4 / d0) / d0, rel=1e-14)


class TestConstruction:
    def test_denominator_vanishing_on_box(self):
        with pytest.raises(FieldConfigError):
            Field.model(2.0)

    def test_unknown_identifier_in_expression(self):
        with pytest.raises(UnknownIdentifierError):
            Field.generic("-x^2+mu")

    def test_box_must_be_nonempty(self):
        with pytest.raises(FieldConfigError):
            AnalysisBox(1.0, 0.0)


class TestGenericity:
    def test_normal_form_passes(self):
        assert genericity_check(Field.generic("-x^2 + nu")).passes

    def test_degenerate_quadratic_term_fails(self):
        report = genericity_check(Field.generic("-x^3 + nu"))
        assert not report.passes
        assert report.Fxx00 == 0.0

    def test_degenerate_parameter_dependence_fails(self):
        report = genericity_check(Field.generic("-x^2 + nu^2"))
        assert not report.passes
        assert report.Fnu00 == 0.0

    def test_domain_error_becomes_failed_report(self):
        report = genericity_check(Field.generic("log(x) + nu"))
        assert not report.passes
        assert np.isnan(report.F00)
        assert len(report.failures()) == 4

    @pytest.mark.parametrize("expr, failed", [
        ("-x^2 + nu", []),
        ("-x^3 + nu", ["Fxx(0,0) != 0"]),
        ("-x^2 + nu^2", ["Fnu(0,0) != 0"]),
        ("-x^2", ["Fnu(0,0) != 0"]),
        ("x - x^2 + nu", ["Fx(0,0) = 0"]),
        ("1 - x^2 + nu", ["F(0,0) = 0"]),
    ])
    def test_failures_name_the_broken_conditions(self, expr, failed):
        report = genericity_check(Field.generic(expr))
        assert report.failures() == failed
        assert report.passes == (not failed)


class TestAnalysisBox:
    def test_inside_box(self, model):
        model.box.check_x(0.0)
        model.box.check_x(model.box.x_max)

    @pytest.mark.parametrize("x", [-0.6, 1.5, float("nan")])
    def test_outside_box(self, model, x):
        with pytest.raises(DomainError, match="outside"):
            model.box.check_x(x)


class TestFixedPoints:
    def test_model_pair(self, model):
        assert [p.x for p in fixed_points(model, 0.04)] == pytest.approx([-0.2, 0.2])

    def test_model_double_root(self, model):
        points = fixed_points(model, 0.0)
        assert len(points) == 1
        assert points[0].x == 0.0 and points[0].multiplicity == 2

    def test_cubic_attracting_root(self, cubic):
        x1 = attracting_fixed_point(cubic, 0.04).x
        assert 0.2 < x1 < 0.21
        assert abs(cubic.F(x1, 0.04)) <= 1e-11
        assert cubic.Fx(x1, 0.04) < 0.0

    def test_cubic_double_root_at_zero(self, cubic):
        point = attracting_fixed_point(cubic, 0.0)
        assert point.multiplicity == 2
        assert abs(point.x) <= 1e-7

    def test_roots_are_accurate(self, cubic):
        for nu in (1e-4, 1e-2, 0.04):
            for point in fixed_points(cubic, nu):
                assert abs(cubic.F(point.x, nu)) <= 1e-11

    def test_no_root(self):
        with pytest.raises(NoRootError):
            fixed_points(Field.generic("-x^2+nu-1"), 0.01)

    def test_nu_outside_box(self, model):
        with pytest.raises(DomainError):
            fixed_points(model, 0.2)
