import math

import numpy as np
from django.test import SimpleTestCase

from django_dominative_laplace import exceptions
from django_dominative_laplace.fields import (
    Affine,
    Composed,
    CylFundamentalField,
    Isometry,
    Quadratic,
    RadialProfileField,
    Reflected,
    WeightedSum,
    compose_isometry,
    eval_jet,
    fd_jet,
    field_from_dict,
    reflected_through,
    reflection_about_line,
    translated,
)
from django_dominative_laplace.profiles import PolynomialProfile, TruncatedFundamentalProfile
from django_dominative_laplace.sampling import make_rng, random_orthogonal, sample_box
from django_dominative_laplace.tests.factories import AffineFactory, CylFundamentalFieldFactory, QuadraticFactory
from django_dominative_laplace.tests.tests_base import NumericAssertionsMixin


class JetOracleTest(NumericAssertionsMixin, SimpleTestCase):
    def fields(self):
        quadratic = QuadraticFactory(seed=1)
        return [
            quadratic,
            AffineFactory(seed=2),
            CylFundamentalFieldFactory(cf__seed=3, p=3.0),
            CylFundamentalFieldFactory(cf__seed=4, cf__k=2, p="inf"),
            RadialProfileField(PolynomialProfile(coefficients=[1.0, 0.0, -1.0, 0.0, 0.1]), center=[0.5, 0.0, 0.0]),
            compose_isometry(quadratic, Isometry(Q=random_orthogonal(make_rng(5), 3), x0=[1.0, 2.0, 3.0])),
            reflected_through(quadratic, [0.2, 0.2, 0.2], [0.0, 0.6, 0.8]),
            WeightedSum(terms=[(2.0, quadratic), (0.5, CylFundamentalFieldFactory(cf__seed=6))]),
        ]

    def test_closed_form_jets_match_finite_differences(self):
        rng = make_rng(99)
        for field in self.fields():
            points = sample_box(rng, 10, -2 * np.ones(3), 2 * np.ones(3))
            for x in points:
                if field.singular_distance(x) < 0.25:
                    continue
                exact, approximate = eval_jet(field, x), fd_jet(field, x)
                scale = 1.0 + float(np.max(np.abs(exact.hessian))) + float(np.max(np.abs(exact.gradient)))
                with self.subTest(field=str(field), x=x.tolist()):
                    self.assertClose(exact.value, approximate.value, rel=1e-12, abs_tol=1e-12)
                    self.assertArrayClose(exact.gradient, approximate.gradient, atol=1e-4 * scale, rtol=0)
                    self.assertArrayClose(exact.hessian, approximate.hessian, atol=1e-4 * scale, rtol=0)

    def test_finite_differences_refuse_singular_stencils(self):
        field = CylFundamentalField.radial(n=3, p=3.0)
        with self.assertRaises(exceptions.SingularityError):
            fd_jet(field, [1e-5, 0.0, 0.0])

    def test_finite_differences_reject_bad_step(self):
        with self.assertRaises(exceptions.DomainError):
            fd_jet(QuadraticFactory(), np.zeros(3), h=0.0)


class QuadraticTest(NumericAssertionsMixin, SimpleTestCase):
    def test_jet(self):
        field = Quadratic(A=np.diag([2.0, -2.0]), b=[1.0, 0.0], c=3.0)
        jet = eval_jet(field, [1.0, 1.0])
        self.assertEqual(1.0 - 1.0 + 1.0 + 3.0, jet.value)
        self.assertArrayClose([3.0, -2.0], jet.gradient)
        self.assertArrayClose(np.diag([2.0, -2.0]), jet.hessian)

    def test_dimension_mismatch(self):
        with self.assertRaises(exceptions.DimensionError):
            Quadratic(A=np.eye(2), b=[1.0, 2.0, 3.0])
        with self.assertRaises(exceptions.DimensionError):
            eval_jet(Quadratic(A=np.eye(2)), [1.0, 2.0, 3.0])

    def test_non_finite_point(self):
        with self.assertRaises(exceptions.DomainError):
            eval_jet(Quadratic(A=np.eye(2)), [math.nan, 0.0])


class SingularityTest(SimpleTestCase):
    def test_pole_is_reported_with_term(self):
        field = CylFundamentalField.radial(n=3, p=2.0, pole=[1.0, 0.0, 0.0])
        with self.assertRaises(exceptions.SingularityError) as context:
            eval_jet(field, [1.0, 0.0, 0.0])
        self.assertEqual(str(field), context.exception.term)

    def test_weighted_sum_names_offending_term(self):
        pole = CylFundamentalField.radial(n=2, p=2.0, pole=[0.0, 1.0])
        field = WeightedSum(terms=[(1.0, Quadratic(A=np.eye(2))), (1.0, pole)])
        with self.assertRaises(exceptions.SingularityError) as context:
            eval_jet(field, [0.0, 1.0])
        self.assertEqual(str(pole), context.exception.term)

    def test_zero_weight_terms_are_ignored(self):
        pole = CylFundamentalField.radial(n=2, p=2.0)
        field = WeightedSum(terms=[(1.0, Quadratic(A=np.eye(2))), (0.0, pole)])
        self.assertEqual(0.0, eval_jet(field, [0.0, 0.0]).value)
        self.assertEqual(math.inf, field.singular_distance(np.zeros(2)))

    def test_kink_sphere_is_singular(self):
        profile = TruncatedFundamentalProfile(n=2, p=2.0, level=0.0)
        field = RadialProfileField(profile, center=[0.0, 0.0])
        with self.assertRaises(exceptions.SingularityError):
            eval_jet(field, [0.6, 0.8])
        self.assertAlmostEqual(0.5, field.singular_distance(np.array([1.5, 0.0])))

    def test_smooth_profile_at_its_center(self):
        field = RadialProfileField(PolynomialProfile(coefficients=[1.0, 0.0, -1.0]), center=[1.0, 1.0])
        jet = eval_jet(field, [1.0, 1.0])
        self.assertEqual(1.0, jet.value)
        np.testing.assert_allclose(np.diag([-2.0, -2.0]), jet.hessian)


class CompositionTest(NumericAssertionsMixin, SimpleTestCase):
    def test_translated(self):
        field = QuadraticFactory(seed=7)
        x0 = np.array([0.3, -0.2, 1.0])
        self.assertClose(field.value(x0), translated(field, x0).value(np.zeros(3)))

    def test_reflection_fixes_its_line(self):
        field = QuadraticFactory(seed=8)
        x0, direction = np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])
        reflected = reflected_through(field, x0, direction)
        for t in (-1.0, 0.0, 2.5):
            x = x0 + t * direction
            self.assertClose(field.value(x), reflected.value(x), rel=1e-12, abs_tol=1e-12)
        off_line = np.array([2.0, 1.0, 0.0])
        mirrored = np.array([0.0, -1.0, 0.0])
        self.assertClose(field.value(mirrored), reflected.value(off_line), rel=1e-12, abs_tol=1e-12)

    def test_reflection_is_an_involution(self):
        reflection = reflection_about_line([0.6, 0.8])
        self.assertTrue(reflection.is_involution())
        x = np.array([1.0, -3.0])
        self.assertArrayClose(x, reflection(reflection(x)), atol=1e-12)

    def test_reflection_axis_must_be_unit(self):
        with self.assertRaises(exceptions.DomainError):
            reflection_about_line([1.0, 1.0])

    def test_reflected_requires_involution(self):
        rotation = Isometry(Q=[[0.0, -1.0], [1.0, 0.0]])
        with self.assertRaises(exceptions.FieldConstructionError):
            Reflected(inner=Quadratic(A=np.eye(2)), isometry=rotation)

    def test_isometry_must_be_orthogonal(self):
        with self.assertRaises(exceptions.FieldConstructionError):
            Isometry(Q=[[2.0, 0.0], [0.0, 1.0]])

    def test_composed_dimension_mismatch(self):
        with self.assertRaises(exceptions.DimensionError):
            Composed(inner=Quadratic(A=np.eye(2)), isometry=Isometry.identity(3))

    def test_weighted_sum_errors(self):
        with self.assertRaises(exceptions.FieldConstructionError):
            WeightedSum(terms=[])
        with self.assertRaises(exceptions.DimensionError):
            WeightedSum(terms=[(1.0, Quadratic(A=np.eye(2))), (1.0, Affine(a=[1.0, 2.0, 3.0]))])

    def test_sum_operator(self):
        field = Quadratic(A=np.eye(2)) + Affine(a=[1.0, 0.0], b=2.0)
        self.assertEqual(0.5 + 1.0 + 2.0, field.value(np.array([1.0, 0.0])))


class FieldDictTest(NumericAssertionsMixin, SimpleTestCase):
    def test_rebuilds_nested_fields(self):
        quadratic = QuadraticFactory(seed=9)
        field = WeightedSum(
            terms=[
                (1.0, reflected_through(quadratic, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0])),
                (0.5, CylFundamentalFieldFactory(cf__seed=10, cf__k=2, p=4.0)),
                (2.0, RadialProfileField(TruncatedFundamentalProfile(n=3, p=2.0, level=1.0), center=[1.0, 1.0, 1.0])),
            ]
        )
        rebuilt = field_from_dict(field.to_dict())
        self.assertEqual(field.to_dict(), rebuilt.to_dict())
        x = np.array([-0.3, 0.4, 2.0])
        self.assertClose(field.value(x), rebuilt.value(x), rel=1e-14)

    def test_unknown_kind(self):
        with self.assertRaises(exceptions.DomainError):
            field_from_dict({"kind": "potato"})
