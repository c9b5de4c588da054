import json
import math

import numpy as np
from django.test import SimpleTestCase

from django_dominative_laplace.exceptions import ScenarioError
from django_dominative_laplace.fields import CylFundamentalField, Quadratic, WeightedSum
from django_dominative_laplace.jets import INFINITY, PValue
from django_dominative_laplace.profiles import TruncatedFundamentalProfile
from django_dominative_laplace.serializers import build_scenario, deserialize, load_scenario, serialize
from django_dominative_laplace.tests.tests_base import (
    SCENARIOS_DIR,
    TemporaryDirectoryMixin,
    make_scenario,
    scenario_data,
    scenario_path,
)

QUADRATIC_2D = {"kind": "quadratic", "A": [[2, 0], [0, -2]]}


class ScenarioLoadingTest(TemporaryDirectoryMixin, SimpleTestCase):
    def test_bundled_scenarios_load(self):
        paths = sorted(SCENARIOS_DIR.glob("*.json"))
        self.assertEqual(6, len(paths))
        for path in paths:
            with self.subTest(path=path.name):
                scenario = load_scenario(path)
                self.assertTrue(scenario.name)
                self.assertEqual(64, len(scenario.digest))

    def test_crandall_scenario(self):
        scenario = load_scenario(scenario_path("crandall_zhang_n3_p4"))
        self.assertEqual(3, scenario.n)
        self.assertEqual(PValue(p=4.0), scenario.p)
        self.assertEqual(0.01, scenario.sampling.exclusion_radius)
        self.assertEqual(20240, scenario.sampling.seed)
        self.assertEqual({"sums": 50, "max_poles": 5, "concave": True}, scenario.crandall)
        self.assertEqual(2, len(scenario.fields))
        self.assertIsInstance(scenario.fields[0], CylFundamentalField)
        self.assertIsInstance(scenario.combined_field, WeightedSum)
        self.assertEqual(3, len(scenario.combined_field.terms))

    def test_chords_gallery_profiles(self):
        scenario = load_scenario(scenario_path("chords_gallery"))
        profile, center = scenario.profiles[0]
        self.assertEqual(TruncatedFundamentalProfile(n=2, p=2, level=0.0), profile)
        np.testing.assert_array_equal([0.0, 0.0], center)
        self.assertEqual([2, 3], scenario.dimensions)
        self.assertEqual([PValue(p=2.0), PValue(p=4.0), INFINITY], scenario.p_values)

    def test_defaults(self):
        scenario = make_scenario()
        self.assertEqual([2], scenario.dimensions)
        self.assertEqual([PValue(p=4.0)], scenario.p_values)
        self.assertEqual(1e-3, scenario.sampling.exclusion_radius)
        np.testing.assert_array_equal([-2.0, -2.0], scenario.sampling.lower)
        np.testing.assert_array_equal([2.0, 2.0], scenario.sampling.upper)
        self.assertEqual("superharmonic", scenario.expected_verdict)
        self.assertEqual([], scenario.suites)
        self.assertIsNone(scenario.combined_field)

    def test_single_field_is_not_wrapped(self):
        scenario = make_scenario(fields=[QUADRATIC_2D])
        self.assertIsInstance(scenario.combined_field, Quadratic)

    def test_infinite_p(self):
        for label in ("inf", "Infinity", "INF"):
            self.assertTrue(make_scenario(p=label).p.is_infinite)

    def test_missing_file(self):
        with self.assertRaises(ScenarioError) as context:
            load_scenario(self.tmp_dir / "absent.json")
        self.assertIn("Unable to read", str(context.exception))

    def test_json_syntax_error(self):
        path = self.tmp_dir / "broken.json"
        path.write_text('{"name": "broken",', encoding="utf-8")
        with self.assertRaises(ScenarioError) as context:
            load_scenario(path)
        self.assertIn("json", context.exception.errors)

    def test_written_scenario_round_trip(self):
        path = self.write_scenario(scenario_data(fields=[QUADRATIC_2D]))
        scenario = load_scenario(path)
        np.testing.assert_array_equal([[2.0, 0.0], [0.0, -2.0]], scenario.fields[0].A)


class ScenarioValidationTest(SimpleTestCase):
    def assertInvalid(self, key: str, **overrides):
        with self.assertRaises(ScenarioError) as context:
            make_scenario(**overrides)
        self.assertIn(key, context.exception.errors)
        self.assertIn(key, str(context.exception))
        return context.exception

    def test_p_below_two(self):
        for p in (1, 1.5, "one", True):
            with self.subTest(p=p):
                self.assertInvalid("p", p=p)

    def test_dimension_out_of_range(self):
        self.assertInvalid("n", n=0)
        self.assertInvalid("n", n=17)

    def test_unknown_field_kind(self):
        error = self.assertInvalid("fields", fields=[{"kind": "spline"}])
        self.assertIn("spline", str(error))

    def test_field_dimension_mismatch(self):
        self.assertInvalid("fields", fields=[{"kind": "quadratic", "A": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}])

    def test_concave_dimension_mismatch(self):
        self.assertInvalid("concave", concave={"kind": "quadratic", "A": [[-1]]})

    def test_declared_kinks_must_agree(self):
        profile = {"kind": "truncated-fundamental", "n": 2, "p": 4, "level": -1, "kink_radii": [2.0]}
        error = self.assertInvalid("profiles", profiles=[{"profile": profile, "center": [0, 0]}])
        self.assertIn("kink", str(error))

    def test_profile_must_match_scenario(self):
        profile = {"kind": "fundamental", "n": 3, "p": 4}
        self.assertInvalid("profiles", profiles=[{"profile": profile, "center": [0, 0]}])

    def test_profile_center_dimension(self):
        profile = {"kind": "concave-poly", "coefficients": [0, 0, -1]}
        self.assertInvalid("profiles", profiles=[{"profile": profile, "center": [0, 0, 0]}])

    def test_unknown_suite(self):
        error = self.assertInvalid("suites", suites=["NoSuchSuite"])
        self.assertIn("NoSuchSuite", str(error))

    def test_reflection_must_be_an_involution(self):
        rotation = {"kind": "reflected", "inner": QUADRATIC_2D, "isometry": {"Q": [[0, 1], [-1, 0]]}}
        self.assertInvalid("fields", fields=[rotation])

    def test_empty_sampling_box(self):
        self.assertInvalid("sampling", sampling={"lower": [0, 0], "upper": [1, 0]})

    def test_unsupported_schema_version(self):
        self.assertInvalid("schema_version", schema_version=2)

    def test_unknown_verdict(self):
        self.assertInvalid("expected_verdict", expected_verdict="harmonic")

    def test_scan_length_must_be_positive(self):
        for eps in (0.0, -1e-3):
            with self.subTest(eps=eps):
                error = self.assertInvalid("counterexample", counterexample={"eps": eps})
                self.assertIn("eps", str(error))
        self.assertEqual(1e-3, make_scenario(counterexample={"eps": 1e-3}).counterexample["eps"])

    def test_scenario_must_be_an_object(self):
        with self.assertRaises(ScenarioError):
            build_scenario(["not", "a", "scenario"])


class SerializationTest(SimpleTestCase):
    def test_infinities_become_strings(self):
        data = json.loads(serialize({"p": math.inf, "low": -math.inf, "nan": math.nan, "values": [1.0, math.inf]}))
        self.assertEqual({"p": "inf", "low": "-inf", "nan": None, "values": [1.0, "inf"]}, data)

    def test_numpy_and_domain_values(self):
        data = json.loads(serialize({"point": np.array([1.0, 2.0]), "count": np.int64(3), "p": INFINITY}))
        self.assertEqual({"point": [1.0, 2.0], "count": 3, "p": "inf"}, data)

    def test_fields_serialize_by_kind(self):
        data = json.loads(serialize(Quadratic(A=np.eye(2))))
        self.assertEqual("quadratic", data["kind"])

    def test_keys_are_sorted(self):
        self.assertEqual('{\n  "a": 1,\n  "b": 2\n}', serialize({"b": 2, "a": 1}))

    def test_deserialize_error(self):
        with self.assertRaises(ScenarioError):
            deserialize("[1, 2")

    def test_digest_is_stable(self):
        first, second = make_scenario(), make_scenario()
        self.assertEqual(first.digest, second.digest)
        self.assertNotEqual(first.digest, make_scenario(name="other").digest)

    def test_name_override_does_not_load_a_bundled_scenario(self):
        self.assertEqual("other", make_scenario(name="other").name)
        self.assertEqual("crandall-zhang-n3-p4", make_scenario("crandall_zhang_n3_p4").name)

    def test_digest_ignores_key_order(self):
        data = scenario_data()
        reordered = dict(reversed(list(data.items())))
        self.assertEqual(build_scenario(data).digest, build_scenario(reordered).digest)
