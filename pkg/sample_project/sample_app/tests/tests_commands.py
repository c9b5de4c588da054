import json
import time
from io import StringIO
from typing import List
from unittest.mock import patch

import pandas as pd
from django.apps import apps
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from freezegun import freeze_time

from django_dominative_laplace.tests.tests_base import TemporaryDirectoryMixin, scenario_data, scenario_path

BUNDLED_SCENARIOS = (
    "chords_gallery",
    "crandall_zhang_n3_p4",
    "fundamental_solutions",
    "quadratic_counterexamples",
    "radial_superposition",
    "xx_minus_yy_not_dominative",
)
CRANDALL_TIME_BUDGET = 10.0
TILTED_SADDLE = {"kind": "quadratic", "A": [[-1, 0, 0], [0, -1, 0], [0, 0, 1.2]], "b": [10, 0, 0]}


class BaseCommandTest(TemporaryDirectoryMixin, SimpleTestCase):
    def _call(self, command: str, params: List[str] = None) -> tuple[str, str]:
        out, err = StringIO(), StringIO()
        call_command(command, *(params or []), no_color=True, stdout=out, stderr=err)
        return out.getvalue(), err.getvalue()

    def _assert_fails(self, command: str, params: List[str], returncode: int) -> CommandError:
        with self.assertRaises(CommandError) as context:
            self._call(command, params)
        self.assertEqual(returncode, context.exception.returncode)
        return context.exception


class VerifyCommandTest(BaseCommandTest):
    def test_expected_counterexample(self):
        out, err = self._call("verify", ["--scenario", str(scenario_path("xx_minus_yy_not_dominative"))])
        report = json.loads(out)
        self.assertEqual("not-superharmonic", report["verdict"])
        self.assertEqual("not-superharmonic", report["expected_verdict"])
        self.assertEqual(["SuperharmonicFieldsSuite"], [suite["name"] for suite in report["suites"]])
        self.assertIn("xx-minus-yy-not-dominative: not-superharmonic", err)

    def test_crandall_sums(self):
        params = ["--scenario", str(scenario_path("crandall_zhang_n3_p4")), "--points", "20"]
        out, _ = self._call("verify", params)
        report = json.loads(out)
        self.assertEqual("superharmonic", report["verdict"])
        self.assertEqual(20240, report["seed"])
        self.assertNotIn("runtime_seconds", report)
        for suite in report["suites"]:
            self.assertTrue(suite["passed"], suite)

    def test_output_is_deterministic(self):
        params = ["--scenario", str(scenario_path("fundamental_solutions")), "--points", "10", "--seed", "4"]
        first, _ = self._call("verify", params)
        second, _ = self._call("verify", params)
        self.assertEqual(first, second)
        self.assertEqual(4, json.loads(first)["seed"])

    def test_writes_report(self):
        path = self.tmp_dir / "reports" / "saddle.json"
        params = ["--scenario", str(scenario_path("xx_minus_yy_not_dominative")), "--out", str(path)]
        out, _ = self._call("verify", params)
        self.assertEqual("", out)
        self.assertEqual("not-superharmonic", json.loads(path.read_text(encoding="utf-8"))["verdict"])

    @freeze_time("2026-01-01")
    def test_runtime_is_reported_when_enabled(self):
        app_config = apps.get_app_config("django_dominative_laplace")
        with patch.object(app_config, "report_timings", True):
            out, _ = self._call("verify", ["--scenario", str(scenario_path("xx_minus_yy_not_dominative"))])
        self.assertEqual(0.0, json.loads(out)["runtime_seconds"])

    def test_unexpected_verdict(self):
        data = scenario_data(suites=["ConcaveQuadraticSuite"], expected_verdict="not-superharmonic")
        error = self._assert_fails("verify", ["--scenario", str(self.write_scenario(data))], returncode=1)
        self.assertIn("minimal: superharmonic (expected not-superharmonic)", str(error))

    def test_every_runnable_suite(self):
        data = scenario_data(sampling={"count": 5, "seed": 2}, crandall={"sums": 2, "max_poles": 2, "concave": True})
        path = self.write_scenario(data)
        with self.assertLogs("django_dominative_laplace.management.commands", level="WARNING") as logs:
            out, _ = self._call("verify", ["--scenario", str(path)])
        names = [suite["name"] for suite in json.loads(out)["suites"]]
        self.assertIn("DominationSuite", names)
        self.assertIn("ConcaveQuadraticSuite", names)
        self.assertNotIn("CounterexampleSuite", names)
        self.assertTrue(any("Skipping CounterexampleSuite" in line for line in logs.output))

    def test_invalid_scenario(self):
        path = self.write_scenario(scenario_data(p=1))
        error = self._assert_fails("verify", ["--scenario", str(path)], returncode=2)
        self.assertIn("p:", str(error))

    def test_missing_scenario_file(self):
        self._assert_fails("verify", ["--scenario", str(self.tmp_dir / "absent.json")], returncode=2)

    def test_listed_suite_without_inputs(self):
        path = self.write_scenario(scenario_data(suites=["CounterexampleSuite"]))
        error = self._assert_fails("verify", ["--scenario", str(path)], returncode=2)
        self.assertIn("CounterexampleSuite needs fields, base_point", str(error))

    def test_invalid_options(self):
        path = str(scenario_path("xx_minus_yy_not_dominative"))
        self._assert_fails("verify", ["--scenario", path, "--points", "0"], returncode=2)
        self._assert_fails("verify", ["--scenario", path, "--tol-scale", "0"], returncode=2)

    def test_bundled_scenarios_meet_their_verdicts(self):
        for name in BUNDLED_SCENARIOS:
            with self.subTest(scenario=name):
                out, err = StringIO(), StringIO()
                call_command("verify", scenario=str(scenario_path(name)), no_color=True, stdout=out, stderr=err)
                report = json.loads(out.getvalue())
                self.assertEqual(report["expected_verdict"], report["verdict"])
                self.assertIn(f"{report['scenario']}: {report['verdict']}", err.getvalue())

    def test_crandall_scenario_within_time_budget(self):
        started = time.perf_counter()
        out, _ = self._call("verify", ["--scenario", str(scenario_path("crandall_zhang_n3_p4"))])
        elapsed = time.perf_counter() - started
        self.assertEqual("superharmonic", json.loads(out)["verdict"])
        self.assertLess(elapsed, CRANDALL_TIME_BUDGET)


class SampleCommandTest(BaseCommandTest):
    def test_planar_slice(self):
        params = ["--scenario", str(scenario_path("xx_minus_yy_not_dominative")), "--resolution", "5"]
        out, err = self._call("sample", params)
        table = pd.read_csv(StringIO(out))
        self.assertEqual(["x", "y", "value", "|grad|", "lambda_max", "D_p", "Delta_p"], list(table.columns))
        self.assertEqual(25, len(table))
        self.assertEqual([2.0], table["D_p"].unique().tolist())
        self.assertEqual([2.0], table["lambda_max"].unique().tolist())
        corner = table.iloc[-1]
        self.assertEqual((2.0, 2.0), (corner["x"], corner["y"]))
        self.assertEqual(0.0, corner["value"])
        self.assertIn("Sampled 25 cells of xx-minus-yy-not-dominative, 0 singular", err)

    def test_singular_cells_are_blank(self):
        pole = {"kind": "cyl-fundamental", "k": 2, "Q": [[1, 0], [0, 1]], "x0": [0, 0], "C1": 1.0, "p": 4}
        path = self.write_scenario(scenario_data(fields=[pole]))
        out, err = self._call("sample", ["--scenario", str(path), "--resolution", "3"])
        table = pd.read_csv(StringIO(out))
        center = table[(table["x"] == 0.0) & (table["y"] == 0.0)].iloc[0]
        self.assertTrue(pd.isna(center["D_p"]))
        self.assertIn("1 singular", err)

    def test_writes_csv(self):
        path = self.tmp_dir / "slices" / "saddle.csv"
        params = ["--scenario", str(scenario_path("xx_minus_yy_not_dominative")), "--resolution", "3"]
        self._call("sample", params + ["--out", str(path)])
        self.assertEqual(9, len(pd.read_csv(path)))

    def test_invalid_options(self):
        path = str(scenario_path("xx_minus_yy_not_dominative"))
        self._assert_fails("sample", ["--scenario", path, "--axes", "0,0"], returncode=2)
        self._assert_fails("sample", ["--scenario", path, "--axes", "x"], returncode=2)
        self._assert_fails("sample", ["--scenario", path, "--resolution", "1"], returncode=2)
        self._assert_fails("sample", ["--scenario", path, "--lower", "1", "--upper", "0"], returncode=2)

    def test_scenario_without_fields(self):
        self._assert_fails("sample", ["--scenario", str(self.write_scenario(scenario_data()))], returncode=2)


class CounterexampleCommandTest(BaseCommandTest):
    def test_linear(self):
        params = ["linear", "--scenario", str(scenario_path("quadratic_counterexamples"))]
        out, err = self._call("counterexample", params)
        artifact = json.loads(out)
        self.assertEqual("linear", artifact["kind"])
        self.assertEqual(4.0, artifact["p"])
        self.assertAlmostEqual(5.0, artifact["witness_value"])
        self.assertEqual("quadratic", artifact["field"]["kind"])
        self.assertIn("linear counterexample for half-squared-norm-n3-p4", err)

    def test_fundsol_search(self):
        data = scenario_data(n=3, fields=[TILTED_SADDLE], base_point=[0, 0, 0])
        out, _ = self._call("counterexample", ["fundsol", "--scenario", str(self.write_scenario(data))])
        artifact = json.loads(out)
        self.assertEqual(16.0, artifact["details"]["s"])
        self.assertGreater(artifact["witness_value"], 0.0)

    def test_fundsol_scale_too_small(self):
        path = str(self.write_scenario(scenario_data(n=3, fields=[TILTED_SADDLE], base_point=[0, 0, 0])))
        error = self._assert_fails("counterexample", ["fundsol", "--scenario", path, "--s", "1"], returncode=1)
        self.assertIn("larger s", str(error))

    def test_reflection(self):
        path = self.tmp_dir / "reflection.json"
        params = ["reflection", "--scenario", str(scenario_path("xx_minus_yy_not_dominative")), "--out", str(path)]
        self._call("counterexample", params)
        artifact = json.loads(path.read_text(encoding="utf-8"))
        self.assertAlmostEqual(0.16, artifact["witness_value"])
        self.assertEqual([0.01, 0.0], artifact["witness_point"])

    def test_reflection_rejects_nonpositive_scan_length(self):
        path = str(scenario_path("xx_minus_yy_not_dominative"))
        error = self._assert_fails("counterexample", ["reflection", "--scenario", path, "--eps", "0"], returncode=2)
        self.assertIn("--eps", str(error))

    def test_not_dominative(self):
        data = scenario_data(fields=[{"kind": "quadratic", "A": [[-1, 0], [0, -1]]}], base_point=[0, 0])
        self._assert_fails("counterexample", ["linear", "--scenario", str(self.write_scenario(data))], returncode=1)

    def test_missing_base_point(self):
        data = scenario_data(fields=[{"kind": "quadratic", "A": [[1, 0], [0, 1]]}])
        self._assert_fails("counterexample", ["linear", "--scenario", str(self.write_scenario(data))], returncode=2)


class ChordsCommandTest(BaseCommandTest):
    truncated = '{"kind": "truncated-fundamental", "n": 2, "p": 2, "level": 0}'

    def test_profile_table(self):
        out, err = self._call("chords", ["--profile", self.truncated, "--n", "2", "--p", "2", "--radii", "0,1,2"])
        table = pd.read_csv(StringIO(out))
        self.assertEqual(["b", "C_b_minus", "C_b_plus", "touch_C1", "touch_ok"], list(table.columns))
        self.assertEqual([0.0, 1.0, 2.0], table["b"].tolist())
        self.assertTrue(pd.isna(table["C_b_minus"][0]))
        self.assertAlmostEqual(0.0, table["C_b_minus"][1])
        self.assertAlmostEqual(1.0, table["C_b_plus"][1])
        self.assertAlmostEqual(0.5, table["touch_C1"][1])
        self.assertIn("Tabulated 3 radii", err)
        self.assertIn("0 at poles", err)

    def test_pole_rows(self):
        profile = '{"kind": "fundamental", "n": 3, "p": 2}'
        out, err = self._call("chords", ["--profile", profile, "--n", "3", "--p", "2", "--radii", "0,1"])
        table = pd.read_csv(StringIO(out))
        self.assertEqual(["pole", "True"], table["touch_ok"].astype(str).tolist())
        self.assertIn("1 at poles", err)

    def test_scenario_profile(self):
        out, _ = self._call("chords", ["--scenario", str(scenario_path("chords_gallery")), "--radii", "1"])
        self.assertAlmostEqual(0.5, pd.read_csv(StringIO(out))["touch_C1"][0])

    def test_invalid_options(self):
        self._assert_fails("chords", ["--radii", "1"], returncode=2)
        self._assert_fails("chords", ["--profile", self.truncated, "--n", "2", "--p", "2", "--radii", "-1"], 2)
        self._assert_fails("chords", ["--profile", self.truncated, "--n", "2", "--p", "2", "--radii", "a"], 2)
        self._assert_fails("chords", ["--profile", '{"kind": "spline"}', "--n", "2", "--p", "2", "--radii", "1"], 2)
        self._assert_fails("chords", ["--profile", "{", "--n", "2", "--p", "2", "--radii", "1"], 2)
        self._assert_fails("chords", ["--profile", self.truncated, "--n", "2", "--p", "1", "--radii", "1"], 2)
