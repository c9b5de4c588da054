import time

from django.core.management.base import CommandError

from django_dominative_laplace.management.commands import CHECK_FAILED, VALIDATION_ERROR, BaseScenarioCommand, logger
from django_dominative_laplace.reports import Report
from django_dominative_laplace.serializers import Scenario
from django_dominative_laplace.suites import Suite


class Command(BaseScenarioCommand):
    action = "verify"
    name = "scenario"

    def select(self, app_config, scenario: Scenario) -> list[type[Suite]]:
        if scenario.suites:
            selected = [app_config.get_suite(name) for name in scenario.suites]
            problems = [
                f"{suite.name()} needs {', '.join(missing)}"
                for suite in selected
                if (missing := suite.missing(scenario))
            ]
            if problems:
                raise CommandError("\n".join(problems), returncode=VALIDATION_ERROR)
            return selected

        selected = []
        for suite in app_config.get_suites():
            if missing := suite.missing(scenario):
                logger.warning(f"Skipping {suite.name()}: scenario has no {', '.join(missing)}")
                continue
            selected.append(suite)
        if not selected:
            raise CommandError("No suite can run on this scenario", returncode=VALIDATION_ERROR)
        return selected

    def perform(self, app_config, scenario: Scenario | None, *args, **options) -> str:
        suites = self.select(app_config, scenario)
        seed = scenario.sampling.seed if options["seed"] is None else options["seed"]

        started = time.perf_counter()
        results = [suite.sync(scenario=scenario, seed=seed, points=options["points"]) for suite in suites]
        runtime = time.perf_counter() - started

        report = Report(
            scenario_name=scenario.name,
            scenario_hash=scenario.digest,
            seed=seed,
            tolerance_scale=options["tol_scale"],
            results=results,
            expected_verdict=scenario.expected_verdict,
            runtime_seconds=runtime if app_config.report_timings else None,
        )
        if options["out"] is None:
            self.emit(report.dumps(), None)
        else:
            report.write(options["out"])

        summary = f"{scenario.name}: {report.verdict} (expected {report.expected_verdict}), {len(results)} suites"
        if not report.as_expected:
            failing = "\n".join(f"- {result.name}" for result in results if not result.passed)
            raise CommandError(f"{summary}\n{failing}", returncode=CHECK_FAILED)
        return summary
