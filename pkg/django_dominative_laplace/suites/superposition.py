import math
from typing import Any

import numpy as np

from django_dominative_laplace.exceptions import (
    NeedsLargerScale,
    NeedsSmallerStep,
    PreconditionError,
)
from django_dominative_laplace.fields import Quadratic, ScalarField
from django_dominative_laplace.jets import PValue
from django_dominative_laplace.reports import SuiteResult
from django_dominative_laplace.sampling import random_psd, sample_box
from django_dominative_laplace.serializers import Scenario
from django_dominative_laplace.superposition import (
    COUNTEREXAMPLES,
    Counterexample,
    CrandallSum,
    SuperpositionReport,
    verify_crandall_sum,
    verify_theorem1_i,
)
from django_dominative_laplace.suites.suite import Suite, get_config

MIN_WITNESS = 1e-6
MONOTONE_FROM = 6
TRACE_BOUND = 1e-3
MAX_LISTED = 10


def _summary(report: SuperpositionReport) -> dict[str, Any]:
    return {
        "max_p_laplace": report.max_p_laplace,
        "max_dominative": report.max_dominative,
        "precondition_violations": report.precondition_violations[:MAX_LISTED],
        "precondition_violation_count": len(report.precondition_violations),
        "skipped_points": report.skipped_points[:MAX_LISTED],
    }


class CrandallZhangSuite(Suite):
    """Random nonnegative combinations of translated fundamental solutions plus a concave quadratic."""

    def _box(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        sampling = self.scenario.sampling
        if sampling.lower.shape[0] == n:
            return sampling.lower, sampling.upper
        return -2.0 * np.ones(n), 2.0 * np.ones(n)

    def _crandall_sum(self, n: int, p: PValue) -> CrandallSum:
        lower, upper = self._box(n)
        count = int(self.rng.integers(1, self.scenario.crandall["max_poles"] + 1))
        poles = self.rng.uniform(lower, upper, size=(count, n))
        weights = self.rng.uniform(0.0, 2.0, size=count)
        concave = None
        if self.scenario.crandall["concave"]:
            concave = Quadratic(A=-random_psd(self.rng, n) / n)
        return CrandallSum(n=n, p=p, terms=list(zip(weights, poles)), concave_part=concave)

    def run(self) -> SuiteResult:
        dimensions, p_values = self.scenario.dimensions, self.scenario.p_values
        exclusion_radius = self.scenario.sampling.exclusion_radius

        worst, witness, checked, skipped = -math.inf, None, 0, 0
        failures = []
        for index in range(self.scenario.crandall["sums"]):
            n = dimensions[index % len(dimensions)]
            p = p_values[(index // len(dimensions)) % len(p_values)]
            crandall_sum = self._crandall_sum(n, p)
            points = sample_box(self.rng, self.points, *self._box(n))
            report = verify_crandall_sum(crandall_sum, points, tol=self.tolerance, exclusion_radius=exclusion_radius)
            checked += report.checked
            skipped += report.skipped
            residual = max(report.max_p_laplace, report.max_dominative)
            if residual > worst:
                worst, witness = residual, report.worst_point
            if not report.passed:
                failures.append({"sum": index, "n": n, "p": p.to_json(), "poles": len(crandall_sum.terms)})

        return self.result(
            passed=checked > 0 and not failures,
            worst_residual=worst,
            witness_point=witness,
            checked=checked,
            skipped=skipped,
            details={"sums": self.scenario.crandall["sums"], "failures": failures[:MAX_LISTED]},
        )


class SuperharmonicFieldsSuite(Suite):
    """The scenario's own fields, each certified first, then summed."""

    @classmethod
    def missing(cls, scenario: Scenario) -> list[str]:
        return [] if scenario.fields or scenario.concave is not None else ["fields"]

    def run(self) -> SuiteResult:
        fields: list[ScalarField] = list(self.scenario.fields)
        if self.scenario.concave is not None:
            fields.append(self.scenario.concave)
        sampling = self.scenario.sampling
        points = sample_box(self.rng, self.points, sampling.lower, sampling.upper)
        report = verify_theorem1_i(
            fields,
            points,
            self.scenario.p,
            tol=self.tolerance,
            exclusion_radius=sampling.exclusion_radius,
            mapper=self.map,
        )
        return self.result(
            passed=report.passed,
            worst_residual=max(report.max_p_laplace, report.max_dominative),
            witness_point=report.worst_point,
            checked=report.checked,
            skipped=report.skipped,
            details=_summary(report),
        )


class CounterexampleSuite(Suite):
    """Builds each counterexample at the base point and recomputes its witness through the operators."""

    @classmethod
    def missing(cls, scenario: Scenario) -> list[str]:
        missing = [] if scenario.combined_field is not None else ["fields"]
        return missing + ([] if scenario.base_point is not None else ["base_point"])

    def _options(self, kind: str) -> dict[str, Any]:
        options = self.scenario.counterexample
        if kind == "fundsol":
            if options.get("s") is not None:
                return {"s": options["s"]}
            return {"search_start": get_config(name="search_start"), "search_cap": get_config(name="search_cap")}
        if kind == "reflection":
            return {
                "eps": options.get("eps") or get_config(name="scan_eps"),
                "steps": options.get("steps") or get_config(name="scan_steps"),
            }
        return {}

    def _residual_trace_problems(self, counterexample: Counterexample) -> list[str]:
        residuals = counterexample.details["residual_trace"]
        trace = [abs(row["residual"]) for row in residuals if row["residual"] is not None]
        problems = []
        tail = trace[MONOTONE_FROM:]
        for j, (current, following) in enumerate(zip(tail[:-1], tail[1:]), start=MONOTONE_FROM):
            if current > 0 and not following < current:
                problems.append(f"|rho(2^{j + 1})| does not decrease")
        if trace and trace[-1] >= TRACE_BOUND:
            problems.append(f"|rho(2^{len(trace) - 1})| = {trace[-1]:.3e} is not below {TRACE_BOUND}")
        return problems

    def run(self) -> SuiteResult:
        u = self.scenario.combined_field
        x0 = self.scenario.base_point
        kinds = self.scenario.counterexample.get("kinds") or list(COUNTEREXAMPLES)

        worst, witness = -math.inf, None
        outcomes = {}
        for kind in kinds:
            try:
                counterexample = COUNTEREXAMPLES[kind](u, x0, self.scenario.p, **self._options(kind))
            except (PreconditionError, NeedsLargerScale, NeedsSmallerStep) as err:
                outcomes[kind] = {"passed": False, "error": str(err)}
                continue

            value = counterexample.witness_value
            mismatch = abs(counterexample.recomputed_value - value) / (1.0 + abs(value))
            problems = []
            if not value > MIN_WITNESS:
                problems.append(f"witness {value:.3e} is not above {MIN_WITNESS}")
            if kind == "fundsol":
                problems.extend(self._residual_trace_problems(counterexample))
            if kind == "reflection":
                axis_residual = counterexample.details["axis_gradient_residual"]
                mismatch = max(mismatch, axis_residual / (1.0 + abs(value)))
            if mismatch > worst:
                worst, witness = mismatch, counterexample.witness_point
            outcomes[kind] = {"passed": not problems, "problems": problems} | counterexample.to_dict()

        return self.result(
            passed=bool(outcomes) and all(outcome["passed"] for outcome in outcomes.values()),
            worst_residual=worst,
            witness_point=witness,
            checked=len(outcomes),
            details={"counterexamples": outcomes},
        )
