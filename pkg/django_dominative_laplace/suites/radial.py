import math
from typing import Any

import numpy as np

from django_dominative_laplace.exceptions import (
    DominativeLaplaceError,
    InvalidProfileError,
    ProfileNotSuperharmonicError,
)
from django_dominative_laplace.fields import Quadratic
from django_dominative_laplace.fundsol import RadialFundamental, W
from django_dominative_laplace.jets import PValue
from django_dominative_laplace.profiles import (
    ConstantProfile,
    FundamentalProfile,
    MinPairProfile,
    PolynomialProfile,
    RadialProfile,
    TruncatedFundamentalProfile,
    validate_profile,
)
from django_dominative_laplace.radial_chords import (
    chord_constant,
    chord_profile,
    derivative_quotient,
    one_sided_chord_limits,
    touching_from_above,
    verify_theorem2,
)
from django_dominative_laplace.reports import SuiteResult
from django_dominative_laplace.sampling import sample_box
from django_dominative_laplace.suites.suite import Suite, get_config

TRIPLES = 20
MONOTONE_GRID = np.geomspace(0.2, 0.99, 20)
CHORD_PAIRS = ((0.3, 0.8), (0.5, 2.0), (1.0, 3.0))
TOUCH_RADII = (0.25, 0.5, 1.0, 2.0)
QUOTIENT_POWER = 20
QUOTIENT_TOLERANCE = 1e-5
MAX_LISTED = 10


def profile_gallery(n: int, p: PValue) -> list[RadialProfile]:
    """Radial p-superharmonic profiles in R^n."""
    return [
        FundamentalProfile(n=n, p=p),
        TruncatedFundamentalProfile(n=n, p=p, level=0.0),
        TruncatedFundamentalProfile(n=n, p=p, level=1.0),
        MinPairProfile(n=n, p=p, scale=0.5, shift=0.5),
        PolynomialProfile(coefficients=[0.0, -1.0, -1.0]),
        ConstantProfile(value=1.0),
    ]


class RadialChordSuite(Suite):
    """Chord constants, chords, one-sided limits and touching functions on a profile gallery."""

    tolerance_name = "algebraic_tolerance"

    def _cases(self) -> list[tuple[RadialProfile, RadialFundamental]]:
        cases = []
        for n in self.scenario.dimensions:
            for p in self.scenario.p_values:
                rf = RadialFundamental(n=n, p=p)
                cases.extend((profile, rf) for profile in profile_gallery(n, p))
        scenario_rf = RadialFundamental(n=self.scenario.n, p=self.scenario.p)
        cases.extend((profile, scenario_rf) for profile, _ in self.scenario.profiles)
        return cases

    def _triples(self) -> list[np.ndarray]:
        return [np.sort(np.exp(self.rng.uniform(math.log(0.05), math.log(5.0), size=3))) for _ in range(TRIPLES)]

    def _check(self, profile: RadialProfile, rf: RadialFundamental, triples: list[np.ndarray]) -> dict[str, Any]:
        residual = -math.inf
        problems = []

        def scaled(excess: float, reference: float) -> float:
            return excess / (1.0 + abs(reference))

        for a, b, c in triples:
            if a == b or b == c:
                continue
            left, right = chord_constant(profile, a, b, rf), chord_constant(profile, b, c, rf)
            residual = max(residual, scaled(-left, left), scaled(left - right, right))

        constants = [chord_constant(profile, float(a), 1.0, rf) for a in MONOTONE_GRID]
        for previous, current in zip(constants[:-1], constants[1:]):
            residual = max(residual, scaled(previous - current, current))

        for a, b in CHORD_PAIRS:
            chord = chord_profile(profile, a, b, rf)
            residual = max(residual, scaled(chord.boundary_error(profile), profile.value(b)))

        kinks = []
        for b in sorted({*TOUCH_RADII, *profile.kink_radii}):
            touching = touching_from_above(profile, b, rf, samples=get_config(name="touch_samples"))
            expected = profile.value(b)
            residual = max(residual, scaled(abs(touching.C1 * W(rf, b) + touching.C2 - expected), expected))
            left, right = one_sided_chord_limits(
                profile,
                b,
                rf,
                refinements=get_config(name="chord_refinements"),
                cauchy_tol=get_config(name="chord_cauchy_tolerance"),
            )
            if b in profile.kink_radii:
                kinks.append({"b": b, "C_b_minus": left, "C_b_plus": right, "C_b": touching.C1})
                continue
            quotient, w_prime = derivative_quotient(profile, b, rf, QUOTIENT_POWER)
            if abs(quotient - left * w_prime) > QUOTIENT_TOLERANCE * (1.0 + abs(quotient)):
                problems.append(f"difference quotient {quotient:.6e} disagrees with C_b^- W'(b) at b={b:g}")

        return {"residual": residual, "problems": problems, "kinks": kinks}

    def run(self) -> SuiteResult:
        cases = self._cases()
        items = [(profile, rf, self._triples()) for profile, rf in cases]

        def check(item) -> dict[str, Any]:
            profile, rf, triples = item
            label = f"{profile} with {rf}"
            try:
                validate_profile(profile)
                return {"profile": label} | self._check(profile, rf, triples)
            except (InvalidProfileError, ProfileNotSuperharmonicError) as err:
                return {"profile": label, "residual": -math.inf, "problems": [str(err)], "kinks": []}

        outcomes = self.map(check, items)
        worst = max((outcome["residual"] for outcome in outcomes), default=-math.inf)
        failing = [outcome for outcome in outcomes if outcome["problems"]]
        return self.result(
            passed=bool(outcomes) and not failing and worst <= self.tolerance,
            worst_residual=worst,
            checked=len(outcomes),
            details={
                "profiles": len(outcomes),
                "kinks": [kink | {"profile": outcome["profile"]} for outcome in outcomes for kink in outcome["kinks"]],
                "failing": failing[:MAX_LISTED],
            },
        )


class RadialSuperpositionSuite(Suite):
    """Sums of translated radial p-superharmonic profiles plus a concave function."""

    def _profiles(self) -> list[tuple[RadialProfile, np.ndarray]]:
        if self.scenario.profiles:
            return list(self.scenario.profiles)
        n, p = self.scenario.n, self.scenario.p
        sampling = self.scenario.sampling
        centers = self.rng.uniform(sampling.lower, sampling.upper, size=(3, n))
        profiles = [
            FundamentalProfile(n=n, p=p),
            TruncatedFundamentalProfile(n=n, p=p, level=1.0),
            FundamentalProfile(n=n, p=p, scale=0.5),
        ]
        return list(zip(profiles, centers))

    def run(self) -> SuiteResult:
        n = self.scenario.n
        profiles = self._profiles()
        concave = self.scenario.concave or Quadratic(A=-np.eye(n))
        sampling = self.scenario.sampling
        points = sample_box(self.rng, self.points, sampling.lower, sampling.upper)
        try:
            report = verify_theorem2(
                profiles,
                concave,
                self.scenario.p,
                points,
                tol=self.tolerance,
                exclusion_radius=sampling.exclusion_radius,
                mapper=self.map,
            )
        except DominativeLaplaceError as err:
            return self.result(passed=False, worst_residual=math.inf, details={"error": str(err)})

        failing_kinks = [check for check in report.kink_checks if not check["passed"]]
        return self.result(
            passed=report.passed,
            worst_residual=max(report.max_p_laplace, report.max_dominative),
            witness_point=report.worst_point,
            checked=report.checked,
            skipped=report.skipped,
            details={
                "profile_reports": report.profile_reports,
                "precondition_violations": report.precondition_violations[:MAX_LISTED],
                "kink_checks": len(report.kink_checks),
                "failing_kink_checks": failing_kinks[:MAX_LISTED],
            },
        )
