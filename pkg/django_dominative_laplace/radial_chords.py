"""Chords of radial profiles by scaled fundamental solutions, and the radial superposition harness.

For a decreasing profile U the chord H_ab = C_ab [W(r) - W(b)] + U(b) matches U at a and b.
One-sided limits of C_ab give the scale of a fundamental solution that touches U from above
at any radius, which is how radial functions are checked at their kinks.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from django_dominative_laplace.exceptions import (
    DomainError,
    InvalidProfileError,
    PoleError,
    ProfileNotSuperharmonicError,
    SingularityError,
)
from django_dominative_laplace.fields import (
    CylFundamentalField,
    Point,
    RadialProfileField,
    ScalarField,
    WeightedSum,
    as_point,
    eval_jet,
)
from django_dominative_laplace.fundsol import CylFundamental, RadialFundamental, W, W_difference, W_prime
from django_dominative_laplace.jets import PValue
from django_dominative_laplace.operators import dominative, dominative_profile, is_locally_concave
from django_dominative_laplace.profiles import FundamentalProfile, RadialProfile, validate_profile
from django_dominative_laplace.superposition import (
    DEFAULT_EXCLUSION_RADIUS,
    DEFAULT_TOLERANCE,
    Mapper,
    SuperpositionReport,
    _evaluate_sum,
    reduce_samples,
)

logger = logging.getLogger(__name__)

CHORD_TOLERANCE = 1e-10
CHORD_SAMPLES = 50
REFINEMENTS = 40
CAUCHY_TOLERANCE = 1e-8
STABLE_STEPS = 3
MONOTONE_SLACK = 1e-8
TOUCH_SAMPLES = 200
TOUCH_TOLERANCE = 1e-9


def _finite_value(profile: RadialProfile, r: float) -> float:
    value = profile.value(r)
    if math.isinf(value):
        raise PoleError(term=str(profile), radius=r)
    return value


def chord_constant(profile: RadialProfile, a: float, b: float, rf: RadialFundamental) -> float:
    """C_ab = (U(a) - U(b)) / (W(a) - W(b))."""
    if not 0 < a < b:
        raise DomainError(f"Chord radii must satisfy 0 < a < b, got a={a}, b={b}.")
    _finite_value(profile, a)
    _finite_value(profile, b)
    return profile.difference(a, b) / W_difference(rf, a, b)


@dataclass(frozen=True)
class ChordData:
    a: float
    b: float
    constant: float
    chord: FundamentalProfile

    def boundary_error(self, profile: RadialProfile) -> float:
        return max(
            abs(self.chord.value(self.a) - profile.value(self.a)),
            abs(self.chord.value(self.b) - profile.value(self.b)),
        )


def scaled_fundamental(rf: RadialFundamental, scale: float, anchor: float, anchor_value: float) -> FundamentalProfile:
    """scale * [W(r) - W(anchor)] + anchor_value."""
    return FundamentalProfile(n=rf.n, p=rf.p, scale=scale, shift=anchor_value - scale * W(rf, anchor))


def chord_profile(
    profile: RadialProfile,
    a: float,
    b: float,
    rf: RadialFundamental,
    samples: int = CHORD_SAMPLES,
    tol: float = CHORD_TOLERANCE,
) -> ChordData:
    constant = chord_constant(profile, a, b, rf)
    chord = scaled_fundamental(rf, scale=constant, anchor=b, anchor_value=profile.value(b))

    inside = np.linspace(a, b, samples + 2)[1:-1]
    outside = np.concatenate([np.geomspace(a / 10, a, samples), np.geomspace(b, 10 * b, samples)])
    for r in inside:
        r = float(r)
        expected = profile.value(r)
        if chord.value(r) > expected + tol * (1.0 + abs(expected)):
            raise ProfileNotSuperharmonicError(profile=profile, radius=r, reason="chord lies above U inside [a, b]")
    for r in outside:
        r = float(r)
        expected = profile.value(r)
        if chord.value(r) < expected - tol * (1.0 + abs(expected)):
            raise ProfileNotSuperharmonicError(profile=profile, radius=r, reason="chord lies below U outside [a, b]")
    return ChordData(a=a, b=b, constant=constant, chord=chord)


def _one_sided_limit(
    profile: RadialProfile,
    b: float,
    rf: RadialFundamental,
    side: int,
    refinements: int,
    cauchy_tol: float,
) -> float:
    previous = None
    stable = 0
    for j in range(1, refinements + 1):
        r = b * (1.0 + side * 2.0**-j)
        current = chord_constant(profile, min(r, b), max(r, b), rf)
        if previous is not None:
            step = current - previous
            # C_ab grows with a, and C_bc grows with c: left limits increase, right limits decrease
            if side * step > MONOTONE_SLACK * (1.0 + abs(current)):
                raise ProfileNotSuperharmonicError(
                    profile=profile, radius=b, reason=f"chord constants are not monotone at refinement {j}"
                )
            stable = stable + 1 if abs(step) < cauchy_tol else 0
            if stable >= STABLE_STEPS:
                return current
        previous = current
    logger.warning(f"Chord constants of {profile} at b={b:g} did not stabilise after {refinements} refinements")
    return previous


def one_sided_chord_limits(
    profile: RadialProfile,
    b: float,
    rf: RadialFundamental,
    refinements: int = REFINEMENTS,
    cauchy_tol: float = CAUCHY_TOLERANCE,
) -> tuple[float, float]:
    if not b > 0:
        raise DomainError(f"Radius must be positive, got {b}.")
    left = _one_sided_limit(profile, b, rf, side=-1, refinements=refinements, cauchy_tol=cauchy_tol)
    right = _one_sided_limit(profile, b, rf, side=1, refinements=refinements, cauchy_tol=cauchy_tol)
    if left > right + MONOTONE_SLACK:
        raise ProfileNotSuperharmonicError(profile=profile, radius=b, reason=f"C_b^- = {left} exceeds C_b^+ = {right}")
    return left, right


def touching_from_above(
    profile: RadialProfile,
    b: float,
    rf: RadialFundamental,
    samples: int = TOUCH_SAMPLES,
    tol: float = TOUCH_TOLERANCE,
    refinements: int = REFINEMENTS,
    cauchy_tol: float = CAUCHY_TOLERANCE,
) -> CylFundamental:
    """Radial fundamental solution h with h(b) = U(b) and h >= U around b.

    Its scale is the midpoint of [C_b^-, C_b^+]; at b = 0 it is the constant U(0).
    """
    n = rf.n
    if b == 0:
        origin = profile.value_at_origin
        if math.isinf(origin):
            raise PoleError(term=str(profile), radius=0.0)
        return CylFundamental(k=n, Q=np.eye(n), x0=np.zeros(n), C1=0.0, C2=origin)

    anchor_value = _finite_value(profile, b)
    left, right = one_sided_chord_limits(profile, b, rf, refinements=refinements, cauchy_tol=cauchy_tol)
    scale = max(0.5 * (left + right), 0.0)
    touching = scaled_fundamental(rf, scale=scale, anchor=b, anchor_value=anchor_value)

    for r in np.geomspace(b / 10, 10 * b, samples):
        r = float(r)
        expected = profile.value(r)
        if touching.value(r) < expected - tol * (1.0 + abs(expected)):
            raise ProfileNotSuperharmonicError(profile=profile, radius=r, reason=f"h(r) < U(r) with C_b = {scale}")
    return CylFundamental(k=n, Q=np.eye(n), x0=np.zeros(n), C1=scale, C2=touching.shift)


@dataclass
class RadialEquivalenceReport:
    passed: bool
    tolerance: float
    max_dominative: float
    witness_radius: float | None
    checked: int
    kinks: list[dict[str, Any]] = field(default_factory=list)
    origin: dict[str, Any] | None = None

    @property
    def verdict(self) -> str:
        return "superharmonic" if self.passed else "not-superharmonic"

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "max_dominative": self.max_dominative,
            "witness_radius": self.witness_radius,
            "checked": self.checked,
            "kinks": self.kinks,
            "origin": self.origin,
        }


def _kink_check(profile: RadialProfile, b: float, rf: RadialFundamental, tol: float) -> dict[str, Any]:
    try:
        left, right = one_sided_chord_limits(profile, b, rf)
        touching = touching_from_above(profile, b, rf)
    except ProfileNotSuperharmonicError as err:
        return {"b": b, "passed": False, "reason": err.reason}
    # the touching function is a fundamental solution, so its dominative operator vanishes off the pole
    point = np.zeros(rf.n)
    point[0] = b
    touching_dominative = dominative(eval_jet(CylFundamentalField(cf=touching, p=rf.p), point), rf.p)
    return {
        "b": b,
        "passed": abs(touching_dominative) <= tol,
        "C_minus": left,
        "C_plus": right,
        "C_b": touching.C1,
        "touching_dominative": touching_dominative,
    }


def verify_radial_equivalence(
    profile: RadialProfile,
    rf: RadialFundamental,
    samples: Iterable[float],
    tol: float = DEFAULT_TOLERANCE,
) -> RadialEquivalenceReport:
    """Checks a radial profile is dominative p-superharmonic.

    Smooth radii use the closed-form eigenvalues of a radial Hessian; kinks are checked through
    the touching fundamental solution. Profiles violating the basic invariants are rejected.
    """
    validate_profile(profile)
    n, p = rf.n, rf.p

    max_dominative = -math.inf
    witness = None
    checked = 0
    for r in samples:
        r = float(r)
        if r <= 0 or profile.kink_distance(r) <= 1e-9 * r:
            continue
        value = dominative_profile(profile.derivative(r), profile.second_derivative(r), r, n, n, p)
        checked += 1
        if value > max_dominative:
            max_dominative, witness = value, r

    kinks = [_kink_check(profile, kink, rf, tol) for kink in profile.kink_radii]
    origin = None
    if not profile.smooth_at_origin and not math.isinf(profile.value_at_origin):
        constant = touching_from_above(profile, 0.0, rf)
        origin = {"passed": True, "C2": constant.C2}

    passed = max_dominative <= tol and all(kink["passed"] for kink in kinks)
    if max_dominative > tol:
        logger.info(f"{profile} fails at r={witness:g}: dominative {max_dominative:.3e}")
    return RadialEquivalenceReport(
        passed=passed,
        tolerance=tol,
        max_dominative=max_dominative,
        witness_radius=witness if max_dominative > tol else None,
        checked=checked,
        kinks=kinks,
        origin=origin,
    )


@dataclass(frozen=True)
class SublinearityCheck:
    combined: float
    smooth_part: float
    touching_part: float
    tolerance: float

    @property
    def holds(self) -> bool:
        return self.combined <= self.smooth_part + self.touching_part + self.tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "combined": self.combined,
            "smooth_part": self.smooth_part,
            "touching_part": self.touching_part,
            "holds": self.holds,
        }


def sublinearity_surrogate(
    profile: RadialProfile,
    center,
    v: ScalarField,
    x0,
    rf: RadialFundamental,
    tol: float = DEFAULT_TOLERANCE,
) -> SublinearityCheck:
    """Replaces the radial term by the fundamental solution touching it from above at x0.

    Any test function touching U(|x - center|) + v from below at x0 has a Hessian dominated by
    that of h + v, so D_p[h + v](x0) <= D_p v(x0) + D_p h(x0) = D_p v(x0) bounds it.
    """
    center = as_point(center, rf.n)
    x0 = as_point(x0, rf.n)
    radius = float(np.linalg.norm(x0 - center))
    touching = touching_from_above(profile, radius, rf)
    touching = CylFundamental(k=touching.k, Q=touching.Q, x0=center, C1=touching.C1, C2=touching.C2)
    h_jet = eval_jet(CylFundamentalField(cf=touching, p=rf.p), x0)
    v_jet = eval_jet(v, x0)
    return SublinearityCheck(
        combined=dominative(v_jet + h_jet, rf.p),
        smooth_part=dominative(v_jet, rf.p),
        touching_part=dominative(h_jet, rf.p),
        tolerance=tol,
    )


@dataclass
class RadialSuperpositionReport(SuperpositionReport):
    profile_reports: list[dict[str, Any]] = field(default_factory=list)
    kink_checks: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return super().to_dict() | {"profile_reports": self.profile_reports, "kink_checks": self.kink_checks}


def _kink_point_check(
    profiles: Sequence[tuple[RadialProfile, Point]],
    K: ScalarField,
    x: Point,
    rf: RadialFundamental,
    exclusion_radius: float,
    tol: float,
) -> dict[str, Any] | None:
    near = [
        index
        for index, (profile, center) in enumerate(profiles)
        if profile.kink_distance(float(np.linalg.norm(x - center))) < exclusion_radius
    ]
    if len(near) != 1:
        return None
    index = near[0]
    profile, center = profiles[index]
    rest = [(1.0, RadialProfileField(other, c)) for j, (other, c) in enumerate(profiles) if j != index]
    v = WeightedSum(terms=[*rest, (1.0, K)])
    try:
        check = sublinearity_surrogate(profile, center, v, x, rf, tol=tol)
    except (SingularityError, PoleError, ProfileNotSuperharmonicError) as err:
        return {"point": x.tolist(), "profile": index, "passed": False, "reason": str(err)}
    return {"point": x.tolist(), "profile": index, "passed": check.holds and check.combined <= tol} | check.to_dict()


def verify_theorem2(
    profiles: Sequence[tuple[RadialProfile, Any]],
    K: ScalarField,
    p: PValue,
    samples: Iterable,
    tol: float = DEFAULT_TOLERANCE,
    exclusion_radius: float = DEFAULT_EXCLUSION_RADIUS,
    mapper: Mapper = map,
) -> RadialSuperpositionReport:
    """Checks sum_i U_i(|x - y_i|) + K(x) at every sample that is smooth for all terms.

    Profiles are certified first, K must be concave at the samples. Samples close to a kink of
    exactly one profile are checked through the touching fundamental solution instead.
    """
    p = PValue.parse(p)
    n = K.dimension
    rf = RadialFundamental(n=n, p=p)
    profiles = [(profile, as_point(center, n)) for profile, center in profiles]
    points = [as_point(x, n) for x in samples]

    violations = []
    profile_reports = []
    for index, (profile, center) in enumerate(profiles):
        distances = {float(np.linalg.norm(x - center)) for x in points}
        radii = sorted(r for r in distances if r >= exclusion_radius)
        try:
            report = verify_radial_equivalence(profile, rf, radii, tol=tol)
        except InvalidProfileError as err:
            violations.append({"profile": index, "reason": err.reason})
            profile_reports.append({"profile": index, "passed": False, "reason": err.reason})
            continue
        profile_reports.append({"profile": index} | report.to_dict())
        if not report.passed:
            violations.append(
                {"profile": index, "radius": report.witness_radius, "dominative": report.max_dominative}
            )

    for x in points:
        try:
            concave = is_locally_concave(eval_jet(K, x))
        except SingularityError:
            continue
        if not concave:
            violations.append({"concave_part": str(K), "point": x.tolist()})
            break

    combined = WeightedSum(terms=[*((1.0, RadialProfileField(U, y)) for U, y in profiles), (1.0, K)])
    evaluate = _evaluate_sum(combined, [], p, exclusion_radius=exclusion_radius, check_terms=False)
    outcomes = list(mapper(evaluate, points))
    base = reduce_samples(outcomes, tolerance=tol)

    kink_checks = []
    for outcome in outcomes:
        if outcome["skipped"]:
            check = _kink_point_check(profiles, K, outcome["point"], rf, exclusion_radius, tol)
            if check is not None:
                kink_checks.append(check)

    passed = base.passed and not violations and all(check["passed"] for check in kink_checks)
    return RadialSuperpositionReport(
        passed=passed,
        tolerance=tol,
        max_p_laplace=base.max_p_laplace,
        max_dominative=base.max_dominative,
        worst_point=base.worst_point,
        checked=base.checked,
        skipped=base.skipped,
        skipped_points=base.skipped_points,
        precondition_violations=violations,
        profile_reports=profile_reports,
        kink_checks=kink_checks,
    )


def chord_table(profile: RadialProfile, radii: Iterable[float], rf: RadialFundamental) -> list[dict[str, Any]]:
    """Rows b, C_b_minus, C_b_plus, touch_C1, touch_ok; radii where U is infinite are marked as poles.

    At b = 0 only the constant touching function exists, so the chord limits stay empty.
    """
    rows = []
    for b in radii:
        b = float(b)
        try:
            if b == 0:
                touching = touching_from_above(profile, b, rf)
                rows.append({"b": b, "C_b_minus": None, "C_b_plus": None, "touch_C1": touching.C1, "touch_ok": True})
                continue
            left, right = one_sided_chord_limits(profile, b, rf)
            touching = touching_from_above(profile, b, rf)
        except PoleError:
            rows.append({"b": b, "C_b_minus": None, "C_b_plus": None, "touch_C1": None, "touch_ok": "pole"})
            continue
        except ProfileNotSuperharmonicError as err:
            logger.warning(f"Touching failed at b={b:g}: {err.reason}")
            rows.append({"b": b, "C_b_minus": None, "C_b_plus": None, "touch_C1": None, "touch_ok": False})
            continue
        rows.append({"b": b, "C_b_minus": left, "C_b_plus": right, "touch_C1": touching.C1, "touch_ok": True})
    return rows


def derivative_quotient(profile: RadialProfile, b: float, rf: RadialFundamental, j: int) -> tuple[float, float]:
    """(U(a) - U(b)) / (a - b) at a = b (1 - 2^-j), paired with its limit candidate W'(b)."""
    a = b * (1.0 - 2.0**-j)
    return profile.difference(a, b) / (a - b), W_prime(rf, b)
