"""Crandall-Zhang sums and the three constructions that refute superposition for non-dominative u."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from django_dominative_laplace.exceptions import (
    DimensionError,
    DomainError,
    FieldConstructionError,
    NeedsLargerScale,
    NeedsSmallerStep,
    PreconditionError,
    SingularityError,
)
from django_dominative_laplace.fields import (
    Affine,
    CylFundamentalField,
    Point,
    ScalarField,
    WeightedSum,
    as_point,
    eval_jet,
    reflected_through,
    reflection_about_line,
    translated,
)
from django_dominative_laplace.fundsol import RadialFundamental, W_prime, radial_derivatives
from django_dominative_laplace.jets import PValue
from django_dominative_laplace.linalg import largest_eig
from django_dominative_laplace.operators import (
    dominative,
    dominative_batch,
    normalized_p_laplacian,
    p_laplacian,
    p_laplacian_batch,
)

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9
DEFAULT_EXCLUSION_RADIUS = 1e-3
SEARCH_START = 8.0
SEARCH_CAP = float(2**40)
SCAN_EPS = 1e-2
SCAN_STEPS = 64
SCAN_DECADES = 12
RESIDUAL_TRACE_POWERS = 20
AXIS_TOLERANCE = 1e-12

Mapper = Callable[[Callable, Iterable], Iterable]


@dataclass
class CrandallSum:
    """sum_i c_i w_{n,p}(x - y_i), optionally plus a concave field."""

    n: int
    p: PValue
    terms: list[tuple[float, Point]]
    concave_part: ScalarField | None = None

    def __post_init__(self):
        self.p = PValue.parse(self.p)
        self.terms = [(float(weight), as_point(pole, self.n)) for weight, pole in self.terms]
        for weight, _ in self.terms:
            if weight < 0:
                raise FieldConstructionError(f"Crandall-Zhang weights must be nonnegative, got {weight}.")
        poles = self.poles
        for i in range(len(poles)):
            for j in range(i + 1, len(poles)):
                if np.array_equal(poles[i], poles[j]):
                    raise FieldConstructionError(f"Poles {i} and {j} coincide at {poles[i].tolist()}.")
        if self.concave_part is not None and self.concave_part.dimension != self.n:
            raise DimensionError(expected=self.n, received=self.concave_part.dimension)

    @property
    def poles(self) -> list[Point]:
        return [pole for _, pole in self.terms]

    @property
    def field(self) -> ScalarField:
        parts = [(1.0, CylFundamentalField.radial(n=self.n, p=self.p, pole=pole, weight=c)) for c, pole in self.terms]
        if self.concave_part is not None:
            parts.append((1.0, self.concave_part))
        return WeightedSum(terms=parts)

    def pole_distance(self, x: Point) -> float:
        return min((float(np.linalg.norm(x - pole)) for pole in self.poles), default=math.inf)


def crandall_sum_jet(s: CrandallSum, x, exclusion_radius: float = DEFAULT_EXCLUSION_RADIUS):
    x = as_point(x, s.n)
    for index, pole in enumerate(s.poles):
        if float(np.linalg.norm(x - pole)) < exclusion_radius:
            raise SingularityError(term=f"pole {index} at {pole.tolist()}", point=x.tolist())
    return eval_jet(s.field, x)


@dataclass
class SuperpositionReport:
    passed: bool
    tolerance: float
    max_p_laplace: float
    max_dominative: float
    worst_point: list[float] | None
    checked: int
    skipped: int
    skipped_points: list[list[float]] = field(default_factory=list)
    precondition_violations: list[dict[str, Any]] = field(default_factory=list)

    @property
    def precondition_ok(self) -> bool:
        return not self.precondition_violations

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "max_p_laplace": self.max_p_laplace,
            "max_dominative": self.max_dominative,
            "worst_point": self.worst_point,
            "checked": self.checked,
            "skipped": self.skipped,
            "skipped_points": self.skipped_points,
            "precondition_violations": self.precondition_violations,
        }


def _evaluate_sum(
    combined: ScalarField,
    fields: Sequence[ScalarField],
    p: PValue,
    exclusion_radius: float,
    check_terms: bool,
) -> Callable[[Point], dict[str, Any]]:
    def evaluate(x: Point) -> dict[str, Any]:
        if combined.singular_distance(x) < exclusion_radius:
            return {"point": x, "skipped": True, "reason": combined.singular_term(x, tol=exclusion_radius)}
        try:
            jet = eval_jet(combined, x)
            term_values = [dominative(eval_jet(f, x), p) for f in fields] if check_terms else []
        except SingularityError as err:
            return {"point": x, "skipped": True, "reason": err.term}
        return {
            "point": x,
            "skipped": False,
            "p_laplace": p_laplacian(jet, p),
            "dominative": dominative(jet, p),
            "terms": term_values,
        }

    return evaluate


def reduce_samples(
    outcomes: Iterable[dict[str, Any]],
    tolerance: float,
    precondition_tolerance: float | None = None,
) -> SuperpositionReport:
    """Ordered, single-threaded reduction of per-point outcomes."""
    max_p_laplace = -math.inf
    max_dominative = -math.inf
    worst_point = None
    checked = 0
    skipped_points = []
    violations = []
    for outcome in outcomes:
        point = outcome["point"]
        if outcome["skipped"]:
            logger.warning(f"Skipping sample {point.tolist()}: singular term {outcome['reason']}")
            skipped_points.append(point.tolist())
            continue
        checked += 1
        for index, value in enumerate(outcome["terms"]):
            if precondition_tolerance is not None and value > precondition_tolerance:
                violations.append({"field": index, "point": point.tolist(), "dominative": value})
        max_p_laplace = max(max_p_laplace, outcome["p_laplace"])
        if outcome["dominative"] > max_dominative:
            max_dominative = outcome["dominative"]
            worst_point = point.tolist()

    passed = not violations and checked > 0 and max_p_laplace <= tolerance and max_dominative <= tolerance
    return SuperpositionReport(
        passed=passed,
        tolerance=tolerance,
        max_p_laplace=max_p_laplace,
        max_dominative=max_dominative,
        worst_point=worst_point,
        checked=checked,
        skipped=len(skipped_points),
        skipped_points=skipped_points,
        precondition_violations=violations,
    )


def verify_theorem1_i(
    fields: Sequence[ScalarField],
    sample: Iterable,
    p: PValue,
    tol: float = DEFAULT_TOLERANCE,
    exclusion_radius: float = 0.0,
    mapper: Mapper = map,
) -> SuperpositionReport:
    """Checks that the sum of dominative p-superharmonic fields is p-superharmonic at the samples.

    Each summand is first certified (dominative <= tol) at every sample; violations are listed
    in the report and fail it.
    """
    p = PValue.parse(p)
    combined = WeightedSum(terms=[(1.0, f) for f in fields])
    points = [as_point(x, combined.dimension) for x in sample]
    evaluate = _evaluate_sum(combined, fields, p, exclusion_radius=exclusion_radius, check_terms=True)
    report = reduce_samples(mapper(evaluate, points), tolerance=tol, precondition_tolerance=tol)
    if report.precondition_violations:
        first = report.precondition_violations[0]
        logger.info(
            f"{len(report.precondition_violations)} precondition violations; "
            f"field {first['field']} has dominative {first['dominative']:.3e} at {first['point']}"
        )
    return report


def _radial_term_jets(
    rf: RadialFundamental, weight: float, pole: Point, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients (m, n) and Hessians (m, n, n) of weight * w_{n,p}(x - pole) at points off the pole."""
    offsets = points - pole
    r = np.linalg.norm(offsets, axis=1)
    first, second = radial_derivatives(rf, r)
    units = offsets / r[:, None]
    projectors = np.einsum("mi,mj->mij", units, units)
    identity = np.eye(points.shape[1])[None, :, :]
    gradients = (weight * first)[:, None] * units
    hessians = (weight * second)[:, None, None] * projectors + (weight * first / r)[:, None, None] * (
        identity - projectors
    )
    return gradients, hessians


def verify_crandall_sum(
    s: CrandallSum,
    sample: Iterable,
    tol: float = DEFAULT_TOLERANCE,
    exclusion_radius: float = 0.0,
) -> SuperpositionReport:
    """``verify_theorem1_i`` for a Crandall-Zhang sum, with every sample evaluated in one array pass."""
    if not s.terms and s.concave_part is None:
        raise FieldConstructionError("A Crandall-Zhang sum needs at least one term.")
    points = np.array([as_point(x, s.n) for x in sample], dtype=float).reshape(-1, s.n)
    rf = RadialFundamental(n=s.n, p=s.p)
    reasons: list[str | None] = [None] * points.shape[0]
    for index, (weight, pole) in enumerate(s.terms):
        if weight == 0.0:
            continue
        distances = np.linalg.norm(points - pole, axis=1)
        for row in np.flatnonzero((distances < exclusion_radius) | (distances == 0.0)):
            if reasons[row] is None:
                reasons[row] = f"pole {index} at {pole.tolist()}"
    regular = np.array([reason is None for reason in reasons], dtype=bool)
    kept = points[regular]

    m = kept.shape[0]
    gradient = np.zeros((m, s.n))
    hessian = np.zeros((m, s.n, s.n))
    term_hessians = []
    for weight, pole in s.terms:
        if weight == 0.0:
            term_hessians.append(np.zeros((m, s.n, s.n)))
            continue
        term_gradient, term_hessian = _radial_term_jets(rf, weight, pole, kept)
        gradient += term_gradient
        hessian += term_hessian
        term_hessians.append(term_hessian)
    if s.concave_part is not None:
        jets = [eval_jet(s.concave_part, x) for x in kept]
        concave_gradient = np.array([jet.gradient for jet in jets]).reshape(m, s.n)
        concave_hessian = np.array([jet.hessian for jet in jets]).reshape(m, s.n, s.n)
        gradient += concave_gradient
        hessian += concave_hessian
        term_hessians.append(concave_hessian)

    if m:
        p_laplace = p_laplacian_batch(gradient, hessian, s.p)
        sum_dominative = dominative_batch(hessian, s.p)
        term_dominative = dominative_batch(np.concatenate(term_hessians), s.p).reshape(len(term_hessians), m)
    else:
        p_laplace = sum_dominative = np.zeros(0)
        term_dominative = np.zeros((len(term_hessians), 0))

    outcomes = []
    cursor = 0
    for row, point in enumerate(points):
        if not regular[row]:
            outcomes.append({"point": point, "skipped": True, "reason": reasons[row]})
            continue
        outcomes.append(
            {
                "point": point,
                "skipped": False,
                "p_laplace": float(p_laplace[cursor]),
                "dominative": float(sum_dominative[cursor]),
                "terms": term_dominative[:, cursor].tolist(),
            }
        )
        cursor += 1

    report = reduce_samples(outcomes, tolerance=tol, precondition_tolerance=tol)
    if report.precondition_violations:
        first = report.precondition_violations[0]
        logger.info(
            f"{len(report.precondition_violations)} precondition violations; "
            f"field {first['field']} has dominative {first['dominative']:.3e} at {first['point']}"
        )
    return report


@dataclass
class Counterexample:
    kind: str
    base_point: Point
    perturbation: ScalarField
    witness_value: float
    witness_point: Point
    recomputed_value: float
    combined: ScalarField
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "base_point": self.base_point.tolist(),
            "perturbation": self.perturbation.to_dict(),
            "witness_value": self.witness_value,
            "witness_point": self.witness_point.tolist(),
            "recomputed_value": self.recomputed_value,
            "details": self.details,
        }


def _require_dominative(u: ScalarField, x0: Point, p: PValue) -> tuple[float, float, np.ndarray, Any]:
    jet = eval_jet(u, x0)
    value = dominative(jet, p)
    if value <= 0:
        raise PreconditionError(value=value, where=x0.tolist())
    top, direction = largest_eig(jet.hessian)
    return value, top, direction, jet


def counterexample_linear(u: ScalarField, x0, p: PValue) -> Counterexample:
    """Adds a^T x with a = xi_u - grad u(x0); the perturbed gradient at x0 is the unit vector xi_u."""
    p = PValue.parse(p)
    x0 = as_point(x0, u.dimension)
    value, top, direction, jet = _require_dominative(u, x0, p)

    a = direction - jet.gradient
    perturbation = Affine(a=a, b=0.0)
    combined = WeightedSum(terms=[(1.0, u), (1.0, perturbation)])
    recomputed = p_laplacian(eval_jet(combined, x0), p)
    return Counterexample(
        kind="linear",
        base_point=x0,
        perturbation=perturbation,
        witness_value=value,
        witness_point=x0,
        recomputed_value=recomputed,
        combined=combined,
        details={"a": a.tolist(), "xi": direction.tolist(), "lambda_max": top, "dominative": value},
    )


def fundsol_residual(q: np.ndarray, direction: np.ndarray, s: float, rf: RadialFundamental) -> float | None:
    """rho(s); None when the far pole would land on the base point."""
    z = q - s * direction
    norm2 = float(z @ z)
    if norm2 == 0.0:
        return None
    excess = float(z @ direction) ** 2 / norm2 - 1.0
    if rf.p.is_infinite:
        return excess
    return (rf.p.p - 2) * rf.hessian_factor * excess


def counterexample_fundsol(
    u: ScalarField,
    x0,
    p: PValue,
    s: float | None = None,
    search_start: float = SEARCH_START,
    search_cap: float = SEARCH_CAP,
) -> Counterexample:
    """Adds c_s w_{n,p}(x - y_s) with a pole far away along -xi_u.

    The added term cancels the gradient of u down to s * xi_u, so the normalized p-Laplacian of
    the sum at x0 is D_p u(x0) + rho(s) with rho(s) -> 0 as s grows. Without ``s`` the scale
    doubles from ``search_start`` until the witness is positive.
    """
    p = PValue.parse(p)
    x0 = as_point(x0, u.dimension)
    n = u.dimension
    rf = RadialFundamental(n=n, p=p)
    value, top, direction, jet = _require_dominative(u, x0, p)
    q = jet.gradient

    search_trace = []
    if s is None:
        s = search_start
        while True:
            residual = fundsol_residual(q, direction, s, rf)
            search_trace.append({"s": s, "residual": residual})
            if residual is not None and value + residual > 0:
                break
            s *= 2
            if s > search_cap:
                raise NeedsLargerScale(s=s, witness=value + (residual or 0.0))
    else:
        residual = fundsol_residual(q, direction, s, rf)
        if residual is None or value + residual <= 0:
            raise NeedsLargerScale(s=s, witness=value + (residual or 0.0))

    z = q - s * direction
    distance = float(np.linalg.norm(z))
    pole = x0 - z
    weight = -distance / W_prime(rf, distance)
    perturbation = CylFundamentalField.radial(n=n, p=p, pole=pole, weight=weight)
    combined = WeightedSum(terms=[(1.0, u), (1.0, perturbation)])

    sum_jet = eval_jet(combined, x0)
    witness = value + residual
    residual_trace = [
        {"s": 2.0**j, "residual": fundsol_residual(q, direction, 2.0**j, rf)} for j in range(RESIDUAL_TRACE_POWERS + 1)
    ]
    return Counterexample(
        kind="fundsol",
        base_point=x0,
        perturbation=perturbation,
        witness_value=witness,
        witness_point=x0,
        recomputed_value=normalized_p_laplacian(sum_jet, p),
        combined=combined,
        details={
            "s": s,
            "c_s": weight,
            "pole": pole.tolist(),
            "z_s": z.tolist(),
            "xi": direction.tolist(),
            "residual": residual,
            "dominative": value,
            "p_laplace": s**p.alpha * witness,
            "recomputed_p_laplace": p_laplacian(sum_jet, p),
            "gradient_cancellation": float(np.linalg.norm(sum_jet.gradient - s * direction)),
            "scale_identity": weight * W_prime(rf, distance) + distance,
            "search_trace": search_trace,
            "residual_trace": residual_trace,
        },
    )


def counterexample_reflection(
    u: ScalarField,
    x0,
    p: PValue,
    eps: float = SCAN_EPS,
    steps: int = SCAN_STEPS,
) -> Counterexample:
    """Adds u composed with the reflection about the line x0 + t xi_u.

    On that line the gradient of the sum points along xi_u and its Hessian doubles the top
    eigenvalue, so the p-Laplacian is 2 (2|grad u . xi|)^alpha_p times a positive bracket. When
    grad u(x0) . xi vanishes the line is scanned for t in (0, eps].
    """
    if not (math.isfinite(eps) and eps > 0):
        raise DomainError(f"Scan length must be positive, got {eps}.")
    p = PValue.parse(p)
    x0 = as_point(x0, u.dimension)
    shifted = translated(u, x0)
    origin = np.zeros(u.dimension)
    value, top, direction, jet = _require_dominative(shifted, origin, p)

    reflection = reflection_about_line(direction)
    perturbation = reflected_through(u, x0, direction)
    combined = WeightedSum(terms=[(1.0, u), (1.0, perturbation)])

    along_axis = float(jet.gradient @ direction)
    details = {"xi": direction.tolist(), "R": reflection.Q.tolist(), "dominative": value, "lambda_max": top}
    if abs(along_axis) > AXIS_TOLERANCE * (1.0 + jet.gradient_norm):
        t = 0.0
        witness = 2.0 ** (p.alpha + 1) * abs(along_axis) ** p.alpha * value
        details.update({"branch": "direct", "t": t, "gradient_along_axis": along_axis})
    else:
        for t in np.geomspace(eps, eps * 10.0**-SCAN_DECADES, steps):
            t = float(t)
            try:
                local = eval_jet(shifted, t * direction)
            except SingularityError:
                continue
            along_axis = float(local.gradient @ direction)
            if abs(along_axis) <= AXIS_TOLERANCE * (1.0 + local.gradient_norm):
                continue
            curvature = float(direction @ local.hessian @ direction)
            bracket = curvature if p.is_infinite else (p.p - 2) * curvature + local.trace
            if bracket > 0:
                witness = 2.0 * (2.0 * abs(along_axis)) ** p.alpha * bracket
                details.update({"branch": "scan", "t": t, "gradient_along_axis": along_axis, "bracket": bracket})
                break
        else:
            raise NeedsSmallerStep(eps=eps, steps=steps)

    witness_point = x0 + details["t"] * direction
    sum_jet = eval_jet(combined, witness_point)
    gradient = sum_jet.gradient
    details["axis_gradient_residual"] = float(np.linalg.norm(gradient - (gradient @ direction) * direction))
    return Counterexample(
        kind="reflection",
        base_point=x0,
        perturbation=perturbation,
        witness_value=witness,
        witness_point=witness_point,
        recomputed_value=p_laplacian(sum_jet, p),
        combined=combined,
        details=details,
    )


COUNTEREXAMPLES = {
    "linear": counterexample_linear,
    "fundsol": counterexample_fundsol,
    "reflection": counterexample_reflection,
}
