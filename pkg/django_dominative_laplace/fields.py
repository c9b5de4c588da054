"""Analytic scalar fields with exact second-order jets.

Every field evaluates its value, gradient and Hessian in closed form. Singular sets
(poles of fundamental terms, axes of cylindrical terms, kink spheres of piecewise profiles)
are declared through ``singular_distance`` so samplers can stay away from them, and
evaluating a jet on one raises ``SingularityError`` naming the offending term.
"""

import abc
import logging
import math
from typing import Any, ClassVar, Iterable

try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

import numpy as np

from django_dominative_laplace.exceptions import DimensionError, DomainError, FieldConstructionError, SingularityError
from django_dominative_laplace.fundsol import CylFundamental, cyl_jet, cylindrical_jet
from django_dominative_laplace.jets import Jet2, PValue
from django_dominative_laplace.linalg import as_symmetric, is_orthonormal
from django_dominative_laplace.profiles import RadialProfile, profile_from_dict

logger = logging.getLogger(__name__)

FIELD_KINDS: dict[str, type["ScalarField"]] = {}

SINGULAR_TOLERANCE = 1e-12
ISOMETRY_TOLERANCE = 1e-12
DEFAULT_FD_SCALE = 1e-4

Point = np.ndarray


def as_point(x, n: int | None = None) -> Point:
    point = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and point.shape[0] != n:
        raise DimensionError(expected=n, received=point.shape[0])
    if not np.all(np.isfinite(point)):
        raise DomainError(f"Point {point.tolist()} has non-finite coordinates.")
    return point


class Isometry:
    """x -> Q^T (x - x0) with Q orthogonal."""

    def __init__(self, Q, x0=None):
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        n = self.Q.shape[0]
        if self.Q.shape != (n, n):
            raise DimensionError(expected="square orthogonal matrix", received=self.Q.shape)
        if float(np.linalg.norm(self.Q.T @ self.Q - np.eye(n))) > ISOMETRY_TOLERANCE:
            raise FieldConstructionError("Isometry matrix is not orthogonal.")
        self.x0 = np.zeros(n) if x0 is None else as_point(x0, n)

    @classmethod
    def identity(cls, n: int) -> Self:
        return cls(Q=np.eye(n))

    @classmethod
    def translation(cls, offset) -> Self:
        offset = as_point(offset)
        return cls(Q=np.eye(offset.shape[0]), x0=offset)

    @property
    def dimension(self) -> int:
        return self.Q.shape[0]

    def apply(self, x: Point) -> Point:
        return self.Q.T @ (x - self.x0)

    __call__ = apply

    def is_involution(self, tol: float = ISOMETRY_TOLERANCE) -> bool:
        n = self.dimension
        square = self.Q.T @ self.Q.T
        shift = (self.Q.T + np.eye(n)) @ self.x0
        return (
            float(np.linalg.norm(square - np.eye(n))) <= tol
            and float(np.linalg.norm(shift)) <= tol * (1.0 + float(np.linalg.norm(self.x0)))
        )

    def to_dict(self) -> dict[str, Any]:
        return {"Q": self.Q.tolist(), "x0": self.x0.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        return cls(Q=data["Q"], x0=data.get("x0"))


class ScalarField(abc.ABC):
    kind: ClassVar[str] = ""

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.kind:
            FIELD_KINDS[cls.kind] = cls

    @property
    @abc.abstractmethod
    def dimension(self) -> int:
        raise NotImplementedError()

    @abc.abstractmethod
    def value(self, x: Point) -> float:
        raise NotImplementedError()

    @abc.abstractmethod
    def jet(self, x: Point) -> Jet2:
        raise NotImplementedError()

    @abc.abstractmethod
    def parameters(self) -> dict[str, Any]:
        raise NotImplementedError()

    @classmethod
    @abc.abstractmethod
    def from_parameters(cls, params: dict[str, Any]) -> Self:
        raise NotImplementedError()

    def singular_distance(self, x: Point) -> float:
        return math.inf

    def singular_term(self, x: Point, tol: float = SINGULAR_TOLERANCE) -> str | None:
        return str(self) if self.singular_distance(x) <= tol else None

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **self.parameters()}

    def __str__(self) -> str:
        return self.kind

    def __add__(self, other: "ScalarField") -> "WeightedSum":
        return WeightedSum(terms=[(1.0, self), (1.0, other)])


class Quadratic(ScalarField):
    """x^T A x / 2 + b^T x + c."""

    kind = "quadratic"

    def __init__(self, A, b=None, c: float = 0.0):
        self.A = as_symmetric(A)
        n = self.A.shape[0]
        self.b = np.zeros(n) if b is None else as_point(b, n)
        self.c = float(c)

    @property
    def dimension(self) -> int:
        return self.A.shape[0]

    def value(self, x: Point) -> float:
        return float(0.5 * x @ self.A @ x + self.b @ x + self.c)

    def jet(self, x: Point) -> Jet2:
        return Jet2(value=self.value(x), gradient=self.A @ x + self.b, hessian=self.A)

    def parameters(self) -> dict[str, Any]:
        return {"A": self.A.tolist(), "b": self.b.tolist(), "c": self.c}

    @classmethod
    def from_parameters(cls, params: dict[str, Any]) -> Self:
        return cls(A=params["A"], b=params.get("b"), c=params.get("c", 0.0))


class Affine(ScalarField):
    kind = "affine"

    def __init__(self, a, b: float = 0.0):
        self.a = as_point(a)
        self.b = float(b)

    @property
    def dimension(self) -> int:
        return self.a.shape[0]

    def value(self, x: Point) -> float:
        return float(self.a @ x + self.b)

    def jet(self, x: Point) -> Jet2:
        n = self.dimension
        return Jet2(value=self.value(x), gradient=self.a, hessian=np.zeros((n, n)))

    def parameters(self) -> dict[str, Any]:
        return {"a": self.a.tolist(), "b": self.b}

    @classmethod
    def from_parameters(cls, params: dict[str, Any]) -> Self:
        return cls(a=params["a"], b=params.get("b", 0.0))


class RadialProfileField(ScalarField):
    """U(|axes^T (x - center)|); without axes this is the radial function U(|x - center|)."""

    kind = "radial-profile"

    def __init__(self, profile: RadialProfile, center, axes=None):
        self.profile = profile
        self.center = as_point(center)
        n = self.center.shape[0]
        if axes is None:
            self.axes = np.eye(n)
        else:
            self.axes = np.atleast_2d(np.asarray(axes, dtype=float))
            if self.axes.shape[0] != n or not 1 <= self.axes.shape[1] <= n:
                raise DimensionError(expected=(n, "k <= n"), received=self.axes.shape)
            if not is_orthonormal(self.axes):
                raise FieldConstructionError("Profile axes must be orthonormal.")

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def _reduce(self, x: Point) -> tuple[np.ndarray, float]:
        y = self.axes.T @ (x - self.center)
        return y, float(np.linalg.norm(y))

    def value(self, x: Point) -> float:
        _, r = self._reduce(x)
        value = self.profile.value(r)
        if math.isinf(value):
            raise SingularityError(term=str(self), point=x.tolist())
        return value

    def jet(self, x: Point) -> Jet2:
        y, r = self._reduce(x)
        if self.profile.kink_distance(r) <= SINGULAR_TOLERANCE:
            raise SingularityError(term=str(self), point=x.tolist())
        if r == 0.0:
            curvature = self.profile.origin_curvature
            return Jet2(
                value=self.profile.value_at_origin,
                gradient=np.zeros(self.dimension),
                hessian=curvature * (self.axes @ self.axes.T),
            )
        return cylindrical_jet(
            value=self.profile.value(r),
            u_prime=self.profile.derivative(r),
            u_second=self.profile.second_derivative(r),
            y=y,
            r=r,
            axes=self.axes,
        )

    def singular_distance(self, x: Point) -> float:
        _, r = self._reduce(x)
        return self.profile.kink_distance(r)

    def parameters(self) -> dict[str, Any]:
        params = {"profile": self.profile.to_dict(), "center": self.center.tolist()}
        if self.axes.shape[1] != self.dimension or not np.array_equal(self.axes, np.eye(self.dimension)):
            params["axes"] = self.axes.tolist()
        return params

    @classmethod
    def from_parameters(cls, params: dict[str, Any]) -> Self:
        profile = params["profile"]
        if not isinstance(profile, RadialProfile):
            profile = profile_from_dict(profile)
        return cls(profile=profile, center=params["center"], axes=params.get("axes"))

    def __str__(self) -> str:
        return f"{self.profile} centred at {self.center.tolist()}"


class CylFundamentalField(ScalarField):
    kind = "cyl-fundamental"

    def __init__(self, cf: CylFundamental, p: PValue | float | str):
        self.cf = cf
        self.p = PValue.parse(p)

    @classmethod
    def radial(cls, n: int, p: PValue | float | str, pole=None, weight: float = 1.0, shift: float = 0.0) -> Self:
        pole = np.zeros(n) if pole is None else as_point(pole, n)
        return cls(cf=CylFundamental(k=n, Q=np.eye(n), x0=pole, C1=weight, C2=shift), p=p)

    @property
    def dimension(self) -> int:
        return self.cf.n

    def value(self, x: Point) -> float:
        return self.cf.value(x, self.p)

    def jet(self, x: Point) -> Jet2:
        return cyl_jet(self.cf, x, self.p)

    def singular_distance(self, x: Point) -> float:
        return self.cf.axis_distance(x)

    def parameters(self) -> dict[str, Any]:
        return {
            "k": self.cf.k,
            "Q": self.cf.Q.tolist(),
            "x0": self.cf.x0.tolist(),
            "C1": self.cf.C1,
            "C2": self.cf.C2,
            "p": self.p.to_json(),
        }

    @classmethod
    def from_parameters(cls, params: dict[str, Any]) -> Self:
        cf = CylFundamental(k=params["k"], Q=params["Q"], x0=params["x0"], C1=params["C1"], C2=params.get("C2", 0.0))
        return cls(cf=cf, p=params["p"])

    def __str__(self) -> str:
        return f"{self.cf.C1:g} w_{{{self.cf.k},{self.p}}} about {self.cf.x0.tolist()}"


class Composed(ScalarField):
    """inner(T(x)) for an isometry T."""

    kind = "composed"

    def __init__(self, inner: ScalarField, isometry: Isometry):
        if inner.dimension != isometry.dimension:
            raise DimensionError(expected=inner.dimension, received=isometry.dimension)
        self.inner = inner
        self.isometry = isometry

    @property
    def dimension(self) -> int:
        return self.inner.dimension

    def value(self, x: Point) -> float:
        return self.inner.value(self.isometry(x))

    def jet(self, x: Point) -> Jet2:
        inner = self.inner.jet(self.isometry(x))
        Q = self.isometry.Q
        return Jet2(value=inner.value, gradient=Q @ inner.gradient, hessian=Q @ inner.hessian @ Q.T)

    def singular_distance(self, x: Point) -> float:
        return self.inner.singular_distance(self.isometry(x))

    def singular_term(self, x: Point, tol: float = SINGULAR_TOLERANCE) -> str | None:
        return self.inner.singular_term(self.isometry(x), tol=tol)

    def parameters(self) -> dict[str, Any]:
        return {"inner": self.inner.to_dict(), "isometry": self.isometry.to_dict()}

    @classmethod
    def from_parameters(cls, params: dict[str, Any]) -> Self:
        return cls(inner=_as_field(params["inner"]), isometry=_as_isometry(params["isometry"]))

    def __str__(self) -> str:
        return f"({self.inner}) composed with an isometry"


class Reflected(Composed):
    kind = "reflected"

    def __init__(self, inner: ScalarField, isometry: Isometry):
        if not isometry.is_involution():
            raise FieldConstructionError("A reflection must satisfy R(R(x)) = x.")
        super().__init__(inner=inner, isometry=isometry)

    def __str__(self) -> str:
        return f"({self.inner}) reflected"


class WeightedSum(ScalarField):
    kind = "weighted-sum"

    def __init__(self, terms: Iterable[tuple[float, ScalarField]]):
        self.terms = [(float(weight), field) for weight, field in terms]
        if not self.terms:
            raise FieldConstructionError("A weighted sum needs at least one term.")
        dimensions = {field.dimension for _, field in self.terms}
        if len(dimensions) != 1:
            raise DimensionError(expected="terms of equal dimension", received=sorted(dimensions))

    @property
    def dimension(self) -> int:
        return self.terms[0][1].dimension

    def _active(self):
        return [(weight, field) for weight, field in self.terms if weight != 0.0]

    def value(self, x: Point) -> float:
        return float(sum(weight * field.value(x) for weight, field in self._active()))

    def jet(self, x: Point) -> Jet2:
        total = Jet2.zero(self.dimension)
        for weight, field in self._active():
            total = total + field.jet(x).scale(weight)
        return total

    def singular_distance(self, x: Point) -> float:
        return min((field.singular_distance(x) for _, field in self._active()), default=math.inf)

    def singular_term(self, x: Point, tol: float = SINGULAR_TOLERANCE) -> str | None:
        for _, field in self._active():
            if term := field.singular_term(x, tol=tol):
                return term
        return None

    def parameters(self) -> dict[str, Any]:
        return {"terms": [{"weight": weight, "field": field.to_dict()} for weight, field in self.terms]}

    @classmethod
    def from_parameters(cls, params: dict[str, Any]) -> Self:
        return cls(terms=[(term["weight"], _as_field(term["field"])) for term in params["terms"]])

    def __str__(self) -> str:
        return " + ".join(f"{weight:g}*[{field}]" for weight, field in self.terms)


def _as_field(data: "ScalarField | dict[str, Any]") -> ScalarField:
    return data if isinstance(data, ScalarField) else field_from_dict(data)


def _as_isometry(data: "Isometry | dict[str, Any]") -> Isometry:
    return data if isinstance(data, Isometry) else Isometry.from_dict(data)


def field_from_dict(data: dict[str, Any]) -> ScalarField:
    params = dict(data)
    kind = params.pop("kind", None)
    try:
        field_class = FIELD_KINDS[kind]
    except KeyError as err:
        raise DomainError(f"Unknown field kind {kind!r}.") from err
    return field_class.from_parameters(params)


def eval_jet(field: ScalarField, x) -> Jet2:
    x = as_point(x, field.dimension)
    if term := field.singular_term(x):
        raise SingularityError(term=term, point=x.tolist())
    return field.jet(x)


def default_fd_step(x: Point, scale: float = DEFAULT_FD_SCALE) -> float:
    return scale * (1.0 + float(np.linalg.norm(x)))


def fd_jet(field: ScalarField, x, h: float | None = None) -> Jet2:
    """Central-difference jet, used as an independent oracle for ``eval_jet``."""
    x = as_point(x, field.dimension)
    h = default_fd_step(x) if h is None else float(h)
    if h <= 0:
        raise DomainError(f"Step must be positive, got {h}.")
    # the diagonal stencil points reach sqrt(2) h away from x
    if term := field.singular_term(x, tol=2.0 * h):
        raise SingularityError(term=term, point=x.tolist())

    n = field.dimension
    steps = np.eye(n) * h
    center = field.value(x)
    forward = [field.value(x + steps[i]) for i in range(n)]
    backward = [field.value(x - steps[i]) for i in range(n)]

    gradient = np.array([(forward[i] - backward[i]) / (2.0 * h) for i in range(n)])
    hessian = np.zeros((n, n))
    for i in range(n):
        hessian[i, i] = (forward[i] - 2.0 * center + backward[i]) / h**2
        for j in range(i + 1, n):
            mixed = (
                field.value(x + steps[i] + steps[j])
                - field.value(x + steps[i] - steps[j])
                - field.value(x - steps[i] + steps[j])
                + field.value(x - steps[i] - steps[j])
            ) / (4.0 * h**2)
            hessian[i, j] = hessian[j, i] = mixed
    return Jet2(value=center, gradient=gradient, hessian=hessian)


def compose_isometry(field: ScalarField, isometry: Isometry) -> Composed:
    return Composed(inner=field, isometry=isometry)


def reflection_about_line(y) -> Isometry:
    """R = 2 y y^T - I, the reflection that fixes the line spanned by the unit vector y."""
    y = as_point(y)
    if abs(float(np.linalg.norm(y)) - 1.0) > ISOMETRY_TOLERANCE:
        raise DomainError(f"Reflection axis must be a unit vector, |y| = {np.linalg.norm(y)!r}.")
    return Isometry(Q=2.0 * np.outer(y, y) - np.eye(y.shape[0]))


def translated(field: ScalarField, x0) -> Composed:
    """x -> field(x + x0), which moves x0 to the origin."""
    return Composed(inner=field, isometry=Isometry.translation(-as_point(x0, field.dimension)))


def reflected_through(field: ScalarField, x0, direction) -> Reflected:
    """x -> field(x0 + R(x - x0)) with R the reflection about the line x0 + t * direction."""
    R = reflection_about_line(direction).Q
    x0 = as_point(x0, field.dimension)
    return Reflected(inner=field, isometry=Isometry(Q=R, x0=x0 - R @ x0))
