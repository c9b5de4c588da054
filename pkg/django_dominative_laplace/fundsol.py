"""Fundamental solutions w_{n,p}, their radial profile W and cylindrical fundamental solutions."""

import math
from dataclasses import dataclass, field

import numpy as np

from django_dominative_laplace.exceptions import DimensionError, DomainError, FieldConstructionError, SingularityError
from django_dominative_laplace.jets import Jet2, PValue
from django_dominative_laplace.linalg import MAX_DIMENSION, is_orthonormal, largest_eig, rayleigh

CRITICAL_GAP = 1e-12
EIGENVECTOR_TOLERANCE = 1e-8


@dataclass(frozen=True)
class RadialFundamental:
    n: int
    p: PValue

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIMENSION:
            raise DimensionError(expected=f"1 <= n <= {MAX_DIMENSION}", received=self.n)
        object.__setattr__(self, "p", PValue.parse(self.p))

    @property
    def is_linear(self) -> bool:
        return self.p.is_infinite or self.n == 1

    @property
    def is_logarithmic(self) -> bool:
        return not self.is_linear and abs(self.p.p - self.n) < CRITICAL_GAP

    @property
    def exponent(self) -> float:
        return (self.p.p - self.n) / (self.p.p - 1)

    @property
    def coefficient(self) -> float:
        return -(self.p.p - 1) / (self.p.p - self.n)

    @property
    def hessian_factor(self) -> float:
        # (n+p-2)/(p-1), read as 1 at p = inf
        if self.p.is_infinite:
            return 1.0
        return (self.n + self.p.p - 2) / (self.p.p - 1)

    @property
    def value_at_origin(self) -> float:
        if self.is_linear or self.p.p > self.n:
            return 0.0
        return math.inf

    def __str__(self) -> str:
        return f"w_{{{self.n},{self.p}}}"


def _check_radius(r: float) -> None:
    if not r > 0:
        raise DomainError(f"Radius must be positive, got {r}.")


def W(rf: RadialFundamental, r: float) -> float:
    _check_radius(r)
    if rf.is_linear:
        return -r
    if rf.is_logarithmic:
        return -math.log(r)
    return rf.coefficient * r**rf.exponent


def W_prime(rf: RadialFundamental, r: float) -> float:
    _check_radius(r)
    if rf.is_linear:
        return -1.0
    return -(r ** ((1 - rf.n) / (rf.p.p - 1)))


def W_second(rf: RadialFundamental, r: float) -> float:
    _check_radius(r)
    if rf.is_linear:
        return 0.0
    p = rf.p.p
    return -(1 - rf.n) / (p - 1) * r ** ((2 - p - rf.n) / (p - 1))


def radial_derivatives(rf: RadialFundamental, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """W' and W'' at an array of radii."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("Radii must be positive.")
    if rf.is_linear:
        return -np.ones_like(r), np.zeros_like(r)
    p = rf.p.p
    first = -np.power(r, (1 - rf.n) / (p - 1))
    second = -(1 - rf.n) / (p - 1) * np.power(r, (2 - p - rf.n) / (p - 1))
    return first, second


def W_difference(rf: RadialFundamental, a: float, b: float) -> float:
    """W(a) - W(b) without cancellation when a and b are close."""
    _check_radius(a)
    _check_radius(b)
    if rf.is_linear:
        return -(a - b)
    ratio_log = math.log1p((a - b) / b)
    if rf.is_logarithmic:
        return -ratio_log
    return rf.coefficient * b**rf.exponent * math.expm1(rf.exponent * ratio_log)


def W_inverse(rf: RadialFundamental, value: float) -> float | None:
    """Radius where W takes ``value``, or None when W never does on (0, inf)."""
    if rf.is_linear:
        return -value if value < 0 else None
    if rf.is_logarithmic:
        return math.exp(-value)
    base = value / rf.coefficient
    if base <= 0:
        return None
    return base ** (1.0 / rf.exponent)


def fundamental_hessian(rf: RadialFundamental, x: np.ndarray) -> np.ndarray:
    """Closed-form Hessian of w_{n,p} at x != 0."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise SingularityError(term=str(rf), point=x.tolist())
    unit = x / r
    return -(W_prime(rf, r) / r) * (rf.hessian_factor * np.outer(unit, unit) - np.eye(x.shape[0]))


def cylindrical_jet(value: float, u_prime: float, u_second: float, y: np.ndarray, r: float, axes: np.ndarray) -> Jet2:
    unit = y / r
    k = y.shape[0]
    projector = np.outer(unit, unit)
    inner = u_second * projector + (u_prime / r) * (np.eye(k) - projector)
    return Jet2(value=value, gradient=u_prime * (axes @ unit), hessian=axes @ inner @ axes.T)


@dataclass(frozen=True)
class CylFundamental:
    """C_1 w_{k,p}(Q^T(x - x_0)) + C_2 with Q an n x k matrix of orthonormal columns."""

    k: int
    Q: np.ndarray
    x0: np.ndarray
    C1: float = 1.0
    C2: float = 0.0
    label: str = field(default="cyl-fundamental", compare=False)

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        x0 = np.asarray(self.x0, dtype=float)
        if Q.shape != (x0.shape[0], self.k):
            raise DimensionError(expected=(x0.shape[0], self.k), received=Q.shape)
        if not 1 <= self.k <= x0.shape[0]:
            raise DimensionError(expected=f"1 <= k <= {x0.shape[0]}", received=self.k)
        if not is_orthonormal(Q):
            raise FieldConstructionError("Axes of a cylindrical fundamental solution must be orthonormal.")
        if self.C1 < 0:
            raise FieldConstructionError(f"C1 must be nonnegative, got {self.C1}.")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "C1", float(self.C1))
        object.__setattr__(self, "C2", float(self.C2))

    @property
    def n(self) -> int:
        return self.x0.shape[0]

    def axis_distance(self, x: np.ndarray) -> float:
        if self.C1 == 0.0:
            return math.inf
        return float(np.linalg.norm(self.Q.T @ (np.asarray(x, dtype=float) - self.x0)))

    def profile(self, p: PValue) -> RadialFundamental:
        return RadialFundamental(n=self.k, p=p)

    def value(self, x: np.ndarray, p: PValue) -> float:
        if self.C1 == 0.0:
            return self.C2
        r = self.axis_distance(x)
        if r == 0.0:
            raise SingularityError(term=self.label, point=np.asarray(x).tolist())
        return self.C1 * W(self.profile(p), r) + self.C2


def cyl_jet(cf: CylFundamental, x: np.ndarray, p: PValue) -> Jet2:
    x = np.asarray(x, dtype=float)
    if x.shape != cf.x0.shape:
        raise DimensionError(expected=cf.x0.shape, received=x.shape)
    if cf.C1 == 0.0:
        return Jet2(value=cf.C2, gradient=np.zeros(cf.n), hessian=np.zeros((cf.n, cf.n)))

    y = cf.Q.T @ (x - cf.x0)
    r = float(np.linalg.norm(y))
    if r == 0.0:
        raise SingularityError(term=cf.label, point=x.tolist())

    rf = cf.profile(p)
    return cylindrical_jet(
        value=cf.C1 * W(rf, r) + cf.C2,
        u_prime=cf.C1 * W_prime(rf, r),
        u_second=cf.C1 * W_second(rf, r),
        y=y,
        r=r,
        axes=cf.Q,
    )


def gradient_is_top_eigenvector_of_jet(jet: Jet2, tol: float = EIGENVECTOR_TOLERANCE) -> bool:
    gradient = jet.gradient
    gradient_norm = jet.gradient_norm
    if gradient_norm == 0.0:
        raise DomainError("The gradient vanishes; it is not an eigenvector.")
    hessian = jet.hessian
    top, _ = largest_eig(hessian)
    residual = float(np.linalg.norm(hessian @ gradient - top * gradient))
    scale = (1.0 + float(np.linalg.norm(hessian))) * gradient_norm
    return residual <= tol * scale and abs(rayleigh(hessian, gradient) - top) <= tol


def gradient_is_top_eigenvector(cf: CylFundamental, x: np.ndarray, p: PValue) -> bool:
    return gradient_is_top_eigenvector_of_jet(cyl_jet(cf, x, p))
