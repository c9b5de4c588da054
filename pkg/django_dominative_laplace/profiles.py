"""Radial profiles U(r) of radial functions u(x) = U(|x - y|) and their self-checks."""

import abc
import math
from typing import Any, ClassVar

import numpy as np

from django_dominative_laplace.exceptions import DomainError, InvalidProfileError, SingularityError
from django_dominative_laplace.fundsol import RadialFundamental, W, W_difference, W_inverse, W_prime, W_second
from django_dominative_laplace.jets import PValue

PROFILE_KINDS: dict[str, type["RadialProfile"]] = {}

MONOTONE_SLACK = 1e-12
KINK_OFFSET = 1e-9


class RadialProfile(abc.ABC):
    kind: ClassVar[str] = ""

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.kind:
            PROFILE_KINDS[cls.kind] = cls

    @abc.abstractmethod
    def _value(self, r: float) -> float:
        raise NotImplementedError()

    @abc.abstractmethod
    def _derivative(self, r: float) -> float:
        raise NotImplementedError()

    @abc.abstractmethod
    def _second_derivative(self, r: float) -> float:
        raise NotImplementedError()

    @property
    @abc.abstractmethod
    def value_at_origin(self) -> float:
        raise NotImplementedError()

    @abc.abstractmethod
    def parameters(self) -> dict[str, Any]:
        raise NotImplementedError()

    @property
    def kink_radii(self) -> tuple[float, ...]:
        return ()

    @property
    def smooth_at_origin(self) -> bool:
        return False

    @property
    def origin_curvature(self) -> float:
        """U''(0) for profiles that are C^2 through the origin."""
        raise SingularityError(term=str(self), point="origin")

    def value(self, r: float) -> float:
        if r < 0:
            raise DomainError(f"Radius must be nonnegative, got {r}.")
        if r == 0:
            return self.value_at_origin
        return self._value(r)

    def derivative(self, r: float) -> float:
        self._check_smooth(r)
        return self._derivative(r)

    def second_derivative(self, r: float) -> float:
        self._check_smooth(r)
        return self._second_derivative(r)

    def difference(self, a: float, b: float) -> float:
        return self.value(a) - self.value(b)

    def kink_distance(self, r: float) -> float:
        distances = [abs(r - kink) for kink in self.kink_radii]
        if not self.smooth_at_origin:
            distances.append(r)
        return min(distances, default=math.inf)

    def _check_smooth(self, r: float) -> None:
        if r <= 0:
            raise SingularityError(term=str(self), point=f"radius {r}")
        for kink in self.kink_radii:
            if abs(r - kink) <= KINK_OFFSET * kink * 1e-3:
                raise SingularityError(term=str(self), point=f"kink radius {kink}")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **self.parameters(), "kink_radii": list(self.kink_radii)}

    def __str__(self) -> str:
        params = ", ".join(f"{key}={value}" for key, value in self.parameters().items())
        return f"{self.kind}({params})"

    def __eq__(self, other) -> bool:
        return isinstance(other, RadialProfile) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(str(self))


class FundamentalProfile(RadialProfile):
    """scale * W_{n,p}(r) + shift."""

    kind = "fundamental"

    def __init__(self, n: int, p: PValue | float | str, scale: float = 1.0, shift: float = 0.0):
        self.rf = RadialFundamental(n=n, p=PValue.parse(p))
        self.scale = float(scale)
        self.shift = float(shift)

    @property
    def value_at_origin(self) -> float:
        if self.scale == 0.0:
            return self.shift
        origin = self.rf.value_at_origin
        return math.copysign(math.inf, self.scale) if math.isinf(origin) else self.scale * origin + self.shift

    @property
    def smooth_at_origin(self) -> bool:
        return self.scale == 0.0

    @property
    def origin_curvature(self) -> float:
        if self.scale == 0.0:
            return 0.0
        return super().origin_curvature

    def _value(self, r: float) -> float:
        return self.scale * W(self.rf, r) + self.shift

    def _derivative(self, r: float) -> float:
        return self.scale * W_prime(self.rf, r)

    def _second_derivative(self, r: float) -> float:
        return self.scale * W_second(self.rf, r)

    def difference(self, a: float, b: float) -> float:
        return self.scale * W_difference(self.rf, a, b)

    def parameters(self) -> dict[str, Any]:
        return {"n": self.rf.n, "p": self.rf.p.to_json(), "scale": self.scale, "shift": self.shift}


class TruncatedFundamentalProfile(RadialProfile):
    """min{W_{n,p}(r), level}."""

    kind = "truncated-fundamental"

    def __init__(self, n: int, p: PValue | float | str, level: float):
        self.rf = RadialFundamental(n=n, p=PValue.parse(p))
        self.level = float(level)
        self.kink = W_inverse(self.rf, self.level)

    @property
    def kink_radii(self) -> tuple[float, ...]:
        return () if self.kink is None else (self.kink,)

    def _truncated(self, r: float) -> bool:
        if self.kink is not None:
            return r < self.kink
        return W(self.rf, 1.0) > self.level

    @property
    def value_at_origin(self) -> float:
        return min(self.rf.value_at_origin, self.level)

    @property
    def smooth_at_origin(self) -> bool:
        return self.kink is not None or self._truncated(1.0)

    @property
    def origin_curvature(self) -> float:
        if self.smooth_at_origin:
            return 0.0
        return super().origin_curvature

    def _value(self, r: float) -> float:
        return min(W(self.rf, r), self.level)

    def _derivative(self, r: float) -> float:
        return 0.0 if self._truncated(r) else W_prime(self.rf, r)

    def _second_derivative(self, r: float) -> float:
        return 0.0 if self._truncated(r) else W_second(self.rf, r)

    def difference(self, a: float, b: float) -> float:
        truncated_a, truncated_b = self._truncated(a), self._truncated(b)
        if truncated_a and truncated_b:
            return 0.0
        if not truncated_a and not truncated_b:
            return W_difference(self.rf, a, b)
        return super().difference(a, b)

    def parameters(self) -> dict[str, Any]:
        return {"n": self.rf.n, "p": self.rf.p.to_json(), "level": self.level}


class MinPairProfile(RadialProfile):
    """min{W(r), scale * W(r) + shift} with scale >= 0."""

    kind = "min-pair"

    def __init__(self, n: int, p: PValue | float | str, scale: float, shift: float):
        self.rf = RadialFundamental(n=n, p=PValue.parse(p))
        self.scale = float(scale)
        self.shift = float(shift)
        if self.scale == 1.0:
            self.kink = None
        else:
            self.kink = W_inverse(self.rf, self.shift / (1.0 - self.scale))

    @property
    def kink_radii(self) -> tuple[float, ...]:
        return () if self.kink is None else (self.kink,)

    def _branch_scale(self, r: float) -> float:
        # Coefficient of W on the branch that realises the minimum at r
        w = W(self.rf, r)
        return 1.0 if w <= self.scale * w + self.shift else self.scale

    def _near_origin_scale(self) -> float:
        radius = min((*self.kink_radii, 1.0)) * 1e-6
        return self._branch_scale(radius)

    @property
    def value_at_origin(self) -> float:
        origin = self.rf.value_at_origin
        if math.isinf(origin):
            return self.shift if self.scale == 0.0 else math.inf
        return min(origin, self.scale * origin + self.shift)

    @property
    def smooth_at_origin(self) -> bool:
        return self._near_origin_scale() == 0.0

    @property
    def origin_curvature(self) -> float:
        if self.smooth_at_origin:
            return 0.0
        return super().origin_curvature

    def _value(self, r: float) -> float:
        w = W(self.rf, r)
        return min(w, self.scale * w + self.shift)

    def _derivative(self, r: float) -> float:
        return self._branch_scale(r) * W_prime(self.rf, r)

    def _second_derivative(self, r: float) -> float:
        return self._branch_scale(r) * W_second(self.rf, r)

    def difference(self, a: float, b: float) -> float:
        scale_a, scale_b = self._branch_scale(a), self._branch_scale(b)
        if scale_a == scale_b:
            return scale_a * W_difference(self.rf, a, b)
        return super().difference(a, b)

    def parameters(self) -> dict[str, Any]:
        return {"n": self.rf.n, "p": self.rf.p.to_json(), "scale": self.scale, "shift": self.shift}


class PolynomialProfile(RadialProfile):
    """sum_i coefficients[i] * r**i, e.g. the concave decreasing -r**2 - r."""

    kind = "concave-poly"

    def __init__(self, coefficients: list[float]):
        if not coefficients:
            raise DomainError("A polynomial profile needs at least one coefficient.")
        self.coefficients = [float(c) for c in coefficients]
        self.polynomial = np.polynomial.Polynomial(self.coefficients)
        self.first = self.polynomial.deriv(1)
        self.second = self.polynomial.deriv(2)

    @property
    def value_at_origin(self) -> float:
        return self.coefficients[0]

    @property
    def smooth_at_origin(self) -> bool:
        return len(self.coefficients) < 2 or self.coefficients[1] == 0.0

    @property
    def origin_curvature(self) -> float:
        if self.smooth_at_origin:
            return float(self.second(0.0))
        return super().origin_curvature

    def _value(self, r: float) -> float:
        return float(self.polynomial(r))

    def _derivative(self, r: float) -> float:
        return float(self.first(r))

    def _second_derivative(self, r: float) -> float:
        return float(self.second(r))

    def difference(self, a: float, b: float) -> float:
        # a**i - b**i = (a - b) * sum_j a**j * b**(i-1-j)
        total = 0.0
        for power, coefficient in enumerate(self.coefficients[1:], start=1):
            total += coefficient * sum(a**j * b ** (power - 1 - j) for j in range(power))
        return (a - b) * total

    def parameters(self) -> dict[str, Any]:
        return {"coefficients": self.coefficients}


class ConstantProfile(RadialProfile):
    kind = "constant"

    def __init__(self, value: float):
        self.constant = float(value)

    @property
    def value_at_origin(self) -> float:
        return self.constant

    @property
    def smooth_at_origin(self) -> bool:
        return True

    @property
    def origin_curvature(self) -> float:
        return 0.0

    def _value(self, r: float) -> float:
        return self.constant

    def _derivative(self, r: float) -> float:
        return 0.0

    def _second_derivative(self, r: float) -> float:
        return 0.0

    def difference(self, a: float, b: float) -> float:
        return 0.0

    def parameters(self) -> dict[str, Any]:
        return {"value": self.constant}


class LogarithmicProfile(RadialProfile):
    """-scale * ln(1 + r); p-superharmonic only when p <= n."""

    kind = "logarithmic"

    def __init__(self, scale: float = 1.0):
        self.scale = float(scale)

    @property
    def value_at_origin(self) -> float:
        return 0.0

    def _value(self, r: float) -> float:
        return -self.scale * math.log1p(r)

    def _derivative(self, r: float) -> float:
        return -self.scale / (1.0 + r)

    def _second_derivative(self, r: float) -> float:
        return self.scale / (1.0 + r) ** 2

    def difference(self, a: float, b: float) -> float:
        return -self.scale * math.log1p((a - b) / (1.0 + b))

    def parameters(self) -> dict[str, Any]:
        return {"scale": self.scale}


def profile_from_dict(data: dict[str, Any]) -> RadialProfile:
    params = dict(data)
    kind = params.pop("kind", None)
    params.pop("kink_radii", None)
    try:
        profile_class = PROFILE_KINDS[kind]
    except KeyError as err:
        raise DomainError(f"Unknown profile kind {kind!r}.") from err
    return profile_class(**params)


def validation_radii(profile: RadialProfile, count: int = 200) -> np.ndarray:
    radii = list(np.geomspace(1e-3, 1e3, count))
    for kink in profile.kink_radii:
        radii.extend(kink * factor for factor in (0.5, 0.9, 1 - 1e-6, 1.0, 1 + 1e-6, 1.1, 2.0))
    return np.unique(np.asarray(radii))


def validate_profile(profile: RadialProfile, radii: np.ndarray | None = None) -> None:
    """Rejects profiles that are not decreasing, not lower semicontinuous or unbounded on compact intervals."""
    radii = validation_radii(profile) if radii is None else np.unique(np.asarray(radii, dtype=float))
    radii = radii[radii > 0]

    values = np.array([profile.value(float(r)) for r in radii])
    if not np.all(np.isfinite(values)):
        bad = float(radii[~np.isfinite(values)][0])
        raise InvalidProfileError(profile=profile, reason=f"unbounded at r={bad:g}")

    for a, b in zip(radii[:-1], radii[1:]):
        if profile.difference(float(a), float(b)) < -MONOTONE_SLACK:
            raise InvalidProfileError(profile=profile, reason=f"increasing between r={a:g} and r={b:g}")

    for kink in profile.kink_radii:
        at_kink = profile.value(kink)
        # a decreasing profile is lower semicontinuous iff it is right-continuous;
        # the right limit is extrapolated from two radii just past the kink
        right_limit = 2.0 * profile.value(kink * (1 + KINK_OFFSET)) - profile.value(kink * (1 + 2 * KINK_OFFSET))
        if at_kink > right_limit + 1e-7 * (1.0 + abs(at_kink)):
            raise InvalidProfileError(profile=profile, reason=f"not lower semicontinuous at kink r={kink:g}")

    origin = profile.value_at_origin
    near, nearer = profile.value(1e-6), profile.value(1e-12)
    if math.isinf(origin):
        if origin < 0 or nearer <= near:
            raise InvalidProfileError(profile=profile, reason="pole at the origin is not +inf")
    elif origin > nearer + 1e-3 * (1.0 + abs(origin)):
        raise InvalidProfileError(profile=profile, reason="not lower semicontinuous at the origin")
