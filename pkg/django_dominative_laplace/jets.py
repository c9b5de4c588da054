import math
from dataclasses import dataclass
try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

import numpy as np

from django_dominative_laplace.exceptions import DimensionError, DomainError

INFINITY_LABELS = ("inf", "infinity", "∞")


@dataclass(frozen=True)
class PValue:
    """Exponent of the operators; ``math.inf`` tags the infinity-Laplacian branch."""

    p: float

    def __post_init__(self):
        if math.isnan(self.p) or self.p < 2:
            raise DomainError(f"p must be at least 2 or 'inf', got {self.p}.")

    @classmethod
    def parse(cls, value: "PValue | float | int | str") -> Self:
        if isinstance(value, PValue):
            return value
        if isinstance(value, str):
            if value.strip().lower() in INFINITY_LABELS:
                return cls(p=math.inf)
            try:
                return cls(p=float(value))
            except ValueError as err:
                raise DomainError(f"Invalid p value {value!r}.") from err
        return cls(p=float(value))

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.p)

    @property
    def alpha(self) -> float:
        # |grad u| exponent in front of the normalized operator
        return 2.0 if self.is_infinite else self.p - 2.0

    def to_json(self) -> float | str:
        return "inf" if self.is_infinite else self.p

    def __str__(self) -> str:
        return "inf" if self.is_infinite else f"{self.p:g}"


INFINITY = PValue(p=math.inf)


@dataclass(frozen=True)
class Jet2:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    def __post_init__(self):
        gradient = np.asarray(self.gradient, dtype=float)
        hessian = np.asarray(self.hessian, dtype=float)
        n = gradient.shape[0]
        if hessian.shape != (n, n):
            raise DimensionError(expected=(n, n), received=hessian.shape)
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "gradient", gradient)
        object.__setattr__(self, "hessian", 0.5 * (hessian + hessian.T))

    @classmethod
    def zero(cls, n: int) -> Self:
        return cls(value=0.0, gradient=np.zeros(n), hessian=np.zeros((n, n)))

    @property
    def dimension(self) -> int:
        return self.gradient.shape[0]

    @property
    def gradient_norm(self) -> float:
        return float(np.linalg.norm(self.gradient))

    @property
    def trace(self) -> float:
        return float(np.trace(self.hessian))

    def is_finite(self) -> bool:
        arrays = (self.gradient, self.hessian)
        return bool(np.isfinite(self.value) and all(np.all(np.isfinite(array)) for array in arrays))

    def scale(self, factor: float) -> Self:
        return Jet2(value=factor * self.value, gradient=factor * self.gradient, hessian=factor * self.hessian)

    def __add__(self, other: "Jet2") -> "Jet2":
        if other.dimension != self.dimension:
            raise DimensionError(expected=self.dimension, received=other.dimension)
        return Jet2(
            value=self.value + other.value,
            gradient=self.gradient + other.gradient,
            hessian=self.hessian + other.hessian,
        )

    def __neg__(self) -> "Jet2":
        return self.scale(-1.0)
