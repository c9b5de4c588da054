"""p-Laplace, infinity-Laplace, dominative and submissive operators evaluated on jets."""

import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from django_dominative_laplace.exceptions import CriticalPointError, DimensionError, DomainError
from django_dominative_laplace.jets import INFINITY, Jet2, PValue
from django_dominative_laplace.linalg import jacobi_eigen, jacobi_eigenvalues, largest_eig, rayleigh

NESTING_GRID = (2.0, 2.5, 3.0, 4.0, 10.0, 100.0, math.inf)

__all__ = (
    "INFINITY",
    "OperatorReport",
    "PValue",
    "alpha",
    "dominative",
    "dominative_2d",
    "dominative_batch",
    "dominative_eigen_form",
    "dominative_profile",
    "inf_laplacian",
    "is_locally_concave",
    "matrix_symbol_Fp",
    "normalized_p_laplacian",
    "operator_report",
    "p_laplacian",
    "p_laplacian_batch",
    "radial_plaplace_profile",
    "submissive",
    "symbol_over_grid",
)


def alpha(p: PValue) -> float:
    return p.alpha


def inf_laplacian(jet: Jet2) -> float:
    return float(jet.gradient @ jet.hessian @ jet.gradient)


def p_laplacian(jet: Jet2, p: PValue) -> float:
    p = PValue.parse(p)
    if p.is_infinite:
        return inf_laplacian(jet)
    if p.p == 2:
        return jet.trace
    gradient_norm2 = float(jet.gradient @ jet.gradient)
    if gradient_norm2 == 0.0:
        return 0.0
    normalized = (p.p - 2) * inf_laplacian(jet) / gradient_norm2 + jet.trace
    return gradient_norm2 ** ((p.p - 2) / 2) * normalized


def normalized_p_laplacian(jet: Jet2, p: PValue) -> float:
    p = PValue.parse(p)
    if jet.gradient_norm == 0.0:
        raise CriticalPointError(operator=f"normalized {p}-Laplacian")
    quotient = rayleigh(jet.hessian, jet.gradient)
    if p.is_infinite:
        return quotient
    return (p.p - 2) * quotient + jet.trace


def matrix_symbol_Fp(X: np.ndarray, p: PValue) -> float:
    p = PValue.parse(p)
    top, _ = largest_eig(X)
    if p.is_infinite:
        return top
    return (p.p - 2) * top + float(np.trace(X))


def dominative(jet: Jet2, p: PValue) -> float:
    return matrix_symbol_Fp(jet.hessian, p)


def dominative_batch(hessians: np.ndarray, p: PValue) -> np.ndarray:
    """D_p over a stack of Hessians, shape (m, n, n) -> (m,)."""
    p = PValue.parse(p)
    hessians = np.asarray(hessians, dtype=float)
    top = jacobi_eigenvalues(hessians)[:, -1]
    if p.is_infinite:
        return top
    return (p.p - 2) * top + np.trace(hessians, axis1=1, axis2=2)


def p_laplacian_batch(gradients: np.ndarray, hessians: np.ndarray, p: PValue) -> np.ndarray:
    """Delta_p over stacks of gradients (m, n) and Hessians (m, n, n)."""
    p = PValue.parse(p)
    gradients = np.asarray(gradients, dtype=float)
    hessians = np.asarray(hessians, dtype=float)
    ghg = np.einsum("mi,mij,mj->m", gradients, hessians, gradients)
    if p.is_infinite:
        return ghg
    trace = np.trace(hessians, axis1=1, axis2=2)
    if p.p == 2:
        return trace
    g2 = np.einsum("mi,mi->m", gradients, gradients)
    critical = g2 == 0.0
    safe = np.where(critical, 1.0, g2)
    values = safe ** ((p.p - 2) / 2) * ((p.p - 2) * ghg / safe + trace)
    return np.where(critical, 0.0, values)


def dominative_eigen_form(jet: Jet2, p: PValue) -> float:
    """lambda_1 + ... + lambda_{n-1} + (p - 1) lambda_n."""
    p = PValue.parse(p)
    eigenvalues = jacobi_eigen(jet.hessian).eigenvalues
    if p.is_infinite:
        return float(eigenvalues[-1])
    return float(np.sum(eigenvalues[:-1]) + (p.p - 1) * eigenvalues[-1])


def dominative_2d(jet: Jet2, p: PValue) -> float:
    p = PValue.parse(p)
    if jet.dimension != 2:
        raise DimensionError(expected=2, received=jet.dimension)
    (uxx, uxy), (_, uyy) = jet.hessian
    root = math.hypot(uxx - uyy, 2.0 * uxy)
    if p.is_infinite:
        return 0.5 * (uxx + uyy) + 0.5 * root
    return p.p / 2 * (uxx + uyy) + (p.p - 2) / 2 * root


def submissive(jet: Jet2, p: PValue) -> float:
    p = PValue.parse(p)
    bottom = jacobi_eigen(jet.hessian).smallest
    if p.is_infinite:
        return bottom
    return (p.p - 2) * bottom + jet.trace


def is_locally_concave(jet: Jet2, tol: float = 1e-12) -> bool:
    """The C^2 concavity test: the infinity-dominative operator is nonpositive."""
    return dominative(jet, INFINITY) <= tol


def symbol_over_grid(X: np.ndarray, grid: Iterable[float] = NESTING_GRID) -> list[tuple[PValue, float]]:
    spectrum = jacobi_eigen(X)
    top, trace = spectrum.largest, float(np.sum(spectrum.eigenvalues))
    values = []
    for q in grid:
        q = PValue.parse(q)
        values.append((q, top if q.is_infinite else (q.p - 2) * top + trace))
    return values


def _check_radius(r: float) -> None:
    if not r > 0:
        raise DomainError(f"Radius must be positive, got {r}.")


def dominative_profile(u_prime: float, u_second: float, r: float, k: int, n: int, p: PValue) -> float:
    """Dominative operator of the cylindrical function U(|Q^T(x - x0)|) at distance r from its axis.

    The Hessian eigenvalues are U'' once, U'/r with multiplicity k - 1 and 0 with multiplicity n - k.
    """
    _check_radius(r)
    if not 1 <= k <= n:
        raise DimensionError(expected=f"1 <= k <= {n}", received=k)
    p = PValue.parse(p)
    candidates = [u_second]
    if k > 1:
        candidates.append(u_prime / r)
    if k < n:
        candidates.append(0.0)
    top = max(candidates)
    if p.is_infinite:
        return top
    return (p.p - 2) * top + u_second + (k - 1) * u_prime / r


def radial_plaplace_profile(u_prime: float, u_second: float, r: float, k: int, p: PValue) -> float:
    """Normalized p-Laplacian of a k-dimensional radial profile: (p-1)U'' + (k-1)U'/r."""
    _check_radius(r)
    p = PValue.parse(p)
    if p.is_infinite:
        return u_second
    return (p.p - 1) * u_second + (k - 1) * u_prime / r


@dataclass(frozen=True)
class OperatorReport:
    p_laplace: float | None
    inf_laplace: float
    normalized_p: float | None
    dominative: float
    submissive: float
    lambda_max: float
    trace: float

    def to_dict(self) -> dict:
        return asdict(self)


def operator_report(jet: Jet2, p: PValue) -> OperatorReport:
    p = PValue.parse(p)
    spectrum = jacobi_eigen(jet.hessian)
    top, bottom, trace = spectrum.largest, spectrum.smallest, jet.trace
    try:
        normalized = normalized_p_laplacian(jet, p)
    except CriticalPointError:
        normalized = None
    if p.is_infinite:
        dominative_value, submissive_value = top, bottom
    else:
        dominative_value = (p.p - 2) * top + trace
        submissive_value = (p.p - 2) * bottom + trace
    return OperatorReport(
        p_laplace=p_laplacian(jet, p) if jet.is_finite() else None,
        inf_laplace=inf_laplacian(jet),
        normalized_p=normalized,
        dominative=dominative_value,
        submissive=submissive_value,
        lambda_max=top,
        trace=trace,
    )
