"""Dense eigen-solver for the small symmetric matrices every operator in the package depends on."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from django_dominative_laplace.exceptions import DimensionError, DomainError, EigenSolverError

logger = logging.getLogger(__name__)

MAX_DIMENSION = 16
DEFAULT_TOLERANCE = 1e-12
DEFAULT_MAX_SWEEPS = 100


def as_symmetric(entries) -> np.ndarray:
    """Builds a symmetric matrix by mirroring the upper triangle of ``entries``."""
    matrix = np.array(entries, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(expected="square matrix", received=matrix.shape)
    n = matrix.shape[0]
    if not 1 <= n <= MAX_DIMENSION:
        raise DimensionError(expected=f"1 <= n <= {MAX_DIMENSION}", received=n)
    if not np.all(np.isfinite(matrix)):
        raise DomainError("Matrix entries must be finite.")
    upper = np.triu(matrix)
    return upper + np.triu(matrix, 1).T


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]
    sweeps: int = 0

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def top_vector(self) -> np.ndarray:
        return self.eigenvectors[:, -1]

    def residual(self, matrix: np.ndarray) -> float:
        return float(np.max(np.linalg.norm(matrix @ self.eigenvectors - self.eigenvectors * self.eigenvalues, axis=0)))


def off_diagonal_norm(matrix: np.ndarray) -> float:
    return float(np.sqrt(2.0) * np.linalg.norm(np.triu(matrix, 1)))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    app = a[p, p]
    aqq = a[q, q]
    tau = (aqq - app) / (2.0 * apq)
    if tau >= 0.0:
        t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    a[p, :] = a[:, p]
    a[q, :] = a[:, q]
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = 0.0
    a[q, p] = 0.0

    vec_p = v[:, p].copy()
    vec_q = v[:, q].copy()
    v[:, p] = c * vec_p - s * vec_q
    v[:, q] = s * vec_p + c * vec_q


def jacobi_eigen(
    matrix: np.ndarray,
    tol: float = DEFAULT_TOLERANCE,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> Spectrum:
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm is below ``tol``.

    The threshold is relative to ``max(1, ||A||_F)`` so that badly scaled Hessians near
    poles still converge; for matrices of unit size it is the absolute ``tol``.
    Eigenvalues come back ascending; tied eigenvectors are whatever the rotations produced.
    """
    if tol <= 0:
        raise DomainError(f"Tolerance must be positive, got {tol}.")
    a = as_symmetric(matrix)
    n = a.shape[0]
    v = np.eye(n)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))

    sweeps = 0
    off = off_diagonal_norm(a)
    while off > threshold:
        if sweeps >= max_sweeps:
            logger.error(f"Jacobi sweep budget exhausted for a {n}x{n} matrix ({off:.3e} > {threshold:.3e})")
            raise EigenSolverError(sweeps=sweeps, off_diagonal=off)
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _rotate(a, v, p, q)
        sweeps += 1
        off = off_diagonal_norm(a)

    eigenvalues = np.diag(a).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return Spectrum(eigenvalues=eigenvalues[order], eigenvectors=v[:, order], sweeps=sweeps)


def jacobi_eigenvalues(
    matrices: np.ndarray,
    tol: float = DEFAULT_TOLERANCE,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> np.ndarray:
    """Ascending eigenvalues of a stack of symmetric matrices, shape (m, n, n) -> (m, n).

    Same rotations and stopping rule as ``jacobi_eigen``, applied to the whole stack at once.
    """
    if tol <= 0:
        raise DomainError(f"Tolerance must be positive, got {tol}.")
    a = np.array(matrices, dtype=float)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(expected="stack of square matrices", received=a.shape)
    n = a.shape[1]
    if not 1 <= n <= MAX_DIMENSION:
        raise DimensionError(expected=f"1 <= n <= {MAX_DIMENSION}", received=n)
    if not np.all(np.isfinite(a)):
        raise DomainError("Matrix entries must be finite.")
    a = np.triu(a) + np.swapaxes(np.triu(a, 1), 1, 2)
    thresholds = tol * np.maximum(1.0, np.linalg.norm(a, axis=(1, 2)))

    sweeps = 0
    off = np.sqrt(2.0) * np.linalg.norm(np.triu(a, 1), axis=(1, 2))
    while np.any(off > thresholds):
        if sweeps >= max_sweeps:
            worst = float(np.max(off))
            logger.error(f"Jacobi sweep budget exhausted for a stack of {a.shape[0]} {n}x{n} matrices")
            raise EigenSolverError(sweeps=sweeps, off_diagonal=worst)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q].copy()
                active = apq != 0.0
                if not np.any(active):
                    continue
                app = a[:, p, p].copy()
                aqq = a[:, q, q].copy()
                with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                    tau = np.where(active, (aqq - app) / np.where(active, 2.0 * apq, 1.0), 0.0)
                    root = np.sqrt(1.0 + tau * tau)
                    t = np.where(tau >= 0.0, 1.0 / (tau + root), -1.0 / (-tau + root))
                t = np.where(active & np.isfinite(t), t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = a[:, :, p].copy()
                col_q = a[:, :, q].copy()
                a[:, :, p] = c[:, None] * col_p - s[:, None] * col_q
                a[:, :, q] = s[:, None] * col_p + c[:, None] * col_q
                a[:, p, :] = a[:, :, p]
                a[:, q, :] = a[:, :, q]
                a[:, p, p] = app - t * apq
                a[:, q, q] = aqq + t * apq
                a[:, p, q] = np.where(active, 0.0, apq)
                a[:, q, p] = a[:, p, q]
        sweeps += 1
        off = np.sqrt(2.0) * np.linalg.norm(np.triu(a, 1), axis=(1, 2))

    return np.sort(np.diagonal(a, axis1=1, axis2=2), axis=1)


def largest_eig(matrix: np.ndarray, tol: float = DEFAULT_TOLERANCE) -> tuple[float, np.ndarray]:
    spectrum = jacobi_eigen(matrix, tol=tol)
    return spectrum.largest, spectrum.top_vector


def smallest_eig(matrix: np.ndarray, tol: float = DEFAULT_TOLERANCE) -> tuple[float, np.ndarray]:
    spectrum = jacobi_eigen(matrix, tol=tol)
    return spectrum.smallest, spectrum.eigenvectors[:, 0]


def rayleigh(matrix: np.ndarray, z) -> float:
    z = np.asarray(z, dtype=float)
    norm2 = float(z @ z)
    if norm2 == 0.0:
        raise DomainError("Rayleigh quotient of the zero vector is undefined.")
    return float(z @ matrix @ z) / norm2


def is_orthonormal(columns: np.ndarray, tol: float = 1e-12) -> bool:
    k = columns.shape[1]
    return float(np.linalg.norm(columns.T @ columns - np.eye(k))) <= tol
