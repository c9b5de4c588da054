"""Seeded sampling of points, matrices and frames.

Every generator is numpy's PCG64, so a seed reproduces the same draws on every platform.
"""

import zlib
from typing import Iterable

import numpy as np

from django_dominative_laplace.exceptions import DimensionError, DomainError
from django_dominative_laplace.fields import Point, ScalarField

GENERATOR_NAME = "numpy.random.PCG64"


def make_rng(seed: int | Iterable[int]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def suite_rng(seed: int, name: str) -> np.random.Generator:
    """Generator of one suite; independent of which other suites run and in which order."""
    return make_rng([int(seed), zlib.crc32(name.encode())])


def sample_box(rng: np.random.Generator, count: int, lower, upper) -> list[Point]:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape:
        raise DimensionError(expected=lower.shape, received=upper.shape)
    if np.any(upper <= lower):
        raise DomainError(f"Empty sampling box [{lower.tolist()}, {upper.tolist()}].")
    return list(rng.uniform(lower, upper, size=(count, lower.size)))


def sample_annulus(
    rng: np.random.Generator, count: int, n: int, inner: float, outer: float, center=None
) -> list[Point]:
    """Points with inner <= |x - center| <= outer; radii are log-uniform."""
    if not 0 < inner <= outer:
        raise DomainError(f"Annulus radii must satisfy 0 < inner <= outer, got {inner}, {outer}.")
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    directions = rng.standard_normal(size=(count, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = np.exp(rng.uniform(np.log(inner), np.log(outer), size=count))
    return list(center + radii[:, None] * directions)


def sample_away_from(
    rng: np.random.Generator,
    field: ScalarField,
    count: int,
    lower,
    upper,
    exclusion_radius: float,
    max_draws: int | None = None,
) -> list[Point]:
    """Draws from a box, rejecting points within exclusion_radius of a singular set of the field."""
    max_draws = max_draws or 100 * count
    points = []
    draws = 0
    while len(points) < count and draws < max_draws:
        for x in sample_box(rng, count, lower, upper):
            draws += 1
            if field.singular_distance(x) >= exclusion_radius:
                points.append(x)
                if len(points) == count:
                    break
    return points


def random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(scale=scale, size=(n, n))
    return 0.5 * (a + a.T)


def random_psd(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    m = rng.standard_normal(size=(n, rank or n))
    return m @ m.T


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs of R fixed."""
    q, r = np.linalg.qr(rng.standard_normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def random_orthonormal_columns(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    if not 1 <= k <= n:
        raise DimensionError(expected=f"1 <= k <= {n}", received=k)
    return random_orthogonal(rng, n)[:, :k]


def random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(size=n)
    return v / np.linalg.norm(v)
