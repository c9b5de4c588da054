import math

import numpy as np

from django_dominative_laplace.fields import (
    Affine,
    CylFundamentalField,
    Quadratic,
    RadialProfileField,
    ScalarField,
    eval_jet,
    fd_jet,
    reflected_through,
)
from django_dominative_laplace.jets import Jet2, PValue
from django_dominative_laplace.linalg import jacobi_eigen
from django_dominative_laplace.operators import NESTING_GRID, dominative, dominative_2d, dominative_eigen_form
from django_dominative_laplace.profiles import PolynomialProfile
from django_dominative_laplace.reports import SuiteResult
from django_dominative_laplace.sampling import random_symmetric, random_unit, sample_away_from
from django_dominative_laplace.suites.suite import Suite

FD_TOLERANCE = 1e-4
MIN_SINGULAR_DISTANCE = 0.25
BOX = 2.0
MAX_LISTED = 10


class OracleSuite(Suite):
    """Closed-form jets against central differences, and eigenvalues against independent references."""

    tolerance_name = "algebraic_tolerance"

    def _fields(self, n: int, p: PValue) -> list[ScalarField]:
        quadratic = Quadratic(A=random_symmetric(self.rng, n), b=self.rng.standard_normal(n), c=1.0)
        return [
            quadratic,
            Affine(a=self.rng.standard_normal(n), b=0.5),
            CylFundamentalField.radial(n=n, p=p, pole=self.rng.uniform(-1.0, 1.0, size=n)),
            RadialProfileField(PolynomialProfile(coefficients=[0.0, 0.0, -1.0, 0.0, 0.25]), center=np.zeros(n)),
            reflected_through(quadratic, self.rng.uniform(-1.0, 1.0, size=n), random_unit(self.rng, n)),
        ]

    def _jet_problems(self) -> tuple[int, list[str]]:
        checked = 0
        problems = []
        for n in self.scenario.dimensions:
            for p in self.scenario.p_values:
                for field in self._fields(n, p):
                    lower, upper = -BOX * np.ones(n), BOX * np.ones(n)
                    count = max(1, self.points // 10)
                    for x in sample_away_from(self.rng, field, count, lower, upper, MIN_SINGULAR_DISTANCE):
                        exact, approximate = eval_jet(field, x), fd_jet(field, x)
                        checked += 1
                        scale = 1.0 + float(np.max(np.abs(exact.hessian))) + float(np.max(np.abs(exact.gradient)))
                        error = max(
                            float(np.max(np.abs(exact.gradient - approximate.gradient))),
                            float(np.max(np.abs(exact.hessian - approximate.hessian))),
                        )
                        if error > FD_TOLERANCE * scale:
                            problems.append(f"{field} at {x.tolist()}: finite differences differ by {error:.3e}")
        return checked, problems

    def _spectral_residual(self, X: np.ndarray) -> float:
        spectrum = jacobi_eigen(X)
        n = X.shape[0]
        scale = 1.0 + float(np.linalg.norm(X))
        # det(X - lambda I) vanishes at every eigenvalue
        characteristic = max(abs(float(np.linalg.det(X - value * np.eye(n)))) for value in spectrum.eigenvalues)
        reference = float(np.max(np.abs(spectrum.eigenvalues - np.linalg.eigvalsh(X))))
        return max(characteristic / scale**n, reference / scale)

    def _planar_residual(self, jet: Jet2, grid: list[PValue]) -> float:
        worst = -math.inf
        for p in grid:
            value = dominative(jet, p)
            scale = 1.0 + abs(value)
            worst = max(
                worst,
                abs(dominative_2d(jet, p) - value) / scale,
                abs(dominative_eigen_form(jet, p) - value) / scale,
            )
        return worst

    def run(self) -> SuiteResult:
        grid = [PValue.parse(q) for q in NESTING_GRID]
        matrices = [random_symmetric(self.rng, 3) for _ in range(self.points)]
        hessians = [random_symmetric(self.rng, 2) for _ in range(self.points)]
        planar = [Jet2(value=0.0, gradient=np.zeros(2), hessian=hessian) for hessian in hessians]
        checked, problems = self._jet_problems()

        spectral = self.map(self._spectral_residual, matrices)
        planar_residuals = self.map(lambda jet: self._planar_residual(jet, grid), planar)
        worst = max([*spectral, *planar_residuals], default=-math.inf)
        return self.result(
            passed=checked > 0 and not problems and worst <= self.tolerance,
            worst_residual=worst,
            checked=checked + len(matrices) + len(planar),
            details={
                "jets_checked": checked,
                "spectral": max(spectral, default=-math.inf),
                "planar": max(planar_residuals, default=-math.inf),
                "problems": problems[:MAX_LISTED],
                "problem_count": len(problems),
            },
        )
