import math

import numpy as np

from django_dominative_laplace.fields import CylFundamentalField, eval_jet
from django_dominative_laplace.fundsol import CylFundamental, W_prime, W_second, cyl_jet, gradient_is_top_eigenvector
from django_dominative_laplace.jets import Jet2, PValue
from django_dominative_laplace.linalg import jacobi_eigen
from django_dominative_laplace.operators import (
    NESTING_GRID,
    dominative,
    dominative_eigen_form,
    dominative_profile,
    normalized_p_laplacian,
    p_laplacian,
    submissive,
    symbol_over_grid,
)
from django_dominative_laplace.reports import SuiteResult
from django_dominative_laplace.sampling import (
    random_orthonormal_columns,
    random_psd,
    random_symmetric,
    sample_annulus,
)
from django_dominative_laplace.suites.suite import Suite

DOMINATION_GRID = (2.0, 3.0, 4.0, 10.0, math.inf)
INNER_RADIUS = 0.1
OUTER_RADIUS = 10.0
EQUIVALENCE_INNER_RADIUS = 0.5
EQUIVALENCE_OUTER_RADIUS = 5.0
MIN_CASE_POINTS = 20
MAX_WEIGHT = 5.0


def _worst(residuals: list[float]) -> tuple[float, int | None]:
    if not residuals:
        return -math.inf, None
    index = int(np.argmax(residuals))
    return float(residuals[index]), index


class FundamentalAnnihilationSuite(Suite):
    """D_p w = 0 = Delta_p w away from the pole."""

    def run(self) -> SuiteResult:
        items = []
        for n in self.scenario.dimensions:
            for p in self.scenario.p_values:
                field = CylFundamentalField.radial(n=n, p=p)
                for x in sample_annulus(self.rng, self.points, n, INNER_RADIUS, OUTER_RADIUS):
                    items.append((field, p, x))

        def check(item) -> float:
            field, p, x = item
            jet = eval_jet(field, x)
            return max(abs(dominative(jet, p)), abs(p_laplacian(jet, p)))

        residuals = self.map(check, items)
        worst, index = _worst(residuals)
        cases = {}
        for (field, p, _), residual in zip(items, residuals):
            key = f"n={field.dimension},p={p}"
            cases[key] = max(cases.get(key, 0.0), residual)
        return self.result(
            passed=bool(items) and worst <= self.tolerance,
            worst_residual=worst,
            witness_point=None if index is None else items[index][2],
            checked=len(items),
            details={"cases": cases},
        )


class CylindricalEigenstructureSuite(Suite):
    """Hessian eigenvalues of C_1 w_{k,p}(Q^T(x - x_0)) are U'/r (k-1 times), 0 (n-k times) and U''.

    The same points check that D_p, Delta_p and D_p - normalized Delta_p all vanish. Delta_p is
    compared after dividing out |grad u|^alpha, the factor it carries over the normalized operator.
    """

    def _points(self, cf: CylFundamental, count: int) -> list[np.ndarray]:
        n, k = cf.n, cf.k
        complement = np.eye(n) - cf.Q @ cf.Q.T
        points = []
        for y in sample_annulus(self.rng, count, k, EQUIVALENCE_INNER_RADIUS, EQUIVALENCE_OUTER_RADIUS):
            points.append(cf.x0 + cf.Q @ y + complement @ self.rng.standard_normal(n))
        return points

    def run(self) -> SuiteResult:
        cases = [(n, k, p) for n in self.scenario.dimensions for k in range(1, n + 1) for p in self.scenario.p_values]
        per_case = max(MIN_CASE_POINTS, self.points // len(cases))
        items = []
        for n, k, p in cases:
            cf = CylFundamental(
                k=k,
                Q=random_orthonormal_columns(self.rng, n, k),
                x0=self.rng.uniform(-1.0, 1.0, size=n),
                C1=MAX_WEIGHT - self.rng.uniform(0.0, MAX_WEIGHT),
            )
            items.extend((cf, p, x) for x in self._points(cf, per_case))

        def check(item) -> tuple[float, float, bool]:
            cf, p, x = item
            r = cf.axis_distance(x)
            rf = cf.profile(p)
            u_prime, u_second = cf.C1 * W_prime(rf, r), cf.C1 * W_second(rf, r)
            expected = np.sort([u_prime / r] * (cf.k - 1) + [0.0] * (cf.n - cf.k) + [u_second])
            jet = cyl_jet(cf, x, p)
            scale = 1.0 + float(np.max(np.abs(expected)))
            eigen_residual = float(np.max(np.abs(jacobi_eigen(jet.hessian).eigenvalues - expected))) / scale
            dominative_value = dominative(jet, p)
            profile_residual = abs(dominative_profile(u_prime, u_second, r, cf.k, cf.n, p) - dominative_value) / scale
            equivalence = max(
                abs(dominative_value),
                abs(p_laplacian(jet, p)) / max(1.0, jet.gradient_norm**p.alpha),
                abs(normalized_p_laplacian(jet, p) - dominative_value),
            )
            return max(eigen_residual, profile_residual), equivalence, gradient_is_top_eigenvector(cf, x, p)

        outcomes = self.map(check, items)
        residuals = [max(residual, equivalence) for residual, equivalence, _ in outcomes]
        misaligned = [index for index, (_, _, aligned) in enumerate(outcomes) if not aligned]
        worst, index = _worst(residuals)
        worst_equivalence, _ = _worst([equivalence for _, equivalence, _ in outcomes])
        return self.result(
            passed=bool(items) and not misaligned and worst <= self.tolerance,
            worst_residual=worst,
            witness_point=None if index is None else items[index][2],
            checked=len(items),
            details={
                "cases": len(cases),
                "points_per_case": per_case,
                "misaligned_gradients": len(misaligned),
                "worst_equivalence": worst_equivalence,
            },
        )


class MatrixSymbolSuite(Suite):
    """Sublinearity, positive homogeneity, degenerate ellipticity and nesting of F_p."""

    tolerance_name = "algebraic_tolerance"
    max_dimension = 8

    def run(self) -> SuiteResult:
        grid = [PValue.parse(q) for q in NESTING_GRID]
        items = []
        for _ in range(self.points):
            n = int(self.rng.integers(2, self.max_dimension + 1))
            items.append(
                (
                    random_symmetric(self.rng, n),
                    random_symmetric(self.rng, n),
                    random_psd(self.rng, n),
                    float(self.rng.uniform(0.0, 10.0)),
                )
            )

        def check(item) -> dict[str, float]:
            X, Y, E, t = item
            fX = dict(symbol_over_grid(X, grid))
            fY = dict(symbol_over_grid(Y, grid))
            fXY = dict(symbol_over_grid(X + Y, grid))
            fXE = dict(symbol_over_grid(X + E, grid))
            ftX = dict(symbol_over_grid(t * X, grid))
            residuals = {"subadditivity": -math.inf, "homogeneity": -math.inf, "ellipticity": -math.inf}
            for q in grid:
                residuals["subadditivity"] = max(
                    residuals["subadditivity"], (fXY[q] - fX[q] - fY[q]) / (1.0 + abs(fX[q]) + abs(fY[q]))
                )
                residuals["homogeneity"] = max(
                    residuals["homogeneity"], abs(ftX[q] - t * fX[q]) / (1.0 + t * abs(fX[q]))
                )
                residuals["ellipticity"] = max(
                    residuals["ellipticity"], (fX[q] - fXE[q]) / (1.0 + abs(fX[q]) + abs(fXE[q]))
                )

            nesting = -math.inf
            for i, p in enumerate(grid):
                if fX[p] <= 0:
                    nesting = max([nesting, *(fX[q] / (1.0 + abs(fX[p])) for q in grid[:i])])
                if fX[p] >= 0:
                    nesting = max([nesting, *(-fX[q] / (1.0 + abs(fX[p])) for q in grid[i:])])
            residuals["nesting"] = nesting
            return residuals

        outcomes = self.map(check, items)
        worst_by_property = {
            name: max(outcome[name] for outcome in outcomes) if outcomes else -math.inf
            for name in ("subadditivity", "homogeneity", "ellipticity", "nesting")
        }
        worst = max(worst_by_property.values())
        return self.result(
            passed=bool(items) and worst <= self.tolerance,
            worst_residual=worst,
            checked=len(items),
            details={"properties": worst_by_property, "grid": [q.to_json() for q in grid]},
        )


class DominationSuite(Suite):
    """Delta_p u <= |grad u|^alpha_p D_p u on random quadratic jets, with the normalized and submissive identities."""

    max_dimension = 8

    def _jet(self, index: int) -> Jet2:
        n = int(self.rng.integers(1, self.max_dimension + 1))
        gradient = np.zeros(n) if index % 10 == 0 else self.rng.standard_normal(n)
        return Jet2(value=0.0, gradient=gradient, hessian=random_symmetric(self.rng, n))

    def run(self) -> SuiteResult:
        grid = [PValue.parse(q) for q in DOMINATION_GRID]
        items = [self._jet(index) for index in range(self.points)]

        def check(jet: Jet2) -> float:
            worst = -math.inf
            gradient_norm = jet.gradient_norm
            for p in grid:
                lhs = p_laplacian(jet, p)
                dominative_value = dominative(jet, p)
                rhs = gradient_norm**p.alpha * dominative_value
                worst = max(worst, (lhs - rhs) / (1.0 + abs(lhs) + abs(rhs)))
                worst = max(worst, submissive(jet, p) - dominative_value)
                gap = abs(dominative_eigen_form(jet, p) - dominative_value)
                worst = max(worst, gap / (1.0 + abs(dominative_value)))
                if gradient_norm > 0:
                    rebuilt = gradient_norm**p.alpha * normalized_p_laplacian(jet, p)
                    worst = max(worst, abs(rebuilt - lhs) / (1.0 + abs(lhs)))
            return worst

        residuals = self.map(check, items)
        worst, index = _worst(residuals)
        return self.result(
            passed=bool(items) and worst <= self.tolerance,
            worst_residual=worst,
            checked=len(items),
            details={
                "grid": [p.to_json() for p in grid],
                "witness_gradient": None if index is None else items[index].gradient.tolist(),
                "witness_hessian": None if index is None else items[index].hessian.tolist(),
            },
        )
