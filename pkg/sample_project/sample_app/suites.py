import abc
import math

import numpy as np

from django_dominative_laplace.exceptions import PreconditionError
from django_dominative_laplace.fields import Quadratic, eval_jet
from django_dominative_laplace.operators import dominative, is_locally_concave, p_laplacian
from django_dominative_laplace.reports import SuiteResult
from django_dominative_laplace.sampling import random_psd, sample_box
from django_dominative_laplace.suites import Suite
from django_dominative_laplace.superposition import counterexample_linear


class BaseQuadraticSuite(Suite, abc.ABC):
    @abc.abstractmethod
    def quadratic(self) -> Quadratic:
        raise NotImplementedError()


class ConcaveQuadraticSuite(BaseQuadraticSuite):
    """Negative semidefinite quadratics are concave and dominative p-superharmonic."""

    def quadratic(self) -> Quadratic:
        n = self.scenario.n
        return Quadratic(A=-random_psd(self.rng, n), b=self.rng.standard_normal(n))

    def run(self) -> SuiteResult:
        field = self.quadratic()
        sampling = self.scenario.sampling
        points = sample_box(self.rng, self.points, sampling.lower, sampling.upper)

        def check(x) -> tuple[float, bool]:
            jet = eval_jet(field, x)
            return max(dominative(jet, self.scenario.p), p_laplacian(jet, self.scenario.p)), is_locally_concave(jet)

        outcomes = self.map(check, points)
        worst = max((residual for residual, _ in outcomes), default=-math.inf)
        return self.result(
            passed=all(concave for _, concave in outcomes),
            worst_residual=worst,
            checked=len(outcomes),
        )


class LinearWitnessSuite(Suite):
    """The linear perturbation witness equals the recomputed p-Laplacian."""

    @classmethod
    def missing(cls, scenario) -> list[str]:
        return [] if scenario.base_point is not None and scenario.combined_field is not None else ["base_point"]

    def run(self) -> SuiteResult:
        try:
            scenario = self.scenario
            counterexample = counterexample_linear(scenario.combined_field, scenario.base_point, scenario.p)
        except PreconditionError as err:
            return self.result(passed=False, worst_residual=math.inf, details={"error": str(err)})
        value = counterexample.witness_value
        residual = abs(counterexample.recomputed_value - value) / (1.0 + abs(value))
        return self.result(
            passed=value > 0,
            worst_residual=residual,
            witness_point=np.asarray(counterexample.witness_point),
            checked=1,
        )
