import abc
import inspect
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable

import numpy as np
from django.apps import apps

from django_dominative_laplace.apps import DominativeLaplaceAppConfig
from django_dominative_laplace.context import get_tolerance_scale
from django_dominative_laplace.reports import SuiteResult
from django_dominative_laplace.sampling import suite_rng
from django_dominative_laplace.serializers import Scenario

logger = logging.getLogger(__name__)


def register(suite_class) -> None:
    app: DominativeLaplaceAppConfig = apps.get_app_config("django_dominative_laplace")
    app.register_suite(suite_class=suite_class)


class SuiteMeta(type):
    def __new__(cls, name, bases, attrs):
        klass = type.__new__(cls, name, bases, attrs)
        if not inspect.isabstract(klass) and abc.ABC not in bases:
            register(suite_class=klass)
        return klass

    def __str__(self):
        return self.__name__


class DominativeLaplaceSuite(abc.ABCMeta, SuiteMeta): ...


class Suite(abc.ABC, metaclass=DominativeLaplaceSuite):
    """A property check run against a scenario.

    Each suite draws from its own generator, seeded from the scenario seed and the suite name.
    """

    tolerance_name: str = "tolerance"

    def __init__(self, scenario: Scenario, seed: int | None = None, points: int | None = None):
        self.scenario = scenario
        self.seed = scenario.sampling.seed if seed is None else seed
        self.points = points or scenario.sampling.count
        self.rng: np.random.Generator = suite_rng(self.seed, self.name())
        self.tolerance = get_config(name=self.tolerance_name) * get_tolerance_scale()

    @classmethod
    def missing(cls, scenario: Scenario) -> list[str]:
        """Scenario keys the suite needs but the scenario lacks."""
        return []

    @abc.abstractmethod
    def run(self) -> SuiteResult:
        raise NotImplementedError()

    @classmethod
    def sync(cls, scenario: Scenario, **kwargs) -> SuiteResult:
        result = cls(scenario=scenario, **kwargs).run()
        outcome = "passed" if result.passed else "failed"
        logger.info(
            f"{cls.name()} {outcome}: worst residual {result.worst_residual:.3e} "
            f"(tolerance {result.tolerance:.1e}, {result.checked} checked, {result.skipped} skipped)"
        )
        return result

    @classmethod
    def name(cls) -> str:
        return str(cls)

    def map(self, function: Callable, items: Iterable) -> list:
        """Ordered parallel map; results come back in input order."""
        with ThreadPoolExecutor(max_workers=get_config(name="workers")) as pool:
            return list(pool.map(function, items))

    def result(
        self,
        passed: bool,
        worst_residual: float,
        witness_point=None,
        checked: int = 0,
        skipped: int = 0,
        details: dict[str, Any] | None = None,
    ) -> SuiteResult:
        if witness_point is not None:
            witness_point = np.asarray(witness_point, dtype=float).tolist()
        return SuiteResult(
            name=self.name(),
            passed=passed,
            tolerance=self.tolerance,
            worst_residual=float(worst_residual),
            witness_point=witness_point,
            checked=checked,
            skipped=skipped,
            details=details or {},
        )


def get_config(name: str) -> Any:
    app: DominativeLaplaceAppConfig = apps.get_app_config("django_dominative_laplace")
    return getattr(app, name)
