import os
from typing import Any

from django.apps import AppConfig
from django.conf import settings

from django_dominative_laplace import exceptions

PREFIX = "DJANGO_DOMINATIVE_LAPLACE_"


class DominativeLaplaceAppConfig(AppConfig):
    name = "django_dominative_laplace"
    verbose_name = "Dominative p-Laplace"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.suites = {}
        self.tolerance = self._fetch_float_config(name="TOLERANCE", default=1e-9)
        self.algebraic_tolerance = self._fetch_float_config(name="ALGEBRAIC_TOLERANCE", default=1e-10)
        self.jacobi_tolerance = self._fetch_float_config(name="JACOBI_TOLERANCE", default=1e-12)
        self.jacobi_max_sweeps = self._fetch_int_config(name="JACOBI_MAX_SWEEPS", default=100)
        self.exclusion_radius = self._fetch_float_config(name="EXCLUSION_RADIUS", default=1e-3)
        self.fd_step_scale = self._fetch_float_config(name="FD_STEP_SCALE", default=1e-4)

        self.search_start = self._fetch_float_config(name="SEARCH_START", default=8.0)
        self.search_cap = self._fetch_float_config(name="SEARCH_CAP", default=float(2**40))
        self.scan_eps = self._fetch_float_config(name="SCAN_EPS", default=1e-2)
        self.scan_steps = self._fetch_int_config(name="SCAN_STEPS", default=64)

        self.chord_refinements = self._fetch_int_config(name="CHORD_REFINEMENTS", default=40)
        self.chord_cauchy_tolerance = self._fetch_float_config(name="CHORD_CAUCHY_TOL", default=1e-8)
        self.touch_samples = self._fetch_int_config(name="TOUCH_SAMPLES", default=200)

        self.max_grid_resolution = self._fetch_int_config(name="MAX_GRID_RESOLUTION", default=2048)
        self.workers = self._fetch_int_config(name="WORKERS", default=None)
        self.report_timings = self._fetch_bool_config(name="REPORT_TIMINGS", default=False)

    def get_suites(self) -> list:
        return list(self.suites.values())

    def get_suite(self, name: str):
        if name in self.suites:
            return self.suites[name]
        raise exceptions.SuiteNotFound(name=name)

    def register_suite(self, suite_class) -> None:
        from django_dominative_laplace.suites.suite import Suite

        if not issubclass(suite_class, Suite):
            raise ValueError(f"Unable to register {suite_class}: not a Suite")
        self.suites[str(suite_class)] = suite_class

    def _fetch_config(self, name: str, default: Any) -> Any:
        config_name = f"{PREFIX}{name.upper()}"
        return getattr(settings, config_name, os.environ.get(config_name, default))

    def _fetch_str_config(self, name: str, default: Any) -> str:
        value = self._fetch_config(name=name, default=default)
        return str(value) if value is not None else default

    def _fetch_bool_config(self, name: str, default: Any) -> bool:
        value = self._fetch_config(name=name, default=default)
        return str(value).lower() in ("true", "1", "t", "y", "yes") if value is not None else default

    def _fetch_int_config(self, name: str, default: Any) -> int:
        value = self._fetch_config(name=name, default=default)
        return int(value) if value is not None else default

    def _fetch_float_config(self, name: str, default: Any) -> float:
        value = self._fetch_config(name=name, default=default)
        return float(value) if value is not None else default

    def _fetch_list_config(self, name: str, default: Any) -> list:
        value = self._fetch_config(name=name, default=default)

        if not value:
            return default

        if isinstance(value, list):
            return value

        if isinstance(value, str):
            return value.split(",")

        raise ValueError(f"Invalid value for {name}: {value}")

    def ready(self):
        # Importing the built-in suites registers them
        from django_dominative_laplace import suites  # noqa: F401
