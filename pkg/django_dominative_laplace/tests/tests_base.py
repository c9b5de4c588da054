import json
import math
import tempfile
from pathlib import Path

import numpy as np

from django_dominative_laplace.serializers import Scenario, build_scenario

SCENARIOS_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def scenario_path(name: str) -> Path:
    return SCENARIOS_DIR / f"{name}.json"


def scenario_data(bundled: str | None = None, **overrides) -> dict:
    """A bundled scenario, or a minimal planar one, with top-level keys replaced."""
    if bundled:
        data = json.loads(scenario_path(bundled).read_text(encoding="utf-8"))
    else:
        data = {"name": "minimal", "n": 2, "p": 4, "sampling": {"count": 20, "seed": 1}}
    return data | overrides


def make_scenario(bundled: str | None = None, **overrides) -> Scenario:
    return build_scenario(scenario_data(bundled, **overrides))


class NumericAssertionsMixin:
    def assertClose(self, expected: float, received: float, rel: float = 1e-9, abs_tol: float = 1e-12):
        if not math.isclose(expected, received, rel_tol=rel, abs_tol=abs_tol):
            self.fail(f"{received!r} is not close to {expected!r} (rel={rel}, abs={abs_tol})")

    def assertArrayClose(self, expected, received, atol: float = 1e-9, rtol: float = 1e-9):
        received, expected = np.asarray(received, dtype=float), np.asarray(expected, dtype=float)
        np.testing.assert_allclose(received, expected, atol=atol, rtol=rtol)


class TemporaryDirectoryMixin:
    def setUp(self):
        super().setUp()
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.tmp_dir = Path(directory.name)

    def write_scenario(self, data: dict, filename: str = "scenario.json") -> Path:
        path = self.tmp_dir / filename
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
