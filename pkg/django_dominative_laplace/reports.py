import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from django_dominative_laplace import __version__
from django_dominative_laplace.sampling import GENERATOR_NAME
from django_dominative_laplace.serializers import SCHEMA_VERSION, serialize

logger = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    tolerance: float
    worst_residual: float
    witness_point: list[float] | None = None
    checked: int = 0
    skipped: int = 0
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        # a residual above tolerance can never be reported as a pass
        if self.worst_residual > self.tolerance:
            self.passed = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "worst_residual": self.worst_residual,
            "witness_point": self.witness_point,
            "checked": self.checked,
            "skipped": self.skipped,
            "details": self.details,
        }


@dataclass
class Report:
    scenario_name: str
    scenario_hash: str
    seed: int
    tolerance_scale: float
    results: list[SuiteResult]
    expected_verdict: str = "superharmonic"
    runtime_seconds: float | None = None

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def verdict(self) -> str:
        return "superharmonic" if self.passed else "not-superharmonic"

    @property
    def skipped(self) -> int:
        return sum(result.skipped for result in self.results)

    @property
    def as_expected(self) -> bool:
        return self.verdict == self.expected_verdict

    def to_dict(self) -> dict[str, Any]:
        data = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "scenario": self.scenario_name,
            "scenario_hash": self.scenario_hash,
            "generator": GENERATOR_NAME,
            "seed": self.seed,
            "tolerance_scale": self.tolerance_scale,
            "suites": [result.to_dict() for result in self.results],
            "skipped": self.skipped,
            "verdict": self.verdict,
            "expected_verdict": self.expected_verdict,
        }
        if self.runtime_seconds is not None:
            data["runtime_seconds"] = self.runtime_seconds
        return data

    def dumps(self) -> str:
        return serialize(self.to_dict()) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        logger.info(f"Report for {self.scenario_name} written to {path}: {self.verdict}")
        return path
