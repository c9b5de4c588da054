from django.core.management.base import CommandError

from django_dominative_laplace.exceptions import NeedsLargerScale, NeedsSmallerStep, PreconditionError
from django_dominative_laplace.management.commands import CHECK_FAILED, VALIDATION_ERROR, BaseScenarioCommand
from django_dominative_laplace.serializers import SCHEMA_VERSION, Scenario, serialize
from django_dominative_laplace.suites import get_config
from django_dominative_laplace.superposition import COUNTEREXAMPLES


class Command(BaseScenarioCommand):
    action = "construct"
    name = "counterexample"

    def add_arguments(self, parser):
        parser.add_argument("kind", choices=sorted(COUNTEREXAMPLES), help="Perturbation to add")
        super().add_arguments(parser)
        parser.add_argument("--s", type=float, default=None, help="Fixed scale for the fundsol perturbation")
        parser.add_argument("--eps", type=float, default=None, help="Scan length for the reflection perturbation")
        parser.add_argument("--steps", type=int, default=None, help="Scan steps for the reflection perturbation")

    def _options(self, kind: str, scenario: Scenario, options: dict) -> dict:
        defaults = scenario.counterexample
        if kind == "fundsol":
            s = options["s"] if options["s"] is not None else defaults.get("s")
            if s is not None:
                return {"s": s}
            return {"search_start": get_config(name="search_start"), "search_cap": get_config(name="search_cap")}
        if kind == "reflection":
            if options["eps"] is not None and not options["eps"] > 0:
                raise CommandError(f"--eps must be positive, got {options['eps']}", returncode=VALIDATION_ERROR)
            return {
                "eps": options["eps"] or defaults.get("eps") or get_config(name="scan_eps"),
                "steps": options["steps"] or defaults.get("steps") or get_config(name="scan_steps"),
            }
        return {}

    def perform(self, app_config, scenario: Scenario | None, *args, **options) -> str:
        kind = options["kind"]
        u = scenario.combined_field
        if u is None or scenario.base_point is None:
            raise CommandError("Scenario must provide fields and a base_point", returncode=VALIDATION_ERROR)

        try:
            construct = COUNTEREXAMPLES[kind]
            counterexample = construct(u, scenario.base_point, scenario.p, **self._options(kind, scenario, options))
        except (PreconditionError, NeedsLargerScale, NeedsSmallerStep) as err:
            raise CommandError(f"{kind}: {err}", returncode=CHECK_FAILED) from err

        artifact = {
            "schema_version": SCHEMA_VERSION,
            "scenario": scenario.name,
            "scenario_hash": scenario.digest,
            "p": scenario.p,
            "field": u,
        } | counterexample.to_dict()
        self.emit(serialize(artifact) + "\n", options["out"])
        return f"{kind} counterexample for {scenario.name}: witness {counterexample.witness_value:.6e}"
