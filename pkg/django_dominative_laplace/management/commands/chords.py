from django.core.management.base import CommandError

from django_dominative_laplace.exceptions import DominativeLaplaceError, ScenarioError
from django_dominative_laplace.fundsol import RadialFundamental
from django_dominative_laplace.jets import PValue
from django_dominative_laplace.management.commands import VALIDATION_ERROR, BaseScenarioCommand
from django_dominative_laplace.profiles import RadialProfile
from django_dominative_laplace.radial_chords import chord_table
from django_dominative_laplace.serializers import ProfileSerializer, Scenario, deserialize

COLUMNS = ["b", "C_b_minus", "C_b_plus", "touch_C1", "touch_ok"]


class Command(BaseScenarioCommand):
    action = "tabulate"
    name = "chord limits of a radial profile"
    scenario_required = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--profile", default=None, help="Profile JSON; the scenario's first profile otherwise")
        parser.add_argument("--n", type=int, default=None, help="Dimension of W; the scenario's n otherwise")
        parser.add_argument("--p", default=None, help="Exponent of W, a number >= 2 or 'inf'")
        parser.add_argument("--radii", required=True, help="Comma separated radii b")

    def _radii(self, value: str) -> list[float]:
        try:
            radii = [float(item) for item in value.split(",") if item.strip()]
        except ValueError as err:
            raise CommandError(f"Invalid --radii {value!r}", returncode=VALIDATION_ERROR) from err
        if not radii or any(b < 0 for b in radii):
            raise CommandError(f"Radii must be nonnegative, got {value!r}", returncode=VALIDATION_ERROR)
        return radii

    def _profile(self, scenario: Scenario | None, options: dict) -> RadialProfile:
        if options["profile"] is not None:
            serializer = ProfileSerializer(data=deserialize(options["profile"]))
            if not serializer.is_valid():
                raise ScenarioError(errors={"profile": serializer.errors})
            return serializer.validated_data
        if scenario is None or not scenario.profiles:
            raise CommandError("Pass --profile or a scenario with profiles", returncode=VALIDATION_ERROR)
        profile, _ = scenario.profiles[0]
        return profile

    def _fundamental(self, scenario: Scenario | None, options: dict) -> RadialFundamental:
        n = options["n"] if options["n"] is not None else getattr(scenario, "n", None)
        p = options["p"] if options["p"] is not None else getattr(scenario, "p", None)
        if n is None or p is None:
            raise CommandError("Pass --n and --p or a scenario", returncode=VALIDATION_ERROR)
        return RadialFundamental(n=n, p=PValue.parse(p))

    def perform(self, app_config, scenario: Scenario | None, *args, **options) -> str:
        radii = self._radii(options["radii"])
        try:
            profile = self._profile(scenario, options)
            rf = self._fundamental(scenario, options)
        except DominativeLaplaceError as err:
            raise CommandError(str(err), returncode=VALIDATION_ERROR) from err

        rows = chord_table(profile, radii, rf)
        self.emit_table(rows, COLUMNS, options["out"])
        poles = sum(1 for row in rows if row["touch_ok"] == "pole")
        return f"Tabulated {len(rows)} radii of {profile} against {rf}, {poles} at poles"
