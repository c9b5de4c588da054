import abc
import logging
from pathlib import Path

import pandas as pd
from django.apps import apps
from django.core.management.base import BaseCommand, CommandError

from django_dominative_laplace.context import reset_tolerance_scale, set_tolerance_scale
from django_dominative_laplace.exceptions import ScenarioError, SuiteNotFound
from django_dominative_laplace.serializers import Scenario, load_scenario

logger = logging.getLogger(__name__)

VALIDATION_ERROR = 2
CHECK_FAILED = 1


class BaseScenarioCommand(BaseCommand, abc.ABC):
    action = "verify"
    name = None
    scenario_required = True

    @property
    def help(self):
        return f"{self.action} {self.name}".capitalize()

    def add_arguments(self, parser):
        parser.add_argument("--scenario", required=self.scenario_required, help="Scenario JSON file")
        parser.add_argument("--out", default=None, help="Output file; standard output when omitted")
        parser.add_argument("--seed", type=int, default=None, help="Overrides the scenario seed")
        parser.add_argument("--points", type=int, default=None, help="Overrides the scenario sample count")
        parser.add_argument("--tol-scale", type=float, default=1.0, help="Multiplies every suite tolerance")

    @abc.abstractmethod
    def perform(self, app_config, scenario: Scenario | None, *args, **options) -> str:
        raise NotImplementedError()

    def load(self, path: str | None) -> Scenario | None:
        if path is None:
            return None
        try:
            return load_scenario(path)
        except ScenarioError as err:
            raise CommandError(f"{path}: {err}", returncode=VALIDATION_ERROR) from err

    def emit(self, text: str, out: str | None) -> None:
        if out is None:
            self.stdout.write(text, ending="")
            return
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")

    def emit_table(self, rows: list[dict], columns: list[str], out: str | None) -> None:
        table = pd.DataFrame(rows, columns=columns)
        self.emit(table.to_csv(index=False, na_rep="", float_format="%.17g", lineterminator="\n"), out)

    def handle(self, *args, **options):
        app_config = apps.get_app_config("django_dominative_laplace")
        if options["points"] is not None and options["points"] < 1:
            raise CommandError("--points must be positive", returncode=VALIDATION_ERROR)
        try:
            ctx_token = set_tolerance_scale(options["tol_scale"])
        except ValueError as err:
            raise CommandError(str(err), returncode=VALIDATION_ERROR) from err

        try:
            scenario = self.load(options.pop("scenario"))
            message = self.perform(app_config, scenario, *args, **options)
        except SuiteNotFound as err:
            raise CommandError(str(err), returncode=VALIDATION_ERROR) from err
        finally:
            reset_tolerance_scale(ctx_token)

        if message:
            self.stderr.write(self.style.SUCCESS(message))
