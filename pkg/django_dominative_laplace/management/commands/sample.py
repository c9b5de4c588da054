import numpy as np
from django.core.management.base import CommandError

from django_dominative_laplace.exceptions import SingularityError
from django_dominative_laplace.fields import ScalarField, eval_jet
from django_dominative_laplace.jets import PValue
from django_dominative_laplace.linalg import largest_eig
from django_dominative_laplace.management.commands import VALIDATION_ERROR, BaseScenarioCommand
from django_dominative_laplace.operators import dominative, p_laplacian
from django_dominative_laplace.serializers import Scenario

COLUMNS = ["x", "y", "value", "|grad|", "lambda_max", "D_p", "Delta_p"]


def sample_cell(
    field: ScalarField, p: PValue, point: np.ndarray, axes: tuple[int, int], exclusion_radius: float
) -> dict:
    row = {"x": point[axes[0]], "y": point[axes[1]]}
    if field.singular_distance(point) < exclusion_radius:
        return row
    try:
        jet = eval_jet(field, point)
    except SingularityError:
        return row
    top, _ = largest_eig(jet.hessian)
    return row | {
        "value": jet.value,
        "|grad|": jet.gradient_norm,
        "lambda_max": top,
        "D_p": dominative(jet, p),
        "Delta_p": p_laplacian(jet, p),
    }


class Command(BaseScenarioCommand):
    action = "sample"
    name = "operator fields on a planar slice"

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--axes", default="0,1", help="Coordinate pair spanning the slice")
        parser.add_argument("--resolution", type=int, default=101, help="Grid points per axis")
        parser.add_argument("--lower", type=float, default=-2.0)
        parser.add_argument("--upper", type=float, default=2.0)

    def _axes(self, value: str, n: int) -> tuple[int, int]:
        try:
            first, second = (int(axis) for axis in value.split(","))
        except ValueError as err:
            message = f"--axes must be two comma separated indices, got {value!r}"
            raise CommandError(message, returncode=VALIDATION_ERROR) from err
        if first == second or not (0 <= first < n and 0 <= second < n):
            message = f"--axes {value!r} is not a pair of distinct axes in R^{n}"
            raise CommandError(message, returncode=VALIDATION_ERROR)
        return first, second

    def perform(self, app_config, scenario: Scenario | None, *args, **options) -> str:
        resolution = options["resolution"]
        if not 2 <= resolution <= app_config.max_grid_resolution:
            raise CommandError(
                f"Resolution {resolution} outside [2, {app_config.max_grid_resolution}]", returncode=VALIDATION_ERROR
            )
        if not options["lower"] < options["upper"]:
            raise CommandError("--lower must be below --upper", returncode=VALIDATION_ERROR)
        field = scenario.combined_field
        if field is None:
            raise CommandError("Scenario has no fields to sample", returncode=VALIDATION_ERROR)
        if scenario.n < 2:
            raise CommandError("A planar slice needs n >= 2", returncode=VALIDATION_ERROR)

        axes = self._axes(options["axes"], scenario.n)
        base = np.zeros(scenario.n) if scenario.base_point is None else scenario.base_point
        ticks = np.linspace(options["lower"], options["upper"], resolution)
        exclusion_radius = scenario.sampling.exclusion_radius

        rows = []
        for y in ticks:
            for x in ticks:
                point = base.copy()
                point[axes[0]], point[axes[1]] = x, y
                rows.append(sample_cell(field, scenario.p, point, axes, exclusion_radius))
        self.emit_table(rows, COLUMNS, options["out"])

        singular = sum(1 for row in rows if "value" not in row)
        return f"Sampled {len(rows)} cells of {scenario.name}, {singular} singular"
