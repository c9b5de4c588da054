import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from django.apps import apps
from django.core.serializers.json import DjangoJSONEncoder
from rest_framework import serializers

from django_dominative_laplace.exceptions import DominativeLaplaceError, ScenarioError, SuiteNotFound
from django_dominative_laplace.fields import FIELD_KINDS, RadialProfileField, ScalarField, WeightedSum, field_from_dict
from django_dominative_laplace.jets import PValue
from django_dominative_laplace.profiles import PROFILE_KINDS, RadialProfile, profile_from_dict

SCHEMA_VERSION = 1
VERDICTS = ("superharmonic", "not-superharmonic")
KINK_AGREEMENT = 1e-9
CRANDALL_DEFAULTS = {"sums": 50, "max_poles": 5, "concave": True}


class JSONEncoder(DjangoJSONEncoder):
    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, PValue):
            return o.to_json()
        if isinstance(o, (ScalarField, RadialProfile)):
            return o.to_dict()
        if isinstance(o, set):
            return sorted(o)
        return super().default(o)


def _finite(value: Any) -> Any:
    # JSON has no infinities; they travel as the same "inf" strings scenarios use for p
    if isinstance(value, np.ndarray):
        return _finite(value.tolist())
    if isinstance(value, np.generic):
        return _finite(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return None
        return "inf" if value > 0 else "-inf"
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value


def serialize(value) -> str:
    return json.dumps(_finite(value), cls=JSONEncoder, sort_keys=True, indent=2)


def deserialize(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError as err:
        raise ScenarioError(errors={"json": [f"line {err.lineno} column {err.colno}: {err.msg}"]}) from err


class PValueField(serializers.Field):
    default_error_messages = {"invalid": "Expected a number >= 2 or 'inf', got {value!r}."}

    def to_internal_value(self, data):
        if isinstance(data, bool):
            self.fail("invalid", value=data)
        try:
            return PValue.parse(data)
        except (DominativeLaplaceError, TypeError, ValueError):
            self.fail("invalid", value=data)

    def to_representation(self, value):
        return PValue.parse(value).to_json()


def vector_field(**kwargs) -> serializers.ListField:
    return serializers.ListField(child=serializers.FloatField(), min_length=1, **kwargs)


def matrix_field(**kwargs) -> serializers.ListField:
    return serializers.ListField(child=vector_field(), min_length=1, **kwargs)


class _KindSerializer(serializers.Serializer):
    """Dispatches on the ``kind`` tag and builds the domain object from the validated parameters."""

    kinds: dict = {}
    kind_label = "kind"

    def get_kind_serializer(self, kind: str) -> type[serializers.Serializer]:
        raise NotImplementedError()

    def build(self, data: dict[str, Any]):
        raise NotImplementedError()

    def to_internal_value(self, data):
        if not isinstance(data, dict):
            raise serializers.ValidationError({"non_field_errors": [f"Expected an object, got {type(data).__name__}."]})
        kind = data.get("kind")
        if kind not in self.kinds:
            choices = ", ".join(sorted(self.kinds))
            message = f"Unknown {self.kind_label} kind {kind!r}; expected one of {choices}."
            raise serializers.ValidationError({"kind": [message]})

        serializer = self.get_kind_serializer(kind)(data=data)
        if not serializer.is_valid():
            raise serializers.ValidationError(serializer.errors)
        try:
            return self.build({"kind": kind, **serializer.validated_data})
        except (DominativeLaplaceError, ValueError) as err:
            raise serializers.ValidationError({"non_field_errors": [str(err)]}) from err

    def to_representation(self, instance):
        return instance.to_dict()


class FundamentalProfileSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=1, max_value=16)
    p = PValueField()
    scale = serializers.FloatField(min_value=0.0, default=1.0)
    shift = serializers.FloatField(default=0.0)


class TruncatedFundamentalProfileSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=1, max_value=16)
    p = PValueField()
    level = serializers.FloatField()


class MinPairProfileSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=1, max_value=16)
    p = PValueField()
    scale = serializers.FloatField(min_value=0.0)
    shift = serializers.FloatField()


class PolynomialProfileSerializer(serializers.Serializer):
    coefficients = vector_field()


class ConstantProfileSerializer(serializers.Serializer):
    value = serializers.FloatField()


class LogarithmicProfileSerializer(serializers.Serializer):
    scale = serializers.FloatField(min_value=0.0, default=1.0)


PROFILE_SERIALIZERS = {
    "fundamental": FundamentalProfileSerializer,
    "truncated-fundamental": TruncatedFundamentalProfileSerializer,
    "min-pair": MinPairProfileSerializer,
    "concave-poly": PolynomialProfileSerializer,
    "constant": ConstantProfileSerializer,
    "logarithmic": LogarithmicProfileSerializer,
}


class ProfileSerializer(_KindSerializer):
    kinds = PROFILE_KINDS
    kind_label = "profile"

    def get_kind_serializer(self, kind: str) -> type[serializers.Serializer]:
        return PROFILE_SERIALIZERS[kind]

    def to_internal_value(self, data):
        profile = super().to_internal_value(data)
        declared = data.get("kink_radii")
        if declared is not None:
            if not isinstance(declared, list) or not all(isinstance(item, (int, float)) for item in declared):
                raise serializers.ValidationError({"kink_radii": ["Expected a list of radii."]})
            computed = profile.kink_radii
            if len(declared) != len(computed) or any(
                abs(given - actual) > KINK_AGREEMENT * (1.0 + abs(actual))
                for given, actual in zip(sorted(declared), computed)
            ):
                raise serializers.ValidationError(
                    {"kink_radii": [f"Declared kink radii {declared} disagree with computed {list(computed)}."]}
                )
        return profile

    def build(self, data: dict[str, Any]) -> RadialProfile:
        return profile_from_dict(data)


class FieldSerializer(_KindSerializer):
    kinds = FIELD_KINDS
    kind_label = "field"

    def get_kind_serializer(self, kind: str) -> type[serializers.Serializer]:
        return FIELD_SERIALIZERS[kind]

    def build(self, data: dict[str, Any]) -> ScalarField:
        return field_from_dict(data)


class QuadraticSerializer(serializers.Serializer):
    A = matrix_field()
    b = vector_field(required=False)
    c = serializers.FloatField(default=0.0)


class AffineSerializer(serializers.Serializer):
    a = vector_field()
    b = serializers.FloatField(default=0.0)


class RadialProfileFieldSerializer(serializers.Serializer):
    profile = ProfileSerializer()
    center = vector_field()
    axes = matrix_field(required=False)


class CylFundamentalSerializer(serializers.Serializer):
    k = serializers.IntegerField(min_value=1, max_value=16)
    Q = matrix_field()
    x0 = vector_field()
    C1 = serializers.FloatField(min_value=0.0, default=1.0)
    C2 = serializers.FloatField(default=0.0)
    p = PValueField()


class IsometrySerializer(serializers.Serializer):
    Q = matrix_field()
    x0 = vector_field(required=False)


class ComposedSerializer(serializers.Serializer):
    inner = FieldSerializer()
    isometry = IsometrySerializer()


class WeightedTermSerializer(serializers.Serializer):
    weight = serializers.FloatField()
    field = FieldSerializer()


class WeightedSumSerializer(serializers.Serializer):
    terms = serializers.ListField(child=WeightedTermSerializer(), min_length=1)


FIELD_SERIALIZERS = {
    "quadratic": QuadraticSerializer,
    "affine": AffineSerializer,
    "radial-profile": RadialProfileFieldSerializer,
    "cyl-fundamental": CylFundamentalSerializer,
    "composed": ComposedSerializer,
    "reflected": ComposedSerializer,
    "weighted-sum": WeightedSumSerializer,
}


class PlacedProfileSerializer(serializers.Serializer):
    profile = ProfileSerializer()
    center = vector_field()


class SamplingSerializer(serializers.Serializer):
    count = serializers.IntegerField(min_value=1, default=200)
    lower = vector_field(required=False)
    upper = vector_field(required=False)
    exclusion_radius = serializers.FloatField(min_value=0.0, required=False)
    seed = serializers.IntegerField(min_value=0, default=0)


class CrandallSerializer(serializers.Serializer):
    sums = serializers.IntegerField(min_value=1, default=50)
    max_poles = serializers.IntegerField(min_value=1, default=5)
    concave = serializers.BooleanField(default=True)


class CounterexampleSerializer(serializers.Serializer):
    kinds = serializers.ListField(
        child=serializers.ChoiceField(choices=["linear", "fundsol", "reflection"]),
        default=["linear", "fundsol", "reflection"],
    )
    s = serializers.FloatField(min_value=0.0, required=False)
    eps = serializers.FloatField(min_value=0.0, required=False)
    steps = serializers.IntegerField(min_value=1, required=False)

    def validate_eps(self, value):
        if not value > 0:
            raise serializers.ValidationError(f"Scan length must be positive, got {value}.")
        return value


class ScenarioSerializer(serializers.Serializer):
    schema_version = serializers.IntegerField(default=SCHEMA_VERSION)
    name = serializers.CharField()
    n = serializers.IntegerField(min_value=1, max_value=16)
    p = PValueField()
    dimensions = serializers.ListField(
        child=serializers.IntegerField(min_value=1, max_value=16), required=False, min_length=1
    )
    p_values = serializers.ListField(child=PValueField(), required=False, min_length=1)
    fields = serializers.ListField(child=FieldSerializer(), default=list)
    profiles = serializers.ListField(child=PlacedProfileSerializer(), default=list)
    concave = FieldSerializer(required=False, allow_null=True)
    base_point = vector_field(required=False)
    sampling = SamplingSerializer(required=False)
    crandall = CrandallSerializer(required=False)
    counterexample = CounterexampleSerializer(required=False)
    suites = serializers.ListField(child=serializers.CharField(), default=list)
    expected_verdict = serializers.ChoiceField(choices=VERDICTS, default="superharmonic")

    def validate_schema_version(self, value):
        if value != SCHEMA_VERSION:
            raise serializers.ValidationError(f"Unsupported schema version {value}; expected {SCHEMA_VERSION}.")
        return value

    def validate_suites(self, value):
        app_config = apps.get_app_config("django_dominative_laplace")
        for name in value:
            try:
                app_config.get_suite(name=name)
            except SuiteNotFound as err:
                raise serializers.ValidationError(str(err)) from err
        return value

    def validate(self, attrs):
        n = attrs["n"]
        errors = {}
        for index, item in enumerate(attrs.get("fields", [])):
            if item.dimension != n:
                errors.setdefault("fields", {})[index] = [f"Field has dimension {item.dimension}, expected {n}."]
        if (concave := attrs.get("concave")) is not None and concave.dimension != n:
            errors["concave"] = [f"Field has dimension {concave.dimension}, expected {n}."]
        for index, item in enumerate(attrs.get("profiles", [])):
            if len(item["center"]) != n:
                errors.setdefault("profiles", {})[index] = {"center": [f"Expected {n} coordinates."]}
            # profiles built on W_{n,p} must use the scenario's own n and p
            rf = getattr(item["profile"], "rf", None)
            if rf is not None and (rf.n, rf.p) != (n, attrs["p"]):
                message = f"Profile is built on {rf}, expected n={n} and p={attrs['p']}."
                errors.setdefault("profiles", {}).setdefault(index, {})["profile"] = [message]
        if (base_point := attrs.get("base_point")) is not None and len(base_point) != n:
            errors["base_point"] = [f"Expected {n} coordinates."]
        sampling = attrs.get("sampling") or {}
        for bound in ("lower", "upper"):
            if bound in sampling and len(sampling[bound]) != n:
                errors.setdefault("sampling", {})[bound] = [f"Expected {n} coordinates."]
        if not errors and "lower" in sampling and "upper" in sampling:
            if any(low >= high for low, high in zip(sampling["lower"], sampling["upper"])):
                errors["sampling"] = {"upper": ["Every upper bound must exceed the lower bound."]}
        if errors:
            raise serializers.ValidationError(errors)
        return attrs


@dataclass
class Sampling:
    count: int
    lower: np.ndarray
    upper: np.ndarray
    exclusion_radius: float
    seed: int


@dataclass
class Scenario:
    name: str
    n: int
    p: PValue
    sampling: Sampling
    digest: str
    fields: list[ScalarField] = field(default_factory=list)
    profiles: list[tuple[RadialProfile, np.ndarray]] = field(default_factory=list)
    concave: ScalarField | None = None
    base_point: np.ndarray | None = None
    dimensions: list[int] = field(default_factory=list)
    p_values: list[PValue] = field(default_factory=list)
    crandall: dict[str, Any] = field(default_factory=dict)
    counterexample: dict[str, Any] = field(default_factory=dict)
    suites: list[str] = field(default_factory=list)
    expected_verdict: str = "superharmonic"
    schema_version: int = SCHEMA_VERSION

    @property
    def combined_field(self) -> ScalarField | None:
        """Sum of the fields, the placed profiles and the concave part."""
        terms = [(1.0, item) for item in self.fields]
        terms.extend((1.0, RadialProfileField(profile, center)) for profile, center in self.profiles)
        if self.concave is not None:
            terms.append((1.0, self.concave))
        if not terms:
            return None
        return terms[0][1] if len(terms) == 1 else WeightedSum(terms=terms)


def scenario_digest(data: dict) -> str:
    return hashlib.sha256(serialize(data).encode()).hexdigest()


def build_scenario(data: Any) -> Scenario:
    serializer = ScenarioSerializer(data=data)
    if not serializer.is_valid():
        raise ScenarioError(errors=serializer.errors)
    attrs = serializer.validated_data
    n = attrs["n"]
    app_config = apps.get_app_config("django_dominative_laplace")

    sampling = attrs.get("sampling") or {}
    exclusion_radius = sampling.get("exclusion_radius")
    return Scenario(
        name=attrs["name"],
        n=n,
        p=attrs["p"],
        sampling=Sampling(
            count=sampling.get("count", 200),
            lower=np.asarray(sampling.get("lower", [-2.0] * n), dtype=float),
            upper=np.asarray(sampling.get("upper", [2.0] * n), dtype=float),
            exclusion_radius=app_config.exclusion_radius if exclusion_radius is None else exclusion_radius,
            seed=sampling.get("seed", 0),
        ),
        digest=scenario_digest(data),
        fields=list(attrs.get("fields", [])),
        profiles=[(item["profile"], np.asarray(item["center"], dtype=float)) for item in attrs.get("profiles", [])],
        concave=attrs.get("concave"),
        base_point=None if attrs.get("base_point") is None else np.asarray(attrs["base_point"], dtype=float),
        dimensions=list(attrs.get("dimensions") or [n]),
        p_values=list(attrs.get("p_values") or [attrs["p"]]),
        crandall=dict(attrs.get("crandall") or CRANDALL_DEFAULTS),
        counterexample=dict(attrs.get("counterexample") or {}),
        suites=list(attrs.get("suites", [])),
        expected_verdict=attrs["expected_verdict"],
        schema_version=attrs["schema_version"],
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ScenarioError(errors={"scenario": [f"Unable to read {path}: {err.strerror}"]}) from err
    return build_scenario(deserialize(text))
