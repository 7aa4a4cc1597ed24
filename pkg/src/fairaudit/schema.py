"""Dataset schema: feature declarations and protected-attribute metadata."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError

CATEGORICAL = "categorical"
NUMERIC = "numeric"


@dataclass(frozen=True)
class FeatureSpec:
    """One column: its kind and, if protected, the privileged category.

    A protected feature must be categorical and must name the privileged
    value; every other observed category counts as unprivileged.
    """

    name: str
    kind: str
    protected: bool = False
    privileged_value: str | None = None

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise SchemaError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.protected:
            if self.kind != CATEGORICAL:
                raise SchemaError(f"protected feature {self.name!r} must be categorical")
            if self.privileged_value is None:
                raise SchemaError(f"protected feature {self.name!r} needs privileged_value")
        elif self.privileged_value is not None:
            raise SchemaError(f"feature {self.name!r}: privileged_value only valid when protected")


@dataclass(frozen=True)
class Schema:
    features: tuple[FeatureSpec, ...]
    label_name: str
    positive_label: str
    _by_name: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not self.features:
            raise SchemaError("schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate feature names: {dupes}")
        if self.label_name in names:
            raise SchemaError(f"label {self.label_name!r} also listed as a feature")
        object.__setattr__(self, "_by_name", {f.name: f for f in self.features})

    def feature(self, name: str) -> FeatureSpec:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"no feature named {name!r}") from None

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def protected_features(self) -> list[FeatureSpec]:
        return [f for f in self.features if f.protected]

    def to_dict(self) -> dict:
        feats = []
        for f in self.features:
            d = {"name": f.name, "kind": f.kind}
            if f.protected:
                d["protected"] = True
                d["privileged_value"] = f.privileged_value
            feats.append(d)
        return {"features": feats, "label": {"name": self.label_name, "positive": self.positive_label}}

    @classmethod
    def from_dict(cls, doc: dict) -> "Schema":
        try:
            feats = tuple(
                FeatureSpec(
                    name=f["name"],
                    kind=f["kind"],
                    protected=bool(f.get("protected", False)),
                    privileged_value=f.get("privileged_value"),
                )
                for f in doc["features"]
            )
            label = doc["label"]
            return cls(features=feats, label_name=label["name"], positive_label=label["positive"])
        except (KeyError, TypeError) as e:
            raise SchemaError(f"malformed schema document: {e}") from e


def load_schema(path: str | Path) -> Schema:
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"schema file not found: {p}")
    with open(p, encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"schema file {p} is not valid JSON: {e}") from e
    return Schema.from_dict(doc)


def save_schema(schema: Schema, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(schema.to_dict(), f, indent=2)
        f.write("\n")
