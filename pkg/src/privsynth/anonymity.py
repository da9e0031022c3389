"""Quasi-identifier generalization and k-anonymity auditing.

A quasi-identifier (QI) is a set of columns that could link released records
back to individuals. Records are grouped into equivalence classes by exact
equality of their generalized QI values; a release is k-anonymous when every
class holds at least k records. The re-identification risk reported here is
the fraction of records sitting in classes smaller than k.

Continuous columns must be generalized before exact-match grouping means
anything; the built-in rule is equal-width binning over the column's own
min/max range.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset, Schema
from .errors import UnknownColumn, ValidationError, ZeroBins

DROP = "drop"
IDENTITY = "identity"

DEFAULT_BINS = 10


@dataclass(frozen=True)
class QuasiIdentifierSpec:
    """Which columns form the quasi-identifier and how each is generalized.

    ``generalization`` maps a column name to one of:
      - an int  -> equal-width binning with that many bins,
      - "identity" -> keep values as they are,
      - "drop" -> remove the column from the release entirely.
    Columns listed in ``columns`` but absent from the map default to
    "identity". The label column may not be a quasi-identifier.
    """

    columns: tuple[str, ...]
    generalization: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if not self.columns:
            raise ValidationError("quasi-identifier needs at least one column")
        if len(set(self.columns)) != len(self.columns):
            raise ValidationError("duplicate quasi-identifier columns")
        for col, rule in self.generalization.items():
            if col not in self.columns:
                raise UnknownColumn(col)
            if isinstance(rule, int):
                if rule <= 0:
                    raise ZeroBins(f"column {col!r}: bin count must be positive, got {rule}")
            elif rule not in (DROP, IDENTITY):
                raise ValidationError(f"column {col!r}: unknown rule {rule!r}")

    def validate_against(self, schema: Schema) -> None:
        numeric = set(schema.feature_names)
        for col in self.columns:
            if col not in numeric:
                if col == schema.column_names[schema.label_column]:
                    raise ValidationError("the label column cannot be a quasi-identifier")
                raise UnknownColumn(col)

    def rule_for(self, column: str):
        return self.generalization.get(column, IDENTITY)

    @classmethod
    def all_numeric(cls, schema: Schema, bins: int = DEFAULT_BINS) -> "QuasiIdentifierSpec":
        """Default audit spec: every numeric column, equal-width binned."""
        names = tuple(schema.feature_names)
        return cls(names, {name: bins for name in names})

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "generalization": dict(self.generalization)}

    @classmethod
    def from_dict(cls, payload: dict) -> "QuasiIdentifierSpec":
        return cls(tuple(payload["columns"]), dict(payload.get("generalization", {})))


@dataclass(frozen=True)
class EquivalenceClasses:
    """Partition of record indices by generalized QI value tuple."""

    groups: dict

    def __post_init__(self):
        if any(len(idx) == 0 for idx in self.groups.values()):
            raise ValidationError("equivalence classes must be non-empty")

    @property
    def total(self) -> int:
        return sum(len(idx) for idx in self.groups.values())

    def sizes(self) -> list[int]:
        return [len(idx) for idx in self.groups.values()]


@dataclass(frozen=True)
class RiskReport:
    """Outcome of a k-anonymity audit over one release."""

    k: int
    class_size_histogram: dict
    at_risk_count: int
    total: int
    risk: float
    satisfies_k_anonymity: bool

    def to_dict(self) -> dict:
        histogram = {str(size): count for size, count in sorted(self.class_size_histogram.items())}
        return {
            "k": self.k,
            "class_size_histogram": histogram,
            "at_risk_count": self.at_risk_count,
            "total": self.total,
            "risk": self.risk,
            "satisfies_k_anonymity": self.satisfies_k_anonymity,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")


def _bin_column(values: np.ndarray, bins: int) -> np.ndarray:
    """Equal-width bin indices over the column's own range.

    The guard epsilon keeps the maximum value inside the top bin. A constant
    column collapses to bin 0.
    """
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros(values.shape, dtype=np.float64)
    width = hi - lo
    return np.floor((values - lo) * bins / (width + 1e-9 * width))


def generalize(data: Dataset, spec: QuasiIdentifierSpec) -> Dataset:
    """Apply the per-column generalization rules.

    Binned columns are replaced by their bin index, dropped columns vanish
    from the schema and every record, and everything else passes through.
    """
    spec.validate_against(data.schema)
    feats = data.features.copy()
    to_drop = []
    for col in spec.columns:
        rule = spec.rule_for(col)
        if rule == DROP:
            to_drop.append(col)
        elif isinstance(rule, int):
            j = data.schema.feature_index(col)
            feats[:, j] = _bin_column(feats[:, j], rule)
    if to_drop:
        keep = [j for j, name in enumerate(data.schema.feature_names) if name not in set(to_drop)]
        feats = feats[:, keep]
        schema = data.schema.drop_features(to_drop)
    else:
        schema = data.schema
    return Dataset(schema, feats, data.labels, data.provenance)


def equivalence_classes(data: Dataset, spec: QuasiIdentifierSpec) -> EquivalenceClasses:
    """Group records by exact equality of their generalized QI tuples."""
    generalized = generalize(data, spec)
    kept = [c for c in spec.columns if spec.rule_for(c) != DROP]
    if kept:
        cols = [generalized.schema.feature_index(c) for c in kept]
        keys = generalized.features[:, cols]
    else:
        keys = np.zeros((len(generalized), 0))
    groups: dict[tuple, list[int]] = {}
    for i, row in enumerate(keys):
        groups.setdefault(tuple(row.tolist()), []).append(i)
    return EquivalenceClasses(groups)


def check_k_anonymity(classes: EquivalenceClasses, k: int) -> bool:
    """True iff every equivalence class holds at least k records."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    return all(size >= k for size in classes.sizes())


def risk_report(classes: EquivalenceClasses, k: int) -> RiskReport:
    """Audit one partition: histogram, at-risk count, and risk fraction.

    A record is at risk when its equivalence class is smaller than k; the
    risk is the at-risk fraction of all records, so risk == 0 exactly when
    the release is k-anonymous.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    sizes = classes.sizes()
    total = sum(sizes)
    histogram: dict[int, int] = {}
    for size in sizes:
        histogram[size] = histogram.get(size, 0) + 1
    at_risk = sum(size * count for size, count in histogram.items() if size < k)
    risk = at_risk / total if total else 0.0
    return RiskReport(
        k=k,
        class_size_histogram=histogram,
        at_risk_count=at_risk,
        total=total,
        risk=risk,
        satisfies_k_anonymity=at_risk == 0,
    )
