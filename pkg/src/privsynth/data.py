"""Tabular dataset model: schema, CSV ingestion, splitting, shuffling.

Every other module consumes the :class:`Dataset` defined here. A dataset is a
plain numeric table (float64 feature matrix) plus one class-label column whose
values are opaque identifiers (ints or strings, never used arithmetically),
all described by a :class:`Schema`.

Datasets are immutable after construction and safe to share across workers;
every stochastic operation takes an explicit integer seed and is a pure
function of (inputs, seed).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ClassTooSmall,
    CountExceedsClass,
    EmptyFile,
    MissingColumn,
    NonNumericCell,
    ValidationError,
)

NUMERIC = "numeric"
LABEL = "label"

PROVENANCES = ("original", "synthetic", "perturbed", "merged")


def derive_seed(master: int, *context) -> int:
    """Derive a 64-bit sub-seed from a master seed and context labels.

    The derivation is a stable hash, so sub-streams keyed by stage name or
    record index are independent of each other and reproducible across runs
    and platforms.
    """
    payload = repr((int(master),) + tuple(context)).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")


def sorted_labels(labels) -> list:
    """Deterministic ordering of class identifiers.

    Natural order when the labels are mutually comparable, otherwise ordered
    by (type name, string form). The first label in this order is the "lower
    class id" used by tie rules elsewhere.
    """
    uniq = set(labels)
    try:
        return sorted(uniq)
    except TypeError:
        return sorted(uniq, key=lambda v: (type(v).__name__, str(v)))


@dataclass(frozen=True)
class Schema:
    """Ordered column declarations for a table.

    Each column is a ``(name, kind)`` pair with kind ``"numeric"`` or
    ``"label"``. Exactly one column must be the label.
    """

    columns: tuple[tuple[str, str], ...]

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            raise ValidationError("column names must be unique")
        if any(not name for name in names):
            raise ValidationError("column names must be non-empty")
        kinds = [kind for _, kind in self.columns]
        bad = [k for k in kinds if k not in (NUMERIC, LABEL)]
        if bad:
            raise ValidationError(f"unknown column kind(s): {bad}")
        if kinds.count(LABEL) != 1:
            raise ValidationError("schema must declare exactly one label column")

    @property
    def label_column(self) -> int:
        return next(i for i, (_, kind) in enumerate(self.columns) if kind == LABEL)

    @property
    def column_names(self) -> list[str]:
        return [name for name, _ in self.columns]

    @property
    def feature_names(self) -> list[str]:
        return [name for name, kind in self.columns if kind == NUMERIC]

    @property
    def dim(self) -> int:
        return len(self.columns) - 1

    def feature_index(self, name: str) -> int:
        """Position of a numeric column within the feature matrix."""
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise MissingColumn(name) from None

    def drop_features(self, names) -> "Schema":
        dropped = set(names)
        return Schema(tuple(c for c in self.columns if c[0] not in dropped or c[1] == LABEL))

    def to_dict(self) -> dict:
        return {"columns": [{"name": n, "kind": k} for n, k in self.columns]}

    @classmethod
    def from_dict(cls, payload: dict) -> "Schema":
        return cls(tuple((c["name"], c["kind"]) for c in payload["columns"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Schema":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric table with one label column.

    ``features`` has shape ``(n, d)`` where ``d`` counts the numeric columns
    in schema order; ``labels`` holds the class identifiers. ``provenance``
    records where the rows came from: original, synthetic, perturbed, merged.
    """

    schema: Schema
    features: np.ndarray
    labels: np.ndarray
    provenance: str = "original"

    def __post_init__(self):
        feats = np.array(self.features, dtype=np.float64)
        labs = np.array(self.labels, dtype=object)
        if feats.ndim != 2:
            raise ValidationError("features must be a 2-D array")
        if feats.shape[0] != labs.shape[0]:
            raise ValidationError("features and labels disagree on record count")
        if feats.shape[1] != self.schema.dim:
            raise ValidationError(
                f"schema declares {self.schema.dim} numeric columns, features have {feats.shape[1]}"
            )
        if feats.size and not np.isfinite(feats).all():
            raise ValidationError("numeric cells must be finite")
        if self.provenance not in PROVENANCES:
            raise ValidationError(f"unknown provenance {self.provenance!r}")
        feats.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict:
        return dict(Counter(self.labels.tolist()))

    def classes(self) -> list:
        return sorted_labels(self.labels.tolist())

    def select(self, indices, provenance: str | None = None) -> "Dataset":
        """New dataset containing the given record indices, in order."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            self.schema,
            self.features[idx],
            self.labels[idx],
            provenance or self.provenance,
        )

    def with_features(self, features: np.ndarray, provenance: str | None = None) -> "Dataset":
        return Dataset(self.schema, features, self.labels, provenance or self.provenance)

    def column(self, name: str) -> np.ndarray:
        return self.features[:, self.schema.feature_index(name)]


def concat_datasets(parts, provenance: str) -> Dataset:
    parts = list(parts)
    if not parts:
        raise ValidationError("nothing to concatenate")
    schema = parts[0].schema
    if any(p.schema != schema for p in parts):
        raise ValidationError("all parts must share one schema")
    feats = np.concatenate([p.features for p in parts], axis=0)
    labs = np.concatenate([p.labels for p in parts], axis=0)
    return Dataset(schema, feats, labs, provenance)


def class_mask(labels: np.ndarray, label) -> np.ndarray:
    """Boolean mask of records carrying the given class identifier."""
    return np.asarray(labels == label, dtype=bool)


def _parse_label(cell: str):
    text = cell.strip()
    try:
        return int(text)
    except ValueError:
        return text


def load_csv(path, schema: Schema) -> Dataset:
    """Read a UTF-8, comma-delimited CSV whose header matches the schema.

    The first row must list the schema's column names in order. Numeric cells
    must parse to finite floats; the first offending cell is reported with its
    file row (header is row 1) and column name.

    Raises:
        EmptyFile: no header or no data rows.
        MissingColumn: header does not match the schema.
        NonNumericCell: a cell is missing, non-numeric, or non-finite.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        expected = schema.column_names
        if header != expected:
            missing = [c for c in expected if c not in header]
            offender = missing[0] if missing else next(
                (h for h, e in zip(header, expected) if h != e), header[len(expected)] if len(header) > len(expected) else expected[-1]
            )
            raise MissingColumn(offender, f"header {header!r} does not match schema {expected!r}")

        label_idx = schema.label_column
        features: list[list[float]] = []
        labels: list = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise NonNumericCell(row_no, expected[min(len(row), len(expected) - 1)],
                                     f"row has {len(row)} cells, expected {len(expected)}")
            vec = []
            for col_no, cell in enumerate(row):
                name = expected[col_no]
                if col_no == label_idx:
                    if not cell.strip():
                        raise NonNumericCell(row_no, name, "empty label")
                    labels.append(_parse_label(cell))
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise NonNumericCell(row_no, name, f"cannot parse {cell!r}") from None
                if not math.isfinite(value):
                    raise NonNumericCell(row_no, name, f"non-finite value {cell!r}")
                vec.append(value)
            features.append(vec)

    if not features:
        raise EmptyFile(f"{path} has a header but no data rows")
    return Dataset(schema, np.array(features, dtype=np.float64), np.array(labels, dtype=object), "original")


def write_csv(data: Dataset, path) -> None:
    """Write a dataset back to CSV.

    Floats are written with ``repr`` so a re-parse reproduces the exact
    values (round-trip is lossless, not merely close).
    """
    path = Path(path)
    label_idx = data.schema.label_column
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.schema.column_names)
        for i in range(len(data)):
            row = [repr(float(v)) for v in data.features[i]]
            row.insert(label_idx, str(data.labels[i]))
            writer.writerow(row)


def stratified_split(data: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split into (train, test) preserving per-class proportions.

    Each class contributes ``round(test_fraction * class_size)`` records to
    the test side (within one record of the exact proportion). The two parts
    partition the input: together they contain every record exactly once.

    Raises:
        ClassTooSmall: some class has fewer than 2 records.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    counts = data.class_counts()
    for label in sorted_labels(counts):
        if counts[label] < 2:
            raise ClassTooSmall(label, counts[label])

    rng = np.random.default_rng(seed)
    test_idx: list[int] = []
    train_idx: list[int] = []
    for label in sorted_labels(counts):
        members = np.flatnonzero(class_mask(data.labels, label))
        order = rng.permutation(len(members))
        n_test = int(round(test_fraction * len(members)))
        chosen = members[order]
        test_idx.extend(chosen[:n_test].tolist())
        train_idx.extend(chosen[n_test:].tolist())
    train_idx.sort()
    test_idx.sort()
    return data.select(train_idx), data.select(test_idx)


def shuffle_class_subset(data: Dataset, label, count: int, seed: int) -> Dataset:
    """Keep a uniformly random subset of one class, everything else intact.

    Records of ``label`` are reduced to ``count`` uniformly chosen members;
    records of other classes pass through unchanged. Original record order is
    preserved.

    Raises:
        CountExceedsClass: ``count`` exceeds the class size.
    """
    members = np.flatnonzero(class_mask(data.labels, label))
    if count > len(members):
        raise CountExceedsClass(f"requested {count} of {len(members)} record(s) labelled {label!r}")
    if count < 0:
        raise ValidationError("count must be non-negative")
    rng = np.random.default_rng(seed)
    keep = set(rng.choice(members, size=count, replace=False).tolist())
    drop = [int(i) for i in members if int(i) not in keep]
    mask = np.ones(len(data), dtype=bool)
    mask[drop] = False
    return data.select(np.flatnonzero(mask))
