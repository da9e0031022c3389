"""Generated body-sensor benchmark table.

Builds a table shaped like public mobile-health activity recordings: 23
numeric sensor channels (chest accelerometer, two ECG leads, and
accelerometer / gyroscope / magnetometer triads on ankle and arm) plus one
``activity`` label. Class structure mimics that setting: a large idle class,
eleven mid-sized activities, and one small minority activity.

Channels inside a sensor triad are correlated through a shared per-record
factor. A handful of rows carry their own fault label and sit pinned at the
sensor rails (every channel clipped high or stuck low), the way real
recordings misbehave when a device saturates. Those rail rows stretch every
column's value range well beyond the data bulk, which keeps equal-width
binning coarse where the signal lives; the two rails are asymmetric so the
bulk lands near the middle of a bin rather than on an edge.

Everything is driven by named sub-streams of one seed, so a given
(parameters, seed) pair always yields the identical table.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset, Schema, derive_seed
from .errors import ValidationError

SENSOR_GROUPS = (
    ("acc_chest", 3),
    ("ecg_lead", 2),
    ("acc_ankle", 3),
    ("gyro_ankle", 3),
    ("mag_ankle", 3),
    ("acc_arm", 3),
    ("gyro_arm", 3),
    ("mag_arm", 3),
)

_AXES = ("x", "y", "z")

LABEL_COLUMN = "activity"


def surrogate_schema() -> Schema:
    columns = []
    for prefix, size in SENSOR_GROUPS:
        if prefix == "ecg_lead":
            columns.extend([(f"{prefix}_{i + 1}", "numeric") for i in range(size)])
        else:
            columns.extend([(f"{prefix}_{_AXES[i]}", "numeric") for i in range(size)])
    columns.append((LABEL_COLUMN, "label"))
    return Schema(tuple(columns))


def make_surrogate(
    n_records: int = 9000,
    seed: int = 1729,
    *,
    n_classes: int = 13,
    idle_fraction: float = 0.34,
    minority_fraction: float = 0.06,
    separation: float = 2.0,
    mean_levels: int = 3,
    within_std: float = 1.2,
    idle_std: float = 1.8,
    group_rho: float = 0.6,
    fault_rows: int = 6,
    rail_high: float = 55.0,
    rail_low: float = -18.0,
) -> Dataset:
    """Generate the benchmark table.

    Activity 0 is the idle class (widest spread), activities
    1 .. n_classes-2 share the middle of the data, and activity
    ``n_classes - 1`` is the designated minority class for oversampling
    experiments. ``fault_rows`` extra rows labelled ``n_classes`` are split
    between the two sensor rails.
    """
    if n_records < 10 * n_classes:
        raise ValidationError("n_records too small for the class layout")
    if not 0.0 <= group_rho < 1.0:
        raise ValidationError("group_rho must be in [0, 1)")
    if fault_rows and fault_rows < 4:
        raise ValidationError("use at least 4 fault rows (2 per rail) or none")
    if fault_rows > n_records // 10:
        raise ValidationError("too many fault rows")

    schema = surrogate_schema()
    d = schema.dim

    counts = _class_counts(n_records - fault_rows, n_classes, idle_fraction, minority_fraction)
    means_rng = np.random.default_rng(derive_seed(seed, "class-means"))
    if mean_levels:
        # activities sit at one of a few per-channel intensity levels,
        # centred on zero and `separation` apart; axis-aligned structure of
        # this kind is what real activity recordings show per channel
        levels = (np.arange(mean_levels) - (mean_levels - 1) / 2.0) * separation
        means = levels[means_rng.integers(0, mean_levels, size=(n_classes, d))]
    else:
        means = separation * means_rng.standard_normal((n_classes, d))

    rows = []
    labels = []
    for cls in range(n_classes):
        m = counts[cls]
        std = idle_std if cls == 0 else within_std
        block = np.empty((m, d))
        rng = np.random.default_rng(derive_seed(seed, "class", cls))
        offset = 0
        for _, size in SENSOR_GROUPS:
            shared = rng.standard_normal((m, 1))
            own = rng.standard_normal((m, size))
            unit = np.sqrt(group_rho) * shared + np.sqrt(1.0 - group_rho) * own
            block[:, offset:offset + size] = unit
            offset += size
        rows.append(means[cls] + std * block)
        labels.extend([cls] * m)

    if fault_rows:
        high = fault_rows - fault_rows // 2
        block = np.empty((fault_rows, d))
        block[:high] = rail_high
        block[high:] = rail_low
        rows.append(block)
        labels.extend([n_classes] * fault_rows)

    features = np.concatenate(rows, axis=0)
    labels = np.array(labels, dtype=object)

    order = np.random.default_rng(derive_seed(seed, "shuffle")).permutation(len(labels))
    return Dataset(schema, features[order], labels[order], "original")


def _class_counts(n_records, n_classes, idle_fraction, minority_fraction):
    idle = int(round(idle_fraction * n_records))
    minority = max(4, int(round(minority_fraction * n_records)))
    middle = n_classes - 2
    rest = n_records - idle - minority
    if middle <= 0 or rest < middle * 4:
        raise ValidationError("class fractions leave too little data for the middle classes")
    base = rest // middle
    counts = [idle] + [base] * middle + [minority]
    counts[0] += n_records - sum(counts)  # remainder goes to idle
    return counts
