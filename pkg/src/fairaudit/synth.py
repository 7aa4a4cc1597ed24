"""Synthetic table generators for exercising the audit machinery.

Two extremes: a dataset whose label IS the protected attribute (every
competent model discriminates) and one whose label ignores it entirely.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .pipeline import RawTable
from .schema import FeatureSpec, Schema

COLORS = ("blue", "green", "red")


def _distractors(rng, n):
    color = rng.choice(COLORS, size=n)
    score = rng.random(n)
    hours = rng.integers(10, 60, size=n).astype(float)
    return color, score, hours


def make_protected_determined(n: int = 400, seed: int = 0, label_noise: float = 0.0):
    """Label = 1 iff the protected attribute holds its privileged value.

    Returns (RawTable, Schema). The distractor features carry no signal, so
    a trained classifier must key on the protected column.
    """
    rng = np.random.default_rng(seed)
    schema = Schema(
        features=(
            FeatureSpec("group", "categorical", protected=True, privileged_value="A"),
            FeatureSpec("color", "categorical"),
            FeatureSpec("score", "numeric"),
            FeatureSpec("hours", "numeric"),
        ),
        label_name="outcome",
        positive_label="good",
    )
    group = rng.choice(("A", "B"), size=n)
    color, score, hours = _distractors(rng, n)
    labels = (group == "A").astype(int)
    if label_noise > 0:
        flips = rng.random(n) < label_noise
        labels = np.where(flips, 1 - labels, labels)
    rows = [(g, c, float(s), float(h)) for g, c, s, h in zip(group, color, score, hours)]
    return RawTable(schema=schema, rows=rows, labels=[int(v) for v in labels]), schema


def make_protected_blind(n: int = 400, seed: int = 0):
    """Label = 1 iff score > 0.5; the protected attribute is independent noise."""
    rng = np.random.default_rng(seed)
    schema = Schema(
        features=(
            FeatureSpec("group", "categorical", protected=True, privileged_value="A"),
            FeatureSpec("color", "categorical"),
            FeatureSpec("score", "numeric"),
            FeatureSpec("hours", "numeric"),
        ),
        label_name="outcome",
        positive_label="good",
    )
    group = rng.choice(("A", "B"), size=n)
    color, score, hours = _distractors(rng, n)
    labels = (score > 0.5).astype(int)
    rows = [(g, c, float(s), float(h)) for g, c, s, h in zip(group, color, score, hours)]
    return RawTable(schema=schema, rows=rows, labels=[int(v) for v in labels]), schema


def write_table_csv(table: RawTable, path: str | Path) -> Path:
    """Materialize a RawTable as a CSV file the loader can read back."""
    p = Path(path)
    schema = table.schema
    with open(p, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(schema.feature_names + [schema.label_name])
        neg = f"not_{schema.positive_label}"
        for row, y in zip(table.rows, table.labels):
            cells = [f"{v:g}" if isinstance(v, float) else v for v in row]
            w.writerow(cells + [schema.positive_label if y == 1 else neg])
    return p
