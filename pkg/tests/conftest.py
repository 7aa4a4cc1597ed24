import numpy as np
import pytest

from fairaudit.pipeline import RawTable, encode
from fairaudit.schema import FeatureSpec, Schema


@pytest.fixture
def loan_schema():
    return Schema(
        features=(
            FeatureSpec("group", "categorical", protected=True, privileged_value="A"),
            FeatureSpec("city", "categorical"),
            FeatureSpec("score", "numeric"),
        ),
        label_name="approved",
        positive_label="yes",
    )


@pytest.fixture
def loan_table(loan_schema):
    rows = [
        ("A", "north", 0.9),
        ("A", "north", 0.8),
        ("A", "south", 0.4),
        ("A", "south", 0.1),
        ("B", "north", 0.85),
        ("B", "north", 0.75),
        ("B", "south", 0.3),
        ("B", "south", 0.2),
        ("B", "east", 0.6),
        ("A", "east", 0.5),
    ]
    labels = [1, 1, 0, 0, 1, 0, 0, 0, 1, 1]
    return RawTable(schema=loan_schema, rows=rows, labels=labels, n_dropped=0)


@pytest.fixture
def loan_dataset(loan_table):
    return encode(loan_table, bins=5)


def random_dataset(rng: np.random.Generator, n: int, d: int):
    """Random continuous matrix for distance tests; occasional duplicate rows
    so exact ties actually occur."""
    X = rng.random((n, d))
    if n >= 4:
        X[n // 2] = X[0]
        X[n - 1] = X[1]
    return X


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(str(v) for v in row) + "\n")
    return str(path)
