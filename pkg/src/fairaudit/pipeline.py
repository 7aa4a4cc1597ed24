"""CSV loading, encoding (one-hot + equal-width binning + [0,1] scaling),
seeded train/test splits, and row decoding.

Encoding layout: schema feature order; each categorical feature expands to
one column per category observed at fit time (sorted lexicographically),
each numeric feature becomes a single column holding its equal-width bin
index scaled to [0,1] by bin/(bins-1). A numeric feature with zero observed
range becomes a constant 0.0 column; a categorical feature with one observed
category becomes a constant 1.0 column.
"""

from __future__ import annotations

import csv
import gzip
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    EmptyInputError,
    InvalidArgumentError,
    NotFoundError,
    ParseError,
    SchemaError,
    TooSmallError,
)
from .schema import CATEGORICAL, NUMERIC, Schema

MISSING_TOKEN = "?"


@dataclass
class RawTable:
    """Parsed rows in schema order plus binary labels.

    rows hold category labels as strings and numeric cells as floats;
    n_dropped counts rows removed because a used cell held the missing token.
    """

    schema: Schema
    rows: list[tuple]
    labels: list[int]
    n_dropped: int = 0

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, feature: str) -> list:
        j = self.schema.feature_names.index(feature)
        return [r[j] for r in self.rows]


@dataclass(frozen=True)
class ColumnInfo:
    """Encoded column provenance: source feature and category (None = numeric bin column)."""

    feature: str
    category: str | None


def _open_text(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8", newline="")
    return open(path, encoding="utf-8", newline="")


def load_csv(path: str | Path, schema: Schema, missing_token: str = MISSING_TOKEN) -> RawTable:
    """Parse a CSV file against a schema.

    The header must contain every schema feature plus the label column;
    extra columns are ignored. Rows where any used cell equals
    missing_token are dropped and counted in RawTable.n_dropped.
    """
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"csv file not found: {p}")
    with _open_text(p) as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{p}: file is empty") from None
        header = [h.strip() for h in header]
        positions = {name: i for i, name in enumerate(header)}
        needed = schema.feature_names + [schema.label_name]
        missing = [n for n in needed if n not in positions]
        if missing:
            raise SchemaError(f"{p}: header missing columns {missing}")
        cols = [positions[n] for n in schema.feature_names]
        label_col = positions[schema.label_name]
        kinds = [f.kind for f in schema.features]

        rows: list[tuple] = []
        labels: list[int] = []
        dropped = 0
        for rn, rec in enumerate(reader, start=1):
            if not rec:
                continue
            if len(rec) != len(header):
                raise ParseError(
                    f"{p}: row {rn} has {len(rec)} cells, header has {len(header)}", row=rn
                )
            cells = [rec[c].strip() for c in cols]
            label_cell = rec[label_col].strip()
            if missing_token and (missing_token in cells or label_cell == missing_token):
                dropped += 1
                continue
            parsed = []
            for name, kind, cell in zip(schema.feature_names, kinds, cells):
                if kind == NUMERIC:
                    try:
                        parsed.append(float(cell))
                    except ValueError:
                        raise ParseError(
                            f"{p}: row {rn}, column {name!r}: cannot parse {cell!r} as numeric",
                            row=rn,
                            column=name,
                        ) from None
                else:
                    parsed.append(cell)
            rows.append(tuple(parsed))
            labels.append(1 if label_cell == schema.positive_label else 0)

    if not rows:
        if dropped:
            raise EmptyInputError(f"{p}: all {dropped} data rows dropped (missing values)")
        raise EmptyInputError(f"{p}: no data rows")
    return RawTable(schema=schema, rows=rows, labels=labels, n_dropped=dropped)


class EncodedDataset:
    """Immutable design matrix with bidirectional row/feature decoding."""

    def __init__(self, schema: Schema, matrix: np.ndarray, labels: np.ndarray,
                 column_map: tuple[ColumnInfo, ...], categories: dict, bin_edges: dict,
                 bins: int, norm_params: tuple):
        self.schema = schema
        self.matrix = matrix
        self.labels = labels
        self.column_map = column_map
        self.categories = categories      # feature -> tuple of categories (fit order)
        self.bin_edges = bin_edges        # feature -> ndarray of edges (len bins+1, or 2 if zero range)
        self.bins = bins
        self.norm_params = norm_params    # per column (min, max) used for final scaling
        self.feature_slices = {}
        start = 0
        for f in schema.features:
            width = len(categories[f.name]) if f.kind == CATEGORICAL else 1
            self.feature_slices[f.name] = (start, start + width)
            start += width
        assert start == matrix.shape[1]
        self.matrix.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]

    def column_fingerprint(self) -> str:
        """Stable hash of the encoded column layout, used to pair models with datasets."""
        doc = [
            {"feature": c.feature, "category": c.category} for c in self.column_map
        ]
        doc.append({"bins": self.bins})
        blob = json.dumps(doc, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    # -- encoding single records ------------------------------------------

    def encode_record(self, record) -> tuple[np.ndarray, list[str]]:
        """Encode one raw record (dict by feature name, or sequence in schema order).

        Unknown categories encode as an all-zero one-hot group and produce a
        warning string; numeric values outside the fitted range clamp to the
        first/last bin with a warning.
        """
        if isinstance(record, dict):
            try:
                values = [record[f.name] for f in self.schema.features]
            except KeyError as e:
                raise SchemaError(f"record missing feature {e.args[0]!r}") from None
        else:
            values = list(record)
            if len(values) != len(self.schema.features):
                raise SchemaError(
                    f"record has {len(values)} values, schema has {len(self.schema.features)} features"
                )
        vec = np.zeros(self.d)
        warnings: list[str] = []
        for f, v in zip(self.schema.features, values):
            lo, hi = self.feature_slices[f.name]
            if f.kind == CATEGORICAL:
                v = str(v)
                cats = self.categories[f.name]
                if v in cats:
                    vec[lo + cats.index(v)] = 1.0
                else:
                    warnings.append(f"unknown category {v!r} for feature {f.name!r}; encoded as all zeros")
            else:
                try:
                    x = float(v)
                except (TypeError, ValueError):
                    raise ParseError(f"feature {f.name!r}: cannot parse {v!r} as numeric", column=f.name) from None
                edges = self.bin_edges[f.name]
                e_lo, e_hi = edges[0], edges[-1]
                if e_lo == e_hi:
                    vec[lo] = 0.0
                    continue
                if x < e_lo or x > e_hi:
                    warnings.append(
                        f"value {x:g} outside fitted range [{e_lo:g},{e_hi:g}] for feature {f.name!r}; clamped"
                    )
                b = _bin_index(x, e_lo, e_hi, self.bins)
                vec[lo] = b / (self.bins - 1)
        return vec, warnings

    # -- decoding ----------------------------------------------------------

    def categorical_value(self, vec: np.ndarray, feature: str) -> str | None:
        """Category encoded in vec for a categorical feature, or None if the group is all zero."""
        lo, hi = self.feature_slices[feature]
        group = vec[lo:hi]
        j = int(np.argmax(group))
        if group[j] < 0.5:
            return None
        return self.categories[feature][j]

    def numeric_bin(self, vec: np.ndarray, feature: str) -> int:
        lo, _ = self.feature_slices[feature]
        edges = self.bin_edges[feature]
        if edges[0] == edges[-1]:
            return 0
        return int(round(float(vec[lo]) * (self.bins - 1)))

    def bin_interval(self, feature: str, b: int) -> str:
        """Human-readable interval for bin b of a numeric feature: "[lo,hi)", last bin closed."""
        edges = self.bin_edges[feature]
        if edges[0] == edges[-1]:
            return f"[{edges[0]:g},{edges[0]:g}]"
        lo, hi = edges[b], edges[b + 1]
        closer = "]" if b == self.bins - 1 else ")"
        return f"[{lo:g},{hi:g}{closer}"

    def decode_vector(self, vec: np.ndarray) -> dict:
        """Decode an encoded vector to {feature: category or bin interval}."""
        if vec.shape != (self.d,):
            raise InvalidArgumentError(f"expected vector of dimension {self.d}, got {vec.shape}")
        out = {}
        for f in self.schema.features:
            if f.kind == CATEGORICAL:
                v = self.categorical_value(vec, f.name)
                out[f.name] = v if v is not None else "<unknown>"
            else:
                out[f.name] = self.bin_interval(f.name, self.numeric_bin(vec, f.name))
        return out

    def decode_row(self, row_index: int) -> dict:
        if not 0 <= row_index < self.n:
            raise NotFoundError(f"row index {row_index} out of range [0,{self.n})")
        return self.decode_vector(self.matrix[row_index])


def _bin_index(x: float, lo: float, hi: float, bins: int) -> int:
    b = int(math.floor((x - lo) * bins / (hi - lo)))
    return min(bins - 1, max(0, b))


def encode(table: RawTable, bins: int = 10) -> EncodedDataset:
    """One-hot categoricals, bin + scale numerics. See module docstring for layout."""
    if bins < 2:
        raise InvalidArgumentError(f"bins must be >= 2, got {bins}")
    if not table.rows:
        raise EmptyInputError("cannot encode an empty table")

    schema = table.schema
    n = len(table.rows)
    columns: list[np.ndarray] = []
    column_map: list[ColumnInfo] = []
    categories: dict[str, tuple] = {}
    bin_edges: dict[str, np.ndarray] = {}
    norm_params: list[tuple] = []

    for j, f in enumerate(schema.features):
        col = [r[j] for r in table.rows]
        if f.kind == CATEGORICAL:
            cats = tuple(sorted(set(col)))
            categories[f.name] = cats
            for c in cats:
                columns.append(np.fromiter((1.0 if v == c else 0.0 for v in col), dtype=float, count=n))
                column_map.append(ColumnInfo(f.name, c))
                norm_params.append((0.0, 1.0))
        else:
            categories[f.name] = ()
            lo = min(col)
            hi = max(col)
            if lo == hi:
                bin_edges[f.name] = np.array([lo, hi])
                columns.append(np.zeros(n))
                norm_params.append((0.0, 0.0))
            else:
                bin_edges[f.name] = lo + np.arange(bins + 1) * (hi - lo) / bins
                idx = np.fromiter((_bin_index(v, lo, hi, bins) for v in col), dtype=float, count=n)
                columns.append(idx / (bins - 1))
                norm_params.append((0.0, float(bins - 1)))
            column_map.append(ColumnInfo(f.name, None))

    matrix = np.column_stack(columns)
    assert matrix.min() >= 0.0 and matrix.max() <= 1.0
    return EncodedDataset(
        schema=schema,
        matrix=matrix,
        labels=np.asarray(table.labels, dtype=np.int8),
        column_map=tuple(column_map),
        categories=categories,
        bin_edges=bin_edges,
        bins=bins,
        norm_params=tuple(norm_params),
    )


# -- train/test split ------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int):
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)), state


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    seed: int

    def __post_init__(self):
        self.train.setflags(write=False)
        self.test.setflags(write=False)


def split(dataset: EncodedDataset, seed: int) -> SplitIndices:
    """Deterministic 80/20 split: SplitMix64-driven Fisher-Yates shuffle,
    then a prefix cut with |train| = floor(0.8*n + 0.5) (round half up).

    The shuffle is implemented here rather than borrowed from a library so
    the same seed produces the same split under any numpy version.
    """
    n = dataset.n
    if n < 5:
        raise TooSmallError(f"need at least 5 rows to split, got {n}")
    perm = list(range(n))
    state = seed & _MASK64
    for i in range(n - 1, 0, -1):
        r, state = _splitmix64(state)
        j = r % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    n_train = int(math.floor(0.8 * n + 0.5))
    return SplitIndices(
        train=np.asarray(perm[:n_train], dtype=np.int64),
        test=np.asarray(perm[n_train:], dtype=np.int64),
        seed=seed,
    )


def decode_row(dataset: EncodedDataset, row_index: int) -> dict:
    """Module-level alias of EncodedDataset.decode_row."""
    return dataset.decode_row(row_index)


def raw_record(table: RawTable, row_index: int) -> dict:
    """Raw (pre-encoding) record by global row index, values as loaded."""
    if not 0 <= row_index < len(table.rows):
        raise NotFoundError(f"row index {row_index} out of range [0,{len(table.rows)})")
    row = table.rows[row_index]
    out = {}
    for f, v in zip(table.schema.features, row):
        out[f.name] = f"{v:g}" if isinstance(v, float) else v
    return out
