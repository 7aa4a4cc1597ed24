"""Rebuild data/adult.csv.gz from the ethicml PyPI wheel.

The ethicml package bundles the UCI Adult census-income data as a one-hot
encoded CSV (45,222 rows; rows containing missing "?" values already removed).
This script inverts the one-hot encoding back to the original 15 raw columns
and writes a gzipped CSV suitable for the loader.

Usage:
    python scripts/make_adult_csv.py [--wheel PATH] [--index-url URL] [--out PATH]

With no --wheel it runs `pip download ethicml==1.3.0 --no-deps` into a temp
directory first.
"""

from __future__ import annotations

import argparse
import csv
import gzip
import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

ETHICML_VERSION = "1.3.0"
INNER_PATH = "ethicml/data/csvs/adult.csv.zip"

# Raw UCI column order; group -> one-hot prefix in the ethicml CSV.
RAW_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]
NUMERIC = {"age", "fnlwgt", "education-num", "capital-gain", "capital-loss", "hours-per-week"}
PREFIXES = {
    "workclass": "workclass_", "education": "education_",
    "marital-status": "marital-status_", "occupation": "occupation_",
    "relationship": "relationship_", "race": "race_", "sex": "sex_",
    "native-country": "native-country_", "income": "salary_",
}


def download_wheel(index_url: str | None, dest: Path) -> Path:
    cmd = [sys.executable, "-m", "pip", "download", f"ethicml=={ETHICML_VERSION}",
           "--no-deps", "--no-build-isolation", "-d", str(dest)]
    if index_url:
        cmd += ["--index-url", index_url]
    subprocess.run(cmd, check=True)
    wheels = list(dest.glob("ethicml-*.whl"))
    if not wheels:
        raise FileNotFoundError(f"no ethicml wheel in {dest}")
    return wheels[0]


def load_onehot_rows(wheel: Path):
    with zipfile.ZipFile(wheel) as wz:
        inner = wz.read(INNER_PATH)
    with zipfile.ZipFile(io.BytesIO(inner)) as dz:
        with dz.open("adult.csv") as f:
            text = io.TextIOWrapper(f, encoding="utf-8")
            reader = csv.reader(text)
            header = next(reader)
            rows = list(reader)
    return header, rows


def invert(header: list[str], rows: list[list[str]]) -> list[list[str]]:
    col_idx = {name: i for i, name in enumerate(header)}
    # categorical column -> list of (raw_value, one-hot column index)
    groups: dict[str, list[tuple[str, int]]] = {}
    for raw_col, prefix in PREFIXES.items():
        members = [(name[len(prefix):], i) for name, i in col_idx.items()
                   if name.startswith(prefix)]
        if not members:
            raise ValueError(f"no one-hot columns with prefix {prefix!r}")
        groups[raw_col] = members

    out = []
    for rn, row in enumerate(rows):
        rec = []
        for raw_col in RAW_COLUMNS:
            if raw_col in NUMERIC:
                v = row[col_idx[raw_col]]
                # values are stored as floats ("39.0"); they are all integers
                f = float(v)
                if f != int(f):
                    raise ValueError(f"row {rn}: non-integer {raw_col}={v}")
                rec.append(str(int(f)))
            else:
                hot = [val for val, i in groups[raw_col] if float(row[i]) == 1.0]
                if len(hot) != 1:
                    raise ValueError(f"row {rn}: {raw_col} has {len(hot)} active categories")
                rec.append(hot[0])
        out.append(rec)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wheel", type=Path, default=None,
                    help="path to a local ethicml wheel (skips download)")
    ap.add_argument("--index-url", default=None, help="pip index to download from")
    ap.add_argument("--out", type=Path,
                    default=Path(__file__).resolve().parent.parent / "data" / "adult.csv.gz")
    args = ap.parse_args()

    if args.wheel is not None:
        wheel = args.wheel
    else:
        tmp = Path(tempfile.mkdtemp(prefix="adult_wheel_"))
        wheel = download_wheel(args.index_url, tmp)

    header, rows = load_onehot_rows(wheel)
    records = invert(header, rows)
    print(f"inverted {len(records)} rows")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    # mtime=0 keeps the gzip output byte-reproducible
    with gzip.GzipFile(args.out, "wb", mtime=0) as gz:
        text = io.TextIOWrapper(gz, encoding="utf-8", newline="")
        w = csv.writer(text, lineterminator="\n")
        w.writerow(RAW_COLUMNS)
        w.writerows(records)
        text.flush()
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
