"""Walk a tiny loan table from raw CSV to a trained classifier.

Covers the data layer end to end: schema declaration, CSV loading with
missing-value handling, one-hot + binned encoding, the deterministic
train/test split, and logistic regression training with a finite-difference
sanity check on the gradient.
"""

import tempfile
from pathlib import Path

from fairaudit.model import gradient_check, train_logistic
from fairaudit.pipeline import decode_row, encode, load_csv, raw_record, split
from fairaudit.schema import FeatureSpec, Schema

CSV_TEXT = """\
group,city,score,approved
A,east,0.82,yes
A,north,0.82,yes
B,east,0.30,no
B,south,0.11,no
A,south,0.83,yes
B,north,0.85,no
A,east,?,no
B,south,0.10,no
A,north,0.66,yes
B,east,0.50,yes
"""


def main():
    schema = Schema(
        features=(
            FeatureSpec("group", "categorical", protected=True, privileged_value="A"),
            FeatureSpec("city", "categorical"),
            FeatureSpec("score", "numeric"),
        ),
        label_name="approved",
        positive_label="yes",
    )

    workdir = Path(tempfile.mkdtemp(prefix="demo01_"))
    csv_path = workdir / "loans.csv"
    csv_path.write_text(CSV_TEXT)

    table = load_csv(csv_path, schema)
    print(f"loaded {len(table.rows)} rows ({table.n_dropped} dropped for missing values)")
    print("row 0 raw:", raw_record(table, 0))

    dataset = encode(table, bins=4)
    print(f"\nencoded to {dataset.n} x {dataset.d} matrix")
    for name, (lo, hi) in dataset.feature_slices.items():
        print(f"  columns {lo}..{hi - 1}: {name}")
    print("row 0 encoded:", dataset.matrix[0])
    print("row 0 decoded back:", decode_row(dataset, 0))

    parts = split(dataset, seed=0)
    print(f"\nsplit seed 0: {parts.train.shape[0]} train / {parts.test.shape[0]} test")

    model = train_logistic(dataset.matrix[parts.train], dataset.labels[parts.train])
    test_pred = model.predict(dataset.matrix[parts.test])
    acc = float((test_pred == dataset.labels[parts.test]).mean())
    print(f"trained in {model.epochs_run} epochs, final loss {model.final_loss:.4f}")
    print(f"test accuracy: {acc:.2f}")

    deviation = gradient_check(model, dataset.matrix[parts.train], dataset.labels[parts.train])
    print(f"gradient vs finite differences: max relative deviation {deviation:.2e}")


if __name__ == "__main__":
    main()
