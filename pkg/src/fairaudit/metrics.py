"""Group fairness metrics over privileged/unprivileged confusion matrices,
plus the K-nearest-neighbor consistency score for individual fairness.

Metric definitions follow the source material this toolkit audits against:

- demographic parity diff   = max(|dTPR|, |dFPR|)
- equal opportunity diff    = |dTPR|
- equal accuracy diff       = |dAccuracy|
- equal odds diff           = max(|dTPR|, |dTNR|)

Note the demographic parity definition above is a TPR/FPR parity, not the
selection-rate parity most libraries call demographic parity; the standard
quantity is available as selection_rate_diff so nobody has to guess.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGroupError, InvalidArgumentError, UndefinedMetricError
from .neighbors import DistanceSpec, knn_graph

PRIVILEGED = "privileged"
UNPRIVILEGED = "unprivileged"

CONSISTENCY_FORMULAS = ("neighbor_mean", "as_printed")


@dataclass(frozen=True)
class GroupConfusion:
    group: str
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def _rate(self, num: int, den: int, name: str) -> float:
        if den == 0:
            raise UndefinedMetricError(name, self.group)
        return num / den

    @property
    def tpr(self) -> float:
        return self._rate(self.tp, self.tp + self.fn, "TPR")

    @property
    def fpr(self) -> float:
        return self._rate(self.fp, self.fp + self.tn, "FPR")

    @property
    def tnr(self) -> float:
        return self._rate(self.tn, self.fp + self.tn, "TNR")

    @property
    def accuracy(self) -> float:
        return self._rate(self.tp + self.tn, self.n, "accuracy")

    @property
    def selection_rate(self) -> float:
        return self._rate(self.tp + self.fp, self.n, "selection rate")

    def to_dict(self) -> dict:
        return {"group": self.group, "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def group_confusions(predictions, true_labels, group_membership):
    """Exact confusion counts per group.

    group_membership is boolean, True = privileged. Returns
    (privileged GroupConfusion, unprivileged GroupConfusion).
    """
    pred = np.asarray(predictions).astype(int)
    true = np.asarray(true_labels).astype(int)
    memb = np.asarray(group_membership).astype(bool)
    if not (pred.shape == true.shape == memb.shape):
        raise InvalidArgumentError(
            f"length mismatch: predictions {pred.shape}, labels {true.shape}, membership {memb.shape}"
        )
    out = []
    for name, mask in ((PRIVILEGED, memb), (UNPRIVILEGED, ~memb)):
        if not mask.any():
            raise EmptyGroupError(f"{name} group is empty; its rates are undefined")
        p, t = pred[mask], true[mask]
        out.append(GroupConfusion(
            group=name,
            tp=int(((p == 1) & (t == 1)).sum()),
            fp=int(((p == 1) & (t == 0)).sum()),
            tn=int(((p == 0) & (t == 0)).sum()),
            fn=int(((p == 0) & (t == 1)).sum()),
        ))
    return out[0], out[1]


def demographic_parity_diff(priv: GroupConfusion, unpriv: GroupConfusion) -> float:
    return max(abs(priv.tpr - unpriv.tpr), abs(priv.fpr - unpriv.fpr))


def equal_opportunity_diff(priv: GroupConfusion, unpriv: GroupConfusion) -> float:
    return abs(priv.tpr - unpriv.tpr)


def equal_accuracy_diff(priv: GroupConfusion, unpriv: GroupConfusion) -> float:
    return abs(priv.accuracy - unpriv.accuracy)


def equal_odds_diff(priv: GroupConfusion, unpriv: GroupConfusion) -> float:
    return max(abs(priv.tpr - unpriv.tpr), abs(priv.tnr - unpriv.tnr))


def selection_rate_diff(priv: GroupConfusion, unpriv: GroupConfusion) -> float:
    """|P(pred=1 | privileged) - P(pred=1 | unprivileged)|, the quantity
    usually called demographic parity elsewhere."""
    return abs(priv.selection_rate - unpriv.selection_rate)


def consistency(predictions, rows=None, n_neighbors: int = 5,
                distance_spec: DistanceSpec = DistanceSpec(),
                formula: str = "neighbor_mean",
                neighbor_indices: np.ndarray | None = None) -> float:
    """Individual-fairness consistency of binary predictions.

    neighbor_mean (default): 1 - (1/n) sum_i |y_i - mean_{j in N_k(i)} y_j|,
    bounded in [0,1] and equal to 1 for any constant predictor.

    as_printed: 1 - 1/(n*k) sum_i |y_i - sum_{j in N_k(i)} y_j|, the literal
    transcription this toolkit's source prints; kept for comparison, can
    score a constant all-ones predictor below 1.

    Pass neighbor_indices (an (n, k) array of precomputed neighbor row ids,
    self excluded) to skip the graph build; otherwise rows are required.
    """
    if formula not in CONSISTENCY_FORMULAS:
        raise InvalidArgumentError(f"unknown consistency formula {formula!r}")
    y = np.asarray(predictions, dtype=float)
    if y.ndim != 1:
        raise InvalidArgumentError("predictions must be a flat vector")
    if not np.isin(np.unique(y), (0.0, 1.0)).all():
        raise InvalidArgumentError("predictions must be binary")
    n = y.shape[0]
    if neighbor_indices is None:
        if rows is None:
            raise InvalidArgumentError("need rows or precomputed neighbor_indices")
        if n_neighbors >= n:
            raise InvalidArgumentError(f"n_neighbors={n_neighbors} must be < n={n}")
        neighbor_indices = knn_graph(np.asarray(rows, dtype=float), n_neighbors, distance_spec)
    else:
        neighbor_indices = np.asarray(neighbor_indices)
        if neighbor_indices.shape[0] != n:
            raise InvalidArgumentError("neighbor_indices rows must match predictions length")
        n_neighbors = neighbor_indices.shape[1]

    nb = y[neighbor_indices]  # (n, k)
    if formula == "neighbor_mean":
        dev = np.abs(y - nb.mean(axis=1))
        return float(1.0 - dev.mean())
    dev = np.abs(y - nb.sum(axis=1))
    return float(1.0 - dev.sum() / (n * n_neighbors))


@dataclass
class MetricReport:
    """Per-attribute group metric diffs plus the consistency score."""

    per_attribute: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    consistency: float | None = None
    n: int = 0
    n_neighbors: int | None = None

    def to_dict(self) -> dict:
        return {
            "per_attribute": self.per_attribute,
            "errors": self.errors,
            "consistency": self.consistency,
            "n": self.n,
            "n_neighbors": self.n_neighbors,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricReport":
        return cls(
            per_attribute=doc.get("per_attribute", {}),
            errors=doc.get("errors", {}),
            consistency=doc.get("consistency"),
            n=doc.get("n", 0),
            n_neighbors=doc.get("n_neighbors"),
        )


def compute_metric_report(predictions, true_labels, memberships: dict,
                          consistency_value: float | None = None,
                          n_neighbors: int | None = None) -> MetricReport:
    """Assemble a MetricReport over several protected attributes.

    memberships maps attribute name -> boolean privileged mask. Undefined
    rates and empty groups are recorded per attribute instead of aborting.
    """
    pred = np.asarray(predictions).astype(int)
    report = MetricReport(consistency=consistency_value, n=int(pred.shape[0]),
                          n_neighbors=n_neighbors)
    for attr, mask in memberships.items():
        try:
            priv, unpriv = group_confusions(pred, true_labels, mask)
            report.per_attribute[attr] = {
                "dp_diff": demographic_parity_diff(priv, unpriv),
                "eq_opp_diff": equal_opportunity_diff(priv, unpriv),
                "eq_acc_diff": equal_accuracy_diff(priv, unpriv),
                "eq_odds_diff": equal_odds_diff(priv, unpriv),
                "selection_rate_diff": selection_rate_diff(priv, unpriv),
                "privileged": priv.to_dict(),
                "unprivileged": unpriv.to_dict(),
            }
        except (UndefinedMetricError, EmptyGroupError) as e:
            report.errors[attr] = str(e)
    return report
