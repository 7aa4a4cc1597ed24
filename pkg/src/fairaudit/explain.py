"""Instance explanations: K nearest positively-labeled training neighbors,
per-feature difference analysis, the protected-attribute flip counterfactual,
and the flag verdict.

The flag rule has two clauses:
  (a) neighbor-diff: at least one protected feature differs from the
      neighbor majority and at most config.max_unprotected_diffs
      unprotected features differ;
  (b) flip: simultaneously reassigning every protected attribute changes
      the model's prediction.
flag_mode picks how the verdict uses them: "conjunctive" needs both (one
alone is inconclusive), "neighbor_only" and "flip_only" use a single clause.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientPositivesError, InvalidArgumentError
from .neighbors import DistanceSpec, NeighborSet, nearest_neighbors
from .pipeline import EncodedDataset, RawTable, raw_record
from .schema import CATEGORICAL, Schema

FLAG_MODES = ("conjunctive", "neighbor_only", "flip_only")
VERDICTS = ("unfair", "fair", "inconclusive")
SEARCH_SPACES = ("unprotected", "all_features")


@dataclass(frozen=True)
class ExplainConfig:
    k: int = 5
    distance: DistanceSpec = DistanceSpec()
    flag_mode: str = "conjunctive"
    numeric_tol_bins: int = 1
    max_unprotected_diffs: int = 0
    # "unprotected" zeroes the protected one-hot columns for the neighbor
    # SEARCH only: neighbors are people alike in everything except the
    # protected attributes, which is what the comparison is probing. The
    # reported diffs, flip test and records always use the real values.
    search_space: str = "unprotected"

    def __post_init__(self):
        if self.k < 1:
            raise InvalidArgumentError(f"k must be >= 1, got {self.k}")
        if self.flag_mode not in FLAG_MODES:
            raise InvalidArgumentError(f"unknown flag_mode {self.flag_mode!r}; choose from {FLAG_MODES}")
        if self.numeric_tol_bins < 0:
            raise InvalidArgumentError("numeric_tol_bins must be >= 0")
        if self.max_unprotected_diffs < 0:
            raise InvalidArgumentError("max_unprotected_diffs must be >= 0")
        if self.search_space not in SEARCH_SPACES:
            raise InvalidArgumentError(
                f"unknown search_space {self.search_space!r}; choose from {SEARCH_SPACES}")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "distance": self.distance.to_dict(),
            "flag_mode": self.flag_mode,
            "numeric_tol_bins": self.numeric_tol_bins,
            "max_unprotected_diffs": self.max_unprotected_diffs,
            "search_space": self.search_space,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExplainConfig":
        return cls(
            k=int(doc.get("k", 5)),
            distance=DistanceSpec.from_dict(doc.get("distance", {})),
            flag_mode=doc.get("flag_mode", "conjunctive"),
            numeric_tol_bins=int(doc.get("numeric_tol_bins", 1)),
            max_unprotected_diffs=int(doc.get("max_unprotected_diffs", 0)),
            search_space=doc.get("search_space", "unprotected"),
        )


@dataclass(frozen=True)
class FeatureDiff:
    feature: str
    protected: bool
    query_value: str
    neighbor_majority_value: str
    differs: bool

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "protected": self.protected,
            "query_value": self.query_value,
            "neighbor_majority_value": self.neighbor_majority_value,
            "differs": self.differs,
        }


@dataclass(frozen=True)
class FlipResult:
    original_prediction: int
    flipped_assignments: dict
    flipped_prediction: int
    changed: bool

    def to_dict(self) -> dict:
        return {
            "original_prediction": self.original_prediction,
            "flipped_assignments": dict(self.flipped_assignments),
            "flipped_prediction": self.flipped_prediction,
            "changed": self.changed,
        }


@dataclass(frozen=True)
class Explanation:
    query_index: int | None
    query_record: dict
    prediction: int
    neighbors: tuple            # of {"index", "record", "label", "distance"}
    feature_diffs: tuple        # of FeatureDiff
    flip: FlipResult | None
    verdict: str
    rule_trace: tuple

    def to_dict(self) -> dict:
        return {
            "query_index": self.query_index,
            "query_record": dict(self.query_record),
            "prediction": self.prediction,
            "neighbors": [dict(n) for n in self.neighbors],
            "feature_diffs": [d.to_dict() for d in self.feature_diffs],
            "flip": self.flip.to_dict() if self.flip is not None else None,
            "verdict": self.verdict,
            "rule_trace": list(self.rule_trace),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Explanation":
        flip = doc.get("flip")
        return cls(
            query_index=doc.get("query_index"),
            query_record=doc["query_record"],
            prediction=doc["prediction"],
            neighbors=tuple(doc.get("neighbors", [])),
            feature_diffs=tuple(FeatureDiff(**d) for d in doc.get("feature_diffs", [])),
            flip=FlipResult(
                original_prediction=flip["original_prediction"],
                flipped_assignments=flip["flipped_assignments"],
                flipped_prediction=flip["flipped_prediction"],
                changed=flip["changed"],
            ) if flip else None,
            verdict=doc["verdict"],
            rule_trace=tuple(doc.get("rule_trace", [])),
        )


def nearest_positive_neighbors(query_row, train_matrix, train_labels, k: int,
                               distance_spec: DistanceSpec = DistanceSpec(),
                               zero_columns=None) -> NeighborSet:
    """The k nearest positive-label training rows.

    neighbor_indices are positions within train_matrix; ties in distance go
    to the lower position, which also means the lower original row order.
    zero_columns, when given, is a column index/mask whose entries are
    zeroed in both the query and the candidates before the search, so those
    columns contribute nothing to the distances.
    """
    labels = np.asarray(train_labels)
    pos = np.flatnonzero(labels == 1)
    if pos.shape[0] < k:
        raise InsufficientPositivesError(
            f"need {k} positive-label training rows, found {pos.shape[0]}"
        )
    X = np.asarray(train_matrix, dtype=float)[pos]
    q = np.asarray(query_row, dtype=float)[None, :]
    if zero_columns is not None:
        X = X.copy()
        X[:, zero_columns] = 0.0
        q = q.copy()
        q[:, zero_columns] = 0.0
    idx, dst = nearest_neighbors(q, X, k, distance_spec)
    return NeighborSet(
        query_index=None,
        neighbor_indices=tuple(int(pos[j]) for j in idx[0]),
        distances=tuple(float(v) for v in dst[0]),
    )


def protected_column_mask(dataset: EncodedDataset) -> np.ndarray:
    """Boolean mask over encoded columns, True on protected one-hot groups."""
    mask = np.zeros(dataset.d, dtype=bool)
    for f in dataset.schema.protected_features:
        lo, hi = dataset.feature_slices[f.name]
        mask[lo:hi] = True
    return mask


def feature_difference_analysis(dataset: EncodedDataset, query_vec, neighbor_vecs,
                                numeric_tol: int = 1) -> tuple:
    """Per-feature comparison of a query against its neighbor set.

    Categorical: differs iff the query's category is not in the neighbors'
    majority set (the most frequent value or values). Numeric: differs iff
    the query's bin lies outside the neighbors' [min,max] bin range widened
    by numeric_tol bins on both sides.
    """
    q = np.asarray(query_vec, dtype=float)
    nbrs = [np.asarray(v, dtype=float) for v in neighbor_vecs]
    if not nbrs:
        raise InvalidArgumentError("need at least one neighbor")
    diffs = []
    for f in dataset.schema.features:
        if f.kind == CATEGORICAL:
            qv = dataset.categorical_value(q, f.name)
            votes = Counter(dataset.categorical_value(v, f.name) for v in nbrs)
            top = max(votes.values())
            majority = {v for v, c in votes.items() if c == top}
            differs = qv not in majority
            diffs.append(FeatureDiff(
                feature=f.name,
                protected=f.protected,
                query_value=qv if qv is not None else "<unknown>",
                neighbor_majority_value=min(v for v in majority if v is not None)
                if any(v is not None for v in majority) else "<unknown>",
                differs=differs,
            ))
        else:
            qb = dataset.numeric_bin(q, f.name)
            nb_bins = [dataset.numeric_bin(v, f.name) for v in nbrs]
            lo, hi = min(nb_bins) - numeric_tol, max(nb_bins) + numeric_tol
            votes = Counter(nb_bins)
            top = max(votes.values())
            majority_bin = min(b for b, c in votes.items() if c == top)
            diffs.append(FeatureDiff(
                feature=f.name,
                protected=f.protected,
                query_value=dataset.bin_interval(f.name, qb),
                neighbor_majority_value=dataset.bin_interval(f.name, majority_bin),
                differs=qb < lo or qb > hi,
            ))
    return tuple(diffs)


def compute_flip_targets(table: RawTable, train_indices, schema: Schema) -> dict:
    """For each protected attribute, the unprivileged category a privileged
    query flips to: the most frequent unprivileged value among training
    rows, ties broken lexicographically."""
    out = {}
    idx = set(int(i) for i in np.asarray(train_indices))
    for f in schema.protected_features:
        col = schema.feature_names.index(f.name)
        votes = Counter(
            row[col] for i, row in enumerate(table.rows)
            if i in idx and row[col] != f.privileged_value
        )
        if not votes:
            raise InvalidArgumentError(
                f"no unprivileged {f.name!r} values in the training rows; cannot pick a flip target"
            )
        top = max(votes.values())
        out[f.name] = min(v for v, c in votes.items() if c == top)
    return out


def flip_matrix(dataset: EncodedDataset, vecs: np.ndarray, targets: dict):
    """Reassign every protected attribute for a batch of encoded rows.

    Unprivileged (or unknown) values become the privileged value;
    privileged values become targets[feature]. Returns the flipped copy and
    one {feature: assigned category} dict per row.
    """
    V = np.atleast_2d(np.asarray(vecs, dtype=float)).copy()
    m = V.shape[0]
    assignments = [dict() for _ in range(m)]
    for f in dataset.schema.protected_features:
        lo, hi = dataset.feature_slices[f.name]
        cats = dataset.categories[f.name]
        priv_col = lo + cats.index(f.privileged_value)
        target = targets[f.name]
        target_col = lo + cats.index(target)
        was_priv = V[:, priv_col] == 1.0
        V[:, lo:hi] = 0.0
        V[was_priv, target_col] = 1.0
        V[~was_priv, priv_col] = 1.0
        for r in range(m):
            assignments[r][f.name] = target if was_priv[r] else f.privileged_value
    return V, assignments


def flip_protected(query_row, model, dataset: EncodedDataset, targets: dict) -> FlipResult:
    """Flip every protected attribute at once and re-predict.

    On predictions this is an involution when each protected attribute is
    binary; with more than two categories a privileged query flips to the
    modal unprivileged value, which need not be the value it started from.
    """
    q = np.asarray(query_row, dtype=float)
    flipped, assignments = flip_matrix(dataset, q[None, :], targets)
    orig = int(model.predict(q))
    new = int(model.predict(flipped[0]))
    return FlipResult(
        original_prediction=orig,
        flipped_assignments=assignments[0],
        flipped_prediction=new,
        changed=orig != new,
    )


def _verdict(clause_a: bool, clause_b: bool, mode: str):
    if mode == "neighbor_only":
        return "unfair" if clause_a else "fair"
    if mode == "flip_only":
        return "unfair" if clause_b else "fair"
    if clause_a and clause_b:
        return "unfair"
    if clause_a or clause_b:
        return "inconclusive"
    return "fair"


class Explainer:
    """Holds the immutable context (dataset, train split, model, config) so
    many queries can be explained without re-deriving anything."""

    def __init__(self, dataset: EncodedDataset, train_indices, model,
                 config: ExplainConfig = ExplainConfig(), table: RawTable | None = None):
        self.dataset = dataset
        self.train_indices = np.asarray(train_indices, dtype=np.int64)
        self.model = model
        self.config = config
        self.table = table
        self.train_matrix = dataset.matrix[self.train_indices]
        self.train_labels = dataset.labels[self.train_indices]
        pos = np.flatnonzero(self.train_labels == 1)
        self.pos_global = self.train_indices[pos]
        self.pos_matrix = self.train_matrix[pos]
        if config.search_space == "unprotected":
            self.search_mask = protected_column_mask(dataset)
            self.search_matrix = self.pos_matrix.copy()
            self.search_matrix[:, self.search_mask] = 0.0
        else:
            self.search_mask = None
            self.search_matrix = self.pos_matrix
        if table is None:
            raise InvalidArgumentError("Explainer needs the raw table to render records and pick flip targets")
        self.flip_targets = compute_flip_targets(table, self.train_indices, dataset.schema)

    def _record(self, global_index: int) -> dict:
        return raw_record(self.table, global_index)

    def explain(self, query_vec, query_index: int | None = None,
                query_record: dict | None = None) -> Explanation:
        return self.explain_batch(
            np.asarray(query_vec, dtype=float)[None, :],
            [query_index], [query_record],
        )[0]

    def explain_batch(self, query_vecs, query_indices=None, query_records=None) -> list:
        """Explain many queries at once; one neighbor search and one flip
        prediction pass for the whole batch."""
        Q = np.atleast_2d(np.asarray(query_vecs, dtype=float))
        m = Q.shape[0]
        if query_indices is None:
            query_indices = [None] * m
        if query_records is None:
            query_records = [None] * m
        cfg = self.config
        if self.pos_matrix.shape[0] < cfg.k:
            raise InsufficientPositivesError(
                f"need {cfg.k} positive-label training rows, found {self.pos_matrix.shape[0]}"
            )

        preds = np.asarray(self.model.predict(Q)).reshape(m)
        neg = np.flatnonzero(preds == 0)
        if neg.shape[0]:
            Qs = Q[neg]
            if self.search_mask is not None:
                Qs = Qs.copy()
                Qs[:, self.search_mask] = 0.0
            nb_idx, nb_dst = nearest_neighbors(Qs, self.search_matrix, cfg.k, cfg.distance)
            flipped, assignments = flip_matrix(self.dataset, Q[neg], self.flip_targets)
            flip_preds = np.asarray(self.model.predict(flipped)).reshape(neg.shape[0])
        out: list[Explanation] = []
        neg_pos = {int(g): i for i, g in enumerate(neg)}
        for r in range(m):
            qi = query_indices[r]
            rec = query_records[r]
            if rec is None:
                rec = (self._record(qi) if qi is not None
                       else self.dataset.decode_vector(Q[r]))
            if preds[r] == 1:
                out.append(Explanation(
                    query_index=qi, query_record=rec, prediction=1,
                    neighbors=(), feature_diffs=(), flip=None,
                    verdict="fair", rule_trace=(),
                ))
                continue
            j = neg_pos[r]
            global_nb = [int(self.pos_global[c]) for c in nb_idx[j]]
            neighbors = tuple(
                {
                    "index": g,
                    "record": self._record(g),
                    "label": int(self.dataset.labels[g]),
                    "distance": float(d),
                }
                for g, d in zip(global_nb, nb_dst[j])
            )
            nb_vecs = self.dataset.matrix[global_nb]
            diffs = feature_difference_analysis(self.dataset, Q[r], nb_vecs, cfg.numeric_tol_bins)
            flip = FlipResult(
                original_prediction=0,
                flipped_assignments=assignments[j],
                flipped_prediction=int(flip_preds[j]),
                changed=bool(flip_preds[j] != 0),
            )

            prot_diffs = [d.feature for d in diffs if d.differs and d.protected]
            unprot_diffs = [d.feature for d in diffs if d.differs and not d.protected]
            clause_a = bool(prot_diffs) and len(unprot_diffs) <= cfg.max_unprotected_diffs
            clause_b = flip.changed
            trace = []
            if clause_a:
                trace.append(
                    "neighbor-diff: protected features "
                    f"{sorted(prot_diffs)} differ from the neighbor majority; "
                    f"{len(unprot_diffs)} unprotected differences (allowed {cfg.max_unprotected_diffs})"
                )
            if clause_b:
                flip_desc = ", ".join(f"{k}={v}" for k, v in sorted(flip.flipped_assignments.items()))
                trace.append(f"flip: reassigning [{flip_desc}] changed prediction 0 -> 1")
            out.append(Explanation(
                query_index=qi, query_record=rec, prediction=0,
                neighbors=neighbors, feature_diffs=diffs, flip=flip,
                verdict=_verdict(clause_a, clause_b, cfg.flag_mode),
                rule_trace=tuple(trace),
            ))
        return out


def explain(query_row, dataset: EncodedDataset, train_indices, model,
            config: ExplainConfig = ExplainConfig(), table: RawTable | None = None,
            query_index: int | None = None, query_record: dict | None = None) -> Explanation:
    """One-off single-query convenience wrapper around Explainer."""
    ex = Explainer(dataset, train_indices, model, config, table=table)
    return ex.explain(query_row, query_index=query_index, query_record=query_record)


def render_explanation_text(expl: Explanation) -> str:
    """Plain-text neighbor-comparison table: neighbor rows first, query row
    last, differing cells on the query row marked with a `*` prefix."""
    lines = []
    if expl.prediction == 1:
        lines.append(f"query {expl.query_index if expl.query_index is not None else '(inline)'}: "
                     "verdict: fair (positive prediction)")
        return "\n".join(lines) + "\n"

    features = [d.feature for d in expl.feature_diffs]
    differs = {d.feature for d in expl.feature_diffs if d.differs}
    header = ["row"] + features + ["outcome"]
    rows = []
    for n in expl.neighbors:
        rec = n["record"]
        rows.append([f"train#{n['index']}"] + [str(rec.get(f, "")) for f in features]
                    + ["positive" if n["label"] == 1 else "negative"])
    qcells = []
    for f in features:
        val = str(expl.query_record.get(f, ""))
        qcells.append(("*" + val) if f in differs else val)
    qname = f"query#{expl.query_index}" if expl.query_index is not None else "query"
    rows.append([qname] + qcells + ["negative (predicted)"])

    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(len(header))]
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths))
    lines.append(fmt(header))
    lines.append(fmt(["-" * w for w in widths]))
    for r in rows[:-1]:
        lines.append(fmt(r))
    lines.append(fmt(rows[-1]))
    lines.append("")
    if expl.flip is not None:
        desc = ", ".join(f"{k} -> {v}" for k, v in sorted(expl.flip.flipped_assignments.items()))
        state = "changed" if expl.flip.changed else "unchanged"
        lines.append(
            f"flip [{desc}]: prediction {expl.flip.original_prediction} -> "
            f"{expl.flip.flipped_prediction} ({state})"
        )
    lines.append(f"verdict: {expl.verdict}")
    for t in expl.rule_trace:
        lines.append(f"  - {t}")
    return "\n".join(lines) + "\n"
