"""Audit orchestration: multi-seed splits, training, per-instance
explanation, relabel proposals, pre/post-mitigation metrics, and the
versioned JSON report.

Per seed the audit: splits 80/20, trains (or adapts) the model, predicts
the test set, explains every negatively-predicted test instance, counts
flags and flip changes, proposes relabels for the flagged ones, and
computes group metrics plus consistency twice - as-is and under the
"every proposal accepted" counterfactual. The first seed in the list is
the review seed: its explanations and proposals embed in the report so
the review service and console can serve them without recomputation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import ConfigError, InvalidArgumentError
from .explain import ExplainConfig, Explainer, flip_matrix
from .metrics import MetricReport, compute_metric_report, consistency
from .mitigation import RelabelProposal
from .model import LogisticModel, SubprocessModel, TrainingConfig, train_logistic
from .neighbors import DistanceSpec, knn_graph, nearest_neighbors
from .pipeline import EncodedDataset, RawTable, encode, load_csv, split
from .schema import Schema, load_schema

REPORT_FORMAT_VERSION = 1

MODEL_SOURCES = ("logistic", "blinded_logistic", "external")
CONSISTENCY_SCOPES = ("full", "test", "none")


@dataclass(frozen=True)
class AuditConfig:
    schema_path: str
    csv_path: str
    seeds: tuple[int, ...] = tuple(range(10))
    k: int = 5
    bins: int = 10
    distance: DistanceSpec = DistanceSpec()
    flag_mode: str = "conjunctive"
    numeric_tol_bins: int = 1
    max_unprotected_diffs: int = 0
    search_space: str = "unprotected"
    training: TrainingConfig = TrainingConfig()
    threshold: float = 0.5
    model_source: str = "logistic"
    external_command: tuple[str, ...] | None = None
    consistency_scope: str = "full"
    consistency_k: int | None = None
    consistency_formula: str = "neighbor_mean"
    include_explanations: bool = True

    def __post_init__(self):
        if not self.seeds:
            raise InvalidArgumentError("need at least one seed")
        self.explain_config()    # validates k, flag_mode, tolerances, search_space
        if self.bins < 2:
            raise InvalidArgumentError(f"bins must be >= 2, got {self.bins}")
        if self.model_source not in MODEL_SOURCES:
            raise InvalidArgumentError(f"unknown model_source {self.model_source!r}")
        if self.model_source == "external" and not self.external_command:
            raise InvalidArgumentError("model_source 'external' requires external_command")
        if self.consistency_scope not in CONSISTENCY_SCOPES:
            raise InvalidArgumentError(f"unknown consistency_scope {self.consistency_scope!r}")

    def explain_config(self) -> ExplainConfig:
        return ExplainConfig(
            k=self.k,
            distance=self.distance,
            flag_mode=self.flag_mode,
            numeric_tol_bins=self.numeric_tol_bins,
            max_unprotected_diffs=self.max_unprotected_diffs,
            search_space=self.search_space,
        )

    def to_dict(self) -> dict:
        return {
            "schema_path": self.schema_path,
            "csv_path": self.csv_path,
            "seeds": list(self.seeds),
            "k": self.k,
            "bins": self.bins,
            "distance": self.distance.to_dict(),
            "flag_mode": self.flag_mode,
            "numeric_tol_bins": self.numeric_tol_bins,
            "max_unprotected_diffs": self.max_unprotected_diffs,
            "search_space": self.search_space,
            "training": self.training.to_dict(),
            "threshold": self.threshold,
            "model_source": self.model_source,
            "external_command": list(self.external_command) if self.external_command else None,
            "consistency_scope": self.consistency_scope,
            "consistency_k": self.consistency_k,
            "consistency_formula": self.consistency_formula,
            "include_explanations": self.include_explanations,
        }

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str | Path | None = None) -> "AuditConfig":
        """Build from a config document; relative data paths resolve
        against base_dir (normally the config file's directory)."""
        try:
            schema_path = doc["schema_path"]
            csv_path = doc["csv_path"]
        except KeyError as e:
            raise ConfigError(f"config missing required key {e.args[0]!r}") from None
        if base_dir is not None:
            base = Path(base_dir)
            schema_path = str((base / schema_path) if not Path(schema_path).is_absolute() else Path(schema_path))
            csv_path = str((base / csv_path) if not Path(csv_path).is_absolute() else Path(csv_path))
        seeds = doc.get("seeds", list(range(10)))
        if isinstance(seeds, str):
            seeds = parse_seed_list(seeds)
        training = doc.get("training", {})
        ext = doc.get("external_command")
        try:
            return cls(
                schema_path=schema_path,
                csv_path=csv_path,
                seeds=tuple(int(s) for s in seeds),
                k=int(doc.get("k", 5)),
                bins=int(doc.get("bins", 10)),
                distance=DistanceSpec.from_dict(doc.get("distance", {})),
                flag_mode=doc.get("flag_mode", "conjunctive"),
                numeric_tol_bins=int(doc.get("numeric_tol_bins", 1)),
                max_unprotected_diffs=int(doc.get("max_unprotected_diffs", 0)),
                search_space=doc.get("search_space", "unprotected"),
                training=TrainingConfig(**training),
                threshold=float(doc.get("threshold", 0.5)),
                model_source=doc.get("model_source", "logistic"),
                external_command=tuple(ext) if ext else None,
                consistency_scope=doc.get("consistency_scope", "full"),
                consistency_k=doc.get("consistency_k"),
                consistency_formula=doc.get("consistency_formula", "neighbor_mean"),
                include_explanations=bool(doc.get("include_explanations", True)),
            )
        except TypeError as e:
            raise ConfigError(f"malformed config: {e}") from e

    @classmethod
    def from_json(cls, path: str | Path) -> "AuditConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        with open(p, encoding="utf-8") as f:
            try:
                doc = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"config file {p} is not valid JSON: {e}") from e
        return cls.from_dict(doc, base_dir=p.parent)


def parse_seed_list(text: str) -> list[int]:
    """Parse "0..9" or "0,3,7" style seed lists."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",") if t.strip() != ""]


@dataclass
class AuditReport:
    config: dict
    dataset: dict
    seeds: list            # one dict per seed (see _audit_seed)
    aggregate: dict
    review: dict           # review-seed explanations + proposals
    format_version: int = REPORT_FORMAT_VERSION
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "tool_version": self.tool_version,
            "config": self.config,
            "dataset": self.dataset,
            "seeds": self.seeds,
            "aggregate": self.aggregate,
            "review": self.review,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AuditReport":
        return cls(
            config=doc["config"],
            dataset=doc["dataset"],
            seeds=doc["seeds"],
            aggregate=doc["aggregate"],
            review=doc.get("review", {}),
            format_version=doc.get("format_version", REPORT_FORMAT_VERSION),
            tool_version=doc.get("tool_version", "unknown"),
        )

    def to_json(self, timestamp: str | None = None) -> str:
        """Serialize deterministically; the timestamp is a header field the
        caller supplies (omitted entirely when None so byte comparisons of
        two runs are meaningful)."""
        doc = self.to_dict()
        if timestamp is not None:
            doc["created_at"] = timestamp
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def save(self, path: str | Path, timestamp: str | None = None) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json(timestamp))

    @classmethod
    def load(cls, path: str | Path) -> "AuditReport":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"report file not found: {p}")
        with open(p, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass
class AuditArtifacts:
    """Everything run_audit derives that a caller may want to reuse
    (the service rebuilds these for the review seed)."""

    table: RawTable
    dataset: EncodedDataset
    memberships: dict
    models: dict = field(default_factory=dict)          # seed -> LogisticModel
    splits: dict = field(default_factory=dict)          # seed -> SplitIndices
    consistency_graph: np.ndarray | None = None


def protected_memberships(table: RawTable, schema: Schema) -> dict:
    """attribute -> boolean vector, True where the raw value is privileged."""
    out = {}
    for f in schema.protected_features:
        col = schema.feature_names.index(f.name)
        out[f.name] = np.fromiter(
            (row[col] == f.privileged_value for row in table.rows), dtype=bool, count=len(table.rows)
        )
    return out


def build_model(config: AuditConfig, dataset: EncodedDataset, train_idx: np.ndarray):
    """Train (or adapt) the model named by config.model_source."""
    if config.model_source == "external":
        return SubprocessModel(list(config.external_command), threshold=config.threshold,
                               d=dataset.d)
    model = train_logistic(dataset.matrix[train_idx], dataset.labels[train_idx],
                           config.training, threshold=config.threshold)
    if config.model_source == "blinded_logistic":
        # zero every weight on a protected feature's columns: the audited
        # model provably cannot react to protected flips
        w = model.weights.copy()
        for f in dataset.schema.protected_features:
            lo, hi = dataset.feature_slices[f.name]
            w[lo:hi] = 0.0
        model = replace(model, weights=w)
    return model


def set_to_privileged(dataset: EncodedDataset, vecs: np.ndarray) -> np.ndarray:
    """Copy of vecs with every protected attribute forced to its privileged value."""
    V = np.atleast_2d(np.asarray(vecs, dtype=float)).copy()
    for f in dataset.schema.protected_features:
        lo, hi = dataset.feature_slices[f.name]
        cats = dataset.categories[f.name]
        V[:, lo:hi] = 0.0
        V[:, lo + cats.index(f.privileged_value)] = 1.0
    return V


def propose_batch(query_vecs, query_indices, current_preds, train_matrix, train_labels,
                  k: int, spec: DistanceSpec) -> list:
    """Relabel proposals for many queries with one neighbor search.

    Semantics match mitigation.propose_relabel exactly: unrestricted-label
    majority vote, ties keep the current prediction."""
    Q = np.atleast_2d(np.asarray(query_vecs, dtype=float))
    if Q.shape[0] == 0:
        return []
    y = np.asarray(train_labels)
    idx, _ = nearest_neighbors(Q, np.asarray(train_matrix, dtype=float), k, spec)
    out = []
    for r in range(Q.shape[0]):
        votes = y[idx[r]]
        pos = int((votes == 1).sum())
        neg = k - pos
        cur = int(current_preds[r])
        proposed = 1 if pos > neg else 0 if neg > pos else cur
        out.append(RelabelProposal(
            query_index=int(query_indices[r]),
            current_prediction=cur,
            proposed_prediction=proposed,
            vote_tally={"positive": pos, "negative": neg},
            source_k=k,
        ))
    return out


def seed_metrics(config: AuditConfig, dataset: EncodedDataset, memberships: dict,
                 test_idx: np.ndarray, test_pred: np.ndarray, full_pred,
                 graph) -> dict:
    """Group metrics over the test set plus consistency over the configured
    scope. The review service recomputes ledger-applied metrics through this
    same function so pre/post values are comparable."""
    test_labels = dataset.labels[test_idx]
    memb_test = {a: m[test_idx] for a, m in memberships.items()}
    ck = config.consistency_k or config.k
    cons = None
    if config.consistency_scope == "full":
        cons = consistency(full_pred, neighbor_indices=graph, formula=config.consistency_formula)
    elif config.consistency_scope == "test":
        cons = consistency(test_pred, dataset.matrix[test_idx], n_neighbors=ck,
                           distance_spec=config.distance, formula=config.consistency_formula)
    report = compute_metric_report(test_pred, test_labels, memb_test,
                                   consistency_value=cons, n_neighbors=ck)
    return report.to_dict()


def _audit_seed(config: AuditConfig, table: RawTable, dataset: EncodedDataset,
                memberships: dict, seed: int, graph, artifacts: AuditArtifacts):
    sp = split(dataset, seed)
    model = build_model(config, dataset, sp.train)
    artifacts.models[seed] = model
    artifacts.splits[seed] = sp

    test_idx = sp.test
    X_test = dataset.matrix[test_idx]
    test_pred = np.asarray(model.predict(X_test))
    test_labels = dataset.labels[test_idx]
    train_pred = np.asarray(model.predict(dataset.matrix[sp.train]))
    train_acc = float((train_pred == dataset.labels[sp.train]).mean())
    test_acc = float((test_pred == test_labels).mean())

    explainer = Explainer(dataset, sp.train, model, config.explain_config(), table=table)
    neg_pos = np.flatnonzero(test_pred == 0)
    neg_global = test_idx[neg_pos]
    explanations = explainer.explain_batch(X_test[neg_pos], [int(g) for g in neg_global])
    flagged = [e for e in explanations if e.verdict == "unfair"]
    flip_changed = sum(1 for e in explanations if e.flip is not None and e.flip.changed)

    # flip every test row's protected attributes (unprivileged -> privileged,
    # privileged -> modal unprivileged, the explainer's flip) and re-predict;
    # also the one-directional set-to-privileged variant for comparison
    flipped_all, _ = flip_matrix(dataset, X_test, explainer.flip_targets)
    flip_pred = np.asarray(model.predict(flipped_all))
    flip_rate = float((flip_pred != test_pred).mean())
    priv_pred = np.asarray(model.predict(set_to_privileged(dataset, X_test)))
    flip_rate_to_privileged = float((priv_pred != test_pred).mean())

    flagged_vecs = dataset.matrix[[e.query_index for e in flagged]] if flagged else np.empty((0, dataset.d))
    flagged_cur = [0] * len(flagged)
    proposals = propose_batch(flagged_vecs, [e.query_index for e in flagged], flagged_cur,
                              dataset.matrix[sp.train], dataset.labels[sp.train],
                              config.k, config.distance)

    full_pred = None
    if config.consistency_scope == "full":
        full_pred = np.asarray(model.predict(dataset.matrix))
    metrics_pre = seed_metrics(config, dataset, memberships, test_idx, test_pred, full_pred, graph)

    # post-mitigation under "all proposals accepted"
    repaired = test_pred.copy()
    pos_of = {int(g): i for i, g in enumerate(test_idx)}
    n_changed = 0
    for p in proposals:
        i = pos_of[p.query_index]
        if repaired[i] != p.proposed_prediction:
            repaired[i] = p.proposed_prediction
            n_changed += 1
    full_repaired = None
    if full_pred is not None:
        full_repaired = full_pred.copy()
        full_repaired[test_idx] = repaired
    metrics_post = seed_metrics(config, dataset, memberships, test_idx, repaired,
                                full_repaired, graph)

    breakdown = {}
    flagged_set = {e.query_index for e in flagged}
    for attr, memb in memberships.items():
        entry = {}
        for group, mask_val in (("privileged", True), ("unprivileged", False)):
            members = [int(g) for g in neg_global if bool(memb[g]) == mask_val]
            n_flagged = sum(1 for g in members if g in flagged_set)
            entry[group] = {
                "negatives": len(members),
                "flagged": n_flagged,
                "fraction": (n_flagged / len(members)) if members else None,
            }
        breakdown[attr] = entry

    record = {
        "seed": seed,
        "n_train": int(sp.train.shape[0]),
        "test_size": int(test_idx.shape[0]),
        "n_negative_predictions": int(neg_pos.shape[0]),
        "flagged_count": len(flagged),
        "flagged_fraction": len(flagged) / int(test_idx.shape[0]),
        "flip_changed_count": flip_changed,
        "flip_rate": flip_rate,
        "flip_rate_to_privileged": flip_rate_to_privileged,
        "proposal_change_count": n_changed,
        "train_accuracy": train_acc,
        "test_accuracy": test_acc,
        "epochs_run": getattr(model, "epochs_run", None),
        "model": model.to_dict(dataset.column_fingerprint()) if isinstance(model, LogisticModel)
                 else {"external_command": list(config.external_command or ())},
        "metrics_pre": metrics_pre,
        "metrics_post": metrics_post,
        "group_breakdown": breakdown,
    }
    return record, explanations, proposals


def run_audit(config: AuditConfig, artifacts_out: AuditArtifacts | None = None,
              progress=None) -> AuditReport:
    """Execute the full multi-seed audit. See the module docstring.

    Pass an AuditArtifacts (or reuse one from a prior run over the same
    data) to keep the trained models and splits for later inspection.
    """
    schema = load_schema(config.schema_path)
    table = load_csv(config.csv_path, schema)
    if not schema.protected_features:
        raise ConfigError("audit requires at least one protected feature in the schema")
    dataset = encode(table, bins=config.bins)
    memberships = protected_memberships(table, schema)

    if artifacts_out is None:
        artifacts_out = AuditArtifacts(table=table, dataset=dataset, memberships=memberships)
    else:
        artifacts_out.table = table
        artifacts_out.dataset = dataset
        artifacts_out.memberships = memberships

    graph = None
    if config.consistency_scope == "full":
        ck = config.consistency_k or config.k
        if progress:
            progress(f"building consistency graph (k={ck}, n={dataset.n})")
        graph = knn_graph(dataset.matrix, ck, config.distance)
        artifacts_out.consistency_graph = graph

    seed_records = []
    review = {}
    for i, seed in enumerate(config.seeds):
        if progress:
            progress(f"seed {seed} ({i + 1}/{len(config.seeds)})")
        record, explanations, proposals = _audit_seed(
            config, table, dataset, memberships, seed, graph, artifacts_out
        )
        seed_records.append(record)
        if i == 0:
            # only the flagged ones are embedded; the service recomputes any
            # other row's explanation on demand
            flagged = [e for e in explanations if e.verdict == "unfair"]
            review = {
                "seed": seed,
                "explanations": [e.to_dict() for e in flagged] if config.include_explanations else [],
                "proposals": [p.to_dict() for p in proposals],
            }

    frac = [r["flagged_fraction"] for r in seed_records]
    fr = [r["flip_rate"] for r in seed_records]
    fp = [r["flip_rate_to_privileged"] for r in seed_records]
    aggregate = {
        "flagged_fraction": {"mean": _mean(frac), "min": min(frac), "max": max(frac)},
        "flip_rate": {"mean": _mean(fr), "min": min(fr), "max": max(fr)},
        "flip_rate_to_privileged": {"mean": _mean(fp), "min": min(fp), "max": max(fp)},
        "flip_changed_fraction_mean": _mean(
            [r["flip_changed_count"] / r["test_size"] for r in seed_records]
        ),
        "test_accuracy_mean": _mean([r["test_accuracy"] for r in seed_records]),
        "consistency_pre_mean": _mean(
            [r["metrics_pre"]["consistency"] for r in seed_records
             if r["metrics_pre"]["consistency"] is not None] or [None]
        ),
        "consistency_post_mean": _mean(
            [r["metrics_post"]["consistency"] for r in seed_records
             if r["metrics_post"]["consistency"] is not None] or [None]
        ),
    }

    dataset_info = {
        "csv_path": config.csv_path,
        "schema_path": config.schema_path,
        "schema": schema.to_dict(),
        "n_rows": dataset.n,
        "n_dropped_missing": table.n_dropped,
        "encoded_dimension": dataset.d,
        "n_features": len(schema.features),
        "positive_fraction": float(np.mean(dataset.labels == 1)),
        "column_fingerprint": dataset.column_fingerprint(),
    }
    return AuditReport(
        config=config.to_dict(),
        dataset=dataset_info,
        seeds=seed_records,
        aggregate=aggregate,
        review=review,
    )


def _mean(values):
    if not values or values[0] is None:
        return None
    return math.fsum(values) / len(values)


def group_breakdown(report: AuditReport) -> dict:
    """Aggregate per-group flagged fractions across seeds.

    Groups with no negatively-predicted members in a seed contribute
    nothing to that seed's mean (their fraction is undefined, not zero).
    """
    out: dict = {}
    for rec in report.seeds:
        for attr, entry in rec["group_breakdown"].items():
            slot = out.setdefault(attr, {})
            for group, stats in entry.items():
                g = slot.setdefault(group, {"per_seed": [], "mean_fraction": None})
                g["per_seed"].append(stats["fraction"])
    for attr, groups in out.items():
        for group, g in groups.items():
            defined = [v for v in g["per_seed"] if v is not None]
            g["mean_fraction"] = (math.fsum(defined) / len(defined)) if defined else None
    return out
