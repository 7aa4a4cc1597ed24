"""Fairness auditing for binary classifiers.

The pipeline: load a CSV against a declared schema, one-hot/bin encode,
split and train a small logistic model (or adapt an external one), then
explain every negative prediction through its nearest positively-labelled
training neighbors, flip protected attributes to probe the model, flag
individually unfair treatment, and propose consensus relabels that a
human reviewer accepts or rejects through a decision ledger.
"""

from ._version import __version__
from .audit import AuditConfig, AuditReport, run_audit
from .errors import (
    ConfigError,
    EmptyGroupError,
    FairauditError,
    InvalidArgumentError,
    LedgerError,
    NotFoundError,
    ParseError,
    SchemaError,
    UndefinedMetricError,
)
from .explain import ExplainConfig, Explainer, Explanation, explain, flip_protected
from .metrics import (
    GroupConfusion,
    MetricReport,
    compute_metric_report,
    consistency,
    demographic_parity_diff,
    equal_accuracy_diff,
    equal_odds_diff,
    equal_opportunity_diff,
    group_confusions,
    selection_rate_diff,
)
from .mitigation import DecisionLedger, RelabelProposal, apply_ledger, propose_relabel
from .model import LogisticModel, TrainingConfig, gradient_check, train_logistic
from .neighbors import DistanceSpec, NeighborSet, knn_graph, nearest_neighbors
from .pipeline import EncodedDataset, RawTable, encode, load_csv, split
from .schema import FeatureSpec, Schema, load_schema, save_schema

__all__ = [
    "__version__",
    "AuditConfig",
    "AuditReport",
    "run_audit",
    "FairauditError",
    "ConfigError",
    "SchemaError",
    "ParseError",
    "InvalidArgumentError",
    "EmptyGroupError",
    "UndefinedMetricError",
    "LedgerError",
    "NotFoundError",
    "FeatureSpec",
    "Schema",
    "load_schema",
    "save_schema",
    "RawTable",
    "EncodedDataset",
    "load_csv",
    "encode",
    "split",
    "LogisticModel",
    "TrainingConfig",
    "train_logistic",
    "gradient_check",
    "DistanceSpec",
    "NeighborSet",
    "nearest_neighbors",
    "knn_graph",
    "GroupConfusion",
    "MetricReport",
    "group_confusions",
    "compute_metric_report",
    "consistency",
    "demographic_parity_diff",
    "equal_opportunity_diff",
    "equal_accuracy_diff",
    "equal_odds_diff",
    "selection_rate_diff",
    "ExplainConfig",
    "Explainer",
    "Explanation",
    "explain",
    "flip_protected",
    "RelabelProposal",
    "DecisionLedger",
    "propose_relabel",
    "apply_ledger",
]
