"""Relabel proposals by neighbor majority vote, and the append-only
decision ledger an expert uses to accept or reject them.

The vote runs over the k nearest training neighbors of ANY label. A
positives-only vote would be unanimous by construction (the explainer only
retrieves positive neighbors), so it carries no information; positives_only
stays available as a flag for comparison. Ties keep the current prediction.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, LedgerError
from .neighbors import DistanceSpec, nearest_neighbors

DECISIONS = ("accepted", "rejected", "pending")


@dataclass(frozen=True)
class RelabelProposal:
    query_index: int
    current_prediction: int
    proposed_prediction: int
    vote_tally: dict          # {"positive": int, "negative": int}
    source_k: int

    def to_dict(self) -> dict:
        return {
            "query_index": self.query_index,
            "current_prediction": self.current_prediction,
            "proposed_prediction": self.proposed_prediction,
            "vote_tally": dict(self.vote_tally),
            "source_k": self.source_k,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RelabelProposal":
        return cls(
            query_index=doc["query_index"],
            current_prediction=doc["current_prediction"],
            proposed_prediction=doc["proposed_prediction"],
            vote_tally=doc["vote_tally"],
            source_k=doc["source_k"],
        )


def propose_relabel(query_row, train_matrix, train_labels, k: int,
                    distance_spec: DistanceSpec = DistanceSpec(),
                    current_prediction: int = 0, query_index: int | None = None,
                    positives_only: bool = False) -> RelabelProposal:
    """Majority vote over the query's k nearest training rows."""
    X = np.asarray(train_matrix, dtype=float)
    y = np.asarray(train_labels)
    if k < 1 or k > X.shape[0]:
        raise InvalidArgumentError(f"k must be in [1,{X.shape[0]}], got {k}")
    if positives_only:
        keep = np.flatnonzero(y == 1)
        if keep.shape[0] < k:
            raise InvalidArgumentError(f"positives_only vote needs {k} positive rows, found {keep.shape[0]}")
        X, y = X[keep], y[keep]
    idx, _ = nearest_neighbors(np.asarray(query_row, dtype=float)[None, :], X, k, distance_spec)
    votes = y[idx[0]]
    pos = int((votes == 1).sum())
    neg = k - pos
    if pos > neg:
        proposed = 1
    elif neg > pos:
        proposed = 0
    else:
        proposed = current_prediction
    return RelabelProposal(
        query_index=query_index if query_index is not None else -1,
        current_prediction=int(current_prediction),
        proposed_prediction=proposed,
        vote_tally={"positive": pos, "negative": neg},
        source_k=k,
    )


class DecisionLedger:
    """Durable record of expert decisions, one JSON event per line.

    Events append only; the materialized state keeps the latest decision
    per query index. Re-posting the same decision is idempotent in effect
    (the state is unchanged) while the history still records the event.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.events: list[dict] = []
        if self.path is not None and self.path.exists():
            with open(self.path, encoding="utf-8") as f:
                for ln, line in enumerate(f, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        ev = json.loads(line)
                    except json.JSONDecodeError as e:
                        raise LedgerError(f"{self.path}: line {ln} is not valid JSON: {e}") from e
                    self._validate(ev)
                    self.events.append(ev)

    @staticmethod
    def _validate(ev: dict) -> None:
        if not isinstance(ev.get("query_index"), int):
            raise LedgerError(f"ledger event missing integer query_index: {ev}")
        if ev.get("decision") not in DECISIONS:
            raise LedgerError(f"ledger event has invalid decision {ev.get('decision')!r}")

    def record(self, query_index: int, decision: str, note: str | None = None,
               timestamp: float | None = None) -> dict:
        """Append one decision event and persist it before returning."""
        if decision not in DECISIONS:
            raise LedgerError(f"invalid decision {decision!r}; choose from {DECISIONS}")
        ev = {
            "query_index": int(query_index),
            "decision": decision,
            "decided_at": time.time() if timestamp is None else timestamp,
            "note": note,
        }
        self.events.append(ev)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(ev, sort_keys=True) + "\n")
                f.flush()
                os.fsync(f.fileno())
        return ev

    def state(self) -> dict:
        """Latest decision per query index."""
        out: dict[int, dict] = {}
        for ev in self.events:
            out[ev["query_index"]] = {
                "decision": ev["decision"],
                "decided_at": ev["decided_at"],
                "note": ev.get("note"),
            }
        return out

    def history(self, query_index: int) -> list[dict]:
        return [ev for ev in self.events if ev["query_index"] == query_index]


def apply_ledger(predictions, proposals: dict, ledger_state: dict,
                 positions: dict | None = None):
    """Substitute accepted proposals into a prediction vector.

    proposals: query_index -> RelabelProposal; ledger_state: query_index ->
    {"decision": ...}; positions maps query_index to a position in the
    predictions vector (identity if omitted). Returns (new vector, number
    of changed positions); the input vector is never modified.
    """
    pred = np.asarray(predictions).copy()
    changed = 0
    for qi, entry in ledger_state.items():
        if entry["decision"] != "accepted":
            continue
        prop = proposals.get(qi)
        if prop is None:
            raise LedgerError(f"accepted decision for query {qi} has no proposal")
        pos = positions[qi] if positions is not None else qi
        if not 0 <= pos < pred.shape[0]:
            raise LedgerError(f"query {qi} maps to position {pos}, outside the prediction vector")
        if pred[pos] != prop.proposed_prediction:
            pred[pos] = prop.proposed_prediction
            changed += 1
    return pred, changed
