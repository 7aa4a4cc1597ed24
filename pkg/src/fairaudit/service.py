"""HTTP review API over a completed audit report.

The service is read-only with respect to the report file; the only mutable
state is the decision ledger. What-if predictions always run through the
audited model, restored from the report and fingerprint-checked against
the rebuilt dataset, never a retrained stand-in.

Endpoints:
    GET  /api/report                      full audit report
    GET  /api/explanations?verdict=&page= paged review queue
    GET  /api/explanations/{id}           one explanation (recomputed on
                                          demand for rows not in the report)
    POST /api/whatif                      {"row": id | record, "edits": {...}}
    GET  /api/decisions/{id}              ledger state + history for one row
    POST /api/decisions/{id}              {"decision": ..., "note": ...}
    GET  /api/metrics?ledger=none|applied stored vs ledger-applied metrics
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .audit import AuditConfig, AuditReport, protected_memberships, seed_metrics
from .errors import ConfigError, FairauditError, LedgerError, NotFoundError, ParseError, SchemaError
from .explain import Explainer
from .mitigation import DECISIONS, DecisionLedger, RelabelProposal, apply_ledger
from .model import LogisticModel, SubprocessModel
from .neighbors import knn_graph
from .pipeline import EncodedDataset, RawTable, SplitIndices, encode, load_csv, raw_record, split
from .schema import load_schema

PAGE_SIZE_DEFAULT = 20
PAGE_SIZE_MAX = 200

PENDING = {"decision": "pending", "decided_at": None, "note": None}


@dataclass
class ApiSession:
    """Everything one serving process needs, rebuilt once at startup."""

    report: AuditReport
    config: AuditConfig
    table: RawTable
    dataset: EncodedDataset
    memberships: dict
    review_seed: int
    split: SplitIndices
    model: object
    explainer: Explainer
    explanations: dict          # id -> stored explanation dict (flagged only)
    order: list                 # stored ids in report order
    proposals: dict             # id -> RelabelProposal
    ledger: DecisionLedger
    test_pred: np.ndarray
    metrics_pre: dict
    lock: threading.Lock = field(default_factory=threading.Lock)
    _graph: np.ndarray | None = None
    _full_pred: np.ndarray | None = None

    def graph(self):
        # lazy: only ledger=applied with full-scope consistency needs it
        if self._graph is None:
            ck = self.config.consistency_k or self.config.k
            self._graph = knn_graph(self.dataset.matrix, ck, self.config.distance)
        return self._graph

    def full_pred(self):
        if self._full_pred is None:
            self._full_pred = np.asarray(self.model.predict(self.dataset.matrix))
        return self._full_pred


def build_session(report_path, ledger_path=None) -> ApiSession:
    report = AuditReport.load(report_path)
    config = AuditConfig.from_dict(report.config)
    schema = load_schema(config.schema_path)
    table = load_csv(config.csv_path, schema)
    dataset = encode(table, bins=config.bins)

    expected = report.dataset.get("column_fingerprint")
    actual = dataset.column_fingerprint()
    if expected is not None and expected != actual:
        raise ConfigError(
            f"dataset drifted since the audit: column fingerprint {actual} != report's {expected}"
        )

    review = report.review or {}
    review_seed = review.get("seed", report.seeds[0]["seed"])
    sp = split(dataset, review_seed)
    seed_rec = next(r for r in report.seeds if r["seed"] == review_seed)

    if config.model_source == "external":
        model = SubprocessModel(list(config.external_command), threshold=config.threshold,
                                d=dataset.d)
    else:
        model_doc = seed_rec["model"]
        fp = model_doc.get("column_fingerprint")
        if fp is not None and fp != actual:
            raise ConfigError("stored model was trained against a different encoding")
        model = LogisticModel.from_dict(model_doc)

    explainer = Explainer(dataset, sp.train, model, config.explain_config(), table=table)
    stored = review.get("explanations", [])
    explanations = {e["query_index"]: e for e in stored}
    proposals = {p["query_index"]: RelabelProposal.from_dict(p)
                 for p in review.get("proposals", [])}
    test_pred = np.asarray(model.predict(dataset.matrix[sp.test]))
    return ApiSession(
        report=report,
        config=config,
        table=table,
        dataset=dataset,
        memberships=protected_memberships(table, schema),
        review_seed=review_seed,
        split=sp,
        model=model,
        explainer=explainer,
        explanations=explanations,
        order=[e["query_index"] for e in stored],
        proposals=proposals,
        ledger=DecisionLedger(ledger_path),
        test_pred=test_pred,
        metrics_pre=seed_rec["metrics_pre"],
    )


def _entry(session: ApiSession, qid: int, expl: dict, state: dict) -> dict:
    prop = session.proposals.get(qid)
    return {
        "id": qid,
        "explanation": expl,
        "proposal": prop.to_dict() if prop is not None else None,
        "decision": state.get(qid, PENDING),
    }


def create_app(report_path=None, ledger_path=None, session: ApiSession | None = None) -> FastAPI:
    """Build the review API app. Pass a prebuilt session (tests) or paths."""
    if session is None:
        if report_path is None:
            raise ConfigError("create_app needs a report path or a prebuilt session")
        session = build_session(report_path, ledger_path)

    app = FastAPI(title="fairaudit review api", docs_url=None, redoc_url=None)
    app.state.session = session
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET", "POST"], allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse({"detail": str(exc)}, status_code=400)

    @app.exception_handler(FairauditError)
    async def _domain_error(request: Request, exc: FairauditError):
        status = 404 if isinstance(exc, NotFoundError) else \
                 409 if isinstance(exc, LedgerError) else 400
        return JSONResponse({"detail": str(exc)}, status_code=status)

    @app.get("/api/report")
    def get_report():
        return session.report.to_dict()

    @app.get("/api/explanations")
    def list_explanations(verdict: str | None = None, page: int = 1,
                          page_size: int = PAGE_SIZE_DEFAULT):
        if verdict is not None and verdict not in ("fair", "unfair"):
            raise HTTPException(400, f"verdict must be 'fair' or 'unfair', got {verdict!r}")
        if page < 1:
            raise HTTPException(400, "page must be >= 1")
        if not 1 <= page_size <= PAGE_SIZE_MAX:
            raise HTTPException(400, f"page_size must be in [1,{PAGE_SIZE_MAX}]")
        ids = [i for i in session.order
               if verdict is None or session.explanations[i]["verdict"] == verdict]
        total = len(ids)
        pages = max(1, -(-total // page_size))
        start = (page - 1) * page_size
        state = session.ledger.state()
        items = [_entry(session, i, session.explanations[i], state)
                 for i in ids[start:start + page_size]]
        return {"items": items, "total": total, "page": page,
                "page_size": page_size, "pages": pages, "verdict": verdict}

    @app.get("/api/explanations/{qid}")
    def get_explanation(qid: int):
        expl = session.explanations.get(qid)
        if expl is None:
            if not 0 <= qid < session.dataset.n:
                raise HTTPException(404, f"no row with index {qid}")
            # not in the report: recompute against the review-seed model
            expl = session.explainer.explain(
                session.dataset.matrix[qid], query_index=qid
            ).to_dict()
        return _entry(session, qid, expl, session.ledger.state())

    @app.post("/api/whatif")
    async def whatif(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "request body is not valid JSON") from None
        if not isinstance(body, dict) or "row" not in body:
            raise HTTPException(400, "body must be an object with a 'row' field")
        row = body["row"]
        edits = body.get("edits") or {}
        if not isinstance(edits, dict):
            raise HTTPException(400, "'edits' must be an object mapping feature to value")

        schema = session.dataset.schema
        names = set(schema.feature_names)
        if isinstance(row, int) and not isinstance(row, bool):
            if not 0 <= row < session.dataset.n:
                raise HTTPException(404, f"no row with index {row}")
            base = raw_record(session.table, row)
            row_id = row
        elif isinstance(row, dict):
            unknown = sorted(set(map(str, row)) - names)
            if unknown:
                raise HTTPException(400, f"unknown features in row: {unknown}")
            base = {str(k): v for k, v in row.items()}
            row_id = None
        else:
            raise HTTPException(400, "'row' must be a row index or a record object")

        bad = sorted(set(map(str, edits)) - names)
        if bad:
            raise HTTPException(400, f"unknown features in edits: {bad}")
        edited = dict(base)
        edited.update({str(k): v for k, v in edits.items()})

        try:
            base_vec, _ = session.dataset.encode_record(base)
            vec, warnings = session.dataset.encode_record(edited)
        except (ParseError, SchemaError) as e:
            raise HTTPException(400, str(e)) from None
        p0 = float(np.asarray(session.model.predict_proba(base_vec[None, :]))[0])
        p1 = float(np.asarray(session.model.predict_proba(vec[None, :]))[0])
        y0 = int(p0 >= session.model.threshold)
        y1 = int(p1 >= session.model.threshold)
        return {
            "row": row_id,
            "record": edited,
            "prediction": y1,
            "outcome": "positive" if y1 else "negative",
            "probability": p1,
            "original_prediction": y0,
            "original_outcome": "positive" if y0 else "negative",
            "original_probability": p0,
            "changed": y1 != y0,
            "warnings": warnings,
        }

    def _known_decision_target(qid: int) -> bool:
        return qid in session.explanations or qid in session.proposals

    @app.get("/api/decisions/{qid}")
    def get_decision(qid: int):
        if not _known_decision_target(qid):
            raise HTTPException(404, f"no reviewable explanation with id {qid}")
        state = session.ledger.state().get(qid, PENDING)
        return {"id": qid, "state": state, "history": session.ledger.history(qid)}

    @app.post("/api/decisions/{qid}")
    async def post_decision(qid: int, request: Request):
        if not _known_decision_target(qid):
            raise HTTPException(404, f"no reviewable explanation with id {qid}")
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(400, "request body is not valid JSON") from None
        if not isinstance(body, dict) or "decision" not in body:
            raise HTTPException(400, "body must be an object with a 'decision' field")
        decision = body["decision"]
        note = body.get("note")
        if decision not in DECISIONS:
            raise HTTPException(400, f"decision must be one of {list(DECISIONS)}, got {decision!r}")
        if note is not None and not isinstance(note, str):
            raise HTTPException(400, "'note' must be a string")
        if decision == "accepted" and qid not in session.proposals:
            raise HTTPException(409, f"explanation {qid} has no relabel proposal to accept")

        with session.lock:
            current = session.ledger.state().get(qid)
            if current is None or current["decision"] != decision or current.get("note") != note:
                session.ledger.record(qid, decision, note)
            state = session.ledger.state().get(qid, PENDING)
            history = session.ledger.history(qid)
        return {"id": qid, "state": state, "history": history}

    @app.get("/api/metrics")
    def get_metrics(ledger: str = "none"):
        if ledger not in ("none", "applied"):
            raise HTTPException(400, f"ledger must be 'none' or 'applied', got {ledger!r}")
        if ledger == "none":
            return {"ledger": "none", "seed": session.review_seed,
                    "accepted_count": 0, "changed_count": 0,
                    "metrics": session.metrics_pre}

        with session.lock:
            state = session.ledger.state()
            accepted = sorted(i for i, s in state.items() if s["decision"] == "accepted")
            test_idx = session.split.test
            positions = {int(g): i for i, g in enumerate(test_idx)}
            try:
                repaired, n_changed = apply_ledger(session.test_pred, session.proposals,
                                                   state, positions)
            except LedgerError as e:
                raise HTTPException(409, str(e)) from None
            repaired = np.asarray(repaired)
            full_repaired = None
            graph = None
            if session.config.consistency_scope == "full":
                graph = session.graph()
                full_repaired = session.full_pred().copy()
                full_repaired[test_idx] = repaired
            metrics = seed_metrics(session.config, session.dataset, session.memberships,
                                   test_idx, repaired, full_repaired, graph)
        return {"ledger": "applied", "seed": session.review_seed,
                "accepted_count": len(accepted), "changed_count": int(n_changed),
                "metrics": metrics}

    return app
