"""Run a full multi-seed audit, then walk the human-in-the-loop loop:
read the flagged queue, record accept/reject decisions in a ledger, apply
the accepted relabels, and re-score the group metrics.

Relabels are only proposals until someone accepts them; nothing in the
report or the dataset is modified in place.
"""

import tempfile
from pathlib import Path

import numpy as np

from fairaudit.audit import AuditArtifacts, AuditConfig, run_audit
from fairaudit.metrics import compute_metric_report
from fairaudit.mitigation import DecisionLedger, RelabelProposal, apply_ledger
from fairaudit.schema import save_schema
from fairaudit.synth import make_protected_determined, write_table_csv


def main():
    workdir = Path(tempfile.mkdtemp(prefix="demo05_"))
    table, schema = make_protected_determined(n=300, seed=1, label_noise=0.35)
    write_table_csv(table, workdir / "data.csv")
    save_schema(schema, workdir / "schema.json")

    config = AuditConfig(schema_path=str(workdir / "schema.json"),
                         csv_path=str(workdir / "data.csv"),
                         seeds=(0, 1, 2), k=5, flag_mode="conjunctive")
    artifacts = AuditArtifacts(table=table, dataset=None, memberships=None)
    report = run_audit(config, artifacts_out=artifacts, progress=print)

    agg = report.aggregate
    print(f"\nflagged fraction: mean {agg['flagged_fraction']['mean']:.3f} "
          f"(min {agg['flagged_fraction']['min']:.3f}, max {agg['flagged_fraction']['max']:.3f})")
    print(f"flip rate:        mean {agg['flip_rate']['mean']:.3f}")
    print(f"test accuracy:    mean {agg['test_accuracy_mean']:.3f}")

    report_path = workdir / "report.json"
    report.save(report_path, timestamp="demo")
    print(f"report written to {report_path}")

    # the review block carries the first seed's flagged rows + proposals
    review_seed = report.review["seed"]
    proposals = {doc["query_index"]: RelabelProposal.from_dict(doc)
                 for doc in report.review["proposals"]}
    print(f"\nreview queue for seed {review_seed}: {len(proposals)} proposals")

    ledger = DecisionLedger(workdir / "decisions.jsonl")
    for qid, prop in sorted(proposals.items()):
        if prop.proposed_prediction != prop.current_prediction:
            ledger.record(qid, "accepted", note="neighbor majority disagrees with the model")
        else:
            ledger.record(qid, "rejected", note="relabel would change nothing")
    state = ledger.state()
    accepted = sum(1 for s in state.values() if s["decision"] == "accepted")
    print(f"recorded {len(state)} decisions ({accepted} accepted) in {ledger.path}")

    # apply only the accepted relabels to that seed's test predictions
    seed_split = artifacts.splits[review_seed]
    model = artifacts.models[review_seed]
    test_pred = model.predict(artifacts.dataset.matrix[seed_split.test])
    positions = {int(g): i for i, g in enumerate(seed_split.test)}
    repaired, n_changed = apply_ledger(test_pred, proposals, state, positions)
    print(f"applied ledger: {n_changed} predictions changed")

    memb = {"group": artifacts.memberships["group"][seed_split.test]}
    true = artifacts.dataset.labels[seed_split.test]
    before = compute_metric_report(test_pred, true, memb).per_attribute["group"]
    after = compute_metric_report(np.asarray(repaired), true, memb).per_attribute["group"]
    for key in ("dp_diff", "eq_opp_diff", "eq_odds_diff"):
        print(f"  {key}: {before[key]:.3f} -> {after[key]:.3f}")


if __name__ == "__main__":
    main()
