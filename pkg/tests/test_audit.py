import dataclasses
import json
import math

import numpy as np
import pytest

from fairaudit.audit import (
    AuditConfig,
    AuditArtifacts,
    AuditReport,
    group_breakdown,
    parse_seed_list,
    protected_memberships,
    run_audit,
    set_to_privileged,
)
from fairaudit.errors import ConfigError
from fairaudit.schema import save_schema
from fairaudit.synth import make_protected_blind, make_protected_determined, write_table_csv


def materialize(tmp_dir, table, schema, **overrides):
    """Write a synthetic table + schema to disk and build a config for it."""
    csv_path = write_table_csv(table, tmp_dir / "data.csv")
    schema_path = tmp_dir / "schema.json"
    save_schema(schema, schema_path)
    kw = dict(schema_path=str(schema_path), csv_path=str(csv_path),
              seeds=(0, 1), k=5, bins=10, flag_mode="flip_only")
    kw.update(overrides)
    return AuditConfig(**kw)


@pytest.fixture(scope="module")
def determined(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("determined")
    table, schema = make_protected_determined(n=300, seed=0)
    config = materialize(tmp, table, schema)
    artifacts = AuditArtifacts(table=table, dataset=None, memberships={})
    report = run_audit(config, artifacts_out=artifacts)
    return config, report, artifacts


@pytest.fixture(scope="module")
def blind(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("blind")
    table, schema = make_protected_blind(n=300, seed=0)
    config = materialize(tmp, table, schema, model_source="blinded_logistic")
    report = run_audit(config)
    return config, report


class TestConfig:
    def test_seed_list_parsing(self):
        assert parse_seed_list("0..9") == list(range(10))
        assert parse_seed_list("0,3,7") == [0, 3, 7]
        assert parse_seed_list(" 2..4 ") == [2, 3, 4]

    def test_from_dict_requires_paths(self):
        with pytest.raises(ConfigError, match="missing required key 'csv_path'"):
            AuditConfig.from_dict({"schema_path": "s.json"})

    def test_from_dict_resolves_relative_paths(self, tmp_path):
        doc = {"schema_path": "schema.json", "csv_path": "sub/data.csv"}
        cfg = AuditConfig.from_dict(doc, base_dir=tmp_path)
        assert cfg.schema_path == str(tmp_path / "schema.json")
        assert cfg.csv_path == str(tmp_path / "sub" / "data.csv")

    def test_from_json_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            AuditConfig.from_json(tmp_path / "absent.json")

    def test_from_json_invalid_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{oops")
        with pytest.raises(ConfigError, match="not valid JSON"):
            AuditConfig.from_json(p)

    def test_validation_happens_at_construction(self):
        with pytest.raises(Exception):
            AuditConfig(schema_path="s", csv_path="c", k=0)
        with pytest.raises(Exception):
            AuditConfig(schema_path="s", csv_path="c", bins=1)
        with pytest.raises(Exception):
            AuditConfig(schema_path="s", csv_path="c", model_source="oracle")

    def test_round_trip_dict(self, determined):
        config, _, _ = determined
        again = AuditConfig.from_dict(config.to_dict())
        assert again.to_dict() == config.to_dict()


class TestProtectedMemberships:
    def test_boolean_by_privileged_value(self):
        table, schema = make_protected_determined(n=50, seed=1)
        memb = protected_memberships(table, schema)
        assert set(memb) == {"group"}
        want = [r[0] == "A" for r in table.rows]
        assert memb["group"].tolist() == want


class TestSetToPrivileged:
    def test_sets_every_protected_attribute(self):
        table, schema = make_protected_determined(n=40, seed=2)
        from fairaudit.pipeline import encode
        ds = encode(table, bins=10)
        out = set_to_privileged(ds, ds.matrix)
        for i in range(ds.n):
            assert ds.categorical_value(out[i], "group") == "A"
        # unprotected columns untouched
        lo, hi = ds.feature_slices["group"]
        keep = np.ones(ds.d, dtype=bool)
        keep[lo:hi] = False
        np.testing.assert_array_equal(out[:, keep], ds.matrix[:, keep])


class TestRunAuditDetermined:
    """Label == protected attribute: the trained model keys on the group
    column, so every negatively predicted row flips across the boundary."""

    def test_counting_invariants(self, determined):
        _, report, _ = determined
        for rec in report.seeds:
            assert 0 <= rec["flagged_count"] <= rec["n_negative_predictions"]
            assert rec["n_negative_predictions"] <= rec["test_size"]
            assert rec["flagged_fraction"] == rec["flagged_count"] / rec["test_size"]

    def test_model_discriminates_fully(self, determined):
        _, report, _ = determined
        for rec in report.seeds:
            assert rec["test_accuracy"] == 1.0
            # flipping the protected attribute moves every single prediction
            assert rec["flip_rate"] == 1.0
            # every negative prediction is flagged in flip_only mode
            assert rec["flagged_count"] == rec["n_negative_predictions"]
            assert rec["flip_changed_count"] == rec["n_negative_predictions"]

    def test_flagged_are_all_unprivileged(self, determined):
        _, report, _ = determined
        for rec in report.seeds:
            bd = rec["group_breakdown"]["group"]
            assert bd["privileged"]["negatives"] == 0
            assert bd["privileged"]["fraction"] is None
            assert bd["unprivileged"]["fraction"] == 1.0

    def test_set_to_privileged_rate_counts_only_unprivileged(self, determined):
        _, report, _ = determined
        for rec in report.seeds:
            # unprivileged -> privileged changes 0 to 1; privileged rows are
            # unchanged, so the one-directional rate equals the negative share
            want = rec["n_negative_predictions"] / rec["test_size"]
            assert rec["flip_rate_to_privileged"] == pytest.approx(want, abs=1e-12)

    def test_aggregate_means_recompute(self, determined):
        _, report, _ = determined
        for key in ("flagged_fraction", "flip_rate", "flip_rate_to_privileged"):
            vals = [r[key] for r in report.seeds]
            agg = report.aggregate[key]
            assert abs(agg["mean"] - math.fsum(vals) / len(vals)) < 1e-12
            assert agg["min"] == min(vals)
            assert agg["max"] == max(vals)

    def test_review_block_holds_first_seed_flagged(self, determined):
        config, report, _ = determined
        review = report.review
        assert review["seed"] == config.seeds[0]
        first = report.seeds[0]
        assert len(review["explanations"]) == first["flagged_count"]
        assert all(e["verdict"] == "unfair" for e in review["explanations"])
        assert len(review["proposals"]) == first["flagged_count"]
        flagged_ids = {e["query_index"] for e in review["explanations"]}
        assert {p["query_index"] for p in review["proposals"]} == flagged_ids

    def test_artifacts_populated(self, determined):
        config, report, artifacts = determined
        assert set(artifacts.models) == set(config.seeds)
        assert set(artifacts.splits) == set(config.seeds)
        assert artifacts.consistency_graph is not None
        assert artifacts.consistency_graph.shape == (300, config.k)

    def test_metrics_structure(self, determined):
        _, report, _ = determined
        for rec in report.seeds:
            pre = rec["metrics_pre"]
            assert pre["consistency"] is not None
            assert 0.0 <= pre["consistency"] <= 1.0
            assert pre["n"] == rec["test_size"]
            # the fully discriminating model has TPR undefined in the
            # unprivileged test group (it contains no true positives)
            assert ("group" in pre["per_attribute"]) or ("group" in pre["errors"])

    def test_proposals_carry_no_changes_here(self, determined):
        # neighbors of unprivileged rows share their group (one-hot distance
        # dominates), so the vote keeps the current label and post == pre
        _, report, _ = determined
        for rec in report.seeds:
            assert rec["proposal_change_count"] == 0
            assert rec["metrics_post"] == rec["metrics_pre"]

    def test_dataset_block(self, determined):
        config, report, _ = determined
        info = report.dataset
        assert info["n_rows"] == 300
        assert info["encoded_dimension"] == len(report.seeds[0]["model"]["weights"])
        assert info["column_fingerprint"]
        assert 0.0 < info["positive_fraction"] < 1.0

    def test_group_breakdown_aggregation(self, determined):
        _, report, _ = determined
        agg = group_breakdown(report)
        assert agg["group"]["unprivileged"]["mean_fraction"] == 1.0
        assert agg["group"]["privileged"]["mean_fraction"] is None
        assert len(agg["group"]["privileged"]["per_seed"]) == len(report.seeds)


class TestRunAuditBlind:
    def test_blinded_model_never_flips(self, blind):
        _, report = blind
        for rec in report.seeds:
            assert rec["flip_rate"] == 0.0
            assert rec["flip_rate_to_privileged"] == 0.0
            assert rec["flagged_count"] == 0
            assert rec["flip_changed_count"] == 0

    def test_blinded_model_zero_protected_weights(self, blind):
        _, report = blind
        for rec in report.seeds:
            # group one-hot occupies the first two encoded columns
            assert rec["model"]["weights"][0] == 0.0
            assert rec["model"]["weights"][1] == 0.0

    def test_review_block_empty(self, blind):
        _, report = blind
        assert report.review["explanations"] == []
        assert report.review["proposals"] == []


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        table, schema = make_protected_determined(n=120, seed=3)
        config = materialize(tmp_path, table, schema, seeds=(0,))
        a = run_audit(config).to_json()
        b = run_audit(config).to_json()
        assert a == b

    def test_timestamp_is_the_only_nondeterminism(self, tmp_path):
        table, schema = make_protected_determined(n=120, seed=3)
        config = materialize(tmp_path, table, schema, seeds=(0,))
        report = run_audit(config)
        with_ts = report.to_json(timestamp="2024-01-01T00:00:00Z")
        without = report.to_json()
        assert with_ts != without
        doc = json.loads(with_ts)
        assert doc["created_at"] == "2024-01-01T00:00:00Z"
        doc.pop("created_at")
        assert doc == json.loads(without)

    def test_save_load_round_trip(self, tmp_path):
        table, schema = make_protected_determined(n=120, seed=4)
        config = materialize(tmp_path, table, schema, seeds=(0,))
        report = run_audit(config)
        p = tmp_path / "report.json"
        report.save(p)
        again = AuditReport.load(p)
        assert again.to_json() == report.to_json()

    def test_load_missing_report(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            AuditReport.load(tmp_path / "absent.json")


class TestRunAuditOptions:
    def test_include_explanations_false_keeps_proposals(self, tmp_path):
        table, schema = make_protected_determined(n=120, seed=5)
        config = materialize(tmp_path, table, schema, seeds=(0,),
                             include_explanations=False)
        report = run_audit(config)
        assert report.review["explanations"] == []
        assert len(report.review["proposals"]) == report.seeds[0]["flagged_count"]
        # counts are computed before the embed decision
        assert report.seeds[0]["flagged_count"] > 0

    def test_consistency_scope_none(self, tmp_path):
        table, schema = make_protected_determined(n=120, seed=6)
        config = materialize(tmp_path, table, schema, seeds=(0,),
                             consistency_scope="none")
        report = run_audit(config)
        assert report.seeds[0]["metrics_pre"]["consistency"] is None
        assert report.aggregate["consistency_pre_mean"] is None

    def test_consistency_scope_test(self, tmp_path):
        table, schema = make_protected_determined(n=120, seed=6)
        config = materialize(tmp_path, table, schema, seeds=(0,),
                             consistency_scope="test")
        report = run_audit(config)
        v = report.seeds[0]["metrics_pre"]["consistency"]
        assert v is not None and 0.0 <= v <= 1.0

    def test_requires_protected_feature(self, tmp_path):
        from fairaudit.schema import FeatureSpec, Schema
        from fairaudit.pipeline import RawTable
        schema = Schema(features=(FeatureSpec("x", "numeric"),),
                        label_name="y", positive_label="1")
        rows = [(float(i),) for i in range(20)]
        table = RawTable(schema=schema, rows=rows, labels=[i % 2 for i in range(20)],
                         n_dropped=0)
        config = materialize(tmp_path, table, schema)
        with pytest.raises(ConfigError, match="protected feature"):
            run_audit(config)
