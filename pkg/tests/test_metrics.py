"""Metric tests against hand-computed confusion tables.

The eight-row fixture, worked out on paper:

    privileged   (pred, true): (1,1) (0,1) (1,0) (0,0)
                 tp=1 fn=1 fp=1 tn=1 -> TPR=1/2 FPR=1/2 TNR=1/2 acc=1/2 sel=1/2
    unprivileged (pred, true): (1,1) (1,1) (1,0) (0,0)
                 tp=2 fn=0 fp=1 tn=1 -> TPR=1   FPR=1/2 TNR=1/2 acc=3/4 sel=3/4

All rates are exact binary fractions, so equality holds to 1e-12 trivially.
"""

import numpy as np
import pytest

from fairaudit.errors import EmptyGroupError, InvalidArgumentError, UndefinedMetricError
from fairaudit.metrics import (
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

PRED = np.array([1, 0, 1, 0, 1, 1, 1, 0])
TRUE = np.array([1, 1, 0, 0, 1, 1, 0, 0])
MEMB = np.array([True, True, True, True, False, False, False, False])

TOL = 1e-12


@pytest.fixture
def confusions():
    return group_confusions(PRED, TRUE, MEMB)


class TestGroupConfusions:
    def test_counts(self, confusions):
        priv, unpriv = confusions
        assert (priv.tp, priv.fp, priv.tn, priv.fn) == (1, 1, 1, 1)
        assert (unpriv.tp, unpriv.fp, unpriv.tn, unpriv.fn) == (2, 1, 1, 0)

    def test_rates(self, confusions):
        priv, unpriv = confusions
        assert priv.tpr == 0.5
        assert priv.fpr == 0.5
        assert priv.accuracy == 0.5
        assert unpriv.tpr == 1.0
        assert unpriv.accuracy == 0.75
        assert unpriv.selection_rate == 0.75

    def test_empty_group(self):
        with pytest.raises(EmptyGroupError, match="unprivileged group is empty"):
            group_confusions(PRED, TRUE, np.ones(8, dtype=bool))

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError, match="length mismatch"):
            group_confusions(PRED, TRUE[:4], MEMB)

    def test_undefined_rate_names_group(self):
        conf = GroupConfusion("privileged", tp=0, fp=2, tn=3, fn=0)
        with pytest.raises(UndefinedMetricError, match="TPR undefined for privileged"):
            conf.tpr


class TestDiffs:
    def test_hand_computed_values(self, confusions):
        priv, unpriv = confusions
        assert abs(demographic_parity_diff(priv, unpriv) - 0.5) < TOL
        assert abs(equal_opportunity_diff(priv, unpriv) - 0.5) < TOL
        assert abs(equal_accuracy_diff(priv, unpriv) - 0.25) < TOL
        assert abs(equal_odds_diff(priv, unpriv) - 0.5) < TOL
        assert abs(selection_rate_diff(priv, unpriv) - 0.25) < TOL

    def test_group_identical_predictions_zero_diffs(self):
        # same confusion pattern in both groups -> every diff is exactly 0
        pred = np.array([1, 0, 1, 0, 1, 0, 1, 0])
        true = np.array([1, 1, 0, 0, 1, 1, 0, 0])
        priv, unpriv = group_confusions(pred, true, MEMB)
        for fn in (demographic_parity_diff, equal_opportunity_diff, equal_accuracy_diff,
                   equal_odds_diff, selection_rate_diff):
            assert fn(priv, unpriv) == 0.0

    def test_symmetry_under_group_swap(self, confusions):
        priv, unpriv = confusions
        for fn in (demographic_parity_diff, equal_opportunity_diff, equal_accuracy_diff,
                   equal_odds_diff, selection_rate_diff):
            assert fn(priv, unpriv) == fn(unpriv, priv)


class TestConsistency:
    def test_constant_predictor_is_one(self):
        rng = np.random.default_rng(0)
        rows = rng.random((20, 3))
        assert consistency(np.ones(20), rows, n_neighbors=5) == 1.0
        assert consistency(np.zeros(20), rows, n_neighbors=5) == 1.0

    def test_hand_graph_agreeing_pairs(self):
        # mutual neighbors with equal predictions deviate by zero
        nb = np.array([[1], [0], [3], [2]])
        assert consistency(np.array([1, 1, 0, 0]), neighbor_indices=nb) == 1.0
        # mutual neighbors with opposite predictions deviate maximally
        assert consistency(np.array([1, 0, 1, 0]), neighbor_indices=nb) == 0.0

    def test_hand_graph_k2(self):
        # preds [1,1,0,1], neighbor means [.5,.5,1,1]
        # deviations [.5,.5,1,0] -> 1 - 2/4 = 0.5
        nb = np.array([[1, 2], [0, 2], [0, 1], [0, 1]])
        y = np.array([1, 1, 0, 1])
        assert consistency(y, neighbor_indices=nb) == 0.5
        # as_printed uses the neighbor SUM: deviations |1-1|,|1-1|,|0-2|,|1-2|
        # -> 1 - 3/8 = 0.625
        assert consistency(y, neighbor_indices=nb, formula="as_printed") == 0.625

    def test_as_printed_penalizes_constant_ones(self):
        # the literal transcription scores all-ones below 1 whenever k > 1
        rng = np.random.default_rng(1)
        rows = rng.random((10, 2))
        v = consistency(np.ones(10), rows, n_neighbors=5, formula="as_printed")
        assert v == pytest.approx(1.0 - 4 / 5)

    def test_label_flip_invariance(self):
        rng = np.random.default_rng(2)
        rows = rng.random((30, 4))
        y = (rng.random(30) > 0.4).astype(float)
        a = consistency(y, rows, n_neighbors=5)
        b = consistency(1.0 - y, rows, n_neighbors=5)
        assert a == pytest.approx(b, abs=1e-12)

    def test_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            rows = rng.random((15, 3))
            y = (rng.random(15) > 0.5).astype(float)
            v = consistency(y, rows, n_neighbors=4)
            assert 0.0 <= v <= 1.0

    def test_validation(self):
        with pytest.raises(InvalidArgumentError, match="unknown consistency formula"):
            consistency(np.ones(5), np.random.random((5, 2)), formula="mystery")
        with pytest.raises(InvalidArgumentError, match="binary"):
            consistency(np.array([0.0, 0.5]), neighbor_indices=np.array([[1], [0]]))
        with pytest.raises(InvalidArgumentError, match="must be <"):
            consistency(np.ones(4), np.random.random((4, 2)), n_neighbors=4)
        with pytest.raises(InvalidArgumentError, match="need rows"):
            consistency(np.ones(4))


class TestMetricReport:
    def test_per_attribute_values(self):
        report = compute_metric_report(PRED, TRUE, {"sex": MEMB}, consistency_value=0.9,
                                       n_neighbors=5)
        sex = report.per_attribute["sex"]
        assert abs(sex["dp_diff"] - 0.5) < TOL
        assert abs(sex["eq_opp_diff"] - 0.5) < TOL
        assert abs(sex["eq_acc_diff"] - 0.25) < TOL
        assert abs(sex["eq_odds_diff"] - 0.5) < TOL
        assert abs(sex["selection_rate_diff"] - 0.25) < TOL
        assert sex["privileged"] == {"group": "privileged", "tp": 1, "fp": 1, "tn": 1, "fn": 1}
        assert report.consistency == 0.9
        assert report.n == 8
        assert report.errors == {}

    def test_undefined_rate_recorded_not_raised(self):
        # unprivileged group has no true positives and no false negatives,
        # so its TPR denominator is zero
        pred = np.array([1, 0, 1, 0])
        true = np.array([1, 1, 0, 0])
        memb = np.array([True, True, False, False])
        report = compute_metric_report(pred, true, {"race": memb})
        assert "race" not in report.per_attribute
        assert "TPR undefined for unprivileged group" in report.errors["race"]

    def test_multiple_attributes_independent(self):
        report = compute_metric_report(PRED, TRUE, {"a": MEMB, "b": ~MEMB})
        assert set(report.per_attribute) == {"a", "b"}
        # swapping the mask swaps the groups but not the absolute diffs
        assert report.per_attribute["a"]["dp_diff"] == report.per_attribute["b"]["dp_diff"]

    def test_round_trip_dict(self):
        report = compute_metric_report(PRED, TRUE, {"sex": MEMB}, consistency_value=1.0)
        again = MetricReport.from_dict(report.to_dict())
        assert again.per_attribute == report.per_attribute
        assert again.consistency == report.consistency
        assert again.n == report.n
