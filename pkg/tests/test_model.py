import math
import sys

import numpy as np
import pytest

from fairaudit.errors import (
    ConfigError,
    DegenerateTrainingError,
    DimensionError,
    InvalidArgumentError,
    InvalidInputError,
)
from fairaudit.model import (
    LogisticModel,
    SubprocessModel,
    TrainingConfig,
    gradient_check,
    load_model,
    loss_and_gradient,
    save_model,
    sigmoid,
    train_logistic,
)


def separable_data(n=40, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(-2.0, 0.4, (n // 2, 2)), rng.normal(2.0, 0.4, (n - n // 2, 2))])
    y = np.r_[np.zeros(n // 2), np.ones(n - n // 2)]
    return X, y


class TestSigmoid:
    def test_center(self):
        assert sigmoid(0.0) == 0.5

    def test_extremes_finite(self):
        assert sigmoid(1000.0) == 1.0
        assert sigmoid(-1000.0) == 0.0
        # no overflow warnings either way
        with np.errstate(over="raise"):
            sigmoid(np.array([-800.0, 800.0]))

    def test_symmetry(self):
        z = np.linspace(-20, 20, 41)
        np.testing.assert_allclose(sigmoid(-z), 1.0 - sigmoid(z), atol=1e-15)


class TestLossAndGradient:
    def test_zero_weights_hand_values(self):
        # w=0, b=0: p=1/2 everywhere, so loss = ln 2 and the gradient has
        # closed form X^T(1/2 - y)/n
        X = np.array([[1.0], [2.0]])
        y = np.array([1.0, 0.0])
        loss, gw, gb = loss_and_gradient(np.zeros(1), 0.0, X, y, l2=0.0)
        assert loss == pytest.approx(math.log(2), abs=1e-15)
        assert gw[0] == pytest.approx((1 * -0.5 + 2 * 0.5) / 2, abs=1e-15)
        assert gb == pytest.approx(0.0, abs=1e-15)

    def test_l2_term(self):
        X = np.array([[1.0], [2.0]])
        y = np.array([1.0, 0.0])
        w = np.array([3.0])
        base, gw0, _ = loss_and_gradient(w, 0.0, X, y, l2=0.0)
        pen, gw1, _ = loss_and_gradient(w, 0.0, X, y, l2=0.1)
        assert pen - base == pytest.approx(0.5 * 0.1 * 9.0, rel=1e-12)
        assert gw1[0] - gw0[0] == pytest.approx(0.1 * 3.0, rel=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        X = rng.random((30, 4))
        y = (rng.random(30) > 0.5).astype(float)
        model = LogisticModel(weights=rng.normal(size=4), bias=0.3)
        assert gradient_check(model, X, y, l2=0.01) < 1e-6


class TestTrainLogistic:
    def test_separable_data_fits(self):
        X, y = separable_data()
        model = train_logistic(X, y, TrainingConfig(epochs=500))
        assert (model.predict(X) == y).mean() == 1.0
        assert model.final_loss < math.log(2)

    def test_zero_init_deterministic(self):
        X, y = separable_data()
        a = train_logistic(X, y)
        b = train_logistic(X, y)
        np.testing.assert_array_equal(a.weights, b.weights)
        assert a.bias == b.bias

    def test_convergence_tol_stops_early(self):
        X, y = separable_data()
        loose = train_logistic(X, y, TrainingConfig(epochs=5000, convergence_tol=1e-3))
        assert loose.epochs_run < 5000

    def test_epochs_run_capped(self):
        X, y = separable_data()
        model = train_logistic(X, y, TrainingConfig(epochs=7, convergence_tol=0.0))
        assert model.epochs_run == 7

    def test_single_class_rejected(self):
        X = np.random.default_rng(0).random((10, 3))
        with pytest.raises(DegenerateTrainingError, match="single class"):
            train_logistic(X, np.ones(10))

    def test_non_binary_labels_rejected(self):
        X = np.random.default_rng(0).random((4, 2))
        with pytest.raises(InvalidInputError, match="binary"):
            train_logistic(X, np.array([0.0, 1.0, 2.0, 0.0]))

    def test_nan_matrix_rejected(self):
        X = np.ones((4, 2))
        X[1, 1] = np.nan
        with pytest.raises(InvalidInputError, match="NaN"):
            train_logistic(X, np.array([0, 1, 0, 1]))

    def test_label_length_mismatch(self):
        with pytest.raises(DimensionError):
            train_logistic(np.ones((4, 2)), np.array([0, 1]))

    def test_training_config_validation(self):
        with pytest.raises(InvalidArgumentError):
            TrainingConfig(learning_rate=0.0)
        with pytest.raises(InvalidArgumentError):
            TrainingConfig(epochs=0)
        with pytest.raises(InvalidArgumentError):
            TrainingConfig(l2_penalty=-1.0)


class TestLogisticModel:
    def test_threshold_is_inclusive(self):
        # p = 0.5 exactly at zero weights; >= threshold counts positive
        model = LogisticModel(weights=np.zeros(2), bias=0.0, threshold=0.5)
        assert model.predict(np.zeros(2)) == 1

    def test_threshold_validation(self):
        for bad in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(InvalidArgumentError):
                LogisticModel(weights=np.zeros(1), bias=0.0, threshold=bad)

    def test_dimension_checks(self):
        model = LogisticModel(weights=np.zeros(3), bias=0.0)
        with pytest.raises(DimensionError):
            model.predict_proba(np.zeros(4))
        with pytest.raises(DimensionError):
            model.predict_proba(np.zeros((2, 4)))
        with pytest.raises(DimensionError):
            model.predict_proba(np.zeros((2, 2, 3)))

    def test_monotone_in_positive_weight(self):
        model = LogisticModel(weights=np.array([1.0, 0.0]), bias=-0.5)
        lo = model.predict_proba(np.array([0.2, 0.9]))
        hi = model.predict_proba(np.array([0.8, 0.9]))
        assert hi > lo

    def test_round_trip_dict(self):
        model = LogisticModel(weights=np.array([0.25, -1.5]), bias=0.75, threshold=0.4)
        again = LogisticModel.from_dict(model.to_dict())
        np.testing.assert_array_equal(again.weights, model.weights)
        assert again.bias == model.bias
        assert again.threshold == model.threshold

    def test_round_trip_file_with_fingerprint(self, tmp_path):
        model = LogisticModel(weights=np.array([1.0]), bias=0.0)
        p = tmp_path / "m.json"
        save_model(model, p, column_fingerprint="abc123")
        again = load_model(p)
        np.testing.assert_array_equal(again.weights, model.weights)

    def test_load_missing(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_model(tmp_path / "nope.json")

    def test_from_dict_malformed(self):
        with pytest.raises(ConfigError, match="malformed model document"):
            LogisticModel.from_dict({"bias": 0.0})


class TestGradientCheck:
    def test_trained_models_pass(self):
        rng = np.random.default_rng(11)
        for _ in range(3):
            X = rng.random((25, 3))
            y = (rng.random(25) > 0.5).astype(float)
            model = train_logistic(X, y, TrainingConfig(epochs=50))
            assert gradient_check(model, X, y) < 1e-5


def echo_command(expr: str) -> list:
    """Command printing one probability per stdin line, value from expr."""
    script = (
        "import sys, json\n"
        "for line in sys.stdin:\n"
        "    if not line.strip():\n"
        "        continue\n"
        "    row = json.loads(line)\n"
        f"    print({expr})\n"
    )
    return [sys.executable, "-c", script]


class TestSubprocessModel:
    def test_round_trip(self):
        # adapter probability = mean of the encoded row
        model = SubprocessModel(echo_command("sum(row)/len(row)"), threshold=0.5)
        rows = np.array([[0.2, 0.4], [0.8, 1.0]])
        np.testing.assert_allclose(model.predict_proba(rows), [0.3, 0.9])
        np.testing.assert_array_equal(model.predict(rows), [0, 1])

    def test_single_row_squeezes(self):
        model = SubprocessModel(echo_command("0.7"))
        assert model.predict_proba(np.array([0.1, 0.2])) == pytest.approx(0.7)

    def test_count_mismatch(self):
        # one output line regardless of input length
        script = "import sys; sys.stdin.read(); print(0.5)"
        model = SubprocessModel([sys.executable, "-c", script])
        with pytest.raises(InvalidInputError, match="returned 1 probabilities for 2 rows"):
            model.predict_proba(np.zeros((2, 3)))

    def test_out_of_range_probability(self):
        model = SubprocessModel(echo_command("1.5"))
        with pytest.raises(InvalidInputError, match="outside"):
            model.predict_proba(np.zeros((1, 2)))

    def test_empty_command_rejected(self):
        with pytest.raises(InvalidArgumentError):
            SubprocessModel([])

    def test_dimension_enforced_when_known(self):
        model = SubprocessModel(echo_command("0.5"), d=3)
        with pytest.raises(DimensionError):
            model.predict_proba(np.zeros((2, 4)))
