import math
import random

import pytest

from expdb.errors import EmptyInput, LengthMismatch
from expdb.metrics import (
    ConfusionMatrix,
    SingleClassInput,
    UnknownLabel,
    accuracy,
    auc_binary,
    confusion,
    mae,
    precision_recall_f1_macro,
    rmse,
)

from oracles import brute_accuracy, brute_auc, brute_mae, brute_prf_macro, brute_rmse


def test_accuracy_examples():
    assert accuracy(["a", "a", "b"], ["a", "b", "b"]) == pytest.approx(2 / 3)
    assert accuracy(["a", "b"], ["a", "b"]) == 1.0
    assert accuracy(["a", "b"], ["b", "a"]) == 0.0


def test_accuracy_errors():
    with pytest.raises(LengthMismatch):
        accuracy(["a"], ["a", "b"])
    with pytest.raises(EmptyInput):
        accuracy([], [])


def test_confusion_examples():
    cm = confusion(["a", "b"], ["a", "b"], ("a", "b"))
    assert cm.counts == [[1, 0], [0, 1]]
    cm = confusion(["a", "a"], ["b", "b"], ("a", "b"))
    assert cm.counts == [[0, 2], [0, 0]]
    cm = confusion(["a", "b", "a"], ["a", "a", "b"], ("a", "b"))
    assert cm.counts == [[1, 1], [1, 0]]


def test_confusion_errors():
    with pytest.raises(UnknownLabel):
        confusion(["z"], ["a"], ("a", "b"))
    with pytest.raises(LengthMismatch):
        confusion(["a"], [], ("a",))


def test_prf_perfect_classifier():
    cm = confusion(["a", "b", "c"], ["a", "b", "c"], ("a", "b", "c"))
    scores = precision_recall_f1_macro(cm)
    assert scores == {"precision": 1.0, "recall": 1.0, "f1": 1.0}


def test_prf_hand_computed():
    cm = confusion(["a", "b", "a"], ["a", "a", "b"], ("a", "b"))
    scores = precision_recall_f1_macro(cm)
    assert scores["precision"] == pytest.approx(0.25)  # (0.5 + 0.0) / 2
    assert scores["recall"] == pytest.approx(0.25)


def test_prf_zero_denominator_contributes_zero():
    # class b never predicted and never true-positive
    cm = confusion(["a", "a"], ["a", "a"], ("a", "b"))
    scores = precision_recall_f1_macro(cm)
    assert scores["precision"] == pytest.approx(0.5)


def test_auc_spec_example():
    y = [True, True, False, False]
    scores = [0.9, 0.4, 0.6, 0.2]
    # concordant pairs: 3 of 4
    assert auc_binary(y, scores) == pytest.approx(0.75)


def test_auc_perfect_separation():
    assert auc_binary([True, True, False], [0.9, 0.8, 0.1]) == 1.0


def test_auc_all_ties():
    assert auc_binary([True, False, True, False], [0.5] * 4) == 0.5


def test_auc_errors():
    with pytest.raises(SingleClassInput):
        auc_binary([True, True], [0.1, 0.2])
    with pytest.raises(LengthMismatch):
        auc_binary([True, False], [0.1])


def test_rmse_mae_examples():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mae([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert rmse([1.0, 2.0], [2.0, 3.0]) == 1.0
    assert mae([1.0, 2.0], [2.0, 3.0]) == 1.0
    assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(math.sqrt(12.5))
    assert mae([0.0, 0.0], [3.0, 4.0]) == 3.5


def test_oracle_equivalence_random_instances():
    rng = random.Random(271828)
    classes = ("a", "b", "c")
    for _ in range(400):
        n = rng.randint(1, 30)
        y_true = [rng.choice(classes) for _ in range(n)]
        y_pred = [rng.choice(classes) for _ in range(n)]
        assert abs(accuracy(y_true, y_pred) - brute_accuracy(y_true, y_pred)) <= 1e-12
        ours = precision_recall_f1_macro(confusion(y_true, y_pred, classes))
        ref = brute_prf_macro(y_true, y_pred, classes)
        for key in ("precision", "recall", "f1"):
            assert abs(ours[key] - ref[key]) <= 1e-12
        y_float = [rng.uniform(-10, 10) for _ in range(n)]
        p_float = [rng.uniform(-10, 10) for _ in range(n)]
        assert abs(rmse(y_float, p_float) - brute_rmse(y_float, p_float)) <= 1e-12
        assert abs(mae(y_float, p_float) - brute_mae(y_float, p_float)) <= 1e-12


def test_auc_oracle_equivalence_and_symmetry():
    rng = random.Random(314159)
    for _ in range(400):
        n = rng.randint(2, 30)
        labels = [rng.random() < 0.5 for _ in range(n)]
        if all(labels) or not any(labels):
            labels[0] = not labels[0]
        # quantized scores force plenty of ties
        scores = [round(rng.random(), 1) for _ in range(n)]
        ours = auc_binary(labels, scores)
        assert abs(ours - brute_auc(labels, scores)) <= 1e-12
        flipped = [not t for t in labels]
        assert abs(ours + auc_binary(flipped, scores) - 1.0) <= 1e-12


def test_accuracy_from_confusion_trace():
    rng = random.Random(17)
    classes = ("x", "y", "z")
    for _ in range(50):
        n = rng.randint(1, 40)
        y_true = [rng.choice(classes) for _ in range(n)]
        y_pred = [rng.choice(classes) for _ in range(n)]
        cm = confusion(y_true, y_pred, classes)
        assert accuracy(y_true, y_pred) == pytest.approx(cm.trace / cm.total)


def test_metric_invariance_under_relabeling():
    rng = random.Random(23)
    classes = ("a", "b", "c")
    relabel = {"a": "z", "b": "q", "c": "m"}
    for _ in range(20):
        n = rng.randint(2, 30)
        y_true = [rng.choice(classes) for _ in range(n)]
        y_pred = [rng.choice(classes) for _ in range(n)]
        mapped_true = [relabel[t] for t in y_true]
        mapped_pred = [relabel[p] for p in y_pred]
        mapped_classes = tuple(relabel[c] for c in classes)
        assert accuracy(y_true, y_pred) == accuracy(mapped_true, mapped_pred)
        assert (confusion(y_true, y_pred, classes).counts
                == confusion(mapped_true, mapped_pred, mapped_classes).counts)


def test_confusion_matrix_json_roundtrip():
    cm = ConfusionMatrix(("a", "b"), [[3, 1], [0, 2]])
    assert ConfusionMatrix.from_json_dict(cm.to_json_dict()) == cm
