import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from idsbench.errors import EmptyMatrix, LabelOutOfRange, LengthMismatch
from idsbench.metrics import ConfusionMatrix, compute_metrics, confusion, evaluate


def test_binary_hand_arithmetic():
    # TP=40 FN=10 FP=5 TN=45, positive class 1
    y = np.array([1] * 50 + [0] * 50)
    p = np.array([1] * 40 + [0] * 10 + [1] * 5 + [0] * 45)
    cm = confusion(y, p, 2)
    assert cm.counts.tolist() == [[45, 5], [10, 40]]
    assert cm.tp().tolist() == [45, 40] and cm.fp().tolist() == [10, 5]
    assert cm.fn().tolist() == [5, 10] and cm.tn().tolist() == [40, 45]
    rep = compute_metrics(cm)
    assert abs(rep.accuracy - 85 / 100) < 1e-12
    assert abs(rep.precision[1] - 40 / 45) < 1e-12
    assert abs(rep.recall[1] - 40 / 50) < 1e-12
    f1 = 2 * (40 / 45) * 0.8 / (40 / 45 + 0.8)
    assert abs(rep.f1[1] - f1) < 1e-12
    assert abs(rep.precision[0] - 45 / 55) < 1e-12
    w = (50 * rep.f1[0] + 50 * rep.f1[1]) / 100
    assert abs(rep.weighted["f1"] - w) < 1e-12


def test_multiclass_hand_arithmetic():
    cm = ConfusionMatrix(np.array([[5, 1, 0], [2, 3, 1], [0, 0, 4]]))
    rep = compute_metrics(cm)
    assert abs(rep.accuracy - 12 / 16) < 1e-12
    assert np.allclose(rep.precision, [5 / 7, 3 / 4, 4 / 5], atol=1e-12, rtol=0)
    assert np.allclose(rep.recall, [5 / 6, 3 / 6, 4 / 4], atol=1e-12, rtol=0)
    assert rep.support.tolist() == [6, 6, 4]
    assert abs(rep.macro["recall"] - np.mean([5 / 6, 0.5, 1.0])) < 1e-12
    assert rep.summary()["accuracy"] == rep.accuracy


def test_undefined_ratios_are_zero_and_flagged():
    rep = evaluate([0, 0, 1], [0, 0, 0], 3)
    assert rep.precision[1] == 0 and rep.recall[2] == 0
    assert 1 in rep.undefined["precision"] and 2 in rep.undefined["recall"]
    assert np.all(np.isfinite(rep.f1))


def test_errors():
    with pytest.raises(LengthMismatch):
        confusion([0, 1], [0], 2)
    with pytest.raises(LabelOutOfRange):
        confusion([0, 3], [0, 1], 2)
    with pytest.raises(EmptyMatrix):
        compute_metrics(ConfusionMatrix(np.zeros((2, 2), dtype=int)))


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.data())
def test_metric_identities(k, data):
    n = data.draw(st.integers(1, 200))
    y = np.array(data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n)))
    p = np.array(data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n)))
    cm = confusion(y, p, k)
    rep = compute_metrics(cm)
    assert cm.total == n
    assert rep.accuracy == pytest.approx(np.trace(cm.counts) / cm.total, abs=1e-15)
    assert rep.accuracy == pytest.approx(np.mean(y == p), abs=1e-12)
    assert np.all((rep.precision >= 0) & (rep.precision <= 1))
    assert np.all(cm.tp() + cm.fp() + cm.fn() + cm.tn() == n)
    # weighted recall equals accuracy
    assert rep.weighted["recall"] == pytest.approx(rep.accuracy, abs=1e-12)
    assert (cm + cm).total == 2 * n
