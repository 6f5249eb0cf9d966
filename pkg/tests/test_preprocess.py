import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from idsbench.data import Dataset, make_schema
from idsbench.errors import DimensionMismatch, EmptyTrainingSet, SplitUnavailable, TooFewRows, UnseenCategory
from idsbench.preprocess import (EncodingMap, apply_scaler, encode_column, fit_label_encoding, fit_scaler,
                                 make_kfold, official_split, stratified_subsample)


def test_label_encoding_sorted_codes():
    emap = fit_label_encoding({"proto": ["udp", "tcp", "arp", "tcp"]})
    assert emap.categories["proto"] == ("arp", "tcp", "udp")
    assert encode_column(emap, "proto", ["tcp", "arp", "udp"]).tolist() == [1.0, 0.0, 2.0]
    assert emap.decode("proto", [2, 0]) == ["udp", "arp"]
    assert EncodingMap.from_dict(emap.to_dict()) == emap


def test_unseen_policy():
    emap = fit_label_encoding({"f": ["a", "b"]})
    with pytest.raises(UnseenCategory):
        encode_column(emap, "f", ["a", "zz"])
    assert encode_column(emap, "f", ["zz", "b"], unseen="reserve").tolist() == [2.0, 1.0]


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 40), st.integers(1, 6)),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_scaler_postconditions(X):
    p = fit_scaler(X)
    Z = apply_scaler(p, X)
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-9)
    spread = np.ptp(X, axis=0)
    for j in range(X.shape[1]):
        if p.std[j] == 0:
            assert np.all(Z[:, j] == 0)
        elif p.std[j] > 1e-6 * max(1.0, np.abs(X[:, j]).max()):
            assert abs(Z[:, j].std() - 1.0) < 1e-9
        assert np.isfinite(Z[:, j]).all() or spread[j] == 0


def test_scaler_uses_training_rows_only():
    X = np.array([[0.0], [2.0], [100.0]])
    p = fit_scaler(X, rows=np.array([0, 1]))
    assert p.mean.tolist() == [1.0] and p.std.tolist() == [1.0]
    assert apply_scaler(p, X)[:, 0].tolist() == [-1.0, 1.0, 99.0]


def test_scaler_errors():
    with pytest.raises(EmptyTrainingSet):
        fit_scaler(np.zeros((1, 3)))
    p = fit_scaler(np.random.default_rng(0).normal(size=(5, 3)))
    with pytest.raises(DimensionMismatch):
        apply_scaler(p, np.zeros((2, 4)))


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 300), st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_kfold_partition_laws(n, k, seed):
    if n < k:
        with pytest.raises(TooFewRows):
            make_kfold(n, k, seed)
        return
    plan = make_kfold(n, k, seed)
    sizes = plan.fold_sizes()
    assert sizes.sum() == n and sizes.max() - sizes.min() <= 1
    seen = np.zeros(n, dtype=int)
    for train, test in plan:
        assert len(np.intersect1d(train, test)) == 0
        assert len(train) + len(test) == n
        seen[test] += 1
    assert np.all(seen == 1)
    assert np.array_equal(make_kfold(n, k, seed).assignments, plan.assignments)


def test_kfold_bad_k():
    with pytest.raises(ValueError):
        make_kfold(10, 1)


def test_official_split():
    schema = make_schema([("a", "real")])
    d = Dataset(schema, np.zeros((5, 1)), np.zeros(5), np.zeros(5), ("Normal",), source=np.array([0, 0, 1, 0, 1]),
                n_files=2)
    train, test = official_split(d)
    assert train.tolist() == [0, 1, 3] and test.tolist() == [2, 4]
    one = Dataset(schema, np.zeros((5, 1)), np.zeros(5), np.zeros(5), ("Normal",))
    with pytest.raises(SplitUnavailable):
        official_split(one)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=5, max_size=300), st.integers(1, 200), st.integers(0, 1000))
def test_stratified_subsample(labels, cap, seed):
    y = np.array(labels)
    idx = stratified_subsample(y, cap, seed)
    assert np.all(np.diff(idx) > 0)
    if cap >= len(y):
        assert len(idx) == len(y)
        return
    present = np.unique(y)
    assert set(np.unique(y[idx])) == set(present) or len(idx) >= cap
    assert len(idx) <= max(cap, len(present))
    assert np.array_equal(idx, stratified_subsample(y, cap, seed))


def test_stratified_subsample_proportions():
    y = np.repeat([0, 1, 2], [7000, 2000, 1000])
    idx = stratified_subsample(y, 1000, 3)
    assert len(idx) == 1000
    assert np.bincount(y[idx]).tolist() == [700, 200, 100]
