import numpy as np
import pytest

from idsbench.data import Dataset, FeatureSchema, TaskKind, make_schema, validate_dataset


def small(matrix=None, binary=(0, 1, 1), multi=(0, 2, 1), names=("Normal", "DoS", "Probe")):
    matrix = np.arange(6.0).reshape(3, 2) if matrix is None else matrix
    return Dataset(make_schema([("a", "real"), ("b", "nominal")]), matrix, np.array(binary), np.array(multi), names)


def test_task_kind_parse():
    assert TaskKind.parse("Binary") is TaskKind.BINARY
    assert TaskKind.parse(TaskKind.MULTICLASS) is TaskKind.MULTICLASS
    with pytest.raises(ValueError):
        TaskKind.parse("ternary")


def test_schema_rejects_unknown_kind():
    with pytest.raises(ValueError):
        FeatureSchema("x", "float", 0)


def test_dataset_is_frozen_copy():
    m = np.zeros((3, 2))
    d = small(m)
    m[0, 0] = 5
    assert d.matrix[0, 0] == 0
    with pytest.raises(ValueError):
        d.matrix[0, 0] = 1
    assert d.n_rows == 3 and d.feature_names == ["a", "b"]
    assert d.n_classes("binary") == 2 and d.n_classes("multiclass") == 3
    assert np.array_equal(d.columns(["b"]), d.matrix[:, [1]])
    with pytest.raises(KeyError):
        d.columns(["zz"])


def test_valid_dataset_passes():
    rep = validate_dataset(small())
    assert rep.ok and bool(rep) and str(rep) == "valid"


def test_non_finite_cell_is_named():
    m = np.arange(6.0).reshape(3, 2)
    m[1, 1] = np.nan
    rep = validate_dataset(small(m))
    assert not rep.ok
    assert "non-finite value at row 1, col 1 (b)" in str(rep)


def test_label_problems_reported():
    rep = validate_dataset(small(binary=(0, 2, 1)))
    assert any("binary label 2 at row 1" in p for p in rep.problems)
    rep = validate_dataset(small(multi=(0, 7, 1)))
    assert any("multiclass label 7 at row 1 is out of range" in p for p in rep.problems)
    rep = validate_dataset(small(binary=(1, 1, 1)))
    assert any("disagree" in p for p in rep.problems)
    rep = validate_dataset(small(names=("DoS", "Normal", "Probe")))
    assert any("must be 'Normal'" in p for p in rep.problems)


def test_shape_problems_reported():
    d = Dataset(make_schema([("a", "real")]), np.zeros((2, 2)), np.zeros(3), np.zeros(3), ("Normal",))
    rep = validate_dataset(d)
    assert any("2 columns but schema has 1" in p for p in rep.problems)
    assert any("length 3" in p for p in rep.problems)


def test_listing_is_capped():
    m = np.full((50, 2), np.inf)
    d = small(m, binary=np.zeros(50), multi=np.zeros(50))
    rep = validate_dataset(d, max_listed=5)
    assert len([p for p in rep.problems if "non-finite" in p]) == 5
