import csv
import json

import numpy as np
import pytest

from idsbench.errors import (ConfigError, DataError, MalformedRow, MissingFile, MissingLabel, UnknownAttackName,
                             UnseenCategory)
from idsbench.ingest import (NSL_KDD_FOLD_MAP, UNSW_CLASSES, DatasetManifest, fold_nsl_attack, load_dataset,
                             load_raw, map_labels, normalize_unsw_category, parse_numeric)
from conftest import nsl_rows, unsw_rows, write_nsl, write_unsw

import pandas as pd


def test_unsw_published_pair_layout(unsw_pair, unsw_dataset):
    ds, emap = unsw_dataset
    assert ds.n_rows == 600 and ds.n_files == 2
    assert len(ds.feature_names) == 42
    assert "id" not in ds.feature_names and "label" not in ds.feature_names
    assert "attack_cat" not in ds.feature_names
    assert ds.class_names == UNSW_CLASSES
    assert sorted(emap.categories) == ["proto", "service", "state"]
    assert np.array_equal(np.bincount(ds.source), [400, 200])
    assert validate_ok(ds)


def validate_ok(ds):
    from idsbench.data import validate_dataset

    return validate_dataset(ds).ok


def test_blank_category_is_normal(unsw_pair):
    raw = load_raw(DatasetManifest.for_dataset("UNSW_NB15", unsw_pair))
    assert (raw.frame["attack_cat"] == "").any()
    lt = map_labels(raw, DatasetManifest.for_dataset("UNSW_NB15", unsw_pair))
    assert np.array_equal(lt.binary_labels == 0, lt.multiclass_labels == 0)


def test_unsw_category_normalization():
    assert normalize_unsw_category(" Backdoors ") == "Backdoor"
    assert normalize_unsw_category("dos") == "DoS"
    assert normalize_unsw_category("-") == "Normal"
    assert normalize_unsw_category("Zeroday") == "Zeroday"


def test_nsl_files_without_header(nsl_pair, nsl_dataset):
    ds, emap = nsl_dataset
    assert ds.n_rows == 450 and len(ds.feature_names) == 41
    assert "difficulty" not in ds.feature_names
    assert ds.class_names == ("Normal", "DoS", "Probe", "R2L", "U2R")
    assert sorted(emap.categories) == ["flag", "protocol_type", "service"]
    assert validate_ok(ds)


def test_nsl_attack_folding():
    assert fold_nsl_attack("neptune") == "DoS"
    assert fold_nsl_attack("Satan.") == "Probe"
    assert fold_nsl_attack("normal") == "Normal"
    assert fold_nsl_attack("worm") == "DoS"
    assert fold_nsl_attack("httptunnel") == "R2L"
    assert set(NSL_KDD_FOLD_MAP.values()) == {"DoS", "Probe", "R2L", "U2R"}
    with pytest.raises(UnknownAttackName):
        fold_nsl_attack("teleport")


def test_nsl_42_column_variant(tmp_path):
    rows = [r[:-1] for r in nsl_rows(20, 0)]
    p = tmp_path / "kdd.txt"
    with p.open("w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    ds, _ = load_dataset(DatasetManifest.for_dataset("NSL_KDD", [p]))
    assert ds.n_rows == 20 and len(ds.feature_names) == 41


def test_unknown_nsl_attack_in_file(tmp_path):
    rows = nsl_rows(5, 0)
    rows[3][41] = "teleport"
    p = tmp_path / "kdd.txt"
    with p.open("w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(UnknownAttackName):
        load_dataset(DatasetManifest.for_dataset("NSL_KDD", [p]))


def test_missing_file(tmp_path):
    with pytest.raises(MissingFile) as e:
        load_raw(DatasetManifest.for_dataset("UNSW_NB15", [tmp_path / "nope.csv"]))
    assert e.value.exit_code == 2


def test_short_row_reports_file_line(tmp_path):
    p = write_unsw(tmp_path / "t.csv", 10, 0)
    lines = p.read_text().splitlines()
    lines[5] = ",".join(lines[5].split(",")[:-3])
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(MalformedRow) as e:
        load_raw(DatasetManifest.for_dataset("UNSW_NB15", [p]))
    assert e.value.line == 6 and e.value.expected == 45 and e.value.got == 42


def test_long_row_reports_file_line(tmp_path):
    p = write_nsl(tmp_path / "k.txt", 10, 0)
    lines = p.read_text().splitlines()
    lines[7] += ",extra"
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(MalformedRow) as e:
        load_raw(DatasetManifest.for_dataset("NSL_KDD", [p]))
    assert e.value.line == 8 and e.value.got == 44


def test_unknown_width_without_header(tmp_path):
    p = tmp_path / "k.txt"
    p.write_text("1,2,3\n")
    with pytest.raises(MalformedRow):
        load_raw(DatasetManifest.for_dataset("NSL_KDD", [p]))


def test_header_mismatch(tmp_path):
    a = write_unsw(tmp_path / "a.csv", 5, 0)
    b = write_unsw(tmp_path / "b.csv", 5, 1)
    text = b.read_text().splitlines()
    text[0] = text[0].replace("sttl", "ttl_s")
    b.write_text("\n".join(text) + "\n")
    with pytest.raises(DataError):
        load_raw(DatasetManifest.for_dataset("UNSW_NB15", [a, b]))


def test_missing_label_column(tmp_path):
    p = write_unsw(tmp_path / "a.csv", 5, 0)
    with pytest.raises(MissingLabel):
        load_dataset(DatasetManifest.for_dataset("UNSW_NB15", [p], label_column="verdict"))


def test_label_category_contradiction(tmp_path):
    rows = unsw_rows(6, 0)
    rows[2][-2], rows[2][-1] = "Exploits", "0"
    p = tmp_path / "a.csv"
    with p.open("w", newline="") as fh:
        w = csv.writer(fh)
        from idsbench.ingest import UNSW_PUBLISHED_COLUMNS
        w.writerow([c for c, _ in UNSW_PUBLISHED_COLUMNS])
        w.writerows(rows)
    with pytest.raises(DataError, match="contradicts"):
        load_dataset(DatasetManifest.for_dataset("UNSW_NB15", [p]))


def test_parse_numeric_blanks_and_hex():
    col = pd.Series(["1.5", "", "-", "0x1f", " 7 "])
    assert parse_numeric(col, "x").tolist() == [1.5, 0.0, 0.0, 31.0, 7.0]
    with pytest.raises(DataError, match="row 1"):
        parse_numeric(pd.Series(["1", "abc"]), "x")
    with pytest.raises(DataError):
        parse_numeric(pd.Series(["1", "inf"]), "x")


def test_manifest_validation_and_json(tmp_path):
    with pytest.raises(ConfigError):
        DatasetManifest("KDD99", ["a"])
    with pytest.raises(ConfigError):
        DatasetManifest("NSL_KDD", [])
    doc = {"dataset_id": "NSL_KDD", "file_paths": ["KDDTrain+.txt"], "has_header": False,
           "drop_columns": ["Difficulty"]}
    (tmp_path / "m.json").write_text(json.dumps(doc))
    m = DatasetManifest.from_json(tmp_path / "m.json")
    assert m.file_paths == [str(tmp_path / "KDDTrain+.txt")]
    assert m.drop_columns == ["difficulty"]
    assert DatasetManifest.from_dict(m.to_dict()) == m
    with pytest.raises(ConfigError):
        DatasetManifest.from_dict({"dataset_id": "NSL_KDD", "file_paths": ["x"], "colour": 1})
    with pytest.raises(ConfigError):
        DatasetManifest.from_json(tmp_path / "missing.json")


def test_unseen_category_with_fitted_encoding(tmp_path, unsw_dataset):
    from idsbench.preprocess import encode_table

    _, emap = unsw_dataset
    rows = unsw_rows(4, 9)
    rows[0][2] = "sctp"
    p = tmp_path / "x.csv"
    from idsbench.ingest import UNSW_PUBLISHED_COLUMNS
    with p.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([c for c, _ in UNSW_PUBLISHED_COLUMNS])
        w.writerows(rows)
    m = DatasetManifest.for_dataset("UNSW_NB15", [p])
    table = map_labels(load_raw(m), m)
    with pytest.raises(UnseenCategory):
        encode_table(table, emap)
    ds, _ = encode_table(table, emap, unseen="reserve")
    j = ds.feature_names.index("proto")
    assert ds.matrix[0, j] == len(emap.categories["proto"])
