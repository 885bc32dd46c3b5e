import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mimgan.data import (CsvFormatError, Dataset, SplitSpec, check_manifest, load_csv,
                         make_manifest, make_two_cluster, save_csv, scale_apply, scale_fit, split,
                         write_manifest)


def write(path, text):
    path.write_text(text)
    return path


def test_load_with_labels(tmp_path):
    ds = load_csv(write(tmp_path / "a.csv", "f0,f1,label\n1,2,0\n3,4,1\n5,6,0\n"))
    assert ds.n == 3 and ds.d == 2 and ds.labels.tolist() == [0, 1, 0]
    assert ds.name == "a"


def test_load_without_labels(tmp_path):
    ds = load_csv(write(tmp_path / "b.csv", "f0,f1\n1,2\n3,4\n"))
    assert ds.labels is None and ds.anomaly_rate is None


@pytest.mark.parametrize("text, line", [
    ("f0,f1,label\n1,2,0\n3,x,1\n", "line 3"),
    ("f0,f1,label\n1,2,0\n3,4\n", "line 3"),
    ("f0,f1,label\n1,2,7\n", "line 2"),
    ("a,b\n1,2\n", "line 1"),
])
def test_load_errors_carry_line_numbers(tmp_path, text, line):
    with pytest.raises(CsvFormatError, match=line):
        load_csv(write(tmp_path / "bad.csv", text))


def test_constant_columns_flagged(tmp_path, caplog):
    ds = load_csv(write(tmp_path / "c.csv", "f0,f1\n1,5\n2,5\n3,5\n"))
    assert ds.constant_features == (1,)
    assert "constant" in caplog.text


def test_csv_roundtrip(tmp_path):
    ds = make_two_cluster(n=40, d=3, seed=2)
    save_csv(ds, tmp_path / "r.csv")
    back = load_csv(tmp_path / "r.csv")
    assert back.features.tobytes() == ds.features.tobytes()
    assert back.labels.tolist() == ds.labels.tolist()


def test_dataset_is_immutable():
    ds = make_two_cluster(n=20)
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0


def test_split_examples():
    ds = make_two_cluster(n=50)
    train, test = split(ds, SplitSpec(49, 3))
    assert test.n == 1
    again = split(ds, SplitSpec(49, 3))
    assert again[0].features.tobytes() == train.features.tobytes()
    with pytest.raises(ValueError):
        split(ds, SplitSpec(50))


def test_split_size_for_thyroid_shape():
    ds = Dataset("thyroid", np.zeros((3772, 6)))
    assert split(ds, SplitSpec(2800))[1].n == 972


@given(st.integers(2, 60), st.integers(0, 10_000), st.data())
def test_split_partitions_rows(n, seed, data):
    n_train = data.draw(st.integers(1, n - 1))
    ds = Dataset("ids", np.arange(n, dtype=float)[:, None])
    train, test = split(ds, SplitSpec(n_train, seed))
    rows = np.concatenate([train.features[:, 0], test.features[:, 0]])
    assert sorted(rows.tolist()) == list(range(n))


def test_split_is_label_blind():
    ds = make_two_cluster(n=60)
    flipped = Dataset(ds.name, ds.features, 1 - ds.labels)
    assert split(ds, SplitSpec(40, 1))[0].features.tobytes() == split(flipped, SplitSpec(40, 1))[0].features.tobytes()


def test_scaling_examples():
    scaler = scale_fit(np.array([[0.0, 3.0], [5.0, 3.0], [10.0, 3.0]]))
    out = scale_apply(scaler, np.array([[0.0, 3.0], [5.0, 3.0], [10.0, 3.0]]))
    assert out[:, 0].tolist() == [-1.0, 0.0, 1.0]
    assert out[:, 1].tolist() == [0.0, 0.0, 0.0]
    assert scale_apply(scaler, np.array([[12.0, 3.0]]))[0, 0] == pytest.approx(1.4)
    assert scale_apply(scaler, np.array([[100.0, 3.0]]))[0, 0] == 1.5


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=30))
def test_scaling_maps_train_into_unit_box_and_keeps_order(col):
    x = np.array(col)[:, None]
    out = scale_apply(scale_fit(x), x)
    assert np.all(out >= -1 - 1e-12) and np.all(out <= 1 + 1e-12)
    order = np.argsort(x[:, 0], kind="stable")
    assert np.all(np.diff(out[order, 0]) >= 0)


def test_two_cluster_shape():
    ds = make_two_cluster(n=1000, d=4, anomaly_rate=0.05, seed=0)
    assert ds.n == 1000 and ds.d == 4 and int(ds.labels.sum()) == 50


def test_manifest(tmp_path):
    ds = Dataset("cardio", np.zeros((1831, 21)), np.r_[np.ones(176), np.zeros(1831 - 176)])
    assert check_manifest(make_manifest(ds)) == []
    short = Dataset("musk", np.zeros((3062, 166)), np.r_[np.ones(96), np.zeros(3062 - 96)])
    problems = write_manifest(short, tmp_path / "m.json")
    assert problems and "anomaly_count" in problems[0]
    assert json.loads((tmp_path / "m.json").read_text())["anomaly_count"] == 96
    assert check_manifest({"name": "custom", "n": 3, "d": 1, "anomaly_count": 0}) == []
