import numpy as np
import pytest

from sdwd.data import (Dataset, encode_labels, read_csv, read_features_csv, read_sparse,
                       standardize, write_csv)
from sdwd.errors import DataError


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(np.ones((3, 2)), [1, -1])
    with pytest.raises(DataError):
        Dataset(np.ones((2, 2)), [1, 0])
    with pytest.raises(DataError):
        Dataset(np.array([[np.nan, 1.0], [0, 1]]), [1, -1])
    d = Dataset(np.zeros((2, 1)), [1, -1])
    with pytest.raises(ValueError):
        d.x[0, 0] = 1.0


def test_check_fittable():
    with pytest.raises(DataError):
        Dataset(np.ones((3, 1)), [1, 1, 1]).check_fittable()


def test_standardize_moments(raw):
    z, std = standardize(raw)
    np.testing.assert_allclose(z.x.mean(0), 0, atol=1e-12)
    np.testing.assert_allclose((z.x ** 2).mean(0), 1, atol=1e-12)
    np.testing.assert_allclose(std.transform(raw.x), z.x, atol=1e-12)
    np.testing.assert_allclose(std.transform(raw.x[3]), z.x[3], atol=1e-12)


def test_constant_column_dropped():
    x = np.c_[np.arange(6.0), np.full(6, 3.0), np.arange(6.0) ** 2]
    with pytest.warns(UserWarning):
        z, std = standardize(Dataset(x, [1, -1, 1, -1, 1, -1]))
    assert z.p == 2 and std.dropped == frozenset({1})
    np.testing.assert_array_equal(std.kept, [0, 2])
    with pytest.raises(DataError):
        std.transform(np.ones((2, 2)))


def test_all_constant_rejected():
    with pytest.raises(DataError):
        standardize(Dataset(np.ones((4, 2)), [1, -1, 1, -1]))


def test_encode_labels():
    y, names = encode_labels(["b", "a", "b"])
    assert names == ("a", "b")
    np.testing.assert_array_equal(y, [1, -1, 1])
    with pytest.raises(DataError):
        encode_labels(["a", "b", "c"])


def test_csv_roundtrip(tmp_path, raw):
    path = tmp_path / "d.csv"
    write_csv(raw, path)
    back = read_csv(path)
    np.testing.assert_array_equal(back.x, raw.x)
    np.testing.assert_array_equal(back.y, raw.y)
    assert back.feature_names == raw.feature_names
    fpath = tmp_path / "f.csv"
    fpath.write_text("a,b\n1,2\n3.5,-4\n")
    np.testing.assert_array_equal(read_features_csv(fpath), [[1, 2], [3.5, -4]])


def test_csv_label_column_by_name(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("cls,a,b\nyes,1,2\nno,3,4\nyes,5,7\n")
    d = read_csv(path, label_column="cls")
    np.testing.assert_array_equal(d.y, [1, -1, 1])
    np.testing.assert_array_equal(d.x, [[1, 2], [3, 4], [5, 7]])
    d0 = read_csv(path, label_column=0)
    np.testing.assert_array_equal(d0.x, d.x)


def test_csv_bad_number(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,label\nx,1\n2,-1\n")
    with pytest.raises(DataError):
        read_csv(path)


def test_sparse_reader(tmp_path):
    path = tmp_path / "d.txt"
    path.write_text("+1 1:0.5 3:2\n-1 2:1\n+1 3:-1\n")
    d = read_sparse(path)
    np.testing.assert_array_equal(d.x, [[0.5, 0, 2], [0, 1, 0], [0, 0, -1]])
    np.testing.assert_array_equal(d.y, [1, -1, 1])
    assert read_sparse(path, n_features=5).p == 5


@pytest.mark.parametrize("line", ["+1 0:1\n", "+1 3:1 2:1\n", "+1 2:x\n"])
def test_sparse_reader_rejects(tmp_path, line):
    path = tmp_path / "d.txt"
    path.write_text("-1 1:1\n" + line)
    with pytest.raises(DataError):
        read_sparse(path)


def test_sparse_numeric_label_order(tmp_path):
    path = tmp_path / "d.txt"
    path.write_text("10 1:1\n9 1:2\n")
    d = read_sparse(path)
    np.testing.assert_array_equal(d.y, [1, -1])


def test_subset(raw):
    s = raw.subset([0, 1, 2])
    assert s.n == 3 and s.label_names == raw.label_names
