import numpy as np
import pytest

from conftest import make_raw
from sdwd.cv import LAMBDA2_GRID, CvConfig, cross_validate, kfold_split, tune_on_validation
from sdwd.errors import DataError
from sdwd.path import PathConfig

FAST = PathConfig(nlambda=12)


def test_default_grid():
    assert len(LAMBDA2_GRID) == 7 and CvConfig().lambda2_grid == LAMBDA2_GRID


def test_kfold_balanced():
    y = np.r_[np.ones(13), -np.ones(9)]
    a = kfold_split(22, 5, 0, y)
    sizes = np.bincount(a)
    assert sizes.max() - sizes.min() <= 1
    for c in (1, -1):
        cnt = np.bincount(a[y == c], minlength=5)
        assert cnt.max() - cnt.min() <= 1
    np.testing.assert_array_equal(a, kfold_split(22, 5, 0, y))
    assert not np.array_equal(a, kfold_split(22, 5, 1, y))


def test_kfold_errors():
    y = np.r_[np.ones(8), -np.ones(2)]
    with pytest.raises(DataError):
        kfold_split(10, 3, 0, y)
    loo = kfold_split(10, 10, 0, y)
    assert sorted(loo) == list(range(10))
    with pytest.raises(ValueError):
        kfold_split(10, 11, 0, y)


def test_cv_lasso_shapes_and_selection():
    raw = make_raw(40, 15, seed=1)
    res = cross_validate(raw, CvConfig(folds=4, path_cfg=FAST), mode="lasso")
    assert res.error_surface.shape == (1, 12) and res.best_lambda2 == 0.0
    bl, bk = res.best_index
    best = res.error_surface[bl, bk]
    assert best == np.nanmin(res.error_surface)
    # ties go to the largest lambda1, i.e. the first index with the minimum
    assert bk == int(np.flatnonzero(res.error_surface[0] == best)[0])
    assert res.final_model.lambda1_selected == pytest.approx(res.best_lambda1)


def test_cv_thread_independent():
    raw = make_raw(30, 10, seed=2)
    grid = (0.01, 0.1, 1.0)
    a = cross_validate(raw, CvConfig(folds=3, lambda2_grid=grid, path_cfg=FAST, threads=1))
    b = cross_validate(raw, CvConfig(folds=3, lambda2_grid=grid, path_cfg=FAST, threads=3))
    np.testing.assert_array_equal(a.error_surface, b.error_surface)
    np.testing.assert_array_equal(a.final_model.beta, b.final_model.beta)


def test_aenet_cv(tmp_path):
    raw = make_raw(40, 12, seed=3)
    res = cross_validate(raw, CvConfig(folds=4, lambda2_grid=(0.1, 1.0), path_cfg=FAST),
                         mode="aenet")
    assert res.stage1_index is not None and np.all(res.stage1_index >= 0)
    assert res.final_model.mode == "aenet" and res.final_model.penalty.weights is not None
    res.write_tsv(tmp_path / "r.tsv")
    lines = (tmp_path / "r.tsv").read_text().splitlines()
    assert lines[0].split("\t") == ["lambda2", "lambda1", "mean_error", "se", "nnz_mean"]
    assert len(lines) == 1 + 2 * 12


def test_validation_tuning():
    raw = make_raw(60, 10, seed=4)
    train, valid = raw.subset(np.arange(30)), raw.subset(np.arange(30, 60))
    res = tune_on_validation(train, valid, CvConfig(lambda2_grid=(0.1,), path_cfg=FAST))
    e = res.error_surface[res.best_index]
    assert res.se_surface[res.best_index] == pytest.approx(np.sqrt(e * (1 - e) / 30))


def test_bad_mode():
    with pytest.raises(ValueError):
        cross_validate(make_raw(), CvConfig(path_cfg=FAST), mode="ridge")
