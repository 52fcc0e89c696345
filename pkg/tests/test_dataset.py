import numpy as np
import pytest

from conftest import synthetic_tables
from rmnklab.meta.dataset import build_dataset, combo_label, minmax_apply, minmax_fit


@pytest.fixture(scope="module")
def ds():
    rows, perf = synthetic_tables()
    return build_dataset(rows, perf, "reso", master_seed=7)


def test_split_sizes(ds):
    assert ds.train_rows.size == 162 and ds.test_rows.size == 18
    assert ds.n_folds == 9
    assert ds.Y.shape == (180, 3) and ds.target_names == ["pls", "gsemo", "nsga2"]


def test_one_test_row_per_combo_and_stratified_folds(ds):
    combos = np.array(ds.combos)
    assert sorted(combos[ds.test_rows]) == sorted(set(ds.combos))
    for f in range(9):
        members = combos[ds.fold == f]
        assert members.size == 18 and len(set(members)) == 18


def test_scaler_fit_on_train_only(ds):
    tr = ds.train_rows
    assert np.allclose(ds.X[tr].min(axis=0), 0) and np.allclose(ds.X[tr].max(axis=0), 1)
    lo, span = minmax_fit(np.array([[2.0, 5.0], [4.0, 5.0]]))
    assert minmax_apply(np.array([[3.0, 9.0]]), lo, span).tolist() == [[0.5, 0.0]]


def test_split_depends_only_on_seed():
    rows, perf = synthetic_tables()
    a = build_dataset(rows, perf, "reso", master_seed=7)
    b = build_dataset(list(reversed(rows)), perf, "reso", master_seed=7)
    c = build_dataset(rows, perf, "reso", master_seed=8)
    assert a.instance_ids == b.instance_ids and np.array_equal(a.fold, b.fold)
    assert not np.array_equal(a.fold, c.fold)


def test_metric_selects_targets():
    rows, perf = synthetic_tables()
    hv = build_dataset(rows, perf, "hv", master_seed=7)
    reso = build_dataset(rows, perf, "reso", master_seed=7)
    assert np.allclose(hv.Y, 1 - reso.Y / 2)
    with pytest.raises(ValueError):
        build_dataset(rows, perf, "igd", master_seed=7)


def test_missing_coverage_rejected():
    rows, perf = synthetic_tables()
    with pytest.raises(ValueError):
        build_dataset(rows[1:], perf, "reso", master_seed=7)
    with pytest.raises(ValueError):
        build_dataset(rows, perf[3:], "reso", master_seed=7)


def test_params_columns_optional():
    rows, perf = synthetic_tables()
    ds = build_dataset(rows, perf, "reso", master_seed=1, include_params=True)
    assert ds.feature_names[-4:] == ["rho", "m", "n", "k"]


def test_combo_label():
    assert combo_label(-0.4, 2, 1) == "rho-0.4_m2_k1"
    assert combo_label(0.0, 3, 4) == "rho+0_m3_k4"
