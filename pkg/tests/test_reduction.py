import numpy as np
import pytest

from pvireduce import (Hyperparams, balanced_select, evaluate,
                       generate_synthetic, random_select, retained_count,
                       select_subset, static_sweep, train)
from pvireduce.pvi import PviRecord
from pvireduce.reduction import read_sweep_csv, write_sweep_csv


def _records_for(ds, pvis=None, seed=0):
    rng = np.random.default_rng(seed)
    if pvis is None:
        pvis = rng.normal(size=len(ds))
    return [PviRecord(inst.original_index, 0.0, 0.0, float(p))
            for inst, p in zip(ds, pvis)]


def test_retained_count_examples():
    assert retained_count(10, 0.3) == 7
    assert retained_count(40340, 0.1) == 36306
    assert retained_count(100, 0.37) == 63
    assert retained_count(5, 0.0) == 5


def test_retained_count_rejects_bad_ratio():
    with pytest.raises(ValueError):
        retained_count(10, 1.0)
    with pytest.raises(ValueError):
        retained_count(10, -0.1)


def test_retained_count_stratified_grid():
    # integer-arithmetic oracle: floor(m * (100 - k) / 100) for r = k/100;
    # the full exhaustive grid runs in the acceptance suite
    ms = np.arange(1, 10001, dtype=np.int64)
    for k in range(0, 100):
        sample = np.concatenate([ms[:50], ms[::97], ms[-50:]])
        got = np.array([retained_count(int(m), k / 100) for m in sample])
        assert np.array_equal(got, (sample * (100 - k)) // 100)


def test_select_subset_keeps_hardest():
    ds = generate_synthetic(10, 3, (0.5, 0.3, 0.2), seed=1)
    pvis = [5.0, 4.0, 3.0, 2.5, 2.0, 1.5, 1.0, 0.5, 0.0, -1.0]
    records = _records_for(ds, pvis)
    subset = select_subset(ds, records, 0.3)
    assert len(subset) == 7
    # the three highest-pvi instances (indices 0,1,2) are gone
    kept = {i.original_index for i in subset}
    assert kept == set(range(3, 10))
    assert [i.original_index for i in subset] == sorted(kept)


def test_select_subset_r0_identity():
    ds = generate_synthetic(12, 3, (0.5, 0.3, 0.2), seed=1)
    subset = select_subset(ds, _records_for(ds), 0.0)
    assert [i.original_index for i in subset] == [i.original_index for i in ds]
    assert subset.instances == ds.instances


def test_select_subset_membership_brute_force_oracle():
    ds = generate_synthetic(100, 3, (0.5, 0.3, 0.2), seed=5)
    records = _records_for(ds, seed=9)
    for r in (0.13, 0.5, 0.91 - 0.01):
        subset = select_subset(ds, records, r)
        # oracle: re-sort from scratch
        order = sorted(records, key=lambda rec: (-rec.pvi, rec.original_index))
        n_keep = int(np.floor(len(ds) * (1 - r) + 1e-9))
        expected = sorted(rec.original_index for rec in order[len(ds) - n_keep:])
        assert [i.original_index for i in subset] == expected
        indices = [i.original_index for i in subset]
        assert all(a < b for a, b in zip(indices, indices[1:]))


def test_select_subset_index_mismatch():
    ds = generate_synthetic(10, 3, (0.5, 0.3, 0.2), seed=1)
    records = _records_for(ds)[:-1]
    with pytest.raises(ValueError):
        select_subset(ds, records, 0.1)


def test_balanced_select_counts():
    ds = generate_synthetic(300, 3, (0.5, 0.3, 0.2), seed=2)
    records = _records_for(ds, seed=3)
    subset = balanced_select(ds, records, 0.1)
    assert subset.class_counts().tolist() == [90, 90, 90]
    assert balanced_select(ds, records, 0.0).instances == ds.instances


def test_balanced_select_skewed_counts():
    from pvireduce import make_imbalanced
    ds = generate_synthetic(300, 3, (0.5, 0.3, 0.2), seed=2)
    skewed = make_imbalanced(ds, (0.5, 0.3, 0.2), seed=1)
    assert skewed.class_counts().tolist() == [50, 30, 20]
    records = _records_for(skewed, seed=4)
    subset = balanced_select(skewed, records, 0.5)
    assert subset.class_counts().tolist() == [25, 15, 10]


def test_random_select_laws():
    ds = generate_synthetic(1000, 3, (0.5, 0.3, 0.2), seed=2)
    assert random_select(ds, 0.0, seed=1).instances == ds.instances
    small = generate_synthetic(100, 3, (0.5, 0.3, 0.2), seed=2)
    assert len(random_select(small, 0.37, seed=1)) == 63
    a = random_select(ds, 0.5, seed=1)
    b = random_select(ds, 0.5, seed=1)
    c = random_select(ds, 0.5, seed=2)
    assert a.instances == b.instances
    assert a.instances != c.instances


def test_static_sweep_degenerate_matches_plain_train(small_train, small_test):
    hp = Hyperparams(epochs=4)
    points = static_sweep(small_train, small_test, [0.0], hp, timing=False)
    assert len(points) == 1
    baseline = evaluate(train(small_train, hp), small_test)
    assert points[0].cm_accuracy == baseline.accuracy
    assert points[0].subset_size == len(small_train)


def test_static_sweep_always_includes_r0(small_train, small_test):
    hp = Hyperparams(epochs=2)
    points = static_sweep(small_train, small_test, [0.5], hp, timing=False)
    assert [p.r for p in points] == [0.0, 0.5]


def test_static_sweep_subset_sizes(small_train, small_test):
    hp = Hyperparams(epochs=2)
    points = static_sweep(small_train, small_test, [0.0, 0.1, 0.5], hp, timing=False)
    assert [p.subset_size for p in points] == [300, 270, 150]


def test_static_sweep_strategies_and_determinism(small_train, small_test):
    hp = Hyperparams(epochs=2)
    for strategy in ("pvi", "pvi_balanced", "random"):
        a = static_sweep(small_train, small_test, [0.2], hp, strategy=strategy,
                         timing=False)
        b = static_sweep(small_train, small_test, [0.2], hp, strategy=strategy,
                         timing=False)
        assert [(p.r, p.cm_accuracy, p.eim_accuracy) for p in a] == \
               [(p.r, p.cm_accuracy, p.eim_accuracy) for p in b]
        assert a[0].strategy == strategy


def test_static_sweep_rejects_bad_inputs(small_train, small_test):
    hp = Hyperparams(epochs=2)
    with pytest.raises(ValueError):
        static_sweep(small_train, small_test, [1.0], hp)
    with pytest.raises(ValueError):
        static_sweep(small_train, small_test, [0.1], hp, strategy="nope")


def test_sweep_csv_roundtrip(tmp_path, small_train, small_test):
    hp = Hyperparams(epochs=2)
    points = static_sweep(small_train, small_test, [0.0, 0.4], hp, timing=False)
    path = tmp_path / "sweep.csv"
    write_sweep_csv(points, path)
    back = read_sweep_csv(path)
    assert [(p.r, p.subset_size, p.cm_accuracy, p.eim_accuracy, p.variant,
             p.strategy, p.seed) for p in back] == \
           [(p.r, p.subset_size, p.cm_accuracy, p.eim_accuracy, p.variant,
             p.strategy, p.seed) for p in points]
