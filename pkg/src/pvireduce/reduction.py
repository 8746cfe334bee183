"""Static reduction: drop the easiest instances once, retrain from scratch.

A sweep retrains fresh models over a grid of reduction ratios and records
test accuracy of both the classifier and the null (label-prior) model.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, replace as dc_replace
from fractions import Fraction

import scipy.sparse as sp

from .corpus import Dataset, to_null_view
from .family import Hyperparams, evaluate, feature_matrix, train
from .pvi import compute_pvi, rank_by_difficulty

STRATEGIES = ("pvi", "pvi_balanced", "random")


@dataclass(frozen=True)
class SweepPoint:
    r: float
    subset_size: int
    cm_accuracy: float
    eim_accuracy: float
    train_seconds: float
    variant: str
    strategy: str
    balanced: bool
    seed: int


from functools import lru_cache


@lru_cache(maxsize=1024)
def _keep_fraction(r: float) -> Fraction:
    return 1 - Fraction(repr(float(r)))


def retained_count(m: int, r: float) -> int:
    """floor(m * (1 - r)), evaluated exactly for decimal-grid ratios.

    Uses rational arithmetic so e.g. m=10, r=0.3 gives 7, not the 6 that
    naive float truncation of 10*0.7 would produce.
    """
    if not 0.0 <= r < 1.0:
        raise ValueError(f"reduction ratio must be in [0,1), got {r}")
    return int(math.floor(m * _keep_fraction(r)))


def _pvi_order(dataset: Dataset, records):
    by_index = {r.original_index: r for r in records}
    if set(by_index) != {inst.original_index for inst in dataset}:
        raise ValueError("records do not cover exactly the dataset's indices")
    return by_index


def select_subset(train_ds: Dataset, records, r: float) -> Dataset:
    """Keep the hardest floor(m(1-r)) instances, reordered by original index.

    Equivalent to sorting by score descending (ties by ascending index),
    dropping the leading easiest r*m entries, and restoring file order.
    """
    _pvi_order(train_ds, records)
    keep = set(rank_by_difficulty(records, "descending_pvi")[len(train_ds) - retained_count(len(train_ds), r):])
    kept = sorted((inst for inst in train_ds if inst.original_index in keep),
                  key=lambda inst: inst.original_index)
    return dc_replace(train_ds, instances=tuple(kept), provenance_tag="subset")


def balanced_select(train_ds: Dataset, records, r: float) -> Dataset:
    """select_subset applied independently within each class, then merged."""
    by_index = _pvi_order(train_ds, records)
    keep: set[int] = set()
    for c in range(train_ds.num_classes):
        class_insts = [inst for inst in train_ds if inst.label == c]
        if not class_insts:
            continue
        class_records = [by_index[inst.original_index] for inst in class_insts]
        n_keep = retained_count(len(class_insts), r)
        ranked = rank_by_difficulty(class_records, "descending_pvi")
        keep.update(ranked[len(class_insts) - n_keep:])
    kept = sorted((inst for inst in train_ds if inst.original_index in keep),
                  key=lambda inst: inst.original_index)
    return dc_replace(train_ds, instances=tuple(kept), provenance_tag="subset")


def random_select(train_ds: Dataset, r: float, seed: int) -> Dataset:
    """Seeded uniform subset of floor(m(1-r)) instances, in original order."""
    import numpy as np
    m = len(train_ds)
    n_keep = retained_count(m, r)
    rng = np.random.default_rng(seed)
    positions = sorted(rng.choice(m, size=n_keep, replace=False).tolist())
    kept = tuple(train_ds.instances[p] for p in positions)
    kept = tuple(sorted(kept, key=lambda inst: inst.original_index))
    return dc_replace(train_ds, instances=kept, provenance_tag="subset")


def _null_features(n: int, hp: Hyperparams) -> sp.csr_matrix:
    return sp.csr_matrix((n, hp.dim))


def static_sweep(train_ds: Dataset, test_ds: Dataset, ratios, hp: Hyperparams,
                 strategy: str = "pvi", variant: str | None = None,
                 derived_seeds: bool = False, timing: bool = True,
                 runtime_log=None, jobs: int = 1) -> list[SweepPoint]:
    """Retrain at each reduction ratio and evaluate on the held-out set.

    The conditional and null scoring models are trained once on the full
    train set; each ratio then gets a completely fresh classifier and a fresh
    null model trained on the subset chosen by `strategy`. r=0 is always
    included as the baseline. With `derived_seeds`, point i trains with
    seed hp.seed + i instead of the shared seed.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    variant = variant or train_ds.provenance_tag
    ratios = sorted(set(float(r) for r in ratios) | {0.0})
    for r in ratios:
        if not 0.0 <= r < 1.0:
            raise ValueError(f"reduction ratio must be in [0,1), got {r}")
    X_train = feature_matrix(train_ds, hp)
    X_test = feature_matrix(test_ds, hp)

    clock = time.perf_counter if timing else (lambda: 0.0)
    t0 = clock()
    g_cond = train(train_ds, hp, features=X_train)
    g_null = train(to_null_view(train_ds), hp,
                   features=_null_features(len(train_ds), hp))
    records = compute_pvi(g_cond, g_null, train_ds, features=X_train)
    if runtime_log is not None:
        runtime_log.record(variant, 0.0, "pvi_compute", clock() - t0)

    pos_by_index = {inst.original_index: pos for pos, inst in enumerate(train_ds)}

    def run_point(i, r):
        seed = hp.seed + i if derived_seeds else hp.seed
        point_hp = dc_replace(hp, seed=seed)
        if strategy == "pvi":
            subset = select_subset(train_ds, records, r)
        elif strategy == "pvi_balanced":
            subset = balanced_select(train_ds, records, r)
        else:
            subset = random_select(train_ds, r, seed)
        rows = [pos_by_index[inst.original_index] for inst in subset]
        X_subset = X_train[rows]
        t_cm = clock()
        cm = train(subset, point_hp, features=X_subset)
        cm_seconds = clock() - t_cm
        t_eim = clock()
        eim = train(to_null_view(subset), point_hp,
                    features=_null_features(len(subset), hp))
        eim_seconds = clock() - t_eim
        t_eval = clock()
        cm_acc = evaluate(cm, test_ds, features=X_test).accuracy
        eim_acc = evaluate(eim, test_ds, features=X_test).accuracy
        eval_seconds = clock() - t_eval
        if runtime_log is not None:
            runtime_log.record(variant, r, "train_cm", cm_seconds)
            runtime_log.record(variant, r, "train_eim", eim_seconds)
            runtime_log.record(variant, r, "evaluate", eval_seconds)
        return SweepPoint(r, len(subset), cm_acc, eim_acc, cm_seconds,
                          variant, strategy, strategy == "pvi_balanced", seed)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_point, i, r) for i, r in enumerate(ratios)]
            return [f.result() for f in futures]
    return [run_point(i, r) for i, r in enumerate(ratios)]


# ---------------------------------------------------------------------------
# export

_CSV_HEADER = ["variant", "strategy", "r", "subset_size", "cm_accuracy",
               "eim_accuracy", "train_seconds", "seed"]


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def write_sweep_csv(points, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for p in points:
            writer.writerow([p.variant, p.strategy, _f17(p.r), p.subset_size,
                             _f17(p.cm_accuracy), _f17(p.eim_accuracy),
                             _f17(p.train_seconds), p.seed])


def read_sweep_csv(path) -> list[SweepPoint]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        return [SweepPoint(float(r), int(size), float(cm), float(eim),
                           float(secs), variant, strategy,
                           strategy == "pvi_balanced", int(seed))
                for variant, strategy, r, size, cm, eim, secs, seed in reader]
