"""Per-instance difficulty scores from a conditional and a null model.

The score of an instance is the gain, in bits, of the conditional model's
log-probability of the gold label over the null model's. Positive = easy,
negative = hard. Aggregates give the dataset-level information quantities.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .corpus import Dataset
from .family import Model, feature_matrix, predict_dist_matrix


@dataclass(frozen=True)
class PviRecord:
    original_index: int
    null_log2prob: float
    cond_log2prob: float
    pvi: float


@dataclass(frozen=True)
class InfoSummary:
    h_v_y: float
    h_v_y_given_x: float
    i_v: float
    n: int


def compute_pvi(g_cond: Model, g_null: Model, dataset: Dataset,
                features=None) -> tuple[PviRecord, ...]:
    """One record per instance, in dataset order; single vectorized pass."""
    if g_cond.num_classes != dataset.num_classes or g_null.num_classes != dataset.num_classes:
        raise ValueError("model/dataset class-count mismatch")
    X = feature_matrix(dataset, g_cond.hyperparams) if features is None else features
    y = dataset.labels()
    rows = np.arange(len(dataset))
    floor_cond = g_cond.hyperparams.prob_floor
    floor_null = g_null.hyperparams.prob_floor
    p_cond = predict_dist_matrix(g_cond, X)[rows, y]
    # the null model ignores its input by construction; feed the real features
    # anyway so the zero-weight property is exercised, not assumed
    p_null = predict_dist_matrix(g_null, X)[rows, y]
    records = []
    for inst, pc, pn in zip(dataset, p_cond, p_null):
        cond = math.log2(max(float(pc), floor_cond))
        null = math.log2(max(float(pn), floor_null))
        records.append(PviRecord(inst.original_index, null, cond, cond - null))
    return tuple(records)


def summarize(records) -> InfoSummary:
    """Dataset-level entropies and their difference (mean per-instance score)."""
    records = tuple(records)
    if not records:
        raise ValueError("no records to summarize")
    h_y = -float(np.mean([r.null_log2prob for r in records]))
    h_yx = -float(np.mean([r.cond_log2prob for r in records]))
    return InfoSummary(h_y, h_yx, h_y - h_yx, len(records))


def rank_by_difficulty(records, order: str = "descending_pvi") -> tuple[int, ...]:
    """Permutation of original_index; ties break by ascending original_index.

    descending_pvi puts the easiest (highest-score) instances first.
    """
    if order not in ("descending_pvi", "ascending_pvi"):
        raise ValueError(f"unknown order {order!r}")
    sign = -1.0 if order == "descending_pvi" else 1.0
    ranked = sorted(records, key=lambda r: (sign * r.pvi, r.original_index))
    return tuple(r.original_index for r in ranked)


def hardest_k(records, dataset: Dataset, k: int):
    """The k lowest-score instances with texts attached, ascending by score."""
    records = tuple(records)
    if k > len(records):
        raise ValueError(f"k={k} exceeds record count {len(records)}")
    by_index = {inst.original_index: inst for inst in dataset}
    ranked = sorted(records, key=lambda r: (r.pvi, r.original_index))[:k]
    return [(by_index[r.original_index], r.pvi) for r in ranked]


def pvi_histogram(records, num_bins: int, value_range: tuple[float, float]):
    """Fixed-range histogram; out-of-range scores clip into the end bins."""
    if num_bins < 1:
        raise ValueError("num_bins must be >= 1")
    lo, hi = value_range
    values = np.clip([r.pvi for r in records], lo, hi)
    counts, edges = np.histogram(values, bins=num_bins, range=(lo, hi))
    return edges, counts


# ---------------------------------------------------------------------------
# export

_CSV_HEADER = ["original_index", "null_log2prob", "cond_log2prob", "pvi"]


def _f17(x: float) -> str:
    return format(float(x), ".17g")


def write_records_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for r in records:
            writer.writerow([r.original_index, _f17(r.null_log2prob),
                             _f17(r.cond_log2prob), _f17(r.pvi)])


def read_records_csv(path) -> tuple[PviRecord, ...]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        return tuple(PviRecord(int(a), float(b), float(c), float(d))
                     for a, b, c, d in reader)


def write_records_jsonl(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({
                "original_index": r.original_index,
                "null_log2prob": float(_f17(r.null_log2prob)),
                "cond_log2prob": float(_f17(r.cond_log2prob)),
                "pvi": float(_f17(r.pvi)),
            }) + "\n")
