"""End-to-end acceptance checks, one test per criterion.

Each test emits a single PASS/FAIL line directly to the terminal (bypassing
capture) so the verdicts read as a checklist in any run log. Expensive
artifacts — the default-hyperparameter models on the 5k corpus and the timed
reduction sweep — are built once and shared by every criterion that needs
them.
"""

import csv
import json
import math
import statistics

import numpy as np
import pytest

from pvireduce import (Hyperparams, compute_pvi, constant_predictor,
                       generate_synthetic, predict_dist, progressive_train,
                       rank_by_difficulty, retained_count, select_subset,
                       static_sweep, summarize, to_null_view, train)
from pvireduce.cli import main as cli_main
from pvireduce.curriculum import stage_subset
from pvireduce.family import feature_matrix, loss_and_grad, training_order
from pvireduce.pvi import PviRecord, write_records_csv
from pvireduce.report import RuntimeLog


def _verdict(capsys, label: str, ok: bool):
    with capsys.disabled():
        print(f"[acceptance] {label}: {'PASS' if ok else 'FAIL'}")
    assert ok, label


@pytest.fixture(scope="module")
def full_models(synth_train):
    hp = Hyperparams()
    g_cond = train(synth_train, hp)
    g_null = train(to_null_view(synth_train), hp)
    return g_cond, g_null, hp


@pytest.fixture(scope="module")
def timed_sweep(synth_train, synth_test):
    log = RuntimeLog()
    points = static_sweep(synth_train, synth_test, [0.0, 0.1, 0.2, 0.3, 0.9],
                          Hyperparams(), strategy="pvi", timing=True,
                          runtime_log=log)
    return points, log


def test_criterion_01_decomposition_identity(capsys, small_train, tmp_path):
    hp = Hyperparams(epochs=2)
    g_cond = train(small_train, hp)
    g_null = train(to_null_view(small_train), hp)
    records = compute_pvi(g_cond, g_null, small_train)
    s = summarize(records)
    mean_pvi = float(np.mean([r.pvi for r in records]))
    path = tmp_path / "pvi.csv"
    write_records_csv(records, path)
    with open(path, newline="") as fh:
        csv_mean = statistics.fmean(float(row["pvi"])
                                    for row in csv.DictReader(fh))
    ok = (abs(s.i_v - (s.h_v_y - s.h_v_y_given_x)) < 1e-9
          and abs(s.i_v - mean_pvi) < 1e-9
          and abs(s.i_v - csv_mean) < 1e-9)
    _verdict(capsys, "criterion 1 (PVI decomposition identity, 1e-9)", ok)


def test_criterion_02_null_model_optimum(capsys, full_models, synth_test):
    g_cond, g_null, _ = full_models
    dist = predict_dist(g_null, "", "")
    tv = 0.5 * float(np.abs(dist - 1.0 / 3.0).sum())
    s = summarize(compute_pvi(g_cond, g_null, synth_test))
    ok = tv <= 0.02 and abs(s.h_v_y - math.log2(3)) <= 0.05
    _verdict(capsys,
             f"criterion 2 (null optimum: TV={tv:.4f}<=0.02, "
             f"h_v_y={s.h_v_y:.4f} within 0.05 of log2(3))", ok)


def test_criterion_03_eim_near_chance(capsys, synth_train, synth_test):
    ratios = [round(0.1 * k, 1) for k in range(10)]
    points = static_sweep(synth_train, synth_test, ratios, Hyperparams(),
                          strategy="pvi_balanced", timing=False)
    accs = [p.eim_accuracy for p in points]
    ok = all(0.29 <= a <= 0.37 for a in accs)
    _verdict(capsys,
             f"criterion 3 (balanced-reduction EIM accuracy in [0.29,0.37] "
             f"at all r; range [{min(accs):.3f},{max(accs):.3f}])", ok)


def test_criterion_04_reduction_shape(capsys, timed_sweep, synth_train, synth_test):
    points, _ = timed_sweep
    by_r = {p.r: p.cm_accuracy for p in points}
    base = by_r[0.0]
    flat = all(abs(by_r[r] - base) <= 0.02 for r in (0.1, 0.2, 0.3))
    collapsed = by_r[0.9] <= base - 0.10
    rerun = static_sweep(synth_train, synth_test, [0.0, 0.1, 0.2, 0.3, 0.9],
                         Hyperparams(), strategy="pvi", timing=False)
    reproduced = {p.r: p.cm_accuracy for p in rerun} == by_r
    ok = flat and collapsed and reproduced
    _verdict(capsys,
             f"criterion 4 (|acc(r)-acc(0)|<=0.02 for r<=0.3, "
             f"acc(0.9)<=acc(0)-0.10, confirmed by rerun; base={base:.3f}, "
             f"acc(0.9)={by_r[0.9]:.3f})", ok)


def test_criterion_05_redundancy_threshold(capsys, timed_sweep):
    points, _ = timed_sweep
    by_r = {p.r: p.cm_accuracy for p in points}
    base = by_r[0.0]
    eps = 0.02
    satisfied = all(abs(by_r[r] - base) <= eps for r in (0.1, 0.2, 0.3))
    violated = abs(by_r[0.9] - base) > eps
    _verdict(capsys,
             "criterion 5 (eps_perf=0.02 satisfied at r<=0.3, violated at r=0.9)",
             satisfied and violated)


def test_criterion_06_gradient_check(capsys):
    hp = Hyperparams(hash_bits=10)
    ds = generate_synthetic(20, 3, (0.5, 0.3, 0.2), seed=17)
    X = feature_matrix(ds, hp)
    y = ds.labels()
    rng = np.random.default_rng(123)
    W = rng.normal(scale=0.1, size=(3, hp.dim))
    b = rng.normal(scale=0.1, size=3)
    _, grad_w, grad_b = loss_and_grad(W, b, X, y, l2=1e-4)
    h = 1e-5
    worst = 0.0
    touched = np.unique(X.indices)
    for _ in range(7):
        c = int(rng.integers(0, 3))
        j = int(touched[rng.integers(0, len(touched))])
        Wp, Wm = W.copy(), W.copy()
        Wp[c, j] += h
        Wm[c, j] -= h
        fd = (loss_and_grad(Wp, b, X, y, 1e-4)[0]
              - loss_and_grad(Wm, b, X, y, 1e-4)[0]) / (2 * h)
        worst = max(worst, abs(grad_w[c, j] - fd) / max(abs(fd), 1e-12))
    for c in range(3):
        bp, bm = b.copy(), b.copy()
        bp[c] += h
        bm[c] -= h
        fd = (loss_and_grad(W, bp, X, y, 1e-4)[0]
              - loss_and_grad(W, bm, X, y, 1e-4)[0]) / (2 * h)
        worst = max(worst, abs(grad_b[c] - fd) / max(abs(fd), 1e-12))
    _verdict(capsys,
             f"criterion 6 (gradient vs finite differences, 10 coords, "
             f"worst rel err {worst:.2e} < 1e-4)", worst < 1e-4)


def test_criterion_07_constant_predictor_closure(capsys):
    hp = Hyperparams()
    rng = np.random.default_rng(7)
    alphabet = "abcdefgh ij"
    worst = 0.0
    for trial in range(100):
        raw = rng.dirichlet(np.ones(3))
        dist = raw / raw.sum()
        model = constant_predictor(dist, hp)
        text = "".join(alphabet[i] for i in rng.integers(0, len(alphabet), size=10))
        for premise, hypothesis in ((text, text[::-1]), ("", "")):
            got = predict_dist(model, premise, hypothesis)
            worst = max(worst, float(np.abs(got - dist).max()))
    _verdict(capsys,
             f"criterion 7 (constant predictor closure, 100 random inputs "
             f"incl. null, max dev {worst:.2e} < 1e-9)", worst < 1e-9)


def test_criterion_08_subset_laws(capsys):
    # exhaustive floor law: every m <= 10,000 against every r on the 0.01 grid
    ms = np.arange(0, 10001, dtype=np.int64)
    floor_ok = all(
        np.array_equal(
            np.array([retained_count(int(m), k / 100) for m in ms]),
            (ms * (100 - k)) // 100)
        for k in range(100))
    ds = generate_synthetic(100, 3, (0.5, 0.3, 0.2), seed=5)
    rng = np.random.default_rng(9)
    records = [PviRecord(inst.original_index, 0.0, 0.0, float(p))
               for inst, p in zip(ds, rng.normal(size=100))]
    subset_ok = True
    for r in (0.01, 0.13, 0.5, 0.9):
        subset = select_subset(ds, records, r)
        order = sorted(records, key=lambda rec: (-rec.pvi, rec.original_index))
        expected = sorted(rec.original_index
                          for rec in order[100 - retained_count(100, r):])
        indices = [i.original_index for i in subset]
        subset_ok &= indices == expected
        subset_ok &= all(a < b for a, b in zip(indices, indices[1:]))
    _verdict(capsys,
             "criterion 8 (exhaustive floor(m(1-r)) law m<=10000 on 0.01 grid; "
             "select_subset matches brute-force oracle, ascending indices)",
             floor_ok and subset_ok)


def test_criterion_09_curriculum(capsys, full_models, synth_train, synth_test):
    g_cond, g_null, hp = full_models
    records = compute_pvi(g_cond, g_null, synth_train)
    pvi_by_index = {r.original_index: r.pvi for r in records}

    # consumed-stream monotonicity under easy_first at r = 0.1
    subset = stage_subset(synth_train, records, 0.1, "easy_first")
    order_hp = Hyperparams(preserve_order=True, epochs=2)
    stream_ok = True
    for epoch in training_order(len(subset), order_hp):
        stream = [pvi_by_index[subset.instances[i].original_index] for i in epoch]
        stream_ok &= all(a >= b for a, b in zip(stream, stream[1:]))

    # nesting across the stage ratios
    sets = [frozenset(i.original_index
                      for i in stage_subset(synth_train, records, r, "easy_first"))
            for r in (0.0, 0.1, 0.2, 0.3)]
    nest_ok = all(s <= b for b, s in zip(sets, sets[1:]))

    # 3 seeds x {easy_first, original}, micro identity and non-inferiority
    micro_ok = True
    means = {}
    for ordering in ("easy_first", "original"):
        accs = []
        for i in range(3):
            from dataclasses import replace
            reports = progressive_train(synth_train, synth_test,
                                        replace(hp, seed=hp.seed + i),
                                        ratios=(0.0, 0.1, 0.2, 0.3),
                                        ordering=ordering, timing=False)
            for s in reports:
                micro_ok &= (abs(s.precision_micro - s.accuracy) <= 1e-12
                             and abs(s.recall_micro - s.accuracy) <= 1e-12
                             and abs(s.f1_micro - s.accuracy) <= 1e-12)
            accs.append(statistics.fmean(s.accuracy for s in reports))
        means[ordering] = statistics.fmean(accs)
    non_inferior = means["easy_first"] >= means["original"] - 0.005
    ok = stream_ok and nest_ok and micro_ok and non_inferior
    _verdict(capsys,
             f"criterion 9 (curriculum: stream monotone, stages nested, micro "
             f"identity 1e-12, easy_first {means['easy_first']:.4f} >= "
             f"original {means['original']:.4f} - 0.005 over 3 seeds)", ok)


def test_criterion_10_determinism(capsys, tmp_path):
    train_path = tmp_path / "train.jsonl"
    test_path = tmp_path / "test.jsonl"
    assert cli_main(["gen", "--n", "300", "--seed", "11",
                     "--out", str(train_path), "--no-timing"]) == 0
    assert cli_main(["gen", "--n", "120", "--seed", "12",
                     "--out", str(test_path), "--no-timing"]) == 0

    def run_all(root):
        root.mkdir()
        assert cli_main(["pvi", "--train", str(train_path), "--epochs", "2",
                         "--out-dir", str(root / "pvi"), "--no-timing"]) == 0
        assert cli_main(["sweep", "--train", str(train_path), "--test",
                         str(test_path), "--ratios", "0,0.3", "--epochs", "2",
                         "--out-dir", str(root / "sweep"), "--no-timing"]) == 0
        assert cli_main(["curriculum", "--train", str(train_path), "--test",
                         str(test_path), "--ratios", "0,0.2", "--epochs", "2",
                         "--out-dir", str(root / "curr"), "--no-timing"]) == 0
        assert cli_main(["stats", "--data", str(train_path),
                         "--out-dir", str(root / "stats"), "--no-timing"]) == 0
        assert cli_main(["report", "--sweep-csv", str(root / "sweep" / "sweep.csv"),
                         "--runtime-csv", str(root / "sweep" / "runtime.csv"),
                         "--out-dir", str(root / "plots"), "--no-timing"]) == 0
        return {str(p.relative_to(root)): p.read_bytes()
                for p in sorted(root.rglob("*")) if p.is_file()}

    first = run_all(tmp_path / "run1")
    second = run_all(tmp_path / "run2")
    # the report manifests hash files under different absolute paths; compare
    # everything else byte-for-byte and the report outputs themselves directly
    ok = first.keys() == second.keys() and all(
        first[name] == second[name] for name in first
        if not (name.startswith("plots") and name.endswith("manifest.json")))
    _verdict(capsys,
             "criterion 10 (all commands rerun byte-identical with --no-timing)",
             ok)


def test_criterion_11_runtime_shape(capsys, timed_sweep):
    _, log = timed_sweep
    eim = {rec.r: rec.seconds for rec in log.records if rec.phase == "train_eim"}
    ok = eim[0.9] < eim[0.0]
    _verdict(capsys,
             f"criterion 11 (EIM train_seconds at r=0.9 ({eim[0.9]:.3f}s) < "
             f"r=0 ({eim[0.0]:.3f}s))", ok)
