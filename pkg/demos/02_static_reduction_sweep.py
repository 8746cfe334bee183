"""Static reduction sweep: drop the easiest instances, retrain, measure.

Shows the redundancy-threshold behavior: removing up to ~30% of the easiest
(highest-PVI) training instances barely moves held-out accuracy, while
removing 90% collapses it. The null model (trained on label-only views of the
same subsets) stays near chance throughout.
"""

from pvireduce import Hyperparams, generate_synthetic, static_sweep
from pvireduce.report import RuntimeLog, emit_accuracy_plot


def main():
    hp = Hyperparams()
    train_ds = generate_synthetic(5000, 3, (0.5, 0.3, 0.2), seed=1)
    test_ds = generate_synthetic(1000, 3, (0.5, 0.3, 0.2), seed=2)

    log = RuntimeLog()
    points = static_sweep(train_ds, test_ds,
                          [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9], hp,
                          strategy="pvi", runtime_log=log)

    base = points[0].cm_accuracy
    print(f"{'r':>5} {'kept':>6} {'cm_acc':>7} {'delta':>7} {'eim_acc':>8} "
          f"{'train_s':>8}")
    for p in points:
        print(f"{p.r:5.1f} {p.subset_size:6d} {p.cm_accuracy:7.3f} "
              f"{p.cm_accuracy - base:+7.3f} {p.eim_accuracy:8.3f} "
              f"{p.train_seconds:8.3f}")

    eps = 0.02
    redundant = [p.r for p in points if p.r > 0 and abs(p.cm_accuracy - base) <= eps]
    print(f"\nratios redundant at eps_perf={eps}: {redundant}")

    with open("sweep_accuracy.svg", "w", encoding="utf-8") as fh:
        fh.write(emit_accuracy_plot(points))
    print("wrote sweep_accuracy.svg")


if __name__ == "__main__":
    main()
