"""Per-label length statistics and bucket proportions for a corpus.

Also demonstrates the noisy and imbalanced dataset variants used by the
sweep and curriculum commands.
"""

from pvireduce import (NoiseSpec, bucket_proportions, generate_synthetic,
                       inject_noise, length_stats, make_imbalanced)


def show(ds, name):
    print(f"\n=== {name}: {len(ds)} instances, "
          f"class counts {ds.class_counts().tolist()} ===")
    stats = length_stats(ds, unit="tokens")
    print(f"{'label':>5} {'min':>5} {'max':>5} {'median':>7} {'mean':>7}")
    for label in sorted(stats.rows):
        row = stats.rows[label]
        print(f"{label:5d} {row['min']:5.0f} {row['max']:5.0f} "
              f"{row['median']:7.1f} {row['mean']:7.2f}")

    buckets = bucket_proportions(ds, unit="chars")
    print("hypothesis-length buckets (chars):")
    print("      " + " ".join(f"{lab:>7}" for lab in buckets.labels))
    for label in sorted(buckets.rows):
        props = buckets.rows[label]
        print(f"  {label:3d} " + " ".join(f"{p:7.3f}" for p in props))


def main():
    ds = generate_synthetic(3000, 3, (0.5, 0.3, 0.2), seed=1)
    show(ds, "original")
    show(inject_noise(ds, NoiseSpec(replacement_ratio=0.1, seed=1)), "noisy (10% perturbed)")
    show(make_imbalanced(ds, (1.0, 0.6, 0.3), seed=1), "imbalanced (1.0/0.6/0.3)")


if __name__ == "__main__":
    main()
