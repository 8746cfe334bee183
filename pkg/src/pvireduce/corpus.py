"""Labeled text-pair datasets: loading, validation, corruption, skewing, synthesis.

Every transformation here is a pure function of its inputs; random operations
take an explicit seed and are bit-reproducible.
"""

from __future__ import annotations

import json
import math
import unicodedata
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_LABELS = ("entailment", "neutral", "contradiction")

CORRUPTION_KINDS = (
    "char-swap",
    "char-delete",
    "punctuation-insert",
    "token-shuffle",
    "duplicate-fragment",
)


class DataError(ValueError):
    """Malformed dataset content (bad label, missing field, bad line)."""


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class LabeledInstance:
    original_index: int
    premise: str
    hypothesis: str
    label: int


@dataclass(frozen=True)
class Dataset:
    instances: tuple[LabeledInstance, ...]
    num_classes: int
    provenance_tag: str = "original"
    label_names: tuple[str, ...] = DEFAULT_LABELS

    def __post_init__(self):
        seen = set()
        for inst in self.instances:
            if not (0 <= inst.label < self.num_classes):
                raise DataError(
                    f"label {inst.label} out of range for {self.num_classes} classes "
                    f"(original_index {inst.original_index})"
                )
            if inst.original_index in seen:
                raise DataError(f"duplicate original_index {inst.original_index}")
            seen.add(inst.original_index)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def labels(self) -> np.ndarray:
        return np.array([inst.label for inst in self.instances], dtype=np.int64)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels(), minlength=self.num_classes)


@dataclass(frozen=True)
class NoiseSpec:
    replacement_ratio: float
    seed: int
    corruption_kinds: tuple[str, ...] = CORRUPTION_KINDS

    def __post_init__(self):
        if not 0.0 <= self.replacement_ratio <= 1.0:
            raise ValueError(f"replacement_ratio must be in [0,1], got {self.replacement_ratio}")
        for kind in self.corruption_kinds:
            if kind not in CORRUPTION_KINDS:
                raise ValueError(f"unknown corruption kind {kind!r}")


# ---------------------------------------------------------------------------
# loading / serialization

def _label_index(raw: str, label_names, lineno: int) -> int:
    try:
        return label_names.index(raw)
    except ValueError:
        raise DataError(f"line {lineno}: unknown label {raw!r} (expected one of {list(label_names)})")


def load_dataset(path, fmt: str = "jsonl", num_classes: int = 3,
                 label_names=DEFAULT_LABELS) -> Dataset:
    """Read a JSONL or TSV dataset; original_index is the 0-based file position.

    Malformed records raise DataError naming the line; they are never dropped
    silently (use filter_invalid for content-level cleanup).
    """
    if fmt not in ("jsonl", "tsv"):
        raise ValueError(f"unsupported format {fmt!r}")
    if len(label_names) != num_classes:
        raise ValueError("label_names length must equal num_classes")
    instances = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            text = line.rstrip("\n")
            if text == "" and fmt == "jsonl":
                raise DataError(f"line {lineno + 1}: empty line")
            if fmt == "jsonl":
                try:
                    rec = json.loads(text)
                except json.JSONDecodeError as exc:
                    raise DataError(f"line {lineno + 1}: invalid JSON ({exc.msg})")
                for key in ("premise", "hypothesis", "label"):
                    if key not in rec:
                        raise DataError(f"line {lineno + 1}: missing field {key!r}")
                premise, hypothesis, raw_label = rec["premise"], rec["hypothesis"], rec["label"]
            else:
                parts = text.split("\t")
                if len(parts) != 3:
                    raise DataError(f"line {lineno + 1}: expected 3 tab-separated columns, got {len(parts)}")
                premise, hypothesis, raw_label = parts
            label = _label_index(raw_label, label_names, lineno + 1)
            instances.append(LabeledInstance(lineno, str(premise), str(hypothesis), label))
    return Dataset(tuple(instances), num_classes, "original", tuple(label_names))


def serialize(dataset: Dataset, path, fmt: str = "jsonl") -> None:
    """Write a dataset back out; inverse of load_dataset on valid data."""
    if fmt not in ("jsonl", "tsv"):
        raise ValueError(f"unsupported format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        for inst in dataset:
            name = dataset.label_names[inst.label]
            if fmt == "jsonl":
                fh.write(json.dumps(
                    {"premise": inst.premise, "hypothesis": inst.hypothesis, "label": name},
                    ensure_ascii=False) + "\n")
            else:
                fh.write(f"{inst.premise}\t{inst.hypothesis}\t{name}\n")


# ---------------------------------------------------------------------------
# validation / views

def _has_control_chars(text: str) -> bool:
    return any(unicodedata.category(ch) == "Cc" for ch in text)


def filter_invalid(dataset: Dataset):
    """Drop empty-field or control-character instances; keep original indices.

    Returns (filtered dataset, removal counts per reason).
    """
    kept = []
    report = {}
    for inst in dataset:
        if inst.premise == "" or inst.hypothesis == "":
            report["empty_field"] = report.get("empty_field", 0) + 1
        elif _has_control_chars(inst.premise) or _has_control_chars(inst.hypothesis):
            report["control_chars"] = report.get("control_chars", 0) + 1
        else:
            kept.append(inst)
    return replace(dataset, instances=tuple(kept)), report


def to_null_view(dataset: Dataset) -> Dataset:
    """Replace both texts with the empty string; labels and indices preserved."""
    nulled = tuple(replace(inst, premise="", hypothesis="") for inst in dataset)
    return replace(dataset, instances=nulled, provenance_tag="null-view")


# ---------------------------------------------------------------------------
# corruption

def _corrupt_text(text: str, kinds, rng: np.random.Generator) -> str:
    out = text
    for kind in kinds:
        if kind == "char-swap" and len(out) >= 2:
            i = int(rng.integers(0, len(out) - 1))
            out = out[:i] + out[i + 1] + out[i] + out[i + 2:]
        elif kind == "char-delete" and len(out) >= 2:
            i = int(rng.integers(0, len(out)))
            out = out[:i] + out[i + 1:]
        elif kind == "punctuation-insert":
            i = int(rng.integers(0, len(out) + 1))
            punct = "!?,.;~"[int(rng.integers(0, 6))]
            out = out[:i] + punct + out[i:]
        elif kind == "token-shuffle":
            tokens = out.split(" ")
            if len(tokens) >= 2:
                perm = rng.permutation(len(tokens))
                out = " ".join(tokens[i] for i in perm)
        elif kind == "duplicate-fragment" and out:
            i = int(rng.integers(0, len(out)))
            j = int(rng.integers(i, len(out))) + 1
            out = out[:j] + out[i:j] + out[j:]
    if out == text:
        # corruption must visibly change the instance
        out = out + "~"
    return out


def inject_noise(dataset: Dataset, spec: NoiseSpec) -> Dataset:
    """Rewrite a seeded sample of round(ratio*m) instances with mechanical noise.

    Per-instance corruption is driven by a generator derived from
    (spec.seed, original_index), so the result is independent of iteration
    order and stable under dataset reordering.
    """
    m = len(dataset)
    n_corrupt = round_half_up(spec.replacement_ratio * m)
    rng = np.random.default_rng(spec.seed)
    chosen_pos = set(rng.choice(m, size=n_corrupt, replace=False).tolist()) if n_corrupt else set()
    out = []
    for pos, inst in enumerate(dataset):
        if pos in chosen_pos:
            sub = np.random.default_rng([spec.seed, inst.original_index])
            out.append(replace(
                inst,
                premise=_corrupt_text(inst.premise, spec.corruption_kinds, sub),
                hypothesis=_corrupt_text(inst.hypothesis, spec.corruption_kinds, sub),
            ))
        else:
            out.append(inst)
    return replace(dataset, instances=tuple(out), provenance_tag="noisy")


def make_imbalanced(dataset: Dataset, class_keep_fractions, seed: int) -> Dataset:
    """Subsample each class to round(fraction_c * count_c) instances."""
    fractions = tuple(class_keep_fractions)
    if len(fractions) != dataset.num_classes:
        raise ValueError("need one keep-fraction per class")
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValueError(f"keep fraction must be in (0,1], got {f}")
    counts = dataset.class_counts()
    rng = np.random.default_rng(seed)
    keep_positions = set()
    for c in range(dataset.num_classes):
        positions = [pos for pos, inst in enumerate(dataset) if inst.label == c]
        n_keep = round_half_up(fractions[c] * counts[c])
        if counts[c] > 0 and n_keep == 0:
            raise ValueError(f"class {c}: keep fraction {fractions[c]} rounds to 0 instances")
        picked = rng.choice(len(positions), size=n_keep, replace=False)
        keep_positions.update(positions[i] for i in picked.tolist())
    kept = tuple(inst for pos, inst in enumerate(dataset) if pos in keep_positions)
    return replace(dataset, instances=kept, provenance_tag="imbalanced")


# ---------------------------------------------------------------------------
# synthetic corpus

_FILLER = (
    "river", "stone", "window", "garden", "cloud", "paper", "street", "meadow",
    "lantern", "harbor", "violin", "bottle", "mirror", "forest", "engine",
    "candle", "bridge", "market", "saddle", "anchor", "ribbon", "copper",
    "willow", "thunder", "pocket", "ladder", "carpet", "basket", "feather",
    "marble",
)

# one keyword set per class; presence of any keyword of set c decides label c
_EASY_KEYWORDS = (
    ("lumen", "brill", "shinex"),
    ("murmur", "quietus", "steadly"),
    ("fractis", "sharply", "breakor"),
)

# pair tokens: label of a medium instance is (i + j) mod C for the compound
# token A[i]-B[j]; individually each half is label-uninformative, the junction
# character trigram identifies the pair
_PAIR_A = ("vona", "crebe", "dolci")
_PAIR_B = ("brask", "fintol", "gorm")


def synthetic_difficulty_tags(num_instances: int, difficulty_mix, seed: int) -> tuple[str, ...]:
    """Per-instance difficulty assignment used by generate_synthetic.

    Deterministic function of the generator arguments; exposed so callers can
    recover which instances were built easy/medium/hard.
    """
    fracs = tuple(difficulty_mix)
    if abs(sum(fracs) - 1.0) > 1e-9:
        raise ValueError("difficulty_mix must sum to 1")
    # largest-remainder apportionment so counts sum exactly
    raw = [f * num_instances for f in fracs]
    counts = [int(math.floor(x)) for x in raw]
    remainders = sorted(range(3), key=lambda i: (raw[i] - counts[i], -i), reverse=True)
    for i in range(num_instances - sum(counts)):
        counts[remainders[i % 3]] += 1
    tags = ["easy"] * counts[0] + ["medium"] * counts[1] + ["hard"] * counts[2]
    rng = np.random.default_rng([seed, 0xD1F])
    perm = rng.permutation(num_instances)
    return tuple(tags[i] for i in np.argsort(perm))


def _filler_words(rng, n):
    return [_FILLER[int(i)] for i in rng.integers(0, len(_FILLER), size=n)]


def generate_synthetic(num_instances: int, num_classes: int = 3,
                       difficulty_mix=(0.5, 0.3, 0.2), seed: int = 1) -> Dataset:
    """Build a balanced synthetic text-pair corpus with controlled difficulty.

    easy:   hypothesis carries a class keyword that determines the label.
    medium: hypothesis carries a compound pair token whose combination
            determines the label.
    hard:   label is independent of the text; the hypothesis carries a
            randomly chosen (misleading) keyword.
    """
    if num_classes < 2:
        raise ValueError("num_classes must be >= 2")
    if num_instances < num_classes:
        raise ValueError("num_instances must be >= num_classes")
    if num_classes > len(_EASY_KEYWORDS):
        raise ValueError(f"synthetic generator supports up to {len(_EASY_KEYWORDS)} classes")
    tags = synthetic_difficulty_tags(num_instances, difficulty_mix, seed)
    rng = np.random.default_rng([seed, 0xC0])
    instances = []
    for i in range(num_instances):
        label = i % num_classes
        premise = " ".join(_filler_words(rng, 4 + int(rng.integers(0, 5))))
        hyp_words = _filler_words(rng, 3 + int(rng.integers(0, 4)))
        tag = tags[i]
        if tag == "easy":
            kws = _EASY_KEYWORDS[label]
            signal = kws[int(rng.integers(0, len(kws)))]
        elif tag == "medium":
            a = int(rng.integers(0, len(_PAIR_A)))
            # pick b so the pair encodes the target label
            choices = [b for b in range(len(_PAIR_B)) if (a + b) % num_classes == label]
            b = choices[int(rng.integers(0, len(choices)))]
            signal = f"{_PAIR_A[a]}-{_PAIR_B[b]}"
        else:
            flat = [kw for kws in _EASY_KEYWORDS[:num_classes] for kw in kws]
            signal = flat[int(rng.integers(0, len(flat)))]
        pos = int(rng.integers(0, len(hyp_words) + 1))
        hyp_words.insert(pos, signal)
        instances.append(LabeledInstance(i, premise, " ".join(hyp_words), label))
    names = DEFAULT_LABELS if num_classes == 3 else tuple(f"class{c}" for c in range(num_classes))
    return Dataset(tuple(instances), num_classes, "synthetic", names)
