# -*- coding: utf-8 -*-
"""Treebank analytics: label distributions, inter-annotator agreement,
annotation accuracy against final answers, and word-formation pattern
statistics over three-character words."""

import math
from dataclasses import dataclass

from .treebank import LABELS, Treebank, WORD_INTERNAL

# Coarse POS groups used for the per-POS distribution rows; anything else
# (and any word without POS) folds into Others.
POS_GROUPS = ("Noun", "Verb", "Proper Noun", "Adjective", "Adverb", "Numeral", "Others")
_UD_TO_GROUP = {
    "NOUN": "Noun", "VERB": "Verb", "PROPN": "Proper Noun", "ADJ": "Adjective",
    "ADV": "Adverb", "NUM": "Numeral",
}
OVERALL = "overall"


def round1(x):
    """Half-up rounding to one decimal (Python's round() is banker's)."""
    return math.floor(x * 10 + 0.5) / 10


def coarse_pos(tag):
    if tag in POS_GROUPS:
        return tag
    return _UD_TO_GROUP.get(tag.upper(), "Others")


@dataclass(frozen=True)
class DistributionTable:
    rows: dict          # group -> {label -> percentage, one decimal}
    totals: dict        # group -> word count contributing to the group

    def row(self, group):
        return self.rows[group]


@dataclass(frozen=True)
class AgreementReport:
    dep_labeled: float
    dep_unlabeled: float
    word_labeled: float
    word_unlabeled: float
    n_chars: int
    n_words: int


@dataclass(frozen=True)
class AccuracyReport:
    overall_labeled: float
    overall_unlabeled: float
    word_labeled: float
    word_unlabeled: float
    per_label: dict     # gold label -> (labeled_acc, unlabeled_acc, denominator)
    n_submission_arcs: int
    n_submission_words: int


@dataclass(frozen=True)
class PatternReport:
    root_position: dict  # 1|2|3 -> percentage
    patterns: dict       # pattern name (incl. "other") -> percentage
    n_words: int


@dataclass(frozen=True)
class AnnotationSet:
    """One annotator's submissions, as a word-internal treebank."""
    treebank: Treebank
    annotator_id: str = ""

    def __post_init__(self):
        if self.treebank.kind != WORD_INTERNAL:
            raise ValueError("annotation sets hold word-internal treebanks")


def _require_word_internal(tb):
    if tb.kind != WORD_INTERNAL:
        raise ValueError("word-internal treebank required")
    if not tb.entries:
        raise ValueError("empty treebank")


def label_distribution(tb, group_by_pos=False):
    """Label percentages, overall and optionally per coarse POS group.

    Each label occurrence counts once per arc.  The overall row counts each
    entry once; with POS grouping a word contributes its arcs once per coarse
    group of its POS tags (words without POS go to Others).
    """
    _require_word_internal(tb)
    counts = {OVERALL: {}}
    totals = {OVERALL: 0}
    for entry in tb:
        totals[OVERALL] += 1
        for label in entry.tree.labels:
            counts[OVERALL][label] = counts[OVERALL].get(label, 0) + 1
        if not group_by_pos:
            continue
        groups = {coarse_pos(t) for t in entry.pos_tags} or {"Others"}
        for group in sorted(groups):
            row = counts.setdefault(group, {})
            totals[group] = totals.get(group, 0) + 1
            for label in entry.tree.labels:
                row[label] = row.get(label, 0) + 1
    rows = {}
    for group, row in counts.items():
        total_arcs = sum(row.values())
        rows[group] = {label: round1(100.0 * row.get(label, 0) / total_arcs)
                       for label in LABELS}
    return DistributionTable(rows, totals)


def avg_word_length_from_root(dist):
    """Mean characters per word, inferred from the share of `root` arcs."""
    root_pct = dist.rows[OVERALL]["root"]
    if root_pct <= 0:
        raise ValueError("root percentage is zero")
    return 100.0 / root_pct


def _aligned_entries(a, b):
    ea, eb = a.treebank.entries, b.treebank.entries
    if len(ea) != len(eb) or any(x.surface != y.surface for x, y in zip(ea, eb)):
        raise ValueError("annotation sets cover different word lists")
    return list(zip(ea, eb))


def pairwise_consistency(a, b):
    """Agreement ratios between two annotators over the same words.

    Dependency-wise: percent of characters with the same head (unlabeled) or
    the same head and label (labeled).  Word-wise: percent of words whose
    whole head array (unlabeled) or head and label arrays (labeled) match.
    """
    pairs = _aligned_entries(a, b)
    n_chars = dep_lab = dep_unlab = 0
    n_words = word_lab = word_unlab = 0
    for x, y in pairs:
        n_words += 1
        heads_equal = x.tree.heads == y.tree.heads
        word_unlab += heads_equal
        word_lab += heads_equal and x.tree.labels == y.tree.labels
        for hx, lx, hy, ly in zip(x.tree.heads, x.tree.labels,
                                  y.tree.heads, y.tree.labels):
            n_chars += 1
            same_head = hx == hy
            dep_unlab += same_head
            dep_lab += same_head and lx == ly
    if n_chars == 0:
        raise ValueError("no shared annotations")
    return AgreementReport(
        dep_labeled=100.0 * dep_lab / n_chars,
        dep_unlabeled=100.0 * dep_unlab / n_chars,
        word_labeled=100.0 * word_lab / n_words,
        word_unlabeled=100.0 * word_unlab / n_words,
        n_chars=n_chars,
        n_words=n_words,
    )


def annotation_accuracy(submissions, gold):
    """All submissions (denominator) against the final answers.

    Characters group by their final-answer label; each group reports the
    percent of submissions with the correct head and label (and head only).
    """
    _require_word_internal(gold)
    by_surface = {}
    for entry in gold:
        current = by_surface.get(entry.surface)
        if current is None or entry.sense_id < current.sense_id:
            by_surface[entry.surface] = entry
    arcs = lab_hits = unlab_hits = 0
    words = word_lab = word_unlab = 0
    per_label = {label: [0, 0, 0] for label in LABELS}
    for submission in submissions:
        for entry in submission.treebank:
            final = by_surface.get(entry.surface)
            if final is None:
                raise ValueError(f"submission for unknown word {entry.surface!r}")
            words += 1
            heads_equal = entry.tree.heads == final.tree.heads
            word_unlab += heads_equal
            word_lab += heads_equal and entry.tree.labels == final.tree.labels
            for hs, ls, hg, lg in zip(entry.tree.heads, entry.tree.labels,
                                      final.tree.heads, final.tree.labels):
                arcs += 1
                same_head = hs == hg
                same_both = same_head and ls == lg
                unlab_hits += same_head
                lab_hits += same_both
                stats = per_label[lg]
                stats[0] += same_both
                stats[1] += same_head
                stats[2] += 1
    if arcs == 0:
        raise ValueError("no submissions")
    return AccuracyReport(
        overall_labeled=100.0 * lab_hits / arcs,
        overall_unlabeled=100.0 * unlab_hits / arcs,
        word_labeled=100.0 * word_lab / words,
        word_unlabeled=100.0 * word_unlab / words,
        per_label={l: (100.0 * s[0] / s[2], 100.0 * s[1] / s[2], s[2])
                   for l, s in per_label.items() if s[2]},
        n_submission_arcs=arcs,
        n_submission_words=words,
    )


# The four dominant three-character skeletons, identified by head array.
THREE_CHAR_PATTERNS = {
    (2, 3, 0): "1<-2<-3",
    (3, 1, 0): "(1->2)<-3",
    (2, 0, 2): "1<-2->3",
    (0, 1, 2): "1->2->3",
}


def three_char_stats(tb):
    """Root position and head-pattern distribution over three-char words."""
    _require_word_internal(tb)
    root_counts = {1: 0, 2: 0, 3: 0}
    pattern_counts = {name: 0 for name in THREE_CHAR_PATTERNS.values()}
    pattern_counts["other"] = 0
    n = 0
    for entry in tb:
        if entry.tree.n != 3:
            continue
        n += 1
        heads = tuple(entry.tree.heads)
        root_counts[heads.index(0) + 1] += 1
        pattern_counts[THREE_CHAR_PATTERNS.get(heads, "other")] += 1
    if n == 0:
        raise ValueError("no three-character words")
    return PatternReport(
        root_position={pos: round1(100.0 * c / n) for pos, c in root_counts.items()},
        patterns={name: round1(100.0 * c / n) for name, c in pattern_counts.items()},
        n_words=n,
    )


def multi_structure_words(tb):
    """Surfaces with at least two differing annotated structures."""
    _require_word_internal(tb)
    trees = {}
    for entry in tb:
        trees.setdefault(entry.surface, set()).add(
            (entry.tree.heads, entry.tree.labels))
    return sorted(s for s, variants in trees.items() if len(variants) >= 2)


def label_confusions(a, b):
    """Unordered label-pair shares among same-head, different-label
    disagreements between two annotators (percentages of all such arcs)."""
    pairs = _aligned_entries(a, b)
    counts = {}
    total = 0
    for x, y in pairs:
        for hx, lx, hy, ly in zip(x.tree.heads, x.tree.labels,
                                  y.tree.heads, y.tree.labels):
            if hx == hy and lx != ly:
                total += 1
                key = tuple(sorted((lx, ly)))
                counts[key] = counts.get(key, 0) + 1
    if total == 0:
        return {}
    return {pair: round1(100.0 * c / total)
            for pair, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))}
