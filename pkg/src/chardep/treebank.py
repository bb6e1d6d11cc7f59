# -*- coding: utf-8 -*-
"""Data model and file format for word-internal and sentence dependency trees.

A word-internal tree is a labeled dependency tree over the characters of a
single multi-character word.  Node indices are 1-based; head 0 is the virtual
root, which is never stored as a row.  Sentence trees use the same structure
over words, with an open label set.
"""

import random
import unicodedata
from dataclasses import dataclass, field

LABELS = ("root", "subj", "obj", "att", "adv", "cmp", "coo", "pobj", "adjct", "frag", "repet")
LABEL_INDEX = {name: i for i, name in enumerate(LABELS)}

WORD_INTERNAL = "word-internal"
SENTENCE = "sentence"

# POS tags treated as punctuation in sentence treebanks (CTB "PU", UD "PUNCT").
PUNCT_TAGS = frozenset({"PU", "PUNCT"})


class TreebankError(Exception):
    """Malformed treebank data.  Carries the first offending line when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations

    def __contains__(self, code):
        return code in self.violations


@dataclass(frozen=True)
class DepTree:
    """heads[i] is the head (0 = virtual root) of 1-based node i+1."""

    heads: tuple
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "heads", tuple(self.heads))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.heads) != len(self.labels):
            raise TreebankError(
                f"heads/labels length mismatch: {len(self.heads)} vs {len(self.labels)}")

    @property
    def n(self):
        return len(self.heads)


@dataclass(frozen=True)
class WordEntry:
    surface: str
    tree: DepTree
    pos_tags: tuple = ()
    sense_id: int = 1

    def __post_init__(self):
        object.__setattr__(self, "pos_tags", tuple(self.pos_tags))
        if self.tree.n != len(self.surface):
            raise TreebankError(
                f"tree covers {self.tree.n} nodes but surface {self.surface!r} "
                f"has {len(self.surface)} characters")
        if len(self.surface) < 2:
            raise TreebankError(f"word entry needs >= 2 characters: {self.surface!r}")


@dataclass(frozen=True)
class SentenceEntry:
    words: tuple
    heads: tuple
    labels: tuple
    pos_tags: tuple = ()
    is_punct: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "heads", tuple(self.heads))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "pos_tags", tuple(self.pos_tags))
        n = len(self.words)
        if len(self.heads) != n or len(self.labels) != n:
            raise TreebankError("words/heads/labels length mismatch")
        if self.pos_tags and len(self.pos_tags) != n:
            raise TreebankError("pos_tags length mismatch")
        punct = self.is_punct
        if not punct:
            if self.pos_tags:
                punct = tuple(tag in PUNCT_TAGS for tag in self.pos_tags)
            else:
                punct = tuple(_all_punct_chars(w) for w in self.words)
        object.__setattr__(self, "is_punct", tuple(punct))

    @property
    def n(self):
        return len(self.words)


@dataclass(frozen=True)
class Treebank:
    """Immutable sequence of entries of a single kind, in file order."""

    entries: tuple
    kind: str = WORD_INTERNAL
    # Indices of entries loaded with a non-projective tree (accepted, flagged).
    nonprojective: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "nonprojective", tuple(self.nonprojective))
        if self.kind not in (WORD_INTERNAL, SENTENCE):
            raise TreebankError(f"unknown treebank kind: {self.kind!r}")
        want = WordEntry if self.kind == WORD_INTERNAL else SentenceEntry
        if any(not isinstance(e, want) for e in self.entries):
            raise TreebankError(f"all entries of a {self.kind} treebank must be "
                                f"{want.__name__}")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def _all_punct_chars(token):
    return bool(token) and all(unicodedata.category(c).startswith("P") for c in token)


def _reaches_root(heads, start):
    """Follow head links from 1-based `start`; True iff 0 is reached."""
    seen = set()
    node = start
    while node != 0:
        if node in seen:
            return False
        seen.add(node)
        node = heads[node - 1]
    return True


def _descends_from(heads, node, ancestor):
    """True iff following head links from `node` passes through `ancestor`."""
    seen = set()
    while node != 0:
        if node == ancestor:
            return True
        if node in seen:
            return False
        seen.add(node)
        node = heads[node - 1]
    return ancestor == 0


def structural_violations(heads):
    """Single-root / in-range / acyclicity checks shared by both tree kinds."""
    n = len(heads)
    violations = []
    in_range = all(0 <= h <= n for h in heads)
    if not in_range:
        violations.append("out-of-range")
    if any(h == i + 1 for i, h in enumerate(heads)):
        violations.append("cycle")  # self-loop
    roots = [i + 1 for i, h in enumerate(heads) if h == 0]
    if len(roots) == 0:
        violations.append("no-root")
    elif len(roots) > 1:
        violations.append("multi-root")
    if in_range and "cycle" not in violations:
        if any(not _reaches_root(heads, node) for node in range(1, n + 1)):
            violations.append("cycle")
    return violations


def _projectivity_ok(heads):
    """Every arc (h, d) spans only descendants of h.

    Defensively defined in terms of head-link walks so it also yields an
    answer on cyclic inputs (validation reports several violations at once).
    """
    n = len(heads)
    for d in range(1, n + 1):
        h = heads[d - 1]
        lo, hi = min(h, d), max(h, d)
        for k in range(lo + 1, hi):
            if not _descends_from(heads, k, h):
                return False
    return True


def is_projective(tree):
    """True iff no arc spans a node that is not a descendant of its head."""
    return _projectivity_ok(tree.heads)


def validate_tree(tree):
    """Collect violations; an empty report means a legal projective tree.

    Violations are data, not failures: illegal trees are routinely inspected
    (e.g. rejected annotation submissions carry their violation list).
    """
    violations = structural_violations(tree.heads)
    for i, (h, label) in enumerate(zip(tree.heads, tree.labels)):
        root_arc = h == 0
        if root_arc != (label == "root"):
            violations.append("root-label-misuse")
            break
    if "out-of-range" not in violations and not _projectivity_ok(tree.heads):
        violations.append("non-projective")
    return ValidationReport(tuple(violations))


def validate_sentence(entry):
    """Structural checks only; sentence labels are an open set."""
    return ValidationReport(tuple(structural_violations(entry.heads)))


# ---------------------------------------------------------------------------
# Block file format.
#
# One entry per block, blank line between blocks.  Data lines are
# `index<TAB>form<TAB>head<TAB>label` (sentence files may carry a 5th POS
# column); `#`-prefixed metadata lines precede the data lines:
#   # sense = 2
#   # pos = NOUN,VERB
# A leading `# kind = word-internal|sentence` header may declare the kind.
# ---------------------------------------------------------------------------


def _split_columns(line):
    if "\t" in line:
        return line.split("\t")
    return line.split()


def _parse_block(lines, start_line, kind):
    sense_id = 1
    pos_tags = ()
    rows = []
    for offset, raw in enumerate(lines):
        lineno = start_line + offset
        line = raw.rstrip("\n")
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" not in body:
                raise TreebankError(f"malformed metadata line: {line!r}", lineno)
            key, _, value = body.partition("=")
            key, value = key.strip(), value.strip()
            if key == "sense":
                try:
                    sense_id = int(value)
                except ValueError:
                    raise TreebankError(f"bad sense id: {value!r}", lineno) from None
            elif key == "pos":
                sep = "," if kind == WORD_INTERNAL else None
                parts = value.split(sep) if sep else value.split()
                pos_tags = tuple(p.strip() for p in parts if p.strip())
            # unknown metadata keys are preserved-by-ignoring
            continue
        cols = _split_columns(line)
        want = 4 if kind == WORD_INTERNAL else (4, 5)
        if kind == WORD_INTERNAL:
            if len(cols) != 4:
                raise TreebankError(
                    f"expected 4 columns, got {len(cols)}: {line!r}", lineno)
        elif len(cols) not in want:
            raise TreebankError(
                f"expected 4 or 5 columns, got {len(cols)}: {line!r}", lineno)
        try:
            index = int(cols[0])
            head = int(cols[2])
        except ValueError:
            raise TreebankError(f"non-integer index or head: {line!r}", lineno) from None
        if index != len(rows) + 1:
            raise TreebankError(f"expected index {len(rows) + 1}, got {index}", lineno)
        rows.append((cols[1], head, cols[3], cols[4] if len(cols) > 4 else None, lineno))

    n = len(rows)
    for form, head, label, pos, lineno in rows:
        if not 0 <= head <= n:
            raise TreebankError(f"head index {head} out of range [0..{n}]", lineno)
        if kind == WORD_INTERNAL and label not in LABEL_INDEX:
            raise TreebankError(f"unknown label: {label!r}", lineno)

    heads = tuple(r[1] for r in rows)
    labels = tuple(r[2] for r in rows)
    if kind == WORD_INTERNAL:
        surface = "".join(r[0] for r in rows)
        if any(len(r[0]) != 1 for r in rows):
            raise TreebankError("word-internal forms must be single characters", start_line)
        entry = WordEntry(surface, DepTree(heads, labels), pos_tags, sense_id)
    else:
        words = tuple(r[0] for r in rows)
        col_pos = tuple(r[3] for r in rows)
        if any(p is not None for p in col_pos):
            if any(p is None for p in col_pos):
                raise TreebankError("POS column present on some lines only", start_line)
            pos_tags = col_pos
        entry = SentenceEntry(words, heads, labels, pos_tags)
    return entry, rows[0][4] if rows else start_line


def parse_treebank_file(text, kind=None):
    """Parse the block format into a Treebank.

    `kind` comes from the caller or from a leading `# kind = ...` header.
    Illegal trees are rejected with the offending line, except non-projective
    ones, which are accepted and flagged in `Treebank.nonprojective`.
    """
    lines = text.replace("\r\n", "\n").split("\n")
    pos = 0
    if lines and lines[0].startswith("# kind"):
        _, _, value = lines[0].partition("=")
        header_kind = value.strip()
        if header_kind not in (WORD_INTERNAL, SENTENCE):
            raise TreebankError(f"unknown kind: {header_kind!r}", 1)
        if kind is not None and kind != header_kind:
            raise TreebankError(
                f"caller kind {kind!r} conflicts with header {header_kind!r}", 1)
        kind = header_kind
        pos = 1
    if kind is None:
        raise TreebankError("treebank kind not declared by caller or header")

    entries = []
    nonprojective = []
    seen_keys = {}
    block = []
    block_start = pos + 1

    def flush(block, block_start):
        if not any(line.strip() for line in block):
            return
        entry, first_line = _parse_block(
            [l for l in block if l.strip()], block_start, kind)
        if kind == WORD_INTERNAL:
            report = validate_tree(entry.tree)
            key = (entry.surface, entry.sense_id)
            if key in seen_keys:
                raise TreebankError(
                    f"duplicate (surface, sense) {key!r}; first seen at line "
                    f"{seen_keys[key]}", first_line)
            seen_keys[key] = first_line
        else:
            report = validate_sentence(entry)
        hard = [v for v in report.violations if v != "non-projective"]
        if hard:
            raise TreebankError(f"illegal tree: {', '.join(hard)}", first_line)
        if "non-projective" in report:
            nonprojective.append(len(entries))
        entries.append(entry)

    for i in range(pos, len(lines)):
        line = lines[i]
        if line.strip():
            if not block:
                block_start = i + 1
            block.append(line)
        else:
            flush(block, block_start)
            block = []
    flush(block, block_start)
    return Treebank(tuple(entries), kind, tuple(nonprojective))


def serialize_entry(entry):
    """Render one entry as its canonical block (no trailing blank line)."""
    lines = []
    if isinstance(entry, WordEntry):
        if entry.sense_id != 1:
            lines.append(f"# sense = {entry.sense_id}")
        if entry.pos_tags:
            lines.append("# pos = " + ",".join(sorted(entry.pos_tags)))
        for i, char in enumerate(entry.surface):
            lines.append(
                f"{i + 1}\t{char}\t{entry.tree.heads[i]}\t{entry.tree.labels[i]}")
    else:
        for i, word in enumerate(entry.words):
            cols = [str(i + 1), word, str(entry.heads[i]), entry.labels[i]]
            if entry.pos_tags:
                cols.append(entry.pos_tags[i])
            lines.append("\t".join(cols))
    return "\n".join(lines)


def serialize_treebank(tb):
    return "\n\n".join(serialize_entry(e) for e in tb.entries) + "\n"


def split_dataset(tb, seed, dev_n, test_n):
    """Deterministic shuffle-split into (train, dev, test).

    The shuffle is a Fisher-Yates pass driven by the Mersenne Twister seeded
    exactly by `seed`; dev takes the first `dev_n` shuffled entries, test the
    next `test_n`, train the rest.
    """
    if dev_n < 0 or test_n < 0:
        raise ValueError("split counts must be non-negative")
    if dev_n + test_n >= len(tb.entries):
        raise ValueError(
            f"dev_n + test_n = {dev_n + test_n} leaves no training data "
            f"(treebank has {len(tb.entries)} entries)")
    order = list(range(len(tb.entries)))
    random.Random(seed).shuffle(order)
    dev_idx = order[:dev_n]
    test_idx = order[dev_n:dev_n + test_n]
    train_idx = order[dev_n + test_n:]

    def take(indices):
        picked = set(indices)
        return Treebank(
            tuple(tb.entries[i] for i in indices), tb.kind,
            tuple(j for j, i in enumerate(indices) if i in set(tb.nonprojective) & picked))

    return take(train_idx), take(dev_idx), take(test_idx)
