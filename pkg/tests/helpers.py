# -*- coding: utf-8 -*-
"""Shared test oracles and generators.

Everything here is deliberately independent of the library implementations it
checks: projectivity by literal definition, legal-tree enumeration by
filtering all head arrays, and a constructive random projective tree sampler.
"""

import itertools
import random
from functools import lru_cache

from chardep.treebank import DepTree, LABELS, Treebank, WORD_INTERNAL, WordEntry

NON_ROOT_LABELS = [l for l in LABELS if l != "root"]

# Characters used for synthetic word surfaces.
GLYPHS = "甲乙丙丁戊己庚辛壬癸子丑寅卯辰巳午未申酉戌亥"


def oracle_descends(heads, node, ancestor):
    seen = set()
    while node != 0:
        if node == ancestor:
            return True
        if node in seen:
            return False
        seen.add(node)
        node = heads[node - 1]
    return ancestor == 0


def oracle_projective(heads):
    """Direct transcription of the definition: every arc spans only
    descendants of its head."""
    for dep in range(1, len(heads) + 1):
        head = heads[dep - 1]
        lo, hi = min(head, dep), max(head, dep)
        for k in range(lo + 1, hi):
            if not oracle_descends(heads, k, head):
                return False
    return True


def oracle_legal(heads):
    n = len(heads)
    if sum(1 for h in heads if h == 0) != 1:
        return False
    for i, h in enumerate(heads):
        if h == i + 1 or not 0 <= h <= n:
            return False
    for start in range(1, n + 1):
        seen = set()
        node = start
        while node != 0:
            if node in seen:
                return False
            seen.add(node)
            node = heads[node - 1]
    return True


@lru_cache(maxsize=None)
def all_projective_trees(n):
    """Every legal single-root projective head array for n nodes."""
    choices = [[h for h in range(n + 1) if h != i + 1] for i in range(n)]
    return tuple(heads for heads in itertools.product(*choices)
                 if oracle_legal(heads) and oracle_projective(heads))


def random_projective_heads(n, rng):
    """Constructive sampler: recursive span partition, always legal and
    projective (not uniform, but it covers the whole space)."""
    heads = [0] * n

    def fill(lo, hi, head):
        # positions lo..hi (1-based, inclusive) become descendants of `head`
        remaining = list(range(lo, hi + 1))
        while remaining:
            # carve a prefix block; its root attaches to `head`
            size = rng.randint(1, len(remaining))
            block = remaining[:size]
            remaining = remaining[size:]
            sub = rng.choice(block)
            heads[sub - 1] = head
            fill(block[0], sub - 1, sub)
            fill(sub + 1, block[-1], sub)

    def fill_side(lo, hi, head):
        if lo > hi:
            return
        fill(lo, hi, head)

    root = rng.randint(1, n)
    heads[root - 1] = 0
    fill_side(1, root - 1, root)
    fill_side(root + 1, n, root)
    return heads


def random_tree(n, rng):
    heads = random_projective_heads(n, rng)
    labels = tuple("root" if h == 0 else rng.choice(NON_ROOT_LABELS) for h in heads)
    return DepTree(tuple(heads), labels)


def random_word_entry(n, rng, used=None):
    while True:
        surface = "".join(rng.choice(GLYPHS) for _ in range(n))
        key = surface
        if used is None or key not in used:
            break
    if used is not None:
        used.add(key)
    return WordEntry(surface, random_tree(n, rng))


def random_word_treebank(count, rng, min_len=2, max_len=6):
    used = set()
    entries = [random_word_entry(rng.randint(min_len, max_len), rng, used)
               for _ in range(count)]
    return Treebank(tuple(entries), WORD_INTERNAL)


def head_final_entry(surface):
    """Deterministic synthetic grammar: chain onto the last character, label
    decided by the dependent character alone (so a model can learn it)."""
    n = len(surface)
    heads = tuple(i + 2 for i in range(n - 1)) + (0,)
    labels = tuple(NON_ROOT_LABELS[ord(c) % len(NON_ROOT_LABELS)] for c in surface[:-1])
    return WordEntry(surface, DepTree(heads, labels + ("root",)))


def synthetic_treebank(count, rng, min_len=2, max_len=4):
    used = set()
    entries = []
    while len(entries) < count:
        n = rng.randint(min_len, max_len)
        surface = "".join(rng.choice(GLYPHS) for _ in range(n))
        if surface in used:
            continue
        used.add(surface)
        entries.append(head_final_entry(surface))
    return Treebank(tuple(entries), WORD_INTERNAL)
