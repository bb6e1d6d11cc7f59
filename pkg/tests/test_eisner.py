# -*- coding: utf-8 -*-
import numpy as np
import pytest

from chardep.eisner import eisner_decode, tree_score
from chardep.treebank import DepTree, is_projective, validate_tree
from helpers import all_projective_trees, oracle_legal, oracle_projective


def decode_checks_out(scores):
    heads = eisner_decode(scores)
    assert oracle_legal(tuple(heads))
    assert oracle_projective(tuple(heads))
    return heads


class TestExamples:
    def test_dominant_chain(self):
        scores = np.full((3, 3), -1.0)
        scores[0, 1] = 5.0
        scores[1, 2] = 5.0
        assert eisner_decode(scores) == [0, 1]

    def test_single_node_forced(self):
        for _ in range(5):
            scores = np.random.default_rng(_).normal(size=(2, 2))
            assert eisner_decode(scores) == [0]

    def test_non_finite_rejected(self):
        scores = np.zeros((3, 3))
        scores[1, 2] = np.nan
        with pytest.raises(ValueError):
            eisner_decode(scores)

    def test_tie_break_lowest_root(self):
        # all-equal scores: the lowest-index root child and splits win
        heads = eisner_decode(np.zeros((4, 4)))
        assert heads[0] == 0


class TestOptimality:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_matches_exhaustive_enumeration(self, n):
        trees = all_projective_trees(n)
        rng = np.random.default_rng(n)
        for _ in range(250):
            scores = rng.normal(size=(n + 1, n + 1))
            heads = decode_checks_out(scores)
            best = max(tree_score(scores, t) for t in trees)
            assert tree_score(scores, heads) == pytest.approx(best, abs=1e-9)

    def test_single_root_enforced_even_when_multi_root_scores_higher(self):
        # two strong root arcs: a multi-root "forest" would score 10, but the
        # decoder must pick a single root child
        scores = np.full((3, 3), 0.0)
        scores[0, 1] = 5.0
        scores[0, 2] = 5.0
        heads = decode_checks_out(scores)
        assert sum(1 for h in heads if h == 0) == 1


class TestProperties:
    def test_outputs_always_legal_projective(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            n = int(rng.integers(1, 12))
            scores = rng.normal(size=(n + 1, n + 1)) * 10
            heads = decode_checks_out(scores)
            labels = tuple("root" if h == 0 else "att" for h in heads)
            report = validate_tree(DepTree(tuple(heads), labels))
            assert report.ok

    def test_constant_shift_invariance(self):
        rng = np.random.default_rng(9)
        for trial in range(50):
            n = int(rng.integers(2, 8))
            scores = rng.normal(size=(n + 1, n + 1))
            shift = float(rng.normal()) * 5
            base = eisner_decode(scores)
            shifted = eisner_decode(scores + shift)
            assert base == shifted
            assert tree_score(scores + shift, base) == pytest.approx(
                tree_score(scores, base) + n * shift, rel=1e-9, abs=1e-9)

    def test_decoded_trees_pass_is_projective(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            n = int(rng.integers(2, 16))
            heads = eisner_decode(rng.normal(size=(n + 1, n + 1)))
            labels = tuple("root" if h == 0 else "obj" for h in heads)
            assert is_projective(DepTree(tuple(heads), labels))
