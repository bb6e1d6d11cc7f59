# -*- coding: utf-8 -*-
"""Structure-aware word representations.

Three encoders turn a word into a fixed vector for the sentence parser's
input layer:

* charlstm      -- one-layer BiLSTM over character embeddings; the word vector
                   is the concatenation of the two last-timestep hidden states.
* labelcharlstm -- same, but each character embedding is concatenated with the
                   embedding of the label on the arc to its head.
* labelgcn      -- two-layer gated GCN over the word-internal tree with the
                   same label-augmented node inputs, average-pooled.
"""

import numpy as np

from . import autodiff as ad
from . import nnet
from .treebank import (DepTree, LABEL_INDEX, WORD_INTERNAL, WordEntry,
                       parse_treebank_file, serialize_entry, validate_tree)

UNK = "<unk>"

MODES = ("charlstm", "labelcharlstm", "labelgcn")


class WordRep:
    """Parameters and forward passes for one representation mode.

    Parameters live in the provided ParamStore under `prefix`, so a sentence
    parser can embed a WordRep inside its own store and optimizer.
    """

    def __init__(self, mode, char_vocab, store, rng, prefix="wrep",
                 char_emb_dim=50, label_emb_dim=50, hidden=50, gcn_layers=2,
                 use_label_channel=True):
        if mode not in MODES:
            raise ValueError(f"unknown word-representation mode: {mode!r}")
        self.mode = mode
        self.prefix = prefix
        self.char_vocab = char_vocab
        self.store = store
        self.char_emb_dim = char_emb_dim
        self.label_emb_dim = label_emb_dim
        self.hidden = hidden
        self.gcn_layers = gcn_layers
        self.use_label_channel = use_label_channel

        store.add(f"{prefix}.chars",
                  nnet.xavier_uniform(rng, (len(char_vocab), char_emb_dim), store.dtype))
        with_labels = mode in ("labelcharlstm", "labelgcn")
        self.input_dim = char_emb_dim + (label_emb_dim if with_labels else 0)
        if with_labels:
            store.add(f"{prefix}.labels",
                      nnet.xavier_uniform(rng, (len(LABEL_INDEX), label_emb_dim), store.dtype))
        if mode == "labelgcn":
            # square weights over the node dimension; input feeds layer 0 as-is
            dim = self.input_dim
            for layer in range(gcn_layers):
                for name in ("self", "in", "out"):
                    store.add(f"{prefix}.gcn.{layer}.{name}",
                              nnet.xavier_uniform(rng, (dim, dim), store.dtype))
                for name in ("in", "out"):
                    store.add(f"{prefix}.gcn.{layer}.gate_{name}.w",
                              nnet.xavier_uniform(rng, (dim, 1), store.dtype))
                    store.add(f"{prefix}.gcn.{layer}.gate_{name}.b",
                              np.zeros(1, dtype=store.dtype))
                store.add(f"{prefix}.gcn.{layer}.b", np.zeros(dim, dtype=store.dtype))
            self.rep_dim = dim
        else:
            nnet.add_bilstm_params(store, f"{prefix}.lstm", self.input_dim, hidden, 1, rng)
            self.rep_dim = 2 * hidden

    def char_ids(self, surface):
        unk = self.char_vocab[UNK]
        return [self.char_vocab.get(c, unk) for c in surface]

    def node_inputs(self, graph, surface, tree):
        """z_k = emb(c_k) [+ emb(label_k)]; the root character carries `root`."""
        chars = ad.embedding_lookup(graph, self.store[f"{self.prefix}.chars"],
                                    self.char_ids(surface))
        if self.mode == "charlstm":
            return chars
        if tree is None or tree.n != len(surface):
            raise ValueError(f"need a word-internal tree covering {surface!r}")
        label_ids = [LABEL_INDEX[l] for l in tree.labels]
        labels = ad.embedding_lookup(graph, self.store[f"{self.prefix}.labels"], label_ids)
        if not self.use_label_channel:
            labels = ad.scale(graph, labels, 0.0)
        return ad.concat(graph, [chars, labels], axis=1)

    def rep(self, graph, surface, tree=None):
        z = self.node_inputs(graph, surface, tree)
        if self.mode == "labelgcn":
            return self._gcn(graph, z, tree)
        return nnet.bilstm_last_states(graph, z, self.store, f"{self.prefix}.lstm")

    def _gcn(self, graph, z, tree):
        n = z.data.shape[0]
        dtype = z.data.dtype
        # adj_in[v, u] = 1 iff u is v's head; adj_out[v, u] = 1 iff u depends on v
        adj_in = np.zeros((n, n), dtype=dtype)
        for dep, head in enumerate(tree.heads):
            if head != 0:
                adj_in[dep, head - 1] = 1.0
        adj_out = adj_in.T.copy()
        h = z
        for layer in range(self.gcn_layers):
            p = f"{self.prefix}.gcn.{layer}"
            terms = [ad.matmul(graph, h, self.store[f"{p}.self"])]
            for name, adj in (("in", adj_in), ("out", adj_out)):
                gates = ad.sigmoid(graph, ad.add(
                    graph, ad.matmul(graph, h, self.store[f"{p}.gate_{name}.w"]),
                    self.store[f"{p}.gate_{name}.b"]))          # (n, 1), per source node
                gated_adj = ad.mul(graph, ad.Tensor(adj), ad.transpose(graph, gates))
                terms.append(ad.matmul(graph, gated_adj,
                                       ad.matmul(graph, h, self.store[f"{p}.{name}"])))
            total = terms[0]
            for term in terms[1:]:
                total = ad.add(graph, total, term)
            h = ad.relu(graph, ad.add(graph, total, self.store[f"{p}.b"]))
        pool = ad.Tensor(np.full((1, n), 1.0 / n, dtype=dtype))
        return ad.matmul(graph, pool, h)


def charlstm_rep(wordrep, surface):
    """Word vector from characters alone (no graph: inference values)."""
    return wordrep.rep(None, surface).data[0]


def labelcharlstm_rep(wordrep, surface, tree):
    return wordrep.rep(None, surface, tree).data[0]


def labelgcn_rep(wordrep, surface, tree):
    return wordrep.rep(None, surface, tree).data[0]


TRIVIAL_TREE = DepTree((0,), ("root",))


class WordStructureLexicon:
    """surface -> single DepTree; parsed trees fill gaps on demand.

    Lookup is total: without an attached parser, unseen surfaces fall back to
    a flat head-final tree (everything attaches to the last character), the
    structure-agnostic but legal default.
    """

    def __init__(self, trees=None, parse_fn=None):
        self.trees = dict(trees or {})
        self.parse_fn = parse_fn

    @staticmethod
    def flat_tree(n):
        return DepTree(tuple([n] * (n - 1) + [0]),
                       tuple(["att"] * (n - 1) + ["root"]))

    def lookup(self, surface):
        if len(surface) == 1:
            return TRIVIAL_TREE
        tree = self.trees.get(surface)
        if tree is None:
            tree = (self.parse_fn(surface) if self.parse_fn is not None
                    else self.flat_tree(len(surface)))
            self.trees[surface] = tree
        return tree

    def __contains__(self, surface):
        return len(surface) == 1 or surface in self.trees

    def export_text(self):
        """Multi-char entries in the `.wist` block format, sorted by surface."""
        entries = [WordEntry(surface, tree)
                   for surface, tree in sorted(self.trees.items()) if len(surface) >= 2]
        return "\n\n".join(serialize_entry(e) for e in entries) + "\n" if entries else ""

    @classmethod
    def from_text(cls, text, parse_fn=None):
        tb = parse_treebank_file(text, WORD_INTERNAL)
        return cls({e.surface: e.tree for e in tb.entries}, parse_fn)


def build_lexicon(vocab, gold, parser_model=None):
    """Gold tree when annotated (lowest sense wins), else the parser's output.

    Single-char words map to the trivial one-node tree.
    """
    if gold is not None and gold.kind != WORD_INTERNAL:
        raise ValueError("lexicon gold treebank must be word-internal")
    trees = {}
    if gold is not None:
        by_surface = {}
        for entry in gold.entries:
            current = by_surface.get(entry.surface)
            if current is None or entry.sense_id < current.sense_id:
                by_surface[entry.surface] = entry
        trees = {s: e.tree for s, e in by_surface.items()}
    parse_fn = parser_model.parse_tree if parser_model is not None else None
    lexicon = WordStructureLexicon(trees, parse_fn)
    for surface in vocab:
        tree = lexicon.lookup(surface)
        report = validate_tree(tree)
        if not report.ok:
            raise ValueError(f"illegal lexicon tree for {surface!r}: {report.violations}")
    return lexicon
