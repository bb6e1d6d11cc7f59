# -*- coding: utf-8 -*-
"""Biaffine graph-based dependency parser.

Encoder: embeddings -> 3-layer BiLSTM.  Four MLPs project the hidden states
into head/dependent spaces for arcs and labels; a biaffine form scores every
head-dependent pair, a per-label biaffine stack scores labels.  Decoding runs
the single-root Eisner DP over arc scores, then picks the best label per arc.
Training minimizes, per dependent, cross-entropy over candidate heads plus
cross-entropy over labels at the gold head.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ad
from . import nnet
from .checkpoint import load_checkpoint, save_checkpoint
from .eisner import eisner_decode
from .embeddings import load_embeddings, load_hook_vectors
from .treebank import (DepTree, LABELS, SENTENCE, SentenceEntry, Treebank,
                       TreebankError, WORD_INTERNAL, WordEntry, is_projective)
from .wordrep import MODES as WORDREP_MODES
from .wordrep import WordRep, WordStructureLexicon

UNK = "<unk>"
ROOT_TOKEN = "<root>"


@dataclass
class ParserConfig:
    mode: str = WORD_INTERNAL
    char_emb_dim: int = 100
    word_emb_dim: int = 100
    label_emb_dim: int = 50
    pos_emb_dim: int = 50
    lstm_layers: int = 3
    lstm_hidden: int = 400
    arc_mlp_dim: int = 500
    label_mlp_dim: int = 100
    charlstm_hidden: int = 50
    wordrep_mode: str = "none"   # none | charlstm | labelcharlstm | labelgcn
    use_gold_pos: bool = False
    use_label_channel: bool = True
    dropout: float = 0.33
    dtype: str = "float32"
    seed: int = 1
    lr: float = 2e-3
    beta1: float = 0.9
    beta2: float = 0.9
    adam_eps: float = 1e-12
    anneal: float = 0.75
    anneal_every: int = 5000
    batch_tokens: int = 5000
    max_epochs: int = 1000
    patience: int = 100

    def __post_init__(self):
        if self.mode not in (WORD_INTERNAL, SENTENCE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.wordrep_mode not in ("none",) + WORDREP_MODES:
            raise ValueError(f"unknown wordrep mode {self.wordrep_mode!r}")
        for name in ("char_emb_dim", "word_emb_dim", "label_emb_dim", "pos_emb_dim",
                     "lstm_layers", "lstm_hidden", "arc_mlp_dim", "label_mlp_dim",
                     "charlstm_hidden", "batch_tokens", "max_epochs", "patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def default_config(mode, **overrides):
    """Mode-appropriate defaults: 100-dim char embeddings for word-internal
    parsing, 50-dim char/label embeddings in sentence mode."""
    base = {"mode": mode}
    if mode == SENTENCE:
        base.update(char_emb_dim=50, label_emb_dim=50, wordrep_mode="charlstm")
    base.update(overrides)
    return ParserConfig(**base)


@dataclass
class ScoredChart:
    arc_scores: np.ndarray    # (n+1, n+1), [head, dependent]
    label_scores: np.ndarray  # (n+1, n+1, L)


def assign_labels(heads, label_scores, force_root_label=None):
    """Highest-scoring label per arc; ties go to the lowest label index.

    With `force_root_label` set (word-internal mode), arcs from the virtual
    root always take that label and no other arc may take it.
    """
    out = []
    for dep, head in enumerate(heads, start=1):
        if force_root_label is None:
            out.append(int(np.argmax(label_scores[head, dep])))
        elif head == 0:
            out.append(force_root_label)
        else:
            row = label_scores[head, dep].copy()
            row[force_root_label] = -np.inf
            out.append(int(np.argmax(row)))
    return out


def _build_vocab(tokens):
    vocab = {UNK: 0, ROOT_TOKEN: 1}
    freq = {}
    for token in tokens:
        freq[token] = freq.get(token, 0) + 1
    for token in sorted(freq):
        if token not in vocab:
            vocab[token] = len(vocab)
    return vocab, freq


class ParserModel:
    """Learned parameters plus vocabulary maps; immutable during inference."""

    def __init__(self, config, char_vocab, char_freq, word_vocab, word_freq,
                 label_vocab, pos_vocab, lexicon=None, hook=None,
                 label_freq=None, pos_freq=None):
        self.config = config
        self.char_vocab = char_vocab
        self.char_freq = char_freq
        self.word_vocab = word_vocab
        self.word_freq = word_freq
        self.label_vocab = list(label_vocab)
        self.label_index = {l: i for i, l in enumerate(self.label_vocab)}
        self.label_freq = dict(label_freq or {})
        self.pos_vocab = pos_vocab
        self.pos_freq = dict(pos_freq or {})
        self.lexicon = lexicon
        self.hook = hook
        self.store = nnet.ParamStore(np.dtype(config.dtype))
        self.char_base = None
        self.word_base = None
        self.wordrep = None
        self._rng = np.random.default_rng(config.seed)
        self._init_params()

    # -- construction -------------------------------------------------------

    def _init_params(self):
        cfg = self.config
        store, rng = self.store, self._rng
        if cfg.mode == WORD_INTERNAL:
            store.add("emb.char.delta",
                      nnet.xavier_uniform(rng, (len(self.char_vocab), cfg.char_emb_dim),
                                          store.dtype))
            self.char_base = np.zeros((len(self.char_vocab), cfg.char_emb_dim),
                                      dtype=store.dtype)
            input_dim = cfg.char_emb_dim
        else:
            store.add("emb.word.delta",
                      nnet.xavier_uniform(rng, (len(self.word_vocab), cfg.word_emb_dim),
                                          store.dtype))
            self.word_base = np.zeros((len(self.word_vocab), cfg.word_emb_dim),
                                      dtype=store.dtype)
            input_dim = cfg.word_emb_dim
            if cfg.wordrep_mode != "none":
                self.wordrep = WordRep(
                    cfg.wordrep_mode, self.char_vocab, store, rng,
                    char_emb_dim=cfg.char_emb_dim, label_emb_dim=cfg.label_emb_dim,
                    hidden=cfg.charlstm_hidden,
                    use_label_channel=cfg.use_label_channel)
                input_dim += self.wordrep.rep_dim
            if cfg.use_gold_pos:
                store.add("emb.pos",
                          nnet.xavier_uniform(rng, (len(self.pos_vocab), cfg.pos_emb_dim),
                                              store.dtype))
                input_dim += cfg.pos_emb_dim
        nnet.add_bilstm_params(store, "enc", input_dim, cfg.lstm_hidden,
                               cfg.lstm_layers, rng)
        hidden2 = 2 * cfg.lstm_hidden
        nnet.add_mlp_params(store, "mlp.arc_h", hidden2, cfg.arc_mlp_dim, rng)
        nnet.add_mlp_params(store, "mlp.arc_d", hidden2, cfg.arc_mlp_dim, rng)
        nnet.add_mlp_params(store, "mlp.lbl_h", hidden2, cfg.label_mlp_dim, rng)
        nnet.add_mlp_params(store, "mlp.lbl_d", hidden2, cfg.label_mlp_dim, rng)
        store.add("biaffine.arc",
                  nnet.xavier_uniform(rng, (cfg.arc_mlp_dim + 1, cfg.arc_mlp_dim),
                                      store.dtype))
        store.add("biaffine.label",
                  np.zeros((len(self.label_vocab), cfg.label_mlp_dim + 1,
                            cfg.label_mlp_dim + 1), dtype=store.dtype))

    def load_pretrained(self, path):
        """Frozen base table rows for tokens found in the file; the trainable
        delta starts at zero on covered rows."""
        vectors, dim = load_embeddings(path)
        cfg = self.config
        if cfg.mode == WORD_INTERNAL:
            table, vocab, want = self.char_base, self.char_vocab, cfg.char_emb_dim
            delta = self.store["emb.char.delta"]
        else:
            table, vocab, want = self.word_base, self.word_vocab, cfg.word_emb_dim
            delta = self.store["emb.word.delta"]
        if dim != want:
            raise ValueError(f"pretrained dim {dim} != configured {want}")
        covered = 0
        for token, idx in vocab.items():
            if token in vectors:
                table[idx] = vectors[token].astype(table.dtype)
                delta.data[idx] = 0.0
                covered += 1
        return covered

    def load_hook(self, path):
        if self.config.mode != WORD_INTERNAL:
            raise ValueError("external character vectors apply to word-internal mode")
        hook, dim = load_hook_vectors(path)
        if dim != self.config.char_emb_dim:
            raise ValueError(f"hook dim {dim} != configured {self.config.char_emb_dim}")
        self.hook = hook

    # -- forward ------------------------------------------------------------

    def _char_ids(self, surface):
        unk = self.char_vocab[UNK]
        return [self.char_vocab.get(c, unk) for c in surface]

    def encode_word(self, graph, surface, train=False, rng=None):
        """h_0..h_n for the virtual root plus each character."""
        cfg = self.config
        ids = [self.char_vocab[ROOT_TOKEN]] + self._char_ids(surface)
        x = ad.add(graph,
                   ad.embedding_lookup(graph, self.store["emb.char.delta"], ids),
                   ad.Tensor(self.char_base[ids]))
        if self.hook is not None:
            rows = [ad.take_rows(graph, x, [0])]
            for k, _ in enumerate(surface):
                vec = self.hook.get((surface, k))
                if vec is None:
                    rows.append(ad.take_rows(graph, x, [k + 1]))
                else:
                    rows.append(ad.Tensor(vec.astype(self.store.dtype)[None, :]))
            x = ad.concat(graph, rows, axis=0)
        x = ad.dropout(graph, x, cfg.dropout, rng, train=train)
        return nnet.bilstm_forward(graph, x, self.store, "enc", cfg.lstm_layers,
                                   train=train, rng=rng, dropout=cfg.dropout)

    def encode_sentence(self, graph, words, pos_tags=None, train=False, rng=None):
        cfg = self.config
        unk = self.word_vocab[UNK]
        ids = [self.word_vocab[ROOT_TOKEN]] + [self.word_vocab.get(w, unk) for w in words]
        parts = [ad.add(graph,
                        ad.embedding_lookup(graph, self.store["emb.word.delta"], ids),
                        ad.Tensor(self.word_base[ids]))]
        if self.wordrep is not None:
            reps = [self._word_rep(graph, ROOT_TOKEN)]
            reps += [self._word_rep(graph, w) for w in words]
            parts.append(ad.concat(graph, reps, axis=0))
        if cfg.use_gold_pos:
            unk_pos = self.pos_vocab[UNK]
            tags = list(pos_tags or [])
            if len(tags) != len(words):
                tags = [UNK] * len(words)
            pos_ids = [self.pos_vocab[ROOT_TOKEN]] + \
                [self.pos_vocab.get(t, unk_pos) for t in tags]
            parts.append(ad.embedding_lookup(graph, self.store["emb.pos"], pos_ids))
        x = parts[0] if len(parts) == 1 else ad.concat(graph, parts, axis=1)
        x = ad.dropout(graph, x, cfg.dropout, rng, train=train)
        return nnet.bilstm_forward(graph, x, self.store, "enc", cfg.lstm_layers,
                                   train=train, rng=rng, dropout=cfg.dropout)

    def _word_rep(self, graph, word):
        if word == ROOT_TOKEN:
            tree = DepTree((0,), ("root",))
            return self.wordrep.rep(graph, ROOT_TOKEN[0], tree if
                                    self.wordrep.mode != "charlstm" else None)
        tree = None
        if self.wordrep.mode in ("labelcharlstm", "labelgcn"):
            if self.lexicon is None:
                raise ValueError("label-aware word representations need a lexicon")
            tree = self.lexicon.lookup(word)
        return self.wordrep.rep(graph, word, tree)

    def _score_parts(self, graph, hidden, train=False, rng=None):
        cfg = self.config
        r_arc_h = nnet.mlp(graph, hidden, self.store, "mlp.arc_h", train, rng, cfg.dropout)
        r_arc_d = nnet.mlp(graph, hidden, self.store, "mlp.arc_d", train, rng, cfg.dropout)
        r_lbl_h = nnet.mlp(graph, hidden, self.store, "mlp.lbl_h", train, rng, cfg.dropout)
        r_lbl_d = nnet.mlp(graph, hidden, self.store, "mlp.lbl_d", train, rng, cfg.dropout)
        arc = ad.bilinear(graph, ad.append_ones(graph, r_arc_h),
                          self.store["biaffine.arc"], r_arc_d)
        return arc, ad.append_ones(graph, r_lbl_h), ad.append_ones(graph, r_lbl_d)

    def encode(self, graph, entry, train=False, rng=None):
        if self.config.mode == WORD_INTERNAL:
            surface = entry.surface if isinstance(entry, WordEntry) else entry
            return self.encode_word(graph, surface, train, rng)
        return self.encode_sentence(graph, entry.words, entry.pos_tags, train, rng)

    def score_chart(self, entry):
        """Full arc and label score chart for one entry (inference values)."""
        hidden = self.encode(None, entry)
        arc, rlh, rld = self._score_parts(None, hidden)
        label = ad.bilinear(None, rlh, self.store["biaffine.label"], rld)
        return ScoredChart(arc.data.astype(np.float64),
                           label.data.astype(np.float64))

    def predict(self, entry):
        """(heads, labels) for one entry, decoding the best projective tree."""
        chart = self.score_chart(entry)
        heads = eisner_decode(chart.arc_scores)
        force = self.label_index["root"] if self.config.mode == WORD_INTERNAL else None
        label_ids = assign_labels(heads, chart.label_scores, force_root_label=force)
        return heads, [self.label_vocab[i] for i in label_ids]

    def parse_tree(self, surface):
        heads, labels = self.predict(surface)
        return DepTree(tuple(heads), tuple(labels))

    def parse_word(self, surface):
        if len(surface) < 2:
            raise TreebankError(f"word-internal parsing needs >= 2 characters: {surface!r}")
        return WordEntry(surface, self.parse_tree(surface))

    def parse_sentence(self, words, pos_tags=()):
        entry = SentenceEntry(tuple(words), (0,) * len(words), ("root",) * len(words),
                              tuple(pos_tags))
        heads, labels = self.predict(entry)
        return SentenceEntry(tuple(words), tuple(heads), tuple(labels), tuple(pos_tags))

    # -- training -----------------------------------------------------------

    def _gold_targets(self, entry):
        if self.config.mode == WORD_INTERNAL:
            heads, labels = entry.tree.heads, entry.tree.labels
        else:
            heads, labels = entry.heads, entry.labels
        label_ids = [self.label_index[l] for l in labels]
        return list(heads), label_ids

    def entry_loss(self, graph, entry, train=True, rng=None):
        """(arc_ce, label_ce, n) with CE means taken over this entry."""
        hidden = self.encode(graph, entry, train, rng)
        arc, rlh_aug, rld_aug = self._score_parts(graph, hidden, train, rng)
        heads, label_ids = self._gold_targets(entry)
        n = len(heads)
        dep_rows = list(range(1, n + 1))
        arc_logits = ad.take_rows(graph, ad.transpose(graph, arc), dep_rows)
        arc_ce = ad.cross_entropy(graph, arc_logits, heads)
        lbl_logits = ad.bilinear_pairs(graph,
                                       ad.take_rows(graph, rlh_aug, heads),
                                       self.store["biaffine.label"],
                                       ad.take_rows(graph, rld_aug, dep_rows))
        label_ce = ad.cross_entropy(graph, lbl_logits, label_ids)
        return arc_ce, label_ce, n

    # -- persistence --------------------------------------------------------

    def save(self, path):
        header = {
            "config": asdict(self.config),
            "vocab": {
                "char": _vocab_list(self.char_vocab),
                "char_freq": self.char_freq,
                "word": _vocab_list(self.word_vocab),
                "word_freq": self.word_freq,
                "label": self.label_vocab,
                "label_freq": self.label_freq,
                "pos": _vocab_list(self.pos_vocab),
                "pos_freq": self.pos_freq,
            },
            "lexicon": {s: [list(t.heads), list(t.labels)]
                        for s, t in self.lexicon.trees.items()}
                       if self.lexicon is not None else None,
        }
        arrays = dict(self.store.state_arrays())
        if self.char_base is not None:
            arrays["frozen.char_base"] = self.char_base
        if self.word_base is not None:
            arrays["frozen.word_base"] = self.word_base
        save_checkpoint(path, header, arrays)

    @classmethod
    def load(cls, path):
        header, arrays = load_checkpoint(path)
        config = ParserConfig(**header["config"])
        vocab = header["vocab"]
        lexicon = None
        if header.get("lexicon") is not None:
            lexicon = WordStructureLexicon(
                {s: DepTree(tuple(h), tuple(l))
                 for s, (h, l) in header["lexicon"].items()})
        model = cls(config,
                    _vocab_dict(vocab["char"]), dict(vocab["char_freq"]),
                    _vocab_dict(vocab["word"]), dict(vocab["word_freq"]),
                    vocab["label"], _vocab_dict(vocab["pos"]), lexicon=lexicon,
                    label_freq=vocab.get("label_freq"),
                    pos_freq=vocab.get("pos_freq"))
        if model.char_base is not None:
            model.char_base = arrays.pop("frozen.char_base").astype(model.store.dtype)
        if model.word_base is not None:
            model.word_base = arrays.pop("frozen.word_base").astype(model.store.dtype)
        model.store.load_arrays(arrays)
        return model


def _vocab_list(vocab):
    if not vocab:
        return []
    out = [None] * len(vocab)
    for token, idx in vocab.items():
        out[idx] = token
    return out


def _vocab_dict(tokens):
    return {t: i for i, t in enumerate(tokens)}


def build_model(config, train_tb, pretrained_path=None, hook_path=None, lexicon=None):
    """Vocabularies from the training treebank, fresh parameters from the seed."""
    if train_tb.kind != config.mode:
        raise TreebankError(f"treebank kind {train_tb.kind!r} does not match "
                            f"parser mode {config.mode!r}")
    char_freq = {}
    word_freq = {}
    label_freq = {}
    pos_freq = {}
    if config.mode == WORD_INTERNAL:
        for entry in train_tb:
            for c in entry.surface:
                char_freq[c] = char_freq.get(c, 0) + 1
            for l in entry.tree.labels:
                label_freq[l] = label_freq.get(l, 0) + 1
        label_vocab = list(LABELS)
    else:
        for entry in train_tb:
            for w in entry.words:
                word_freq[w] = word_freq.get(w, 0) + 1
                for c in w:
                    char_freq[c] = char_freq.get(c, 0) + 1
            for l in entry.labels:
                label_freq[l] = label_freq.get(l, 0) + 1
            for t in entry.pos_tags:
                pos_freq[t] = pos_freq.get(t, 0) + 1
        label_vocab = sorted(label_freq)
    char_vocab, _ = _build_vocab(char_freq)
    word_vocab, _ = _build_vocab(word_freq)
    char_counts = dict(char_freq)
    word_counts = dict(word_freq)
    pos_vocab = {UNK: 0, ROOT_TOKEN: 1}
    for tag in sorted(pos_freq):
        if tag not in pos_vocab:
            pos_vocab[tag] = len(pos_vocab)
    model = ParserModel(config, char_vocab, char_counts, word_vocab, word_counts,
                        label_vocab, pos_vocab, lexicon=lexicon,
                        label_freq=label_freq, pos_freq=pos_freq)
    if pretrained_path:
        model.load_pretrained(pretrained_path)
    if hook_path:
        model.load_hook(hook_path)
    return model


def check_projective(tb):
    """Training rejects non-projective trees (Eisner cannot produce them)."""
    for i, entry in enumerate(tb):
        heads = entry.tree.heads if tb.kind == WORD_INTERNAL else entry.heads
        tree = DepTree(heads, ("root",) * len(heads))
        if not is_projective(tree):
            ident = entry.surface if tb.kind == WORD_INTERNAL else " ".join(entry.words)
            raise TreebankError(f"non-projective training tree at entry {i}: {ident!r}")


def _batches(order, sizes, budget):
    batch = []
    used = 0
    for idx in order:
        need = sizes[idx] + 1
        if batch and used + need > budget:
            yield batch
            batch, used = [], 0
        batch.append(idx)
        used += need
    if batch:
        yield batch


def train(config, train_tb, dev_tb, pretrained_path=None, hook_path=None,
          lexicon=None, log_fn=None):
    """Returns (best model, per-epoch log records)."""
    check_projective(train_tb)
    model = build_model(config, train_tb, pretrained_path, hook_path, lexicon)
    adam = nnet.Adam(model.store, lr=config.lr, beta1=config.beta1, beta2=config.beta2,
                     eps=config.adam_eps, anneal=config.anneal,
                     anneal_every=config.anneal_every)
    rng = np.random.default_rng(config.seed + 0x5eed)
    sizes = [e.tree.n if train_tb.kind == WORD_INTERNAL else e.n for e in train_tb]
    log = []
    best_las = -1.0
    best_arrays = None
    best_epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        order = list(range(len(train_tb.entries)))
        rng.shuffle(order)
        arc_total = label_total = 0.0
        position_total = 0
        for batch in _batches(order, sizes, config.batch_tokens):
            graph = ad.Graph()
            model.store.zero_grad()
            weighted = None
            batch_positions = 0
            for idx in batch:
                arc_ce, label_ce, n = model.entry_loss(graph, train_tb.entries[idx],
                                                       train=True, rng=rng)
                arc_total += float(arc_ce.data) * n
                label_total += float(label_ce.data) * n
                batch_positions += n
                contrib = ad.scale(graph, ad.add(graph, arc_ce, label_ce), float(n))
                weighted = contrib if weighted is None else ad.add(graph, weighted, contrib)
            loss = ad.scale(graph, weighted, 1.0 / batch_positions)
            if not np.isfinite(loss.data):
                raise FloatingPointError(f"non-finite loss at epoch {epoch}")
            graph.backward(loss)
            adam.step()
            position_total += batch_positions
        dev_report = evaluate_model(model, dev_tb)
        record = {
            "epoch": epoch,
            "arc_loss": round(arc_total / position_total, 6),
            "label_loss": round(label_total / position_total, 6),
            "dev_uas": round(dev_report.uas, 4),
            "dev_las": round(dev_report.las, 4),
        }
        log.append(record)
        if log_fn:
            log_fn(record)
        if dev_report.las > best_las:
            best_las = dev_report.las
            best_arrays = {k: v.copy() for k, v in model.store.state_arrays().items()}
            best_epoch = epoch
        if epoch - best_epoch >= config.patience:
            break
    if best_arrays is not None:
        model.store.load_arrays(best_arrays)
    return model, log


# -- evaluation -------------------------------------------------------------


@dataclass
class EvalReport:
    uas: float
    las: float
    cm: float
    n_entries: int
    n_arcs: int
    per_label: dict = field(default_factory=dict)
    freq_las: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "uas": round(self.uas, 2), "las": round(self.las, 2),
            "cm": round(self.cm, 2), "n_entries": self.n_entries,
            "n_arcs": self.n_arcs,
            "per_label": {l: {"labeled": round(v[0], 2), "unlabeled": round(v[1], 2),
                              "count": v[2]}
                          for l, v in self.per_label.items()},
            "freq_las": {k: round(v, 2) for k, v in self.freq_las.items()},
        }


def _entry_arrays(entry, kind):
    if kind == WORD_INTERNAL:
        return entry.tree.heads, entry.tree.labels
    return entry.heads, entry.labels


def score_treebanks(pred_tb, gold_tb, train_word_freq=None):
    """UAS/LAS/CM plus per-gold-label accuracy; sentence mode excludes
    punctuation everywhere and adds LAS by training-set word frequency.

    Word-internal surfaces with several gold structures are scored against
    the best-matching sense.
    """
    if len(pred_tb.entries) != len(gold_tb.entries) or pred_tb.kind != gold_tb.kind:
        raise ValueError("prediction/gold treebanks are not aligned")
    if not gold_tb.entries:
        raise ValueError("empty treebank")
    kind = gold_tb.kind
    senses = {}
    if kind == WORD_INTERNAL:
        for entry in gold_tb:
            senses.setdefault(entry.surface, []).append(entry)

    total = uas_hits = las_hits = 0
    cm_hits = 0
    per_label = {}
    freq = {"all": [0, 0], ">2": [0, 0], "<=2": [0, 0], "unknown": [0, 0]}

    for pred, gold in zip(pred_tb.entries, gold_tb.entries):
        pheads, plabels = _entry_arrays(pred, kind)
        if kind == WORD_INTERNAL:
            best = None
            for cand in senses[gold.surface]:
                gheads, glabels = cand.tree.heads, cand.tree.labels
                lab = sum(ph == gh and pl == gl for ph, gh, pl, gl
                          in zip(pheads, gheads, plabels, glabels))
                unlab = sum(ph == gh for ph, gh in zip(pheads, gheads))
                key = (lab, unlab)
                if best is None or key > best[0]:
                    best = (key, cand)
            gold = best[1]
            gheads, glabels = gold.tree.heads, gold.tree.labels
            keep = [True] * len(gheads)
            words = None
        else:
            gheads, glabels = gold.heads, gold.labels
            keep = [not p for p in gold.is_punct]
            words = gold.words
        if len(pheads) != len(gheads):
            raise ValueError("prediction/gold length mismatch")
        entry_ok = True
        for i in range(len(gheads)):
            if not keep[i]:
                continue
            total += 1
            head_ok = pheads[i] == gheads[i]
            label_ok = head_ok and plabels[i] == glabels[i]
            uas_hits += head_ok
            las_hits += label_ok
            entry_ok = entry_ok and label_ok
            stats = per_label.setdefault(glabels[i], [0, 0, 0])
            stats[0] += label_ok
            stats[1] += head_ok
            stats[2] += 1
            if words is not None and train_word_freq is not None:
                count = train_word_freq.get(words[i], 0)
                bucket = "unknown" if count == 0 else ("<=2" if count <= 2 else ">2")
                for b in ("all", bucket):
                    freq[b][0] += label_ok
                    freq[b][1] += 1
        cm_hits += entry_ok

    n = len(gold_tb.entries)
    report = EvalReport(
        uas=100.0 * uas_hits / total,
        las=100.0 * las_hits / total,
        cm=100.0 * cm_hits / n,
        n_entries=n,
        n_arcs=total,
        per_label={l: (100.0 * s[0] / s[2], 100.0 * s[1] / s[2], s[2])
                   for l, s in sorted(per_label.items())},
        freq_las={k: 100.0 * v[0] / v[1] for k, v in freq.items() if v[1]}
                 if train_word_freq is not None and kind == SENTENCE else {},
    )
    return report


def evaluate_model(model, tb):
    """Parse every entry and score against the gold treebank."""
    if tb.kind != model.config.mode:
        raise TreebankError(f"treebank kind {tb.kind!r} does not match parser mode")
    preds = []
    for entry in tb:
        heads, labels = model.predict(entry)
        if tb.kind == WORD_INTERNAL:
            preds.append(WordEntry(entry.surface, DepTree(tuple(heads), tuple(labels)),
                                   entry.pos_tags, entry.sense_id))
        else:
            preds.append(SentenceEntry(entry.words, tuple(heads), tuple(labels),
                                       entry.pos_tags, entry.is_punct))
    pred_tb = Treebank(tuple(preds), tb.kind)
    return score_treebanks(pred_tb, tb,
                           train_word_freq=model.word_freq
                           if tb.kind == SENTENCE else None)
