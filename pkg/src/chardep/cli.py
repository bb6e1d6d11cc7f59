# -*- coding: utf-8 -*-
"""Command-line entry point: train, parse, eval, stats, agree, serve.

Options resolve as flags > config file (INI, one section per command) >
defaults.  Exit codes: 0 ok, 1 usage error, 2 data error, 3 numeric failure.
stdout carries data, stderr diagnostics.
"""

import argparse
import configparser
import json
import sys
from dataclasses import asdict

from . import analysis, parser as parsing, service, treebank
from .treebank import SENTENCE, TreebankError, WORD_INTERNAL
from .workflow import WorkflowError
from .wordrep import build_lexicon, WordStructureLexicon

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _read_config(path, section):
    if not path:
        return {}
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    return dict(cp[section]) if cp.has_section(section) else {}


def _resolve(args, file_values, name, default, cast=str):
    flag = getattr(args, name.replace("-", "_"), None)
    if flag is not None:
        return flag
    if name in file_values:
        raw = file_values[name]
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    return default


def _load_tb(path, kind):
    with open(path, encoding="utf-8") as fh:
        return treebank.parse_treebank_file(fh.read(), kind)


def _kind_for(path, mode_flag):
    if mode_flag:
        return mode_flag
    if str(path).endswith(".dep"):
        return SENTENCE
    return WORD_INTERNAL


def _write_report(path, payload):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")


# -- train --------------------------------------------------------------------


def cmd_train(args):
    values = _read_config(args.config, "train")
    mode = _resolve(args, values, "mode", WORD_INTERNAL)
    overrides = {}
    for name, cast in (
            ("char_emb_dim", int), ("word_emb_dim", int), ("label_emb_dim", int),
            ("pos_emb_dim", int), ("lstm_layers", int), ("lstm_hidden", int),
            ("arc_mlp_dim", int), ("label_mlp_dim", int), ("charlstm_hidden", int),
            ("batch_tokens", int), ("max_epochs", int), ("patience", int),
            ("seed", int), ("lr", float), ("dropout", float), ("dtype", str),
            ("wordrep_mode", str), ("use_gold_pos", bool), ("use_label_channel", bool)):
        value = _resolve(args, values, name, None, cast)
        if value is not None:
            overrides[name] = value
    config = parsing.default_config(mode, **overrides)

    train_tb = _load_tb(args.train, mode)
    dev_tb = _load_tb(args.dev, mode)
    lexicon = None
    if config.mode == SENTENCE and config.wordrep_mode in ("labelcharlstm", "labelgcn"):
        if not args.lexicon:
            raise TreebankError("label-aware word representations need --lexicon")
        if args.lexicon.endswith(".ckpt"):
            word_model = parsing.ParserModel.load(args.lexicon)
            vocab = sorted({w for e in train_tb for w in e.words}
                           | {w for e in dev_tb for w in e.words})
            gold = _load_tb(args.lexicon_gold, WORD_INTERNAL) if args.lexicon_gold else None
            lexicon = build_lexicon(vocab, gold, word_model)
        else:
            with open(args.lexicon, encoding="utf-8") as fh:
                lexicon = WordStructureLexicon.from_text(fh.read())

    log_fh = open(args.log, "w", encoding="utf-8") if args.log else None

    def log_fn(record):
        line = json.dumps(record, sort_keys=True)
        if log_fh:
            log_fh.write(line + "\n")
            log_fh.flush()
        print(line, file=sys.stderr)

    try:
        model, log = parsing.train(config, train_tb, dev_tb,
                                   pretrained_path=args.emb, hook_path=args.hook,
                                   lexicon=lexicon, log_fn=log_fn)
    finally:
        if log_fh:
            log_fh.close()
    model.save(args.out)
    last = log[-1] if log else {}
    best = max(log, key=lambda r: r["dev_las"]) if log else {}
    print(json.dumps({"checkpoint": args.out, "epochs": last.get("epoch", 0),
                      "dev_uas": best.get("dev_uas"), "dev_las": best.get("dev_las")},
                     sort_keys=True))
    return EXIT_OK


# -- parse --------------------------------------------------------------------


def cmd_parse(args):
    model = parsing.ParserModel.load(args.model)
    if model.config.mode != WORD_INTERNAL:
        raise TreebankError("parse command expects a word-internal model")
    words = list(args.words)
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            words.extend(line.strip() for line in fh if line.strip())
    if not words:
        raise TreebankError("no input words (pass words or --file)")
    blocks = []
    for word in words:
        entry = model.parse_word(word)
        blocks.append(treebank.serialize_entry(entry))
    print("\n\n".join(blocks))
    return EXIT_OK


# -- eval / stats / agree -------------------------------------------------------


def cmd_eval(args):
    model = parsing.ParserModel.load(args.model)
    tb = _load_tb(args.test, model.config.mode)
    report = parsing.evaluate_model(model, tb)
    payload = {"report": report.as_dict(), "config": asdict(model.config)}
    _write_report(args.out, payload)
    print(f"entries {report.n_entries}  arcs {report.n_arcs}")
    print(f"UAS {report.uas:6.2f}  LAS {report.las:6.2f}  CM {report.cm:6.2f}")
    if report.per_label:
        print(f"{'label':8} {'labeled':>8} {'unlabeled':>10} {'count':>7}")
        for label, (lab, unlab, count) in report.per_label.items():
            print(f"{label:8} {lab:8.1f} {unlab:10.1f} {count:7d}")
    if report.freq_las:
        print("LAS by train frequency: " + "  ".join(
            f"{k}={v:.2f}" for k, v in report.freq_las.items()))
    return EXIT_OK


def cmd_stats(args):
    tb = _load_tb(args.tb, WORD_INTERNAL)
    dist = analysis.label_distribution(tb, group_by_pos=args.by_pos)
    payload = {"distribution": {g: dict(r) for g, r in dist.rows.items()},
               "totals": dict(dist.totals),
               "avg_chars_per_word": round(analysis.avg_word_length_from_root(dist), 3)}
    groups = [analysis.OVERALL] + [g for g in analysis.POS_GROUPS if g in dist.rows]
    header = f"{'group':14}" + "".join(f"{l:>7}" for l in treebank.LABELS)
    print(header)
    for group in groups:
        row = dist.rows[group]
        print(f"{group:14}" + "".join(f"{row[l]:7.1f}" for l in treebank.LABELS))
    try:
        three = analysis.three_char_stats(tb)
        payload["three_char"] = {"root_position": three.root_position,
                                 "patterns": three.patterns, "n_words": three.n_words}
        print("three-char root position: " + "  ".join(
            f"{p}:{v:.1f}" for p, v in three.root_position.items()))
        print("three-char patterns:      " + "  ".join(
            f"{name}={v:.1f}" for name, v in three.patterns.items()))
    except ValueError:
        pass
    multi = analysis.multi_structure_words(tb)
    payload["multi_structure_words"] = multi
    print(f"words with multiple structures: {len(multi)}")
    _write_report(args.out, payload)
    return EXIT_OK


def cmd_agree(args):
    set_a = analysis.AnnotationSet(_load_tb(args.a, WORD_INTERNAL), "a")
    set_b = analysis.AnnotationSet(_load_tb(args.b, WORD_INTERNAL), "b")
    report = analysis.pairwise_consistency(set_a, set_b)
    payload = {"dep_labeled": report.dep_labeled,
               "dep_unlabeled": report.dep_unlabeled,
               "word_labeled": report.word_labeled,
               "word_unlabeled": report.word_unlabeled,
               "n_chars": report.n_chars, "n_words": report.n_words}
    _write_report(args.out, payload)
    print(f"dependency-wise labeled {report.dep_labeled:5.1f}  "
          f"unlabeled {report.dep_unlabeled:5.1f}")
    print(f"word-wise       labeled {report.word_labeled:5.1f}  "
          f"unlabeled {report.word_unlabeled:5.1f}")
    return EXIT_OK


def cmd_serve(args):
    service.run_forever(log_path=args.log, host=args.host, port=args.port,
                        static_dir=args.static)
    return EXIT_OK


# -- wiring ---------------------------------------------------------------------


def build_arg_parser():
    top = CliParser(prog="chardep",
                    description="Word-internal dependency structure toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[], help="train a parser", add_help=True)
    p.add_argument("--mode", choices=[WORD_INTERNAL, SENTENCE], default=None)
    p.add_argument("--train", required=True, help="training treebank file")
    p.add_argument("--dev", required=True, help="development treebank file")
    p.add_argument("--emb", default=None, help="pretrained embedding file")
    p.add_argument("--hook", default=None, help="external per-character vector file")
    p.add_argument("--lexicon", default=None,
                   help="word structures: .wist file or a word-internal .ckpt")
    p.add_argument("--lexicon-gold", default=None,
                   help="gold .wist consulted before the lexicon parser")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--log", default=None, help="per-epoch JSON-lines log")
    p.add_argument("--config", default=None, help="INI config file")
    for name in ("char-emb-dim", "word-emb-dim", "label-emb-dim", "pos-emb-dim",
                 "lstm-layers", "lstm-hidden", "arc-mlp-dim", "label-mlp-dim",
                 "charlstm-hidden", "batch-tokens", "max-epochs", "patience", "seed"):
        p.add_argument(f"--{name}", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--dtype", choices=["float32", "float64"], default=None)
    p.add_argument("--wordrep-mode", dest="wordrep_mode", default=None,
                   choices=["none", "charlstm", "labelcharlstm", "labelgcn"])
    p.add_argument("--gold-pos", dest="use_gold_pos", action="store_const",
                   const=True, default=None)
    p.add_argument("--no-label-channel", dest="use_label_channel",
                   action="store_const", const=False, default=None)
    p.set_defaults(run=cmd_train)

    p = sub.add_parser("parse", help="parse words with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--file", default=None, help="one word per line")
    p.add_argument("words", nargs="*")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("eval", help="evaluate a model on a treebank")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out", default=None, help="machine-readable report path")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("stats", help="treebank analytics")
    p.add_argument("--tb", required=True)
    p.add_argument("--by-pos", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(run=cmd_stats)

    p = sub.add_parser("agree", help="inter-annotator agreement of two files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(run=cmd_agree)

    p = sub.add_parser("serve", help="run the annotation workflow service")
    p.add_argument("--log", default=None, help="event log path (replayed if present)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8137)
    p.add_argument("--static", default=None, help="frontend directory to serve at /")
    p.set_defaults(run=cmd_serve)
    return top


def main(argv=None):
    args = build_arg_parser().parse_args(argv)
    try:
        return args.run(args)
    except (TreebankError, WorkflowError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    except FloatingPointError as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
