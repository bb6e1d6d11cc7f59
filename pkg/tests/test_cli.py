# -*- coding: utf-8 -*-
import json
import random

import pytest

from chardep.cli import main
from chardep.treebank import (WORD_INTERNAL, parse_treebank_file,
                              serialize_treebank, split_dataset)
from helpers import random_word_treebank, synthetic_treebank


@pytest.fixture()
def data(tmp_path):
    tb = synthetic_treebank(12, random.Random(7))
    train, dev, test = split_dataset(tb, seed=0, dev_n=3, test_n=3)
    paths = {}
    for name, part in (("train", train), ("dev", dev), ("test", test)):
        path = tmp_path / f"{name}.wist"
        path.write_text(serialize_treebank(part), encoding="utf-8")
        paths[name] = str(path)
    paths["dir"] = tmp_path
    return paths


def train_tiny(data, extra=()):
    out = str(data["dir"] / "m.ckpt")
    log = str(data["dir"] / "train.log")
    code = main(["train", "--train", data["train"], "--dev", data["dev"],
                 "--out", out, "--log", log, "--char-emb-dim", "8",
                 "--lstm-hidden", "8", "--lstm-layers", "1", "--arc-mlp-dim", "8",
                 "--label-mlp-dim", "8", "--max-epochs", "2", "--patience", "2",
                 "--seed", "11", *extra])
    assert code == 0
    return out, log


class TestTrain:
    def test_writes_checkpoint_log_and_config_dump(self, data, capsys):
        out, log = train_tiny(data)
        assert (data["dir"] / "m.ckpt").exists()
        assert (data["dir"] / "m.ckpt.config.json").exists()
        records = [json.loads(line) for line in open(log, encoding="utf-8")]
        assert [set(r) for r in records] == \
            [{"epoch", "arc_loss", "label_loss", "dev_uas", "dev_las"}] * len(records)
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert summary["checkpoint"] == out

    def test_missing_train_flag_is_usage_error(self, data):
        with pytest.raises(SystemExit) as err:
            main(["train", "--dev", data["dev"], "--out", "x.ckpt"])
        assert err.value.code == 1

    def test_nonexistent_path_is_data_error(self, data):
        code = main(["train", "--train", "/no/such/file.wist", "--dev", data["dev"],
                     "--out", str(data["dir"] / "x.ckpt")])
        assert code == 2

    def test_nonprojective_entry_is_data_error(self, data, capsys):
        bad = data["dir"] / "bad.wist"
        bad.write_text("1\t甲\t0\troot\n2\t乙\t4\tatt\n3\t丙\t1\tobj\n4\t丁\t3\tobj\n",
                       encoding="utf-8")
        code = main(["train", "--train", str(bad), "--dev", data["dev"],
                     "--out", str(data["dir"] / "x.ckpt")])
        assert code == 2
        assert "non-projective" in capsys.readouterr().err

    def test_seeded_runs_bit_reproducible(self, data):
        out1, log1 = train_tiny(data)
        bytes1 = (data["dir"] / "m.ckpt").read_bytes()
        text1 = open(log1, encoding="utf-8").read()
        out2, log2 = train_tiny(data)
        assert (data["dir"] / "m.ckpt").read_bytes() == bytes1
        assert open(log2, encoding="utf-8").read() == text1

    def test_config_file_with_flag_override(self, data):
        config = data["dir"] / "run.ini"
        config.write_text("[train]\nlstm_hidden = 8\nmax_epochs = 1\nseed = 4\n",
                          encoding="utf-8")
        out = str(data["dir"] / "c.ckpt")
        code = main(["train", "--train", data["train"], "--dev", data["dev"],
                     "--out", out, "--config", str(config), "--char-emb-dim", "8",
                     "--lstm-layers", "1", "--arc-mlp-dim", "8",
                     "--label-mlp-dim", "8", "--max-epochs", "2"])
        assert code == 0
        dumped = json.loads((data["dir"] / "c.ckpt.config.json").read_text())
        assert dumped["lstm_hidden"] == 8      # from config file
        assert dumped["max_epochs"] == 2       # flag wins
        assert dumped["seed"] == 4


class TestParse:
    def test_blocks_to_stdout(self, data, capsys):
        model, _ = train_tiny(data)
        capsys.readouterr()
        code = main(["parse", "--model", model, "婚姻法", "上下文"])
        assert code == 0
        blocks = capsys.readouterr().out.strip().split("\n\n")
        assert len(blocks) == 2
        tb = parse_treebank_file("\n\n".join(blocks), WORD_INTERNAL)
        assert [e.surface for e in tb] == ["婚姻法", "上下文"]

    def test_file_input_order_preserved(self, data, capsys):
        model, _ = train_tiny(data)
        words = data["dir"] / "words.txt"
        words.write_text("常常\n婚姻法\n大衣\n", encoding="utf-8")
        capsys.readouterr()
        code = main(["parse", "--model", model, "--file", str(words)])
        assert code == 0
        tb = parse_treebank_file(capsys.readouterr().out.strip(), WORD_INTERNAL)
        assert [e.surface for e in tb] == ["常常", "婚姻法", "大衣"]

    def test_single_char_word_is_data_error(self, data):
        model, _ = train_tiny(data)
        assert main(["parse", "--model", model, "的"]) == 2

    def test_empty_input_is_data_error(self, data):
        model, _ = train_tiny(data)
        assert main(["parse", "--model", model]) == 2

    def test_corrupt_checkpoint_is_data_error(self, data):
        bad = data["dir"] / "bad.ckpt"
        bad.write_bytes(b"garbage")
        assert main(["parse", "--model", str(bad), "常常"]) == 2


class TestEvalStatsAgree:
    def test_eval_report(self, data, capsys):
        model, _ = train_tiny(data)
        capsys.readouterr()
        out = data["dir"] / "eval.json"
        code = main(["eval", "--model", model, "--test", data["test"],
                     "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "UAS" in text and "LAS" in text and "CM" in text
        payload = json.loads(out.read_text())
        assert set(payload) == {"report", "config"}
        assert {"uas", "las", "cm"} <= set(payload["report"])

    def test_stats_table_and_report(self, data, capsys):
        out = data["dir"] / "stats.json"
        code = main(["stats", "--tb", data["train"], "--by-pos", "--out", str(out)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "overall" in stdout
        payload = json.loads(out.read_text())
        assert "distribution" in payload and "avg_chars_per_word" in payload

    def test_agree_ratios(self, data, capsys):
        out = data["dir"] / "agree.json"
        code = main(["agree", "--a", data["train"], "--b", data["train"],
                     "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["dep_labeled"] == 100.0
        assert payload["word_unlabeled"] == 100.0

    def test_kind_mismatch_is_data_error(self, data):
        model, _ = train_tiny(data)
        dep = data["dir"] / "x.dep"
        dep.write_text("1\t我\t0\troot\n", encoding="utf-8")
        assert main(["eval", "--model", model, "--test", str(dep)]) == 2

    def test_machine_report_schema_stable(self, data):
        out1 = data["dir"] / "s1.json"
        out2 = data["dir"] / "s2.json"
        main(["stats", "--tb", data["train"], "--out", str(out1)])
        main(["stats", "--tb", data["train"], "--out", str(out2)])
        a, b = json.loads(out1.read_text()), json.loads(out2.read_text())
        assert set(a) == set(b)
        assert a == b


class TestHelp:
    @pytest.mark.parametrize("cmd", ["train", "parse", "eval", "stats", "agree",
                                     "serve"])
    def test_help_exits_zero(self, cmd, capsys):
        with pytest.raises(SystemExit) as err:
            main([cmd, "--help"])
        assert err.value.code == 0
        assert "--" in capsys.readouterr().out


class TestParseThroughput:
    def test_thousand_words_under_ten_seconds(self, data, capsys):
        import time
        model, _ = train_tiny(data)
        words = data["dir"] / "many.txt"
        pool = "甲乙丙丁戊己庚辛壬癸子丑寅卯辰巳午未申酉戌亥"
        rng = random.Random(0)
        lines = ["".join(rng.choice(pool) for _ in range(rng.randint(2, 4)))
                 for _ in range(1000)]
        words.write_text("\n".join(lines) + "\n", encoding="utf-8")
        capsys.readouterr()
        start = time.time()
        code = main(["parse", "--model", model, "--file", str(words)])
        elapsed = time.time() - start
        assert code == 0
        blocks = capsys.readouterr().out.strip().split("\n\n")
        assert len(blocks) == 1000
        assert elapsed < 10.0
