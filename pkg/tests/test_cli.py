"""End-to-end command line tests, run in-process through main(argv)."""

import json

import pytest

from morbench import __version__
from morbench.cli import main
from morbench.embeddings import load_pretrained
from morbench.eval import default_config_dict
from morbench.preprocess import build_vocabulary, normalize_text, tokenize

SPEC = {
    "morbidities": {
        "Gout": {"positives": 8, "negatives": 8, "marker_repeats": 3},
        "Asthma": {"positives": 8, "negatives": 8, "marker_repeats": 3},
    },
    "noise_vocab_size": 25,
    "min_tokens": 15,
    "max_tokens": 30,
}

CHEAP_CONFIG = {
    "eval.k": 2,
    "eval.representations": ["tfidf_svm", "bilstm_random"],
    "svm.lambda": 0.01,
    "svm.epochs": 10,
    "bilstm.hidden1": 4,
    "bilstm.hidden2": 4,
    "bilstm.epochs": 2,
    "embeddings.dim": 8,
}


@pytest.fixture
def workspace(tmp_path):
    (tmp_path / "spec.json").write_text(json.dumps(SPEC), encoding="utf-8")
    (tmp_path / "config.json").write_text(json.dumps(CHEAP_CONFIG), encoding="utf-8")
    return tmp_path


def _synth(workspace, out="corpus.jsonl", seed=5):
    code = main(
        [
            "synth",
            "--spec",
            str(workspace / "spec.json"),
            "--seed",
            str(seed),
            "--out",
            str(workspace / out),
        ]
    )
    assert code == 0
    return workspace / out


def test_synth_writes_deterministic_corpus(workspace, capsys):
    path_a = _synth(workspace, "a.jsonl")
    path_b = _synth(workspace, "b.jsonl")
    assert path_a.read_bytes() == path_b.read_bytes()
    assert len(path_a.read_text().splitlines()) == 32
    out = capsys.readouterr().out
    assert "32 notes" in out and "2 morbidities" in out


def test_prepare_builds_dataset_files(workspace, capsys):
    corpus = _synth(workspace)
    out = workspace / "prepared"
    assert main(["prepare", str(corpus), "--out", str(out)]) == 0
    gout = (out / "dataset_gout.jsonl").read_text().splitlines()
    assert len(gout) == 16
    row = json.loads(gout[0])
    assert set(row) == {"note_id", "text", "label", "source"}
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "morbidity,total,positive,negative,excluded"
    assert "Gout,16,8,8,0" in summary
    # canonical names with no records still get (empty) dataset files
    assert (out / "dataset_cad.jsonl").exists()
    assert (out / "dataset_cad.jsonl").read_text() == ""
    table = capsys.readouterr().out
    assert "morbidity" in table and "Gout" in table


def test_run_pipeline_and_outputs(workspace, capsys):
    corpus = _synth(workspace)
    out = workspace / "results"
    code = main(
        [
            "run",
            str(corpus),
            "--config",
            str(workspace / "config.json"),
            "--seed",
            "1",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    report = (out / "report.md").read_text()
    assert report.splitlines()[0].startswith("| morbidity")
    assert "tfidf_svm" in report and "bilstm_random" in report
    assert "Gout" in report and "Average" in report

    csv_text = (out / "report.csv").read_text()
    assert csv_text.splitlines()[0] == "morbidity,tfidf_svm,bilstm_random"

    raw = [json.loads(l) for l in (out / "raw.jsonl").read_text().splitlines()]
    assert len(raw) == 8  # 2 morbidities x 2 representations x 2 folds

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["version"] == __version__
    assert manifest["seed"] == 1
    assert manifest["notes"] == 32
    assert manifest["config"]["eval.k"] == 2
    assert len(manifest["cells"]) == 4
    assert all("seconds" in c for c in manifest["cells"])

    stdout = capsys.readouterr().out
    assert "| morbidity" in stdout  # table echoed to the terminal


def test_run_twice_is_byte_identical(workspace):
    corpus = _synth(workspace)
    args = ["run", str(corpus), "--config", str(workspace / "config.json"), "--seed", "3"]
    assert main([*args, "--out", str(workspace / "r1")]) == 0
    assert main([*args, "--out", str(workspace / "r2")]) == 0
    for name in ("report.md", "report.csv", "raw.jsonl"):
        a = (workspace / "r1" / name).read_bytes()
        b = (workspace / "r2" / name).read_bytes()
        assert a == b, name


def test_report_rerenders_identical_tables(workspace):
    corpus = _synth(workspace)
    out = workspace / "results"
    args = ["run", str(corpus), "--config", str(workspace / "config.json")]
    assert main([*args, "--out", str(out)]) == 0
    rerender = workspace / "rerendered"
    assert main(["report", str(out / "raw.jsonl"), "--out", str(rerender)]) == 0
    assert (rerender / "report.md").read_bytes() == (out / "report.md").read_bytes()
    assert (rerender / "report.csv").read_bytes() == (out / "report.csv").read_bytes()


def test_train_embeddings_writes_loadable_vectors(workspace, capsys):
    corpus = _synth(workspace)
    sg_config = {"embeddings.dim": 8, "skipgram.epochs": 1, "skipgram.window": 2}
    (workspace / "sg.json").write_text(json.dumps(sg_config), encoding="utf-8")
    out = workspace / "vectors.txt"
    code = main(
        [
            "train-embeddings",
            str(corpus),
            "--config",
            str(workspace / "sg.json"),
            "--seed",
            "2",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert "vectors" in capsys.readouterr().out

    notes = corpus.read_text().splitlines()
    tokens = [tokenize(normalize_text(json.loads(l)["text"])) for l in notes]
    vocab = build_vocabulary(tokens)
    table, oov = load_pretrained(out, vocab, 8)
    assert oov == 0
    assert table.rows.shape == (len(vocab) + 1, 8)


def test_print_default_config(capsys):
    assert main(["run", "--print-default-config"]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == default_config_dict()


def test_missing_corpus_file_is_a_usage_error(workspace, capsys):
    code = main(["run", str(workspace / "nope.jsonl")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_run_without_corpus_is_a_usage_error(capsys):
    assert main(["run"]) == 2
    assert "corpus file is required" in capsys.readouterr().err


def test_bad_config_key_is_a_usage_error(workspace, capsys):
    (workspace / "bad.json").write_text('{"eval.folds": 3}', encoding="utf-8")
    corpus = _synth(workspace)
    code = main(["run", str(corpus), "--config", str(workspace / "bad.json")])
    assert code == 2
    assert "unknown config key" in capsys.readouterr().err


def test_bad_spec_json_is_a_usage_error(workspace, capsys):
    (workspace / "broken.json").write_text("{not json", encoding="utf-8")
    code = main(["synth", "--spec", str(workspace / "broken.json"), "--out", "x.jsonl"])
    assert code == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_k_below_two_is_a_usage_error(workspace, capsys):
    (workspace / "k1.json").write_text('{"eval.k": 1}', encoding="utf-8")
    corpus = _synth(workspace)
    code = main(["run", str(corpus), "--config", str(workspace / "k1.json")])
    assert code == 2
    assert "at least 2" in capsys.readouterr().err


def test_unexpected_exception_maps_to_exit_one(workspace, monkeypatch, capsys):
    corpus = _synth(workspace)

    def boom(*args, **kwargs):
        raise RuntimeError("wires crossed")

    monkeypatch.setattr("morbench.cli.run_experiment", boom)
    code = main(["run", str(corpus), "--out", str(workspace / "r")])
    assert code == 1
    assert "internal error: RuntimeError: wires crossed" in capsys.readouterr().err


def test_relative_out_resolves_against_data_dir(workspace, monkeypatch):
    monkeypatch.setenv("MORBENCH_DATA_DIR", str(workspace))
    _synth(workspace)  # absolute out, unaffected
    assert main(["synth", "--spec", str(workspace / "spec.json"), "--out", "rel.jsonl"]) == 0
    assert (workspace / "rel.jsonl").exists()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out
