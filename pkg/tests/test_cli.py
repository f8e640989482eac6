import json

import pytest

from mlfactor.cli import main
from mlfactor.search import RSA_260

N_FAST = "1606938044258990276935758667842587029774996746028337250487979"
N_LAWRENCE = "748543215795445052722625573101291605706283989"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_balance_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["--bits", "64", "--ratio-min", "2", "--ratio-max", "3", "--count", "1000", "--seed", "7"]
    code, out, _ = run(capsys, "gen", *args, "--out", str(a))
    assert code == 0 and "label 1: 500" in out and "label 0: 500" in out
    run(capsys, "gen", *args, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1001
    meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
    assert meta["seed"] == 7 and meta["n_bits"] == 64


def test_gen_bad_interval_is_domain_error(tmp_path, capsys):
    code, _, err = run(capsys, "gen", "--bits", "64", "--ratio-min", "3", "--ratio-max", "2",
                       "--count", "10", "--out", str(tmp_path / "x.csv"))
    assert code == 2 and "degenerate" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["factor"])
    assert exc.value.code == 1


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    d = tmp_path_factory.mktemp("train")
    corpus = d / "c.csv"
    assert main(["gen", "--bits", "48", "--ratio-min", "2", "--ratio-max", "3", "--count", "600",
                 "--seed", "3", "--out", str(corpus)]) == 0
    ckpt = d / "m.json"
    assert main(["train", "--corpus", str(corpus), "--epochs", "5", "--batch-size", "64",
                 "--checkpoint-out", str(ckpt)]) == 0
    return corpus, ckpt


def test_train_outputs(trained, capsys):
    corpus, ckpt = trained
    report = json.loads(ckpt.with_suffix(".report.json").read_text())
    for key in ("out_of_sample_accuracy", "in_sample_accuracy", "confusion", "loss_history",
                "accuracy_history", "best_epoch"):
        assert key in report
    assert len(report["accuracy_history"]) == report["epochs_run"]


def test_train_prints_accuracy_line(trained, tmp_path, capsys):
    corpus, _ = trained
    code, out, _ = run(capsys, "train", "--corpus", str(corpus), "--epochs", "2", "--batch-size", "64",
                       "--base", "3/2", "--checkpoint-out", str(tmp_path / "m.json"))
    assert code == 0
    line = [l for l in out.splitlines() if l.startswith("accuracy = ")][0]
    assert len(line.split("= ")[1]) == 6  # four decimals, e.g. 0.7164


def test_train_bad_corpus(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    code, _, err = run(capsys, "train", "--corpus", str(bad), "--checkpoint-out", str(tmp_path / "m.json"))
    assert code != 0


def test_classify(trained, capsys):
    corpus, ckpt = trained
    n = corpus.read_text().splitlines()[1].split(",")[0]
    code1, out1, _ = run(capsys, "classify", "--checkpoint", str(ckpt), "--n", n)
    code2, out2, _ = run(capsys, "classify", "--checkpoint", str(ckpt), "--n", n)
    assert code1 == code2 == 0 and out1 == out2
    assert out1.startswith("label = ")
    code, out, _ = run(capsys, "classify", "--checkpoint", str(ckpt), "--n", n, "--format", "json")
    assert json.loads(out)["label"] in (0, 1)


def test_classify_width_mismatch(trained, capsys):
    _, ckpt = trained
    code, _, err = run(capsys, "classify", "--checkpoint", str(ckpt), "--n", str(2**80 + 1))
    assert code == 2 and "width" in err


def test_factor_fermat(capsys):
    code, out, _ = run(capsys, "factor", "--method", "fermat", "--n", N_FAST)
    assert code == 0
    assert "iterations = 1" in out.splitlines()
    assert "factor = 1267650600228229401496703205653" in out


def test_factor_lawrence(capsys):
    code, out, _ = run(capsys, "factor", "--method", "lawrence", "--n", N_LAWRENCE, "--ratio", "210381/144089")
    assert code == 0
    assert "33059500175075655435169" in out and "22642302873041910393781" in out
    assert "iterations = 1269" in out


def test_factor_even(capsys):
    code, _, err = run(capsys, "factor", "--method", "fermat", "--n", "16")
    assert code == 2 and "even" in err


def test_factor_not_found_exit_3(capsys):
    n = str(33059500175075655435169 * 22642302873041910393781)
    code, out, _ = run(capsys, "factor", "--method", "fermat", "--n", n, "--max-iter", "100")
    assert code == 3 and "no factor found" in out


def test_factor_ml_search_small(capsys, tmp_path):
    trace = tmp_path / "t.json"
    code, out, _ = run(capsys, "factor", "--method", "ml-search", "--n", "15", "--ratio-min", "1",
                       "--ratio-max", "4", "--trace-out", str(trace))
    assert code == 0 and "status = Factored" in out
    assert json.loads(trace.read_text())["trace"][0]["decision"] == "factored"


def test_sweep_small(capsys):
    code, out, _ = run(capsys, "sweep", "--bits-list", "100", "--fractions", "0.0,0.4,0.6,0.9",
                       "--max-iter", "200000")
    lines = out.splitlines()
    assert lines[0] == "n_bits,fraction,n_lsb_bits,iterations,censored"
    assert lines[1:] == ["100,0.0,0,0,0", "100,0.4,40,1,0", "100,0.6,60,131072,0", "100,0.9,90,200001,1"]


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--bits-list", "100", "--fractions", "0.4", "--format", "json")
    doc = json.loads(out)
    assert doc["rows"][0]["iterations"] == 1


def test_estimate(capsys):
    code, out, _ = run(capsys, "estimate", "--p-bar", "0.975", "--n", str(RSA_260))
    assert code == 0 and "n_bits = 862" in out
    p = float(out.split("probability = ")[1])
    assert 1.5e-5 <= p <= 2.1e-5
    assert "probability = 1\n" in run(capsys, "estimate", "--p-bar", "1", "--bits", "100")[1]
    assert "probability = 0.5\n" in run(capsys, "estimate", "--p-bar", "0.5", "--bits", "2")[1]


def test_out_flag_writes_file(tmp_path, capsys):
    dest = tmp_path / "est.txt"
    run(capsys, "estimate", "--p-bar", "0.5", "--bits", "2", "--out", str(dest))
    assert dest.read_text() == "n_bits = 2\nprobability = 0.5\n"
