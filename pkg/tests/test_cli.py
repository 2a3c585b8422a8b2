import json

import pytest

from shorthrv import __version__
from shorthrv.cli import main
from shorthrv.signal_io import load_recording, read_features_table
from shorthrv.synth import CohortDesign, generate_cohort

SUBCOMMANDS = ("synth", "synth-cohort", "preprocess", "detect", "features", "cohort-stats", "classify", "report")


@pytest.fixture(scope="module")
def small_cohort(tmp_path_factory):
    d = tmp_path_factory.mktemp("cohort")
    generate_cohort(d, 6, 14, CohortDesign.effect(fs_hz=500.0), seed=3)
    return d


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help(cmd, capsys):
    assert main([cmd, "--help"]) == 0
    assert "usage" in capsys.readouterr().out


def test_unknown_flag_exit_1(capsys):
    assert main(["report", "--manifest", "m.csv", "--frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err


def test_no_subcommand_exit_1():
    assert main([]) == 1


def test_synth_detect_features(tmp_path, capsys):
    rec = tmp_path / "r.csv"
    truth = tmp_path / "t.txt"
    assert main(["synth", "--out", str(rec), "--fs", "1000", "--hr", "60", "--truth", str(truth)]) == 0
    assert load_recording(rec).sampling_rate_hz == 1000
    capsys.readouterr()
    assert main(["detect", str(rec)]) == 0
    times = [float(t) for t in capsys.readouterr().out.split()]
    true_times = [float(t) for t in truth.read_text().split()]
    assert len(times) == len(true_times)
    assert max(abs(a - b) for a, b in zip(times, true_times)) < 0.01
    assert main(["detect", str(rec), "--intervals"]) == 0
    nn = [float(v) for v in capsys.readouterr().out.split()]
    assert len(nn) == len(times) - 1 and all(990 < v < 1010 for v in nn)
    assert main(["features", str(rec), "--ace", "95", "--subject-id", "X1", "--header"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("subject_id,label,")
    assert lines[1].startswith("X1,nonMCI,")


def test_features_requires_label(tmp_path):
    rec = tmp_path / "r.csv"
    main(["synth", "--out", str(rec), "--fs", "500"])
    assert main(["features", str(rec)]) == 1


def test_detect_flat_signal_exit_2(tmp_path, capsys):
    rec = tmp_path / "flat.csv"
    rec.write_text("fs_hz=500\n" + "0.0\n" * 5000)
    assert main(["detect", str(rec)]) == 2
    assert "[rpeak]" in capsys.readouterr().err


def test_bad_ace_exit_2_names_row(tmp_path, capsys):
    m = tmp_path / "manifest.csv"
    m.write_text("subject_id,recording_path,ace_iii,age,sex\nS001,a.csv,90,70,F\nS002,b.csv,140,71,M\n")
    assert main(["report", "--manifest", str(m)]) == 2
    err = capsys.readouterr().err
    assert "S002" in err or "line 3" in err


def features_file(cohort_dir, capsys, tmp_path):
    from shorthrv.pipeline import process_cohort
    from shorthrv.signal_io import load_manifest, write_features_table
    res = process_cohort(load_manifest(cohort_dir / "manifest.csv"), manifest_path=cohort_dir / "manifest.csv")
    p = tmp_path / "features.csv"
    write_features_table(res.table, p)
    return p


def test_cohort_stats_and_classify(small_cohort, tmp_path, capsys):
    p = features_file(small_cohort, capsys, tmp_path)
    assert len(read_features_table(p)) == 20
    assert main(["cohort-stats", str(p), "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"mean_nn", "rms_nn", "sdnn", "rmssd"}
    assert doc["mean_nn"]["n_mci"] == 6 and doc["mean_nn"]["method"] == "exact"
    assert main(["cohort-stats", str(p)]) == 0
    assert "feature" in capsys.readouterr().out
    assert main(["classify", str(p), "--k", "5", "--json"]) == 0
    grid = json.loads(capsys.readouterr().out)
    assert set(grid["sdnn"]) == {"svm", "da", "nb"}
    assert 0 <= grid["sdnn"]["svm"]["kfold_accuracy"] <= 1
    assert main(["classify", str(p), "--k", "5", "--protocol", "holdout"]) == 0
    assert "holdout accuracy" in capsys.readouterr().out


def test_report_deterministic(small_cohort, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    m = str(small_cohort / "manifest.csv")
    assert main(["report", "--manifest", m, "--out", str(a), "--seed", "1"]) == 0
    assert main(["report", "--manifest", m, "--out", str(b), "--seed", "1"]) == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert list(doc) == ["cohort", "excluded", "rank_sum", "classification", "config"]
    assert doc["cohort"]["n_subjects"] == 20 and doc["classification"]["seed"] == 1


def test_missing_manifest_exit_2(tmp_path):
    assert main(["report", "--manifest", str(tmp_path / "nope.csv")]) == 2


def test_classify_combine(small_cohort, tmp_path, capsys):
    p = features_file(small_cohort, capsys, tmp_path)
    assert main(["classify", str(p), "--k", "5", "--json", "--combine", "mean_nn,sdnn"]) == 0
    grid = json.loads(capsys.readouterr().out)
    assert list(grid)[-1] == "mean_nn+sdnn"
    assert main(["classify", str(p), "--combine", "sdnn"]) == 1
    assert main(["classify", str(p), "--combine", "sdnn,bogus"]) == 1
