import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shorthrv.errors import (
    BadSamplingRate, DuplicateSubject, EmptySignal, MalformedFile, NonFiniteSample, ScoreOutOfRange,
)
from shorthrv.hrv import HrvFeatures
from shorthrv.signal_io import (
    EcgRecording, load_manifest, load_recording, read_features_table, write_features_table, write_recording,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_csv_four_samples(tmp_path):
    r = load_recording(write(tmp_path / "a.csv", "fs_hz=4\n0\n1\n0\n-1\n"))
    assert list(r.samples) == [0, 1, 0, -1]
    assert r.duration_s == 1.0
    assert r.lead_name == "II"


def test_csv_lead_line(tmp_path):
    r = load_recording(write(tmp_path / "a.csv", "fs_hz=250.5\nlead=V1\n1.5\n2.5\n"))
    assert r.sampling_rate_hz == 250.5
    assert r.lead_name == "V1"
    assert r.subject_id == "a"


@pytest.mark.parametrize("body, err", [
    ("fs_hz=4\n0\nNaN\n", NonFiniteSample),
    ("fs_hz=4\n0\ninf\n", NonFiniteSample),
    ("fs_hz=4\n", EmptySignal),
    ("fs_hz=0\n1\n", BadSamplingRate),
    ("fs_hz=-3\n1\n", BadSamplingRate),
    ("fs=4\n1\n", MalformedFile),
    ("fs_hz=4\n1\n1,000\n", MalformedFile),
    ("", MalformedFile),
])
def test_csv_errors(tmp_path, body, err):
    with pytest.raises(err):
        load_recording(write(tmp_path / "bad.csv", body))


def test_sixteen_khz_ten_seconds(tmp_path):
    x = np.sin(np.arange(160_000) / 100.0).astype(np.float32)
    r = EcgRecording(x, 16000.0)
    write_recording(r, tmp_path / "r.f32")
    back = load_recording(tmp_path / "r.f32")
    assert len(back) == 160_000
    assert back.duration_s == 10.0


def test_raw_round_trip_exact(tmp_path):
    x = np.random.default_rng(3).standard_normal(1000).astype(np.float32).astype(np.float64)
    r = EcgRecording(x, 500.0, "II", "s")
    write_recording(r, tmp_path / "s.f32")
    assert (tmp_path / "s.meta").read_text() == "fs_hz=500.0\nlead=II\n"
    back = load_recording(tmp_path / "s.meta")
    assert np.array_equal(back.samples, x)
    assert back.sampling_rate_hz == 500.0


def test_raw_bad_length(tmp_path):
    write(tmp_path / "x.meta", "fs_hz=100\nlead=II\n")
    (tmp_path / "x.f32").write_bytes(b"\x00" * 6)
    with pytest.raises(MalformedFile):
        load_recording(tmp_path / "x.f32")


def test_raw_nan(tmp_path):
    write(tmp_path / "x.meta", "fs_hz=100\n")
    (tmp_path / "x.f32").write_bytes(np.array([1.0, np.nan], dtype="<f4").tobytes())
    with pytest.raises(NonFiniteSample):
        load_recording(tmp_path / "x.f32")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=50))
def test_csv_round_trip_exact(tmp_path_factory, values):
    d = tmp_path_factory.mktemp("rt")
    r = EcgRecording(values, 360.0, "II")
    write_recording(r, d / "r.csv")
    back = load_recording(d / "r.csv")
    assert np.array_equal(back.samples, r.samples)


def test_recording_is_immutable():
    r = EcgRecording([1.0, 2.0], 10.0)
    with pytest.raises(ValueError):
        r.samples[0] = 5.0


MANIFEST = "subject_id,recording_path,ace_iii,age,sex\n"


def test_manifest_row(tmp_path):
    rows = load_manifest(write(tmp_path / "m.csv", MANIFEST + "S001,rec1.csv,92,64,F\nS002,rec2.csv,70,,\n"))
    assert rows[0].subject_id == "S001" and rows[0].ace_iii_score == 92
    assert rows[0].age_years == 64.0 and rows[0].sex == "F"
    assert rows[1].age_years is None and rows[1].sex is None


@pytest.mark.parametrize("body, err", [
    ("S001,a.csv,92,,\nS001,b.csv,80,,\n", DuplicateSubject),
    ("S001,a.csv,101,,\n", ScoreOutOfRange),
    ("S001,a.csv,-1,,\n", ScoreOutOfRange),
    ("S001,a.csv,9x,,\n", MalformedFile),
    ("S001,a.csv,90,,X\n", MalformedFile),
    ("S001,a.csv,90\n", MalformedFile),
])
def test_manifest_errors(tmp_path, body, err):
    with pytest.raises(err):
        load_manifest(write(tmp_path / "m.csv", MANIFEST + body))


def test_manifest_bad_header(tmp_path):
    with pytest.raises(MalformedFile):
        load_manifest(write(tmp_path / "m.csv", "id,path\n"))


def feats(m, r, s, d):
    return HrvFeatures(m, r, s, d, 60000.0 / m, 5)


def test_features_empty(tmp_path):
    write_features_table([], tmp_path / "f.csv")
    assert (tmp_path / "f.csv").read_text() == "subject_id,label,mean_nn_ms,rms_nn_ms,sdnn_ms,rmssd_ms,hr_bpm\n"


def test_features_one_row(tmp_path):
    write_features_table([("S1", "MCI", feats(800.0, 802.08, 50.0, 50.0))], tmp_path / "f.csv")
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert len(lines) == 2
    assert lines[1] == "S1,MCI,800,802.08,50,50,75"


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(300, 2000), st.floats(0, 300), st.floats(0, 300)), min_size=1, max_size=8))
def test_features_round_trip(tmp_path_factory, vals):
    d = tmp_path_factory.mktemp("ft")
    rows = [(f"S{i}", "MCI" if i % 2 else "nonMCI", feats(m, m + 1.0, s, r)) for i, (m, s, r) in enumerate(vals)]
    write_features_table(rows, d / "f.csv")
    table = read_features_table(d / "f.csv")
    for (sid, lab, f), row in zip(rows, table.rows):
        assert row.subject_id == sid and row.label == lab
        for a, b in zip((f.mean_nn_ms, f.rms_nn_ms, f.sdnn_ms, f.rmssd_ms, f.hr_bpm),
                        (row.features.mean_nn_ms, row.features.rms_nn_ms, row.features.sdnn_ms,
                         row.features.rmssd_ms, row.features.hr_bpm)):
            assert b == float(f"{a:.6g}")
            assert abs(a - b) <= 5e-6 * abs(a) + 1e-300
