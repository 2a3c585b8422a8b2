import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import interior, rec, sine, tone_amplitude
from shorthrv.errors import InvalidBand, TooShort
from shorthrv.preprocess import FilterSpec, bandpass, detrend, frequency_response_db, notch, preprocess_chain
from shorthrv.synth import SynthSpec, generate

FS = 1000.0
SPEC = FilterSpec()


@pytest.mark.parametrize("x", [[1, 1, 1, 1], [0, 1, 2, 3]])
def test_detrend_exact_lines(x):
    assert np.allclose(detrend(rec(x), "linear").samples, 0.0, atol=1e-15)


def test_detrend_recovers_orthogonal_cosine():
    # a cosine centred on the window with whole periods is orthogonal to 1 and to t - t_mid,
    # so least squares must return it untouched
    n = 2001
    t = np.arange(n) - (n - 1) / 2
    wave = 0.7 * np.cos(2 * np.pi * 5 * t / n)
    x = 3.0 + 0.002 * np.arange(n) + wave
    out = detrend(rec(x), "linear").samples
    assert np.max(np.abs(out - wave)) <= 1e-9 * 0.7


def test_detrend_mean_and_zero_mean():
    x = np.random.default_rng(0).standard_normal(500) * 5 + 40
    for method in ("linear", "mean"):
        y = detrend(rec(x), method).samples
        assert abs(y.mean()) <= 1e-9 * np.max(np.abs(x))


def test_detrend_too_short():
    with pytest.raises(TooShort):
        detrend(rec([1.0]), "linear")


@pytest.mark.parametrize("op", [bandpass, notch, preprocess_chain])
def test_zero_in_zero_out(op):
    out = op(rec(np.zeros(3000)), SPEC)
    assert np.array_equal(out.samples, np.zeros(3000))


def test_bandpass_passes_10hz():
    out = bandpass(rec(sine(10, FS, 10)), SPEC).samples
    assert 0.99 <= tone_amplitude(interior(out, FS), FS, 10) <= 1.01


def test_bandpass_blocks_0p1hz():
    out = bandpass(rec(sine(0.1, FS, 20)), SPEC).samples
    assert tone_amplitude(interior(out, FS), FS, 0.1) <= 0.2


def test_notch_removes_50hz():
    out = notch(rec(sine(50, FS, 10)), SPEC).samples
    assert tone_amplitude(interior(out, FS), FS, 50) <= 0.01


def test_notch_passes_10hz():
    out = notch(rec(sine(10, FS, 10)), SPEC).samples
    assert 0.98 <= tone_amplitude(interior(out, FS), FS, 10) <= 1.02


def test_chain_removes_offset():
    out = preprocess_chain(rec(np.full(5000, 2.5)), SPEC).samples
    assert np.max(np.abs(out)) < 1e-9


def test_chain_cleans_synthetic_ecg():
    spec = SynthSpec(fs_hz=FS, duration_s=10, mean_hr_bpm=72, sdnn_target_ms=30,
                     baseline_wander=(0.5, 0.3), powerline=(0.3, 50.0), seed=4)
    out = generate(spec)
    y = preprocess_chain(out.recording, SPEC).samples
    r = np.corrcoef(interior(y, FS), interior(out.clean, FS))[0, 1]
    assert r >= 0.95


def test_chain_matches_stagewise():
    x = generate(SynthSpec(fs_hz=FS, powerline=(0.2, 50.0), baseline_wander=(0.3, 0.2), seed=1)).recording
    staged = notch(bandpass(detrend(x), SPEC), SPEC).samples
    fused = preprocess_chain(x, SPEC).samples
    assert np.max(np.abs(interior(staged - fused, FS, 2.0))) < 1e-6


def test_pulse_not_shifted():
    n = 4001
    t = np.arange(n)
    x = np.exp(-0.5 * ((t - 2000) / 8.0) ** 2)
    for op in (bandpass, notch, preprocess_chain):
        y = op(rec(x), SPEC).samples
        assert abs(int(np.argmax(y)) - 2000) <= 1


def test_causal_mode_delays_pulse():
    n = 4001
    x = np.exp(-0.5 * ((np.arange(n) - 2000) / 8.0) ** 2)
    y = bandpass(rec(x), FilterSpec(zero_phase=False)).samples
    assert int(np.argmax(y)) > 2000


def test_frequency_response():
    db = frequency_response_db(SPEC, FS, [0.1, 10.0, 50.0])
    assert db[0] <= -20 and abs(db[1]) <= 0.1 and db[2] <= -40


@pytest.mark.parametrize("spec", [
    FilterSpec(band_low_hz=0.0),
    FilterSpec(band_low_hz=5.0, band_high_hz=2.0),
    FilterSpec(band_high_hz=600.0),
    FilterSpec(notch_hz=200.0),
])
def test_invalid_band(spec):
    with pytest.raises(InvalidBand):
        preprocess_chain(rec(np.zeros(1000)), spec)


def test_notch_above_nyquist():
    with pytest.raises(InvalidBand):
        notch(rec(np.zeros(100), fs=80.0), SPEC)


def test_notch_disabled():
    x = sine(50, FS, 5)
    y = preprocess_chain(rec(x), FilterSpec(notch_hz=None)).samples
    assert tone_amplitude(interior(y, FS), FS, 50) > 0.9


def test_works_at_16khz():
    fs = 16000.0
    y = preprocess_chain(rec(sine(10, fs, 4) + sine(50, fs, 4), fs), SPEC).samples
    assert 0.99 <= tone_amplitude(interior(y, fs), fs, 10) <= 1.01
    assert tone_amplitude(interior(y, fs), fs, 50) <= 0.01


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.floats(-5, 5), st.floats(-5, 5))
def test_linearity(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal(1500), rng.standard_normal(1500)
    for op in (bandpass, notch, preprocess_chain):
        lhs = op(rec(alpha * a + beta * b), SPEC).samples
        rhs = alpha * op(rec(a), SPEC).samples + beta * op(rec(b), SPEC).samples
        scale = max(np.max(np.abs(rhs)), 1e-12)
        assert np.max(np.abs(lhs - rhs)) <= 1e-6 * scale + 1e-12
        assert len(lhs) == 1500


def test_deterministic():
    x = np.random.default_rng(1).standard_normal(2000)
    assert np.array_equal(preprocess_chain(rec(x)).samples, preprocess_chain(rec(x)).samples)
