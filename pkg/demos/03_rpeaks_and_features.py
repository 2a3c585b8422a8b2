"""
From R peaks to HRV features
============================

"""

from shorthrv.hrv import compute_features
from shorthrv.preprocess import preprocess_chain
from shorthrv.rpeak import detect_rpeaks, match_peaks, nn_from_peaks
from shorthrv.synth import SynthSpec, generate

# A noisy 16 kHz record, as a clinical device would produce.
out = generate(SynthSpec(fs_hz=16000.0, mean_hr_bpm=88.0, sdnn_target_ms=35.0, noise_snr_db=10.0,
                         baseline_wander=(0.3, 0.3), powerline=(0.2, 50.0), seed=3))
rec = preprocess_chain(out.recording)

# Detection runs at 1 kHz and refines each peak on the full-rate signal.
peaks = detect_rpeaks(rec)
tp, fp, fn, err = match_peaks(peaks, out.true_peaks, rec.sampling_rate_hz)
print(f"{tp} matched, {fp} spurious, {fn} missed, worst error {max(err):.2f} ms")

# Successive peaks give NN intervals; implausible ones are gated out.
nn = nn_from_peaks(peaks)
est = compute_features(nn)
ref = compute_features(out.true_intervals_ms)
for name in ("mean_nn_ms", "sdnn_ms", "rmssd_ms", "hr_bpm"):
    print(f"{name:<11} detected {getattr(est, name):8.2f}   true {getattr(ref, name):8.2f}")
