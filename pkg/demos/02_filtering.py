"""
Cleaning a recording
====================

"""

import numpy as np

from shorthrv.preprocess import FilterSpec, frequency_response_db, preprocess_chain
from shorthrv.synth import SynthSpec, generate

# Defaults: 0.5-100 Hz Butterworth band-pass plus a 50 Hz notch, run forward-backward.
spec = FilterSpec()
for f, db in zip((0.1, 10.0, 50.0), frequency_response_db(spec, 1000.0, [0.1, 10.0, 50.0])):
    print(f"{f:>5} Hz: {db:8.2f} dB")

# Filter a contaminated synthetic ECG and compare with the clean trace.
out = generate(SynthSpec(fs_hz=1000.0, baseline_wander=(0.5, 0.2), powerline=(0.3, 50.0), seed=2))
clean = preprocess_chain(out.recording, spec).samples
mid = slice(1000, -1000)
print("rms error before:", np.sqrt(np.mean((out.recording.samples - out.clean)[mid] ** 2)))
print("rms error after: ", np.sqrt(np.mean((clean - out.clean)[mid] ** 2)))

# A 60 Hz mains supply only needs a different notch.
us = FilterSpec(notch_hz=60.0)
print("60 Hz notch:", frequency_response_db(us, 1000.0, [60.0])[0], "dB")
