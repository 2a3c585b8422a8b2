"""R-peak detection and NN-interval extraction.

The detector follows the Pan-Tompkins layout:

1. optional decimation to about 1 kHz (polyphase anti-alias filter);
2. QRS-emphasis band-pass (5-15 Hz), derivative, squaring;
3. centred moving-window integration (150 ms);
4. candidate peaks of the integrated signal, accepted when they exceed
   ``max(signal_frac * rolling_max, noise_mult * noise_level)`` and lie
   outside the refractory period of the previous beat; the rolling max
   spans ``peak_window_s`` and the noise level is a running average of
   rejected candidates;
5. search-back with a halved threshold over gaps longer than
   ``searchback_rr`` times the recent mean RR;
6. each detection is moved to the largest sample of the (decimated)
   input within ``refine_ms``, then to the largest sample of the
   full-rate input within ``final_refine_ms``.

All thresholds are relative, so scaling the input by a positive
constant leaves the detections unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import scipy.signal as ss
from scipy.ndimage import maximum_filter1d, uniform_filter1d

from .errors import NoPeaksFound, TooFewIntervals
from .signal_io import EcgRecording

GATE_LOW_MS = 200.0
GATE_HIGH_MS = 3000.0


@dataclass(frozen=True, eq=False)
class PeakList:
    """Strictly increasing R-peak sample indices at sampling rate ``fs_hz``."""

    indices: np.ndarray
    fs_hz: float

    @classmethod
    def from_indices(cls, indices, fs_hz) -> "PeakList":
        idx = np.asarray(indices, dtype=np.int64).copy()
        if idx.ndim != 1:
            raise ValueError("peak indices must be 1-D")
        if len(idx) > 1 and np.any(np.diff(idx) <= 0):
            raise ValueError("peak indices must be strictly increasing")
        if len(idx) and idx[0] < 0:
            raise ValueError("peak indices must be non-negative")
        idx.setflags(write=False)
        return cls(idx, float(fs_hz))

    @property
    def times_s(self) -> np.ndarray:
        return self.indices / self.fs_hz

    def __len__(self):
        return len(self.indices)

    def __eq__(self, other):
        if not isinstance(other, PeakList):
            return NotImplemented
        return self.fs_hz == other.fs_hz and np.array_equal(self.indices, other.indices)


@dataclass(frozen=True, eq=False)
class NnSeries:
    """NN intervals (ms) with the peaks they came from.

    ``kept[i]`` tells whether the interval between ``source_peaks[i]`` and
    ``source_peaks[i + 1]`` survived the physiological gate; the gated
    intervals, in order, are ``intervals_ms``.
    """

    intervals_ms: np.ndarray
    source_peaks: PeakList
    kept: np.ndarray

    def __len__(self):
        return len(self.intervals_ms)


@dataclass(frozen=True)
class DetectorParams:
    decimate: bool = True
    target_fs_hz: float = 1000.0
    qrs_band_hz: Tuple[float, float] = (5.0, 15.0)
    mwi_ms: float = 150.0
    signal_frac: float = 0.3
    noise_mult: float = 1.75
    peak_window_s: float = 2.0
    refractory_ms: float = 200.0
    searchback: bool = True
    searchback_rr: float = 1.66
    refine_ms: float = 50.0
    final_refine_ms: float = 10.0


def decimation_factor(fs_hz: float, params: DetectorParams) -> int:
    if not params.decimate:
        return 1
    return max(1, int(fs_hz // params.target_fs_hz))


@lru_cache(maxsize=32)
def _qrs_sos(fs_hz: float, lo: float, hi: float):
    hi = min(hi, 0.45 * fs_hz)
    return ss.butter(2, [lo, hi], btype="bandpass", fs=fs_hz, output="sos")


def _local_argmax(x, centers, half):
    """Index of the largest sample of ``x`` within ``centers +/- half``."""
    n = len(x)
    out = np.empty(len(centers), dtype=np.int64)
    for j, c in enumerate(centers):
        lo, hi = max(0, c - half), min(n, c + half + 1)
        out[j] = lo + int(np.argmax(x[lo:hi]))
    return out


def integrated_energy(x: np.ndarray, fs_hz: float, params: DetectorParams = DetectorParams()) -> np.ndarray:
    """Band-passed, differentiated, squared and window-integrated signal."""
    sos = _qrs_sos(float(fs_hz), *map(float, params.qrs_band_hz))
    if len(x) > 3 * 2 * len(sos):
        f = ss.sosfiltfilt(sos, x)
    else:
        f = x - x.mean()
    d = np.gradient(f) * fs_hz
    win = max(1, int(round(params.mwi_ms / 1000.0 * fs_hz)))
    return uniform_filter1d(d * d, size=win, mode="nearest")


def _threshold_pass(m, cands, fs_hz, params):
    refr = params.refractory_ms / 1000.0 * fs_hz
    half = max(1, int(round(params.peak_window_s * fs_hz / 2)))
    rolling = maximum_filter1d(m, size=2 * half + 1, mode="nearest")
    heights = m[cands]
    thresholds = np.empty(len(cands))
    accepted = []
    noise = 0.0
    for j, (c, h) in enumerate(zip(cands, heights)):
        thr = max(params.signal_frac * rolling[c], params.noise_mult * noise)
        thresholds[j] = thr
        if h >= thr and (not accepted or c - accepted[-1] >= refr):
            accepted.append(int(c))
        else:
            noise = 0.125 * h + 0.875 * noise
    if params.searchback and len(accepted) >= 2:
        accepted = _searchback(accepted, cands, heights, thresholds, refr, params)
    return accepted


def _searchback(accepted, cands, heights, thresholds, refr, params):
    out = list(accepted)
    changed = True
    while changed:
        changed = False
        rr = np.diff(out)
        for k in range(len(out) - 1):
            recent = rr[max(0, k - 8):k] if k > 0 else rr
            limit = params.searchback_rr * float(np.median(recent if len(recent) else rr))
            if out[k + 1] - out[k] <= limit:
                continue
            inside = (cands > out[k] + refr) & (cands < out[k + 1] - refr)
            ok = inside & (heights >= 0.5 * thresholds)
            if np.any(ok):
                j = np.flatnonzero(ok)[np.argmax(heights[ok])]
                out.insert(k + 1, int(cands[j]))
                changed = True
                break
    return out


def _enforce_refractory(idx, x, refr):
    keep = []
    for i in idx:
        if keep and i - keep[-1] < refr:
            if x[i] > x[keep[-1]]:
                keep[-1] = i
            continue
        if not keep or i != keep[-1]:
            keep.append(i)
    return np.array(keep, dtype=np.int64)


def detect_rpeaks(rec: EcgRecording, params: DetectorParams = DetectorParams()) -> PeakList:
    """Detect R peaks in a preprocessed recording.

    Parameters
    ----------
    rec : EcgRecording
        Band-passed, notch-filtered ECG (see
        :func:`shorthrv.preprocess.preprocess_chain`).
    params : DetectorParams, optional

    Returns
    -------
    PeakList
        Peak sample indices at the recording's own rate.

    Raises
    ------
    NoPeaksFound
        When fewer than two beats are detected.
    """
    x = rec.samples
    fs = rec.sampling_rate_hz
    q = decimation_factor(fs, params)
    y = ss.resample_poly(x, 1, q) if q > 1 else x
    fs_d = fs / q

    m = integrated_energy(y, fs_d, params)
    if not np.any(m > 0):
        raise NoPeaksFound("signal has no energy in the QRS band")
    # one candidate per refractory period: the MWI ripples several times per QRS
    refr_d = max(1, int(round(params.refractory_ms / 1000.0 * fs_d)))
    cands, _ = ss.find_peaks(m, distance=refr_d)
    accepted = _threshold_pass(m, cands, fs_d, params)
    if len(accepted) < 2:
        raise NoPeaksFound(f"found {len(accepted)} R peak(s); at least 2 are required")

    idx = _local_argmax(y, np.asarray(accepted), int(round(params.refine_ms / 1000.0 * fs_d)))
    if q > 1:
        idx = _local_argmax(x, idx * q, int(round(params.final_refine_ms / 1000.0 * fs)))
    idx = _enforce_refractory(np.unique(idx), x, params.refractory_ms / 1000.0 * fs)
    if len(idx) < 2:
        raise NoPeaksFound(f"found {len(idx)} R peak(s); at least 2 are required")
    return PeakList.from_indices(idx, fs)


def nn_from_peaks(peaks: PeakList, fs_hz: Optional[float] = None,
                  gate: Tuple[float, float] = (GATE_LOW_MS, GATE_HIGH_MS)) -> NnSeries:
    """Intervals between successive peaks in ms, restricted to ``gate``.

    Raises
    ------
    TooFewIntervals
        If fewer than two intervals survive the gate.
    """
    fs = peaks.fs_hz if fs_hz is None else float(fs_hz)
    if len(peaks) < 2:
        raise TooFewIntervals(f"need at least 2 peaks, got {len(peaks)}")
    raw = np.diff(peaks.indices) / fs * 1000.0
    lo, hi = gate
    kept = (raw >= lo) & (raw <= hi)
    nn = raw[kept]
    if len(nn) < 2:
        raise TooFewIntervals(f"{len(nn)} interval(s) inside the [{lo}, {hi}] ms gate; need 2")
    nn.setflags(write=False)
    kept.setflags(write=False)
    return NnSeries(nn, peaks, kept)


def match_peaks(detected, truth, fs_hz: float, window_ms: float = 50.0):
    """Greedy one-to-one matching of detected to true peak indices.

    Returns ``(tp, fp, fn, errors_ms)`` where ``errors_ms`` holds the
    absolute timing error of each matched pair.
    """
    det = np.asarray(getattr(detected, "indices", detected))
    tru = np.asarray(getattr(truth, "indices", truth))
    tol = window_ms / 1000.0 * fs_hz
    used = np.zeros(len(det), dtype=bool)
    errors = []
    for t in tru:
        if len(det) == 0:
            break
        d = np.abs(det - t).astype(np.float64)
        d[used] = np.inf
        j = int(np.argmin(d))
        if d[j] <= tol:
            used[j] = True
            errors.append(d[j] / fs_hz * 1000.0)
    tp = len(errors)
    return tp, int(len(det) - tp), int(len(tru) - tp), np.array(errors)
