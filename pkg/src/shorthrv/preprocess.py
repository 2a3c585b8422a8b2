"""Detrending, band-pass and powerline-notch filtering.

The chain applied by :func:`preprocess_chain` is linear detrend, then a
Butterworth band-pass (default 0.5-100 Hz), then a second-order IIR
notch (default 50 Hz, Q = 30).  Filter coefficients are designed for the
recording's own sampling rate on every call (bilinear transform via
:mod:`scipy.signal`), realised as second-order sections and, by default,
run forward-backward so R-peak timing is not delayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.signal as ss

from .errors import InvalidBand, TooShort
from .signal_io import EcgRecording

#: Residual impulse-response magnitude that counts as "settled".
SETTLE_TOL = 1e-3
#: Edge padding, in multiples of the settling length.
PAD_SETTLE_MULT = 3


@dataclass(frozen=True)
class FilterSpec:
    """Preprocessing parameters.

    ``bandpass_order`` is the order of the Butterworth low-pass prototype;
    the resulting band-pass has twice as many poles.  Setting ``notch_hz``
    to ``None`` disables the notch stage.
    """

    band_low_hz: float = 0.5
    band_high_hz: float = 100.0
    notch_hz: Optional[float] = 50.0
    notch_q: float = 30.0
    bandpass_order: int = 4
    zero_phase: bool = True

    def validate(self, fs_hz: float) -> None:
        lo, hi = self.band_low_hz, self.band_high_hz
        if not (0 < lo < hi < fs_hz / 2):
            raise InvalidBand(
                f"band-pass needs 0 < low < high < fs/2; got low={lo}, high={hi}, fs={fs_hz}"
            )
        if int(self.bandpass_order) != self.bandpass_order or self.bandpass_order < 1:
            raise InvalidBand(f"bandpass_order must be a positive integer, got {self.bandpass_order}")
        if self.notch_hz is not None:
            self.validate_notch(fs_hz)
            if not (lo < self.notch_hz < hi):
                raise InvalidBand(f"notch {self.notch_hz} Hz lies outside the pass band ({lo}, {hi}) Hz")

    def validate_notch(self, fs_hz: float) -> None:
        if self.notch_hz is None or not (0 < self.notch_hz < fs_hz / 2):
            raise InvalidBand(f"notch frequency must lie in (0, fs/2); got {self.notch_hz}, fs={fs_hz}")
        if not self.notch_q > 0:
            raise InvalidBand(f"notch Q must be positive, got {self.notch_q}")


# ---------------------------------------------------------------------------
# detrend


def detrend(rec: EcgRecording, method: str = "linear") -> EcgRecording:
    """Remove the least-squares line (``linear``) or the mean (``mean``)."""
    x = rec.samples
    n = len(x)
    if method == "mean":
        return rec.with_samples(x - x.mean())
    if method != "linear":
        raise ValueError(f"unknown detrend method {method!r}")
    if n < 2:
        raise TooShort("linear detrend needs at least 2 samples")
    t = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
    xc = x - x.mean()
    slope = np.dot(t, xc) / np.dot(t, t)
    y = xc - slope * t
    # second pass removes the rounding residue of the first
    y -= y.mean()
    return rec.with_samples(y)


# ---------------------------------------------------------------------------
# filter design


@lru_cache(maxsize=64)
def bandpass_sos(fs_hz: float, low: float, high: float, order: int):
    z, p, k = ss.butter(order, [low, high], btype="bandpass", fs=fs_hz, output="zpk")
    return ss.zpk2sos(z, p, k), _settle_len(p)


@lru_cache(maxsize=64)
def notch_sos(fs_hz: float, f0: float, q: float):
    b, a = ss.iirnotch(f0, q, fs=fs_hz)
    return ss.tf2sos(b, a), _settle_len(np.roots(a))


def _settle_len(poles) -> int:
    r = float(np.max(np.abs(poles)))
    if r <= 0:
        return 1
    return int(math.ceil(math.log(SETTLE_TOL) / math.log(r)))


def _apply(sos, settle, x, zero_phase):
    if not zero_phase:
        zi = ss.sosfilt_zi(sos) * x[0]
        return ss.sosfilt(sos, x, zi=zi)[0]
    if len(x) < 2:
        return x.copy()
    padlen = min(PAD_SETTLE_MULT * settle, len(x) - 1)
    return ss.sosfiltfilt(sos, x, padtype="odd", padlen=padlen)


def bandpass(rec: EcgRecording, spec: FilterSpec = FilterSpec()) -> EcgRecording:
    """Butterworth band-pass from ``spec.band_low_hz`` to ``spec.band_high_hz``."""
    fs = rec.sampling_rate_hz
    lo, hi = spec.band_low_hz, spec.band_high_hz
    if not (0 < lo < hi < fs / 2):
        raise InvalidBand(f"band-pass needs 0 < low < high < fs/2; got low={lo}, high={hi}, fs={fs}")
    sos, settle = bandpass_sos(fs, float(lo), float(hi), int(spec.bandpass_order))
    return rec.with_samples(_apply(sos, settle, rec.samples, spec.zero_phase))


def notch(rec: EcgRecording, spec: FilterSpec = FilterSpec()) -> EcgRecording:
    """Second-order IIR notch at ``spec.notch_hz`` with quality ``spec.notch_q``."""
    fs = rec.sampling_rate_hz
    spec.validate_notch(fs)
    sos, settle = notch_sos(fs, float(spec.notch_hz), float(spec.notch_q))
    return rec.with_samples(_apply(sos, settle, rec.samples, spec.zero_phase))


def preprocess_chain(rec: EcgRecording, spec: FilterSpec = FilterSpec()) -> EcgRecording:
    """Linear detrend, band-pass, then notch (skipped if ``notch_hz`` is None)."""
    fs = rec.sampling_rate_hz
    spec.validate(fs)
    x = detrend(rec, "linear").samples
    sos, settle = bandpass_sos(fs, float(spec.band_low_hz), float(spec.band_high_hz), int(spec.bandpass_order))
    if spec.notch_hz is not None:
        # one cascade, one forward-backward pass; same response as running the stages in turn
        nsos, nsettle = notch_sos(fs, float(spec.notch_hz), float(spec.notch_q))
        sos, settle = np.vstack([sos, nsos]), max(settle, nsettle)
    return rec.with_samples(_apply(sos, settle, x, spec.zero_phase))


def frequency_response_db(spec: FilterSpec, fs_hz: float, freqs_hz) -> np.ndarray:
    """Magnitude response (dB) of band-pass and notch combined.

    Forward-backward application squares the magnitude, which is
    accounted for when ``spec.zero_phase`` is set.
    """
    freqs = np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64))
    sos, _ = bandpass_sos(fs_hz, float(spec.band_low_hz), float(spec.band_high_hz), int(spec.bandpass_order))
    _, h = ss.sosfreqz(sos, worN=freqs, fs=fs_hz)
    mag = np.abs(h)
    if spec.notch_hz is not None:
        nsos, _ = notch_sos(fs_hz, float(spec.notch_hz), float(spec.notch_q))
        _, hn = ss.sosfreqz(nsos, worN=freqs, fs=fs_hz)
        mag = mag * np.abs(hn)
    if spec.zero_phase:
        mag = mag**2
    with np.errstate(divide="ignore"):
        return 20 * np.log10(mag)
