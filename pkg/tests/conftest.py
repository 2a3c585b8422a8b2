import numpy as np
import pytest

from shorthrv.signal_io import EcgRecording


def tone_amplitude(x, fs, freq):
    """Least-squares amplitude of a sinusoid at a known frequency."""
    t = np.arange(len(x)) / fs
    basis = np.column_stack([np.sin(2 * np.pi * freq * t), np.cos(2 * np.pi * freq * t)])
    coef, *_ = np.linalg.lstsq(basis, x, rcond=None)
    return float(np.hypot(*coef))


def sine(freq, fs, duration, amp=1.0, phase=0.3):
    t = np.arange(int(round(duration * fs))) / fs
    return amp * np.sin(2 * np.pi * freq * t + phase)


def rec(x, fs=1000.0):
    return EcgRecording(np.asarray(x, dtype=float), fs)


def interior(x, fs, edge_s=0.5):
    k = int(round(edge_s * fs))
    return x[k:len(x) - k]


@pytest.fixture
def tmp(tmp_path):
    return tmp_path
