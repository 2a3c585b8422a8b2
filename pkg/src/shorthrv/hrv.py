"""Time-domain HR/HRV features of an NN-interval series.

All four features are computed in milliseconds with compensated
summation (:func:`math.fsum`), so results do not depend on summation
order or platform:

* ``mean_nn``  -- arithmetic mean of the intervals
* ``rms_nn``   -- root mean square of the intervals
* ``sdnn``     -- sample standard deviation (divisor N - 1)
* ``rmssd``    -- root mean square of the N - 1 successive differences

Heart rate is derived from the mean interval, ``60000 / mean_nn``.
Every function accepts an :class:`~shorthrv.rpeak.NnSeries` or a plain
sequence of intervals in ms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import EmptySeries, TooFewIntervals

FEATURE_NAMES = ("mean_nn", "rms_nn", "sdnn", "rmssd")


@dataclass(frozen=True)
class HrvFeatures:
    mean_nn_ms: float
    rms_nn_ms: float
    sdnn_ms: float
    rmssd_ms: float
    hr_bpm: float
    n_intervals: Optional[int] = None

    def get(self, name: str) -> float:
        """Feature value by short name (``mean_nn``, ``rms_nn``, ``sdnn``, ``rmssd``)."""
        return getattr(self, name + "_ms")

    def as_dict(self) -> dict:
        return {
            "mean_nn_ms": self.mean_nn_ms,
            "rms_nn_ms": self.rms_nn_ms,
            "sdnn_ms": self.sdnn_ms,
            "rmssd_ms": self.rmssd_ms,
            "hr_bpm": self.hr_bpm,
            "n_intervals": self.n_intervals,
        }


def _intervals(nn) -> list:
    vals = getattr(nn, "intervals_ms", nn)
    return [float(v) for v in vals]


def mean_nn(nn) -> float:
    x = _intervals(nn)
    if not x:
        raise EmptySeries("mean_nn needs at least one interval")
    return math.fsum(x) / len(x)


def rms_nn(nn) -> float:
    x = _intervals(nn)
    if not x:
        raise EmptySeries("rms_nn needs at least one interval")
    return math.sqrt(math.fsum(v * v for v in x) / len(x))


def sdnn(nn) -> float:
    x = _intervals(nn)
    if len(x) < 2:
        raise TooFewIntervals(f"sdnn needs at least 2 intervals, got {len(x)}")
    mu = math.fsum(x) / len(x)
    return math.sqrt(math.fsum((v - mu) ** 2 for v in x) / (len(x) - 1))


def rmssd(nn) -> float:
    x = _intervals(nn)
    if len(x) < 2:
        raise TooFewIntervals(f"rmssd needs at least 2 intervals, got {len(x)}")
    diffs = [(a - b) ** 2 for a, b in zip(x[:-1], x[1:])]
    return math.sqrt(math.fsum(diffs) / len(diffs))


def compute_features(nn) -> HrvFeatures:
    """All four features plus heart rate for a series of at least 2 intervals."""
    x = _intervals(nn)
    if len(x) < 2:
        raise TooFewIntervals(f"need at least 2 intervals, got {len(x)}")
    mu = mean_nn(x)
    return HrvFeatures(
        mean_nn_ms=mu,
        rms_nn_ms=rms_nn(x),
        sdnn_ms=sdnn(x),
        rmssd_ms=rmssd(x),
        hr_bpm=60000.0 / mu,
        n_intervals=len(x),
    )
