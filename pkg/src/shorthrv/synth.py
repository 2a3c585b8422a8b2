"""Synthetic single-lead ECG with known R-peak times.

Each beat is a fixed five-wave Gaussian mixture (P, Q, R, S, T) with an
R amplitude of 1 mV.  Beat-to-beat intervals are

    mean_nn + scale * (sqrt(w) * white + sqrt(1 - w) * ar1)

where ``white`` is i.i.d. N(0, 1), ``ar1`` is a unit-variance first-order
autoregressive process and ``w`` is ``rmssd_weight``.  White noise moves
successive differences (RMSSD); the AR(1) part adds slow drift that
raises SDNN without raising RMSSD as much.  ``scale`` is chosen so the
*expected sample* SDNN over the realised number of beats equals
``sdnn_target_ms``.

Randomness comes from NumPy's PCG64 bit generator, seeded per record, so
a seed reproduces the same output on every platform.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .cohort import ACE_MCI_THRESHOLD, MCI, NON_MCI
from .errors import InfeasibleSpec, IoFailure
from .rpeak import GATE_HIGH_MS, GATE_LOW_MS, PeakList
from .signal_io import CohortManifestRow, EcgRecording, write_manifest, write_recording

#: (center offset s, amplitude mV, width s) for P, Q, R, S, T.
WAVES = (
    (-0.20, 0.15, 0.025),
    (-0.03, -0.12, 0.008),
    (0.00, 1.00, 0.010),
    (0.03, -0.25, 0.008),
    (0.30, 0.30, 0.040),
)
TEMPLATE_SPAN_S = (-0.30, 0.45)

AR_COEF = 0.8
#: Intervals must stay this many SDs inside the physiological gate.
FEASIBLE_SDS = 5.0
#: No beats are placed closer than this to either end of the record.
EDGE_MARGIN_S = 0.1

_MASK64 = (1 << 64) - 1


def mix_seed(seed: int, index: int) -> int:
    """Per-subject seed: ``seed`` XOR the SplitMix64 hash of ``index``."""
    z = (index + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return (seed & _MASK64) ^ z


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & _MASK64))


@dataclass(frozen=True)
class SynthSpec:
    fs_hz: float = 1000.0
    duration_s: float = 10.0
    mean_hr_bpm: float = 60.0
    sdnn_target_ms: float = 0.0
    rmssd_weight: float = 0.5
    noise_snr_db: Optional[float] = None
    baseline_wander: Optional[Tuple[float, float]] = None  # (amplitude mV, freq Hz)
    powerline: Optional[Tuple[float, float]] = None  # (amplitude mV, freq Hz)
    seed: int = 0


@dataclass(frozen=True)
class SynthOutput:
    recording: EcgRecording
    true_peaks: PeakList
    true_intervals_ms: np.ndarray
    clean: np.ndarray  # ECG before noise, wander and powerline


def beat_template(fs_hz: float):
    """Sampled single-beat waveform and the index of its R peak."""
    lo, hi = TEMPLATE_SPAN_S
    k = np.arange(int(math.floor(lo * fs_hz)), int(math.ceil(hi * fs_hz)) + 1)
    t = k / fs_hz
    w = np.zeros_like(t)
    for mu, amp, sig in WAVES:
        w += amp * np.exp(-0.5 * ((t - mu) / sig) ** 2)
    return w, int(-k[0])


def expected_sd_factor(n: int, rmssd_weight: float, ar_coef: float = AR_COEF) -> float:
    """E[sample variance] of ``n`` unit-variance perturbations.

    Autocorrelation at lag ``k >= 1`` is ``(1 - w) * phi**k``.  Returns the
    square root, i.e. the expected-SD shrink factor.
    """
    if n < 2:
        return 1.0
    k = np.arange(1, n)
    rho = (1.0 - rmssd_weight) * ar_coef**k
    # sum over i != j of rho_|i-j| = 2 * sum_k (n - k) rho_k
    off = 2.0 * np.sum((n - k) * rho)
    return math.sqrt(max(1.0 - off / (n * (n - 1)), 1e-12))


def _check(spec: SynthSpec):
    if not spec.fs_hz > 0 or not spec.duration_s > 0:
        raise InfeasibleSpec("fs_hz and duration_s must be positive")
    if not 30 <= spec.mean_hr_bpm <= 220:
        raise InfeasibleSpec(f"mean_hr_bpm {spec.mean_hr_bpm} outside [30, 220]")
    if spec.sdnn_target_ms < 0:
        raise InfeasibleSpec("sdnn_target_ms must be non-negative")
    if not 0 <= spec.rmssd_weight <= 1:
        raise InfeasibleSpec("rmssd_weight must lie in [0, 1]")


def _draw_intervals(spec: SynthSpec, rng) -> np.ndarray:
    mean_nn = 60000.0 / spec.mean_hr_bpm
    usable_ms = (spec.duration_s - 2 * EDGE_MARGIN_S) * 1000.0
    n_est = max(2, int(round(usable_ms / mean_nn)))
    scale = spec.sdnn_target_ms / expected_sd_factor(n_est, spec.rmssd_weight)
    if mean_nn - FEASIBLE_SDS * scale < GATE_LOW_MS or mean_nn + FEASIBLE_SDS * scale > GATE_HIGH_MS:
        raise InfeasibleSpec(
            f"sdnn_target {spec.sdnn_target_ms} ms at {spec.mean_hr_bpm} bpm would leave the "
            f"[{GATE_LOW_MS}, {GATE_HIGH_MS}] ms interval gate"
        )
    n = int(math.ceil(spec.duration_s * 1000.0 / max(GATE_LOW_MS, mean_nn - FEASIBLE_SDS * scale))) + 2
    white = rng.standard_normal(n)
    innov = rng.standard_normal(n)
    ar = np.empty(n)
    ar[0] = innov[0]
    c = math.sqrt(1.0 - AR_COEF**2)
    for i in range(1, n):
        ar[i] = AR_COEF * ar[i - 1] + c * innov[i]
    w = spec.rmssd_weight
    x = math.sqrt(w) * white + math.sqrt(1.0 - w) * ar
    return np.clip(mean_nn + scale * x, GATE_LOW_MS, GATE_HIGH_MS)


def generate(spec: SynthSpec) -> SynthOutput:
    """Render one synthetic recording with its ground truth."""
    _check(spec)
    rng = make_rng(spec.seed)
    fs = float(spec.fs_hz)
    n_samples = int(round(spec.duration_s * fs))
    intervals = _draw_intervals(spec, rng)

    first = intervals[0] / 1000.0
    slack = max(0.0, first - 2 * EDGE_MARGIN_S)
    t0 = EDGE_MARGIN_S + rng.uniform() * slack
    times = t0 + np.concatenate(([0.0], np.cumsum(intervals[1:]) / 1000.0))
    last_ok = (n_samples - 1) / fs - EDGE_MARGIN_S
    times = times[times <= last_ok]
    idx = np.round(times * fs).astype(np.int64)
    if len(idx) > 1 and np.any(np.diff(idx) <= 0):
        raise InfeasibleSpec("sampling rate too low to separate beats")

    # the beat before t0 is rendered (its T wave may reach into the record) but not counted
    prev = int(round((t0 - first) * fs))
    template, r_off = beat_template(fs)
    clean = np.zeros(n_samples)
    for b in np.concatenate(([prev], idx)):
        start = b - r_off
        lo, hi = max(start, 0), min(start + len(template), n_samples)
        if lo < hi:
            clean[lo:hi] += template[lo - start:hi - start]

    x = clean.copy()
    t = np.arange(n_samples) / fs
    phases = rng.uniform(0.0, 2 * math.pi, size=2)
    if spec.baseline_wander is not None:
        amp, f = spec.baseline_wander
        x += amp * np.sin(2 * math.pi * f * t + phases[0])
    if spec.powerline is not None:
        amp, f = spec.powerline
        x += amp * np.sin(2 * math.pi * f * t + phases[1])
    if spec.noise_snr_db is not None:
        p_sig = float(np.mean(clean**2))
        sigma = math.sqrt(p_sig / 10 ** (spec.noise_snr_db / 10.0))
        x += sigma * rng.standard_normal(n_samples)

    rec = EcgRecording(x, fs, "II", f"synth-{spec.seed}")
    peaks = PeakList.from_indices(idx, fs)
    true_nn = np.diff(idx) / fs * 1000.0
    return SynthOutput(rec, peaks, true_nn, clean)


def ecg_power(fs_hz: float = 1000.0) -> float:
    """Mean-square power (mV^2) of a clean 60 bpm record; a reference for SNR settings."""
    return float(np.mean(generate(SynthSpec(fs_hz=fs_hz, duration_s=10.0)).clean ** 2))


# ---------------------------------------------------------------------------
# cohorts


@dataclass(frozen=True)
class GroupParams:
    """Distribution of per-subject synthesis parameters for one group.

    Heart rate is normal, SDNN log-normal (``sdnn_median_ms`` is the
    median, ``sdnn_log_sd`` the SD of its logarithm).  ACE-III scores are
    uniform integers over ``ace_range`` (inclusive).
    """

    hr_mean_bpm: float = 68.0
    hr_sd_bpm: float = 8.0
    sdnn_median_ms: float = 45.0
    sdnn_log_sd: float = 0.35
    rmssd_weight: float = 0.5
    ace_range: Tuple[int, int] = (88, 100)


@dataclass(frozen=True)
class CohortDesign:
    healthy: GroupParams = GroupParams()
    mci: GroupParams = GroupParams(ace_range=(55, 87))
    fs_hz: float = 16000.0
    duration_s: float = 10.0
    noise_snr_db: Optional[float] = 20.0
    baseline_wander: Optional[Tuple[float, float]] = (0.2, 0.3)
    powerline: Optional[Tuple[float, float]] = (0.1, 50.0)

    @classmethod
    def null(cls, **kw) -> "CohortDesign":
        """Both groups drawn from the same distributions."""
        return cls(**kw)

    @classmethod
    def effect(cls, hr_delta_bpm: float = 10.0, sdnn_ratio: float = 0.6, **kw) -> "CohortDesign":
        """MCI group with faster heart rate and lower variability."""
        h = kw.pop("healthy", GroupParams())
        m = replace(
            h,
            hr_mean_bpm=h.hr_mean_bpm + hr_delta_bpm,
            sdnn_median_ms=h.sdnn_median_ms * sdnn_ratio,
            ace_range=(55, ACE_MCI_THRESHOLD - 1),
        )
        return cls(healthy=h, mci=m, **kw)


@dataclass(frozen=True)
class SyntheticSubject:
    row: CohortManifestRow
    label: str
    spec: SynthSpec
    output: SynthOutput


def _subject_spec(g: GroupParams, design: CohortDesign, rng, seed) -> SynthSpec:
    hr = float(np.clip(rng.normal(g.hr_mean_bpm, g.hr_sd_bpm), 40.0, 150.0))
    sdnn = g.sdnn_median_ms * math.exp(g.sdnn_log_sd * rng.standard_normal())
    mean_nn = 60000.0 / hr
    # leave room for the finite-record inflation applied in _draw_intervals
    sdnn = min(sdnn, 0.5 * (mean_nn - GATE_LOW_MS) / FEASIBLE_SDS)
    return SynthSpec(
        fs_hz=design.fs_hz,
        duration_s=design.duration_s,
        mean_hr_bpm=hr,
        sdnn_target_ms=sdnn,
        rmssd_weight=g.rmssd_weight,
        noise_snr_db=design.noise_snr_db,
        baseline_wander=design.baseline_wander,
        powerline=design.powerline,
        seed=seed,
    )


def simulate_subject(i: int, n_mci: int, design: CohortDesign, seed: int) -> SyntheticSubject:
    """Subject ``i`` of a cohort; MCI subjects come first (``i < n_mci``)."""
    sub_seed = mix_seed(seed, i)
    rng = make_rng(sub_seed)
    is_mci = i < n_mci
    g = design.mci if is_mci else design.healthy
    lo, hi = g.ace_range
    if is_mci and hi >= ACE_MCI_THRESHOLD or not is_mci and lo < ACE_MCI_THRESHOLD or lo > hi:
        raise InfeasibleSpec(f"ACE-III range {g.ace_range} inconsistent with the group label")
    spec = _subject_spec(g, design, rng, sub_seed)
    score = int(rng.integers(g.ace_range[0], g.ace_range[1] + 1))
    age = float(np.clip(rng.normal(61.4, 9.75), 45.0, 92.0))
    sex = "M" if rng.uniform() < 0.4848 else "F"
    sid = f"S{i + 1:03d}"
    out = generate(spec)
    out = replace(out, recording=replace_subject(out.recording, sid))
    row = CohortManifestRow(sid, f"{sid}.f32", score, round(age, 1), sex)
    return SyntheticSubject(row, MCI if is_mci else NON_MCI, spec, out)


def replace_subject(rec: EcgRecording, sid: str) -> EcgRecording:
    return EcgRecording(rec.samples, rec.sampling_rate_hz, rec.lead_name, sid)


def simulate_cohort(n_mci: int, n_healthy: int, design: CohortDesign = CohortDesign(), seed: int = 0):
    """In-memory cohort: a list of :class:`SyntheticSubject` in subject order.

    Each subject is generated from its own derived seed, so any subset can
    be regenerated independently and in any order.
    """
    if n_mci < 1 or n_healthy < 1:
        raise InfeasibleSpec("both groups need at least one subject")
    return [simulate_subject(i, n_mci, design, seed) for i in range(n_mci + n_healthy)]


def generate_cohort(out_dir, n_mci: int, n_healthy: int, design: CohortDesign = CohortDesign(),
                    seed: int = 0, format: str = "raw_f32le"):
    """Write a synthetic cohort to ``out_dir``.

    Produces one recording per subject, ``manifest.csv`` (paths relative
    to the directory) and ``truth.csv`` (``subject_id,beat,time_s`` with
    one line per true R peak).  Returns the manifest rows.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc
    ext = ".csv" if format == "csv" else ".f32"
    rows = []
    truth = []
    for s in simulate_cohort(n_mci, n_healthy, design, seed):
        name = s.row.subject_id + ext
        write_recording(s.output.recording, out / name, format)
        rows.append(replace(s.row, recording_path=name))
        for j, ts in enumerate(s.output.true_peaks.times_s):
            truth.append((s.row.subject_id, j, ts))
    write_manifest(rows, out / "manifest.csv")
    try:
        with open(out / "truth.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["subject_id", "beat", "time_s"])
            for sid, j, ts in truth:
                w.writerow([sid, j, repr(float(ts))])
    except OSError as exc:
        raise IoFailure(f"cannot write truth.csv: {exc}") from exc
    return rows
