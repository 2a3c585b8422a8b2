"""Recording, manifest and feature-table I/O.

Two on-disk signal formats are supported:

* **CSV** -- ``fs_hz=<rate>`` on line 1, optional ``lead=<name>`` on
  line 2, then one decimal sample per line.
* **raw_f32le** -- ``<name>.f32`` holding little-endian binary32 samples
  next to a ``<name>.meta`` text sidecar with ``fs_hz=`` and ``lead=``
  lines.

Samples are millivolts.  All loaders either return a validated value or
raise a typed :class:`~shorthrv.errors.EcgError`.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import (
    BadSamplingRate,
    DuplicateSubject,
    EmptySignal,
    IoFailure,
    MalformedFile,
    NonFiniteSample,
    ScoreOutOfRange,
)

MANIFEST_HEADER = ["subject_id", "recording_path", "ace_iii", "age", "sex"]
FEATURES_HEADER = [
    "subject_id",
    "label",
    "mean_nn_ms",
    "rms_nn_ms",
    "sdnn_ms",
    "rmssd_ms",
    "hr_bpm",
]
SEXES = ("M", "F", "other")


@dataclass(frozen=True, eq=False)
class EcgRecording:
    """Uniformly sampled single-lead ECG.

    Parameters
    ----------
    samples : array_like
        Voltage values in millivolts.  Stored as a read-only float64 array.
    sampling_rate_hz : float
        Sampling frequency (Hz), strictly positive.
    lead_name : str
        Lead label, ``"II"`` by default.
    subject_id : str
        Opaque identifier.
    """

    samples: np.ndarray
    sampling_rate_hz: float
    lead_name: str = "II"
    subject_id: str = ""

    def __post_init__(self):
        fs = float(self.sampling_rate_hz)
        if not math.isfinite(fs) or fs <= 0:
            raise BadSamplingRate(f"sampling rate must be > 0, got {self.sampling_rate_hz!r}")
        x = np.array(self.samples, dtype=np.float64)
        if x.ndim != 1:
            raise MalformedFile(f"expected a 1-D sample array, got shape {x.shape}")
        if x.size == 0:
            raise EmptySignal("recording has no samples")
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise NonFiniteSample(f"non-finite sample at index {bad}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sampling_rate_hz", fs)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sampling_rate_hz

    def __len__(self):
        return len(self.samples)

    def with_samples(self, samples) -> "EcgRecording":
        """Return a copy carrying new samples and the same metadata."""
        return EcgRecording(samples, self.sampling_rate_hz, self.lead_name, self.subject_id)


@dataclass(frozen=True)
class CohortManifestRow:
    subject_id: str
    recording_path: str
    ace_iii_score: int
    age_years: Optional[float] = None
    sex: Optional[str] = None


# ---------------------------------------------------------------------------
# recordings


def _parse_key(line, key, path, lineno):
    prefix = key + "="
    if not line.startswith(prefix):
        raise MalformedFile(f"{path}:{lineno}: expected '{prefix}<value>', got {line!r}")
    return line[len(prefix):]


def _parse_fs(text, path, lineno):
    try:
        fs = float(text)
    except ValueError:
        raise MalformedFile(f"{path}:{lineno}: bad sampling rate {text!r}") from None
    if not math.isfinite(fs) or fs <= 0:
        raise BadSamplingRate(f"{path}:{lineno}: sampling rate must be > 0, got {text!r}")
    return fs


def _infer_format(path):
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".f32", ".meta"):
        return "raw_f32le"
    raise MalformedFile(f"cannot infer signal format from {path!r}; pass format=")


def _raw_paths(path):
    p = Path(path)
    base = p.with_suffix("") if p.suffix.lower() in (".f32", ".meta") else p
    return base.with_name(base.name + ".f32"), base.with_name(base.name + ".meta")


def load_recording(path, format=None, subject_id=None) -> EcgRecording:
    """Load a recording from disk.

    Parameters
    ----------
    path : str or Path
        Signal file.  For ``raw_f32le`` either the ``.f32`` or ``.meta``
        path (or the common stem) may be given.
    format : {'csv', 'raw_f32le'}, optional
        Inferred from the extension when omitted.
    subject_id : str, optional
        Defaults to the file stem.

    Returns
    -------
    EcgRecording
    """
    fmt = format or _infer_format(path)
    if subject_id is None:
        subject_id = Path(path).stem
    if fmt == "csv":
        return _load_csv(path, subject_id)
    if fmt == "raw_f32le":
        return _load_raw(path, subject_id)
    raise ValueError(f"unknown format {fmt!r}")


def _load_csv(path, subject_id):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MalformedFile(f"{path}: empty file")
    fs = _parse_fs(_parse_key(lines[0], "fs_hz", path, 1), path, 1)
    lead = "II"
    start = 1
    if len(lines) > 1 and lines[1].startswith("lead="):
        lead = lines[1][len("lead="):]
        start = 2
    body = lines[start:]
    if not body:
        raise EmptySignal(f"{path}: no samples")
    values = np.empty(len(body), dtype=np.float64)
    for i, tok in enumerate(body):
        try:
            v = float(tok)
        except ValueError:
            raise MalformedFile(f"{path}:{i + start + 1}: not a number: {tok!r}") from None
        if not math.isfinite(v):
            raise NonFiniteSample(f"{path}:{i + start + 1}: non-finite sample {tok!r}")
        values[i] = v
    return EcgRecording(values, fs, lead, subject_id)


def _read_meta(meta_path):
    try:
        lines = Path(meta_path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read {meta_path}: {exc}") from exc
    fs = None
    lead = "II"
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if line.startswith("fs_hz="):
            fs = _parse_fs(line[len("fs_hz="):], meta_path, n)
        elif line.startswith("lead="):
            lead = line[len("lead="):]
        else:
            raise MalformedFile(f"{meta_path}:{n}: unexpected line {line!r}")
    if fs is None:
        raise MalformedFile(f"{meta_path}: missing fs_hz")
    return fs, lead


def _load_raw(path, subject_id):
    data_path, meta_path = _raw_paths(path)
    fs, lead = _read_meta(meta_path)
    try:
        raw = data_path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {data_path}: {exc}") from exc
    if len(raw) % 4:
        raise MalformedFile(f"{data_path}: size {len(raw)} is not a multiple of 4")
    if not raw:
        raise EmptySignal(f"{data_path}: no samples")
    x = np.frombuffer(raw, dtype="<f4")
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise NonFiniteSample(f"{data_path}: non-finite sample at index {bad}")
    return EcgRecording(x.astype(np.float64), fs, lead, subject_id)


def write_recording(rec: EcgRecording, path, format=None) -> Path:
    """Write `rec` to disk; returns the path of the data file.

    CSV samples are printed with 17 significant digits, so float64 values
    survive a round trip exactly.  ``raw_f32le`` stores binary32, so the
    round trip is exact for values representable in single precision.
    """
    fmt = format or _infer_format(path)
    try:
        if fmt == "csv":
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(f"fs_hz={rec.sampling_rate_hz!r}\n")
                fh.write(f"lead={rec.lead_name}\n")
                fh.write("\n".join(format_sample(v) for v in rec.samples.tolist()))
                fh.write("\n")
            return Path(path)
        if fmt == "raw_f32le":
            data_path, meta_path = _raw_paths(path)
            meta_path.write_text(f"fs_hz={rec.sampling_rate_hz!r}\nlead={rec.lead_name}\n", encoding="utf-8")
            data_path.write_bytes(rec.samples.astype("<f4").tobytes())
            return data_path
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    raise ValueError(f"unknown format {fmt!r}")


def format_sample(v: float) -> str:
    return repr(float(v))


# ---------------------------------------------------------------------------
# manifests


def load_manifest(path) -> list:
    """Read a cohort manifest CSV.

    The header must be ``subject_id,recording_path,ace_iii,age,sex``;
    ``age`` and ``sex`` may be empty.  Rows are returned in file order.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise MalformedFile(f"{path}:1: expected header {','.join(MANIFEST_HEADER)!r}, got {header!r}")
        rows = []
        seen = set()
        for lineno, rec in enumerate(reader, 2):
            if not rec:
                continue
            rows.append(_parse_manifest_row(rec, path, lineno, seen))
    return rows


def _parse_manifest_row(rec, path, lineno, seen):
    where = f"{path}:{lineno}"
    if len(rec) != 5:
        raise MalformedFile(f"{where}: expected 5 fields, got {len(rec)}")
    sid, rpath, score_txt, age_txt, sex = (s.strip() for s in rec)
    if not sid or not rpath:
        raise MalformedFile(f"{where}: subject_id and recording_path are required")
    if sid in seen:
        raise DuplicateSubject(f"{where}: duplicate subject_id {sid!r}")
    seen.add(sid)
    try:
        score = int(score_txt)
    except ValueError:
        raise MalformedFile(f"{where}: ACE-III score {score_txt!r} is not an integer") from None
    if not 0 <= score <= 100:
        raise ScoreOutOfRange(f"{where}: subject {sid!r} has ACE-III score {score} outside [0, 100]")
    age = None
    if age_txt:
        try:
            age = float(age_txt)
        except ValueError:
            raise MalformedFile(f"{where}: bad age {age_txt!r}") from None
        if not math.isfinite(age) or age < 0:
            raise MalformedFile(f"{where}: bad age {age_txt!r}")
    if sex and sex not in SEXES:
        raise MalformedFile(f"{where}: sex must be one of {SEXES}, got {sex!r}")
    return CohortManifestRow(sid, rpath, score, age, sex or None)


def write_manifest(rows: Iterable[CohortManifestRow], path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(MANIFEST_HEADER)
            for r in rows:
                age = "" if r.age_years is None else format_number(r.age_years)
                w.writerow([r.subject_id, r.recording_path, r.ace_iii_score, age, r.sex or ""])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def resolve_recording_path(row: CohortManifestRow, manifest_path) -> Path:
    """Recording paths in a manifest are relative to the manifest's directory."""
    p = Path(row.recording_path)
    if p.is_absolute():
        return p
    return Path(os.path.dirname(os.path.abspath(manifest_path))) / p


# ---------------------------------------------------------------------------
# feature tables


def format_number(x: float) -> str:
    """Six significant digits, the fixed precision of every emitted table."""
    return f"{float(x):.6g}"


def write_features_table(rows, path) -> None:
    """Write a CohortTable, or ``(subject_id, label, HrvFeatures)`` triples, as a Features CSV.

    Column order is fixed by :data:`FEATURES_HEADER`; numbers carry six
    significant digits.
    """
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(features_csv_text(rows))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def features_csv_text(rows, header=True) -> str:
    lines = [",".join(FEATURES_HEADER)] if header else []
    if hasattr(rows, "as_triples"):
        rows = rows.as_triples()
    for sid, label, f in rows:
        nums = (f.mean_nn_ms, f.rms_nn_ms, f.sdnn_ms, f.rmssd_ms, f.hr_bpm)
        lines.append(",".join([sid, label] + [format_number(v) for v in nums]))
    return "".join(line + "\n" for line in lines)


def read_features_table(path):
    """Read a Features CSV back into a :class:`~shorthrv.cohort.CohortTable`.

    The interval count is not part of the file format, so the returned
    features carry ``n_intervals=None``.
    """
    from .cohort import CohortRow, CohortTable, LABELS
    from .hrv import HrvFeatures

    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    rows = []
    seen = set()
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != FEATURES_HEADER:
            raise MalformedFile(f"{path}:1: expected header {','.join(FEATURES_HEADER)!r}, got {header!r}")
        for lineno, rec in enumerate(reader, 2):
            if not rec:
                continue
            if len(rec) != len(FEATURES_HEADER):
                raise MalformedFile(f"{path}:{lineno}: expected {len(FEATURES_HEADER)} fields")
            sid, label = rec[0], rec[1]
            if label not in LABELS:
                raise MalformedFile(f"{path}:{lineno}: unknown label {label!r}")
            if sid in seen:
                raise DuplicateSubject(f"{path}:{lineno}: duplicate subject_id {sid!r}")
            seen.add(sid)
            try:
                nums = [float(t) for t in rec[2:]]
            except ValueError:
                raise MalformedFile(f"{path}:{lineno}: non-numeric feature value") from None
            if not all(math.isfinite(v) for v in nums):
                raise NonFiniteSample(f"{path}:{lineno}: non-finite feature value")
            feats = HrvFeatures(*nums, n_intervals=None)
            rows.append(CohortRow(sid, label, feats))
    return CohortTable(rows)
