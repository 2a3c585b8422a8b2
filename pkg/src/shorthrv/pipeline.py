"""End-to-end processing of single recordings and whole cohorts."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Tuple

from .cohort import CohortRow, CohortTable, label_from_ace
from .errors import EcgError, EmptyCohort, StageError
from .hrv import HrvFeatures, compute_features
from .preprocess import FilterSpec, preprocess_chain
from .rpeak import GATE_HIGH_MS, GATE_LOW_MS, DetectorParams, detect_rpeaks, nn_from_peaks
from .signal_io import EcgRecording, load_recording, resolve_recording_path

STAGES = ("load", "preprocess", "rpeak", "nn", "hrv")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to reproduce a run, apart from the manifest."""

    filter: FilterSpec = FilterSpec()
    detector: DetectorParams = DetectorParams()
    gate_ms: Tuple[float, float] = (GATE_LOW_MS, GATE_HIGH_MS)
    seed: int = 0
    protocol: str = "both"
    k: int = 10
    train_fraction: float = 0.7
    workers: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gate_ms"] = list(self.gate_ms)
        d["detector"]["qrs_band_hz"] = list(self.detector.qrs_band_hz)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "filter" in d:
            d["filter"] = FilterSpec(**d["filter"])
        if "detector" in d:
            det = dict(d["detector"])
            if "qrs_band_hz" in det:
                det["qrs_band_hz"] = tuple(det["qrs_band_hz"])
            d["detector"] = DetectorParams(**det)
        if "gate_ms" in d:
            d["gate_ms"] = tuple(d["gate_ms"])
        return cls(**d)


_KV_TYPES = {
    "band_low_hz": ("filter", float),
    "band_high_hz": ("filter", float),
    "notch_hz": ("filter", float),
    "notch_q": ("filter", float),
    "bandpass_order": ("filter", int),
    "zero_phase": ("filter", "bool"),
    "decimate": ("detector", "bool"),
    "refractory_ms": ("detector", float),
    "mwi_ms": ("detector", float),
    "gate_low_ms": (None, float),
    "gate_high_ms": (None, float),
    "seed": (None, int),
    "protocol": (None, str),
    "k": (None, int),
    "train_fraction": (None, float),
    "workers": (None, int),
}


def load_config(path) -> PipelineConfig:
    """Read a run configuration.

    JSON files hold the nested :meth:`PipelineConfig.to_dict` layout.  Any
    other file is read as ``key=value`` lines (``#`` starts a comment)
    using flat keys such as ``band_low_hz``, ``notch_hz``, ``gate_low_ms``
    or ``seed``.
    """
    text = Path(path).read_text(encoding="utf-8")
    if Path(path).suffix.lower() == ".json":
        return PipelineConfig.from_dict(json.loads(text))
    cfg = PipelineConfig()
    filt, det, top = {}, {}, {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KV_TYPES:
            raise ValueError(f"{path}:{n}: unknown key {key!r}")
        group, typ = _KV_TYPES[key]
        if typ == "bool":
            v = val.lower() in ("1", "true", "yes", "on")
        elif key == "notch_hz" and val.lower() in ("none", "off", ""):
            v = None
        else:
            v = typ(val)
        {"filter": filt, "detector": det, None: top}[group][key] = v
    gate = list(cfg.gate_ms)
    if "gate_low_ms" in top:
        gate[0] = top.pop("gate_low_ms")
    if "gate_high_ms" in top:
        gate[1] = top.pop("gate_high_ms")
    return replace(
        cfg,
        filter=replace(cfg.filter, **filt),
        detector=replace(cfg.detector, **det),
        gate_ms=tuple(gate),
        **top,
    )


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except StageError:
        raise
    except EcgError as exc:
        raise StageError(name, exc) from exc


def process_recording(rec: EcgRecording, spec: FilterSpec = FilterSpec(),
                      params: DetectorParams = DetectorParams(),
                      gate: Tuple[float, float] = (GATE_LOW_MS, GATE_HIGH_MS)) -> HrvFeatures:
    """Preprocess, detect R peaks, extract NN intervals, compute features.

    Raises
    ------
    StageError
        Wrapping the first failure, tagged with the stage that raised it.
    """
    clean = _stage("preprocess", preprocess_chain, rec, spec)
    peaks = _stage("rpeak", detect_rpeaks, clean, params)
    nn = _stage("nn", nn_from_peaks, peaks, None, gate)
    return _stage("hrv", compute_features, nn)


@dataclass(frozen=True)
class Exclusion:
    subject_id: str
    stage: str
    reason: str


@dataclass(frozen=True)
class CohortResult:
    table: CohortTable
    excluded: tuple  # of Exclusion, sorted by subject_id

    def summary(self) -> dict:
        counts = self.table.counts()
        n = len(self.table)
        ages = [r.age_years for r in self.table if r.age_years is not None]
        return {
            "n_subjects": n,
            "n_mci": counts["MCI"],
            "n_non_mci": counts["nonMCI"],
            "mci_fraction": counts["MCI"] / n if n else 0.0,
            "mean_age_years": sum(ages) / len(ages) if ages else None,
            "n_excluded": len(self.excluded),
        }


def _process_row(args):
    row, rec_path, config = args
    try:
        label = label_from_ace(row.ace_iii_score)
        if isinstance(rec_path, EcgRecording):
            rec = rec_path
        else:
            rec = _stage("load", load_recording, rec_path, None, row.subject_id)
        feats = process_recording(rec, config.filter, config.detector, config.gate_ms)
    except StageError as exc:
        return Exclusion(row.subject_id, exc.stage, f"{type(exc.cause).__name__}: {exc.cause}")
    except EcgError as exc:
        return Exclusion(row.subject_id, "load", f"{type(exc).__name__}: {exc}")
    return CohortRow(row.subject_id, label, feats, row.age_years)


def process_cohort(manifest, config: PipelineConfig = PipelineConfig(), manifest_path=None,
                   recordings=None) -> CohortResult:
    """Features for every subject of a manifest.

    Parameters
    ----------
    manifest : sequence of CohortManifestRow
    config : PipelineConfig
        ``config.workers > 1`` processes subjects in a process pool.
    manifest_path : path, optional
        Relative recording paths are resolved against its directory.
    recordings : mapping subject_id -> EcgRecording, optional
        In-memory recordings that take precedence over files.

    Returns
    -------
    CohortResult
        Table sorted by subject id, plus the subjects that failed and why.

    Raises
    ------
    EmptyCohort
        If the manifest is empty or every subject failed.
    """
    rows = list(manifest)
    if not rows:
        raise EmptyCohort("manifest has no subjects")
    recordings = recordings or {}
    jobs = []
    for r in rows:
        src = recordings.get(r.subject_id)
        if src is None:
            src = resolve_recording_path(r, manifest_path) if manifest_path else Path(r.recording_path)
        jobs.append((r, src, config))
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_process_row, jobs, chunksize=8))
    else:
        results = [_process_row(j) for j in jobs]
    good = sorted((x for x in results if isinstance(x, CohortRow)), key=lambda r: r.subject_id)
    bad = tuple(sorted((x for x in results if isinstance(x, Exclusion)), key=lambda e: e.subject_id))
    if not good:
        raise EmptyCohort(f"all {len(rows)} subjects failed processing")
    return CohortResult(CohortTable(good), bad)


def default_workers() -> int:
    return max(1, min(os.cpu_count() or 1, 8))
