"""Command-line interface.

Exit status is 0 on success, 1 on a usage error and 2 on a data error
(the typed error is printed to stderr, tagged with the failing stage
where there is one).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .classify import accuracy_grid
from .cohort import LABELS, label_from_ace
from .errors import EcgError, StageError
from .hrv import FEATURE_NAMES
from .preprocess import FilterSpec, preprocess_chain
from .pipeline import PipelineConfig, load_config, process_cohort, process_recording
from .report import build_report, dumps, grid_doc, grid_text, significance_doc, significance_text
from .rpeak import DetectorParams, detect_rpeaks, nn_from_peaks
from .signal_io import features_csv_text, load_manifest, load_recording, read_features_table, write_recording
from .stats import feature_significance
from .synth import CohortDesign, GroupParams, SynthSpec, generate, generate_cohort


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_filter_flags(p):
    g = p.add_argument_group("preprocessing")
    g.add_argument("--band-low", type=float, default=0.5, help="band-pass low edge, Hz (default 0.5)")
    g.add_argument("--band-high", type=float, default=100.0, help="band-pass high edge, Hz (default 100)")
    g.add_argument("--notch-hz", type=float, default=50.0, help="notch frequency, Hz (default 50)")
    g.add_argument("--notch-q", type=float, default=30.0, help="notch quality factor (default 30)")
    g.add_argument("--bandpass-order", type=int, default=4, help="Butterworth prototype order (default 4)")
    g.add_argument("--no-zero-phase", action="store_true", help="filter forward only")


def _add_detector_flags(p):
    g = p.add_argument_group("detection")
    g.add_argument("--no-decimate", action="store_true", help="detect at the native sampling rate")
    g.add_argument("--refractory-ms", type=float, default=200.0)
    g.add_argument("--gate-low-ms", type=float, default=200.0)
    g.add_argument("--gate-high-ms", type=float, default=3000.0)


def _filter_spec(a) -> FilterSpec:
    return FilterSpec(a.band_low, a.band_high, a.notch_hz, a.notch_q, a.bandpass_order, not a.no_zero_phase)


def _detector(a) -> DetectorParams:
    return DetectorParams(decimate=not a.no_decimate, refractory_ms=a.refractory_ms)


def _gate(a):
    return (a.gate_low_ms, a.gate_high_ms)


def _pair(text):
    try:
        amp, freq = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected AMP,FREQ, got {text!r}") from None
    return amp, freq


def _out(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(a):
    spec = SynthSpec(a.fs, a.duration, a.hr, a.sdnn, a.rmssd_weight, a.snr_db, a.wander, a.powerline, a.seed)
    out = generate(spec)
    write_recording(out.recording, a.out, a.format)
    if a.truth:
        _out("".join(f"{t!r}\n" for t in out.true_peaks.times_s.tolist()), a.truth)


def cmd_synth_cohort(a):
    base = GroupParams(hr_mean_bpm=a.hr, sdnn_median_ms=a.sdnn)
    kw = dict(healthy=base, fs_hz=a.fs, duration_s=a.duration, noise_snr_db=a.snr_db)
    design = CohortDesign.null(**kw, mci=replace(base, ace_range=(55, 87))) if a.null else \
        CohortDesign.effect(a.hr_delta, a.sdnn_ratio, **kw)
    rows = generate_cohort(a.out_dir, a.n_mci, a.n_healthy, design, a.seed, a.format)
    print(f"wrote {len(rows)} recordings to {a.out_dir}", file=sys.stderr)


def cmd_preprocess(a):
    rec = load_recording(a.input, a.format)
    try:
        out = preprocess_chain(rec, _filter_spec(a))
    except EcgError as exc:
        raise StageError("preprocess", exc) from exc
    write_recording(out, a.out, a.out_format)


def cmd_detect(a):
    rec = load_recording(a.input, a.format)
    try:
        if not a.skip_preprocess:
            rec = preprocess_chain(rec, _filter_spec(a))
    except EcgError as exc:
        raise StageError("preprocess", exc) from exc
    try:
        peaks = detect_rpeaks(rec, _detector(a))
    except EcgError as exc:
        raise StageError("rpeak", exc) from exc
    if a.intervals:
        try:
            nn = nn_from_peaks(peaks, None, _gate(a))
        except EcgError as exc:
            raise StageError("nn", exc) from exc
        _out("".join(f"{v:.6g}\n" for v in nn.intervals_ms.tolist()), None)
    else:
        _out("".join(f"{t:.6g}\n" for t in peaks.times_s.tolist()), None)


def cmd_features(a):
    if a.label is None and a.ace is None:
        raise UsageError("features: one of --label or --ace is required")
    label = a.label if a.label is not None else label_from_ace(a.ace)
    rec = load_recording(a.input, a.format)
    feats = process_recording(rec, _filter_spec(a), _detector(a), _gate(a))
    sid = a.subject_id or rec.subject_id
    _out(features_csv_text([(sid, label, feats)], header=a.header), None)


def cmd_cohort_stats(a):
    table = read_features_table(a.features)
    res = feature_significance(table)
    if a.json:
        _out(dumps(significance_doc(res)), None)
    else:
        _out(significance_text(res), None)


def cmd_classify(a):
    table = read_features_table(a.features)
    feats = list(FEATURE_NAMES)
    if a.combine:
        names = tuple(n.strip() for n in a.combine.split(","))
        bad = [n for n in names if n not in FEATURE_NAMES]
        if bad or len(names) < 2:
            raise UsageError(f"--combine needs two or more of {','.join(FEATURE_NAMES)}")
        feats.append(names)
    grid = accuracy_grid(table, a.protocol, a.k, a.train_fraction, a.seed, features=feats)
    if a.json:
        _out(dumps(grid_doc(grid)), None)
        return
    text = ""
    if a.protocol in ("kfold", "both"):
        text += f"{a.k}-fold pooled accuracy\n" + grid_text(grid, "pooled_accuracy")
    if a.protocol in ("holdout", "both"):
        text += f"holdout accuracy (train fraction {a.train_fraction:g})\n" + grid_text(grid, "holdout_accuracy")
    _out(text, None)


def cmd_report(a):
    cfg = load_config(a.config) if a.config else PipelineConfig()
    cfg = replace(cfg, seed=a.seed if a.seed is not None else cfg.seed)
    if a.workers is not None:
        cfg = replace(cfg, workers=a.workers)
    manifest = load_manifest(a.manifest)
    result = process_cohort(manifest, cfg, manifest_path=a.manifest)
    _out(dumps(build_report(result, cfg)), a.out)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shorthrv", description="Short-ECG HR/HRV pipeline.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("synth", help="write one synthetic recording")
    s.add_argument("--out", required=True, help="output file (.csv or .f32)")
    s.add_argument("--format", choices=("csv", "raw_f32le"))
    s.add_argument("--fs", type=float, default=16000.0)
    s.add_argument("--duration", type=float, default=10.0)
    s.add_argument("--hr", type=float, default=60.0, help="mean heart rate, bpm")
    s.add_argument("--sdnn", type=float, default=0.0, help="target SDNN, ms")
    s.add_argument("--rmssd-weight", type=float, default=0.5)
    s.add_argument("--snr-db", type=float)
    s.add_argument("--wander", type=_pair, metavar="AMP,FREQ")
    s.add_argument("--powerline", type=_pair, metavar="AMP,FREQ")
    s.add_argument("--truth", help="write true R-peak times (s) here")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("synth-cohort", help="write a synthetic cohort with manifest.csv and truth.csv")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--n-mci", type=int, default=57)
    s.add_argument("--n-healthy", type=int, default=240)
    s.add_argument("--hr", type=float, default=68.0, help="healthy mean heart rate, bpm")
    s.add_argument("--sdnn", type=float, default=45.0, help="healthy median SDNN, ms")
    s.add_argument("--hr-delta", type=float, default=10.0, help="MCI heart-rate increase, bpm")
    s.add_argument("--sdnn-ratio", type=float, default=0.6, help="MCI / healthy SDNN ratio")
    s.add_argument("--null", action="store_true", help="identical group distributions")
    s.add_argument("--fs", type=float, default=16000.0)
    s.add_argument("--duration", type=float, default=10.0)
    s.add_argument("--snr-db", type=float, default=20.0)
    s.add_argument("--format", choices=("csv", "raw_f32le"), default="raw_f32le")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth_cohort)

    s = sub.add_parser("preprocess", help="detrend, band-pass and notch a recording")
    s.add_argument("input")
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("csv", "raw_f32le"))
    s.add_argument("--out-format", choices=("csv", "raw_f32le"))
    _add_filter_flags(s)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("detect", help="print R-peak times (s), one per line")
    s.add_argument("input")
    s.add_argument("--format", choices=("csv", "raw_f32le"))
    s.add_argument("--skip-preprocess", action="store_true", help="input is already preprocessed")
    s.add_argument("--intervals", action="store_true", help="print gated NN intervals (ms) instead")
    _add_filter_flags(s)
    _add_detector_flags(s)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("features", help="print one Features CSV row for a recording")
    s.add_argument("input")
    s.add_argument("--format", choices=("csv", "raw_f32le"))
    s.add_argument("--subject-id")
    s.add_argument("--label", choices=LABELS)
    s.add_argument("--ace", type=int, help="ACE-III score; sets the label")
    s.add_argument("--header", action="store_true", help="also print the header line")
    _add_filter_flags(s)
    _add_detector_flags(s)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_features)

    s = sub.add_parser("cohort-stats", help="rank-sum test of every feature, MCI vs non-MCI")
    s.add_argument("features", help="Features CSV")
    s.add_argument("--json", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_cohort_stats)

    s = sub.add_parser("classify", help="accuracy grid, features x classifiers")
    s.add_argument("features", help="Features CSV")
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--train-fraction", type=float, default=0.7)
    s.add_argument("--protocol", choices=("kfold", "holdout", "both"), default="both")
    s.add_argument("--json", action="store_true")
    s.add_argument("--combine", metavar="F1,F2,...",
                   help="also train on these features jointly (adds a 'F1+F2' row)")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("report", help="process a cohort manifest into one JSON report")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", help="output path (default stdout)")
    s.add_argument("--config", help="run configuration (JSON or key=value)")
    s.add_argument("--seed", type=int, help="overrides the config seed (default 0)")
    s.add_argument("--workers", type=int, help="parallel processes (default from config, 1)")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"shorthrv: error: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"shorthrv: error: {exc}", file=sys.stderr)
        return 2
    except (EcgError, ValueError, OSError) as exc:
        print(f"shorthrv: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
