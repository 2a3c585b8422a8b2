"""Short-ECG heart-rate and heart-rate-variability pipeline.

Preprocessing, R-peak detection, NN-interval features, rank-sum group
comparison, single-feature classifier validation and a synthetic-ECG
generator with ground truth.
"""

__version__ = "0.1.0"

from .errors import EcgError, StageError
from .signal_io import EcgRecording, load_recording, write_recording, load_manifest, write_features_table
from .preprocess import FilterSpec, detrend, bandpass, notch, preprocess_chain
from .rpeak import DetectorParams, PeakList, NnSeries, detect_rpeaks, nn_from_peaks
from .hrv import HrvFeatures, compute_features, mean_nn, rms_nn, sdnn, rmssd
from .cohort import CohortTable, CohortRow, label_from_ace, MCI, NON_MCI
from .stats import RankSumResult, rank_sum_test, feature_significance
from .classify import CvReport, train_classifier, kfold_validate, holdout_validate, accuracy_grid
from .synth import SynthSpec, SynthOutput, generate, generate_cohort, simulate_cohort, CohortDesign, GroupParams
from .pipeline import PipelineConfig, process_recording, process_cohort

__all__ = [
    "__version__",
    "EcgError",
    "StageError",
    "EcgRecording",
    "load_recording",
    "write_recording",
    "load_manifest",
    "write_features_table",
    "FilterSpec",
    "detrend",
    "bandpass",
    "notch",
    "preprocess_chain",
    "DetectorParams",
    "PeakList",
    "NnSeries",
    "detect_rpeaks",
    "nn_from_peaks",
    "HrvFeatures",
    "compute_features",
    "mean_nn",
    "rms_nn",
    "sdnn",
    "rmssd",
    "CohortTable",
    "CohortRow",
    "label_from_ace",
    "MCI",
    "NON_MCI",
    "RankSumResult",
    "rank_sum_test",
    "feature_significance",
    "CvReport",
    "train_classifier",
    "kfold_validate",
    "holdout_validate",
    "accuracy_grid",
    "SynthSpec",
    "SynthOutput",
    "generate",
    "generate_cohort",
    "simulate_cohort",
    "CohortDesign",
    "GroupParams",
    "PipelineConfig",
    "process_recording",
    "process_cohort",
]
