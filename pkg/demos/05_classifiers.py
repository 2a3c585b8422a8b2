"""
Single-feature classifiers and cross-validation
===============================================

"""

from shorthrv.classify import accuracy_grid, kfold_validate, train_classifier
from shorthrv.pipeline import process_cohort
from shorthrv.report import grid_text
from shorthrv.synth import CohortDesign, simulate_cohort

# Each classifier sees one feature; MCI is the positive class.
m = train_classifier("nb", [700, 720, 740, 900, 920, 950], ["MCI", "MCI", "MCI", "nonMCI", "nonMCI", "nonMCI"])
print(m.predict_labels([710, 940]))

# Build a small cohort where MCI subjects have faster hearts and less variability.
subs = simulate_cohort(20, 60, CohortDesign.effect(fs_hz=500.0), seed=4)
res = process_cohort([s.row for s in subs], recordings={s.row.subject_id: s.output.recording for s in subs})

# Stratified 10-fold cross-validation for one cell...
rep = kfold_validate(res.table, "svm", "mean_nn", k=10, seed=0)
print("svm / mean_nn:", round(rep.pooled_accuracy, 3), rep.confusion)

# ...and the whole grid of features by classifiers.
print(grid_text(accuracy_grid(res.table, protocol="kfold", seed=0)))
