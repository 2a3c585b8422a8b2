"""
A cohort on disk, end to end
============================

Writes a synthetic cohort to a temporary directory and runs the same
``report`` command a user would run from the shell.
"""

import json
import tempfile
from pathlib import Path

from shorthrv.cli import main
from shorthrv.synth import CohortDesign, generate_cohort

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    # 57 MCI and 240 healthy subjects would mirror a clinical study; keep it small here.
    generate_cohort(tmp, 12, 48, CohortDesign.effect(fs_hz=1000.0), seed=6)
    print((tmp / "manifest.csv").read_text().splitlines()[:3])

    # Equivalent to: shorthrv report --manifest manifest.csv --out report.json --seed 0
    main(["report", "--manifest", str(tmp / "manifest.csv"), "--out", str(tmp / "report.json")])
    doc = json.loads((tmp / "report.json").read_text())

print(doc["cohort"])
for name, r in doc["rank_sum"].items():
    print(f"{name:<8} p = {r['p_value']:.3g}")
print("svm on sdnn, 10-fold:", doc["classification"]["grid"]["sdnn"]["svm"]["kfold_accuracy"])
