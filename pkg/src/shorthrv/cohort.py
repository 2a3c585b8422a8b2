"""Cohort tables and ACE-III labelling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DuplicateSubject, ScoreOutOfRange
from .hrv import HrvFeatures

MCI = "MCI"
NON_MCI = "nonMCI"
LABELS = (MCI, NON_MCI)

#: ACE-III totals strictly below this are labelled MCI.
ACE_MCI_THRESHOLD = 88


def label_from_ace(score: int) -> str:
    """Map an ACE-III total score (0-100) to a diagnostic label."""
    if isinstance(score, bool) or int(score) != score:
        raise ScoreOutOfRange(f"ACE-III score must be an integer, got {score!r}")
    if not 0 <= score <= 100:
        raise ScoreOutOfRange(f"ACE-III score {score} outside [0, 100]")
    return MCI if score < ACE_MCI_THRESHOLD else NON_MCI


@dataclass(frozen=True)
class CohortRow:
    subject_id: str
    label: str
    features: HrvFeatures
    age_years: Optional[float] = None


@dataclass(frozen=True)
class CohortTable:
    """Per-subject labels and features, unique by subject id."""

    rows: tuple

    def __init__(self, rows):
        rows = tuple(rows)
        seen = set()
        for r in rows:
            if r.subject_id in seen:
                raise DuplicateSubject(f"duplicate subject_id {r.subject_id!r}")
            if r.label not in LABELS:
                raise ValueError(f"unknown label {r.label!r}")
            seen.add(r.subject_id)
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def sorted(self) -> "CohortTable":
        return CohortTable(sorted(self.rows, key=lambda r: r.subject_id))

    def feature(self, name: str) -> np.ndarray:
        return np.array([r.features.get(name) for r in self.rows], dtype=np.float64)

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.rows])

    def counts(self) -> dict:
        lab = [r.label for r in self.rows]
        return {MCI: lab.count(MCI), NON_MCI: lab.count(NON_MCI)}

    def as_triples(self):
        return [(r.subject_id, r.label, r.features) for r in self.rows]
