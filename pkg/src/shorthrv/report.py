"""Cohort report assembly and fixed-format JSON/text rendering.

Every float leaving this module is rounded to six significant digits and
dict key order is fixed, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import json

from .classify import accuracy_grid
from .stats import ALPHA, feature_significance


def sig6(x):
    """Round floats (recursively through containers) to six significant digits."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return float(f"{x:.6g}")
    if isinstance(x, dict):
        return {k: sig6(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [sig6(v) for v in x]
    if hasattr(x, "item"):
        return sig6(x.item())
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(doc) -> str:
    return json.dumps(sig6(doc), indent=2, allow_nan=False) + "\n"


def significance_doc(results, alpha: float = ALPHA) -> dict:
    return {
        name: {
            "w_statistic": r.w_statistic,
            "p_value": r.p_value,
            "method": r.method,
            "n_mci": r.n_a,
            "n_non_mci": r.n_b,
            "significant": r.significant(alpha),
        }
        for name, r in results.items()
    }


def grid_doc(grid) -> dict:
    doc = {}
    for feat, row in grid.items():
        doc[feat] = {}
        for kind, rep in row.items():
            doc[feat][kind] = {
                "kfold_accuracy": rep.pooled_accuracy,
                "fold_accuracies": list(rep.fold_accuracies),
                "confusion": rep.confusion,
                "holdout_accuracy": rep.holdout_accuracy,
            }
    return doc


def build_report(result, config) -> dict:
    """JSON-ready report for a processed cohort (:class:`~shorthrv.pipeline.CohortResult`)."""
    table = result.table
    sig = feature_significance(table)
    grid = accuracy_grid(table, config.protocol, config.k, config.train_fraction, config.seed)
    return {
        "cohort": result.summary(),
        "excluded": [{"subject_id": e.subject_id, "stage": e.stage, "reason": e.reason} for e in result.excluded],
        "rank_sum": significance_doc(sig),
        "classification": {
            "protocol": config.protocol,
            "k": config.k,
            "train_fraction": config.train_fraction,
            "seed": config.seed,
            "grid": grid_doc(grid),
        },
        "config": config.to_dict(),
    }


def significance_text(results, alpha: float = ALPHA) -> str:
    lines = [f"{'feature':<10}{'W':>12}{'p':>14}  significant(alpha={alpha:g})"]
    for name, r in results.items():
        lines.append(f"{name:<10}{r.w_statistic:>12.6g}{r.p_value:>14.6g}  {'yes' if r.significant(alpha) else 'no'}")
    return "\n".join(lines) + "\n"


def grid_text(grid, field: str = "pooled_accuracy") -> str:
    kinds = list(next(iter(grid.values())).keys())
    lines = [f"{'feature':<10}" + "".join(f"{k:>12}" for k in kinds)]
    for feat, row in grid.items():
        cells = []
        for k in kinds:
            v = getattr(row[k], field)
            cells.append(f"{'-' if v is None else format(v, '.6g'):>12}")
        lines.append(f"{feat:<10}" + "".join(cells))
    return "\n".join(lines) + "\n"
