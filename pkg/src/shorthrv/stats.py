"""Two-sample Wilcoxon rank-sum test.

Small tie-free samples (pooled size <= 20) get the exact permutation
distribution of the rank sum, counted by dynamic programming over the
number of ways to draw ``n_a`` distinct ranks with a given total.  That
count is the same number an enumeration of all ``C(n_a + n_b, n_a)``
group assignments would produce.  Larger samples, or any sample with
ties, use the normal approximation with tie-corrected variance and a
0.5 continuity correction.

All p-values are two-sided: twice the smaller tail, clipped to (0, 1].
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import rankdata

from .cohort import MCI, NON_MCI
from .errors import EmptyGroup, NonFiniteInput, SingleClassCohort
from .hrv import FEATURE_NAMES

EXACT_MAX_N = 20
ALPHA = 0.05
_P_FLOOR = sys.float_info.min


@dataclass(frozen=True)
class RankSumResult:
    w_statistic: float
    p_value: float
    method: str  # "exact" or "normal_approx"
    n_a: int
    n_b: int

    def significant(self, alpha: float = ALPHA) -> bool:
        return self.p_value < alpha


@lru_cache(maxsize=256)
def rank_sum_counts(n_a: int, n: int) -> tuple:
    """``counts[s]`` = number of ``n_a``-subsets of ``{1..n}`` summing to ``s``."""
    top = n * (n + 1) // 2
    c = [[0] * (top + 1) for _ in range(n_a + 1)]
    c[0][0] = 1
    for r in range(1, n + 1):
        for k in range(min(n_a, r), 0, -1):
            row, prev = c[k], c[k - 1]
            for s in range(top, r - 1, -1):
                if prev[s - r]:
                    row[s] += prev[s - r]
    return tuple(c[n_a])


def exact_p(w: int, n_a: int, n_b: int) -> float:
    """Exact two-sided p for an integer rank sum ``w`` without ties."""
    counts = rank_sum_counts(n_a, n_a + n_b)
    lower = sum(counts[: w + 1])
    upper = sum(counts[w:])
    total = math.comb(n_a + n_b, n_a)
    return min(1.0, (2 * min(lower, upper)) / total)


def normal_p(w: float, n_a: int, n_b: int, tie_sizes=()) -> float:
    """Two-sided p from the continuity-corrected normal approximation."""
    n = n_a + n_b
    mu = n_a * (n + 1) / 2.0
    tie_term = sum(t**3 - t for t in tie_sizes)
    var = n_a * n_b / 12.0 * ((n + 1) - (tie_term / (n * (n - 1)) if n > 1 else 0.0))
    if var <= 0:
        return 1.0
    z = max(abs(w - mu) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, max(math.erfc(z / math.sqrt(2.0)), _P_FLOOR))


def rank_sum_test(a, b, alternative: str = "two_sided") -> RankSumResult:
    """Wilcoxon rank-sum test of ``a`` against ``b``.

    Parameters
    ----------
    a, b : sequence of float
        The two samples; must be non-empty and finite.
    alternative : {'two_sided'}

    Returns
    -------
    RankSumResult
        ``w_statistic`` is the rank sum of `a` over the pooled sample
        (midranks for ties).
    """
    if alternative != "two_sided":
        raise ValueError("only the two-sided alternative is supported")
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise EmptyGroup("both groups need at least one value")
    pooled = np.concatenate([a, b])
    if not np.all(np.isfinite(pooled)):
        raise NonFiniteInput("rank-sum input contains non-finite values")
    n_a, n_b = a.size, b.size
    ranks = rankdata(pooled)
    w = float(math.fsum(ranks[:n_a]))
    _, tie_sizes = np.unique(pooled, return_counts=True)
    has_ties = bool(np.any(tie_sizes > 1))
    if n_a + n_b <= EXACT_MAX_N and not has_ties:
        return RankSumResult(w, exact_p(int(round(w)), n_a, n_b), "exact", n_a, n_b)
    p = normal_p(w, n_a, n_b, [int(t) for t in tie_sizes if t > 1])
    return RankSumResult(w, p, "normal_approx", n_a, n_b)


def feature_significance(table, features=FEATURE_NAMES) -> dict:
    """Rank-sum test of each feature, MCI (group a) against non-MCI (group b).

    Returns a dict keyed by feature name in `features` order.
    """
    labels = table.labels()
    mci = labels == MCI
    if not mci.any() or not (labels == NON_MCI).any():
        raise SingleClassCohort("feature comparison needs both MCI and non-MCI subjects")
    out = {}
    for name in features:
        x = table.feature(name)
        out[name] = rank_sum_test(x[mci], x[~mci])
    return out
