"""Single-feature classifiers and their validation.

Three classifiers work on one scalar feature, standardised with the
training split's mean and SD (a feature matrix is also accepted, see
:func:`train_classifier`):

``svm``
    Linear soft-margin classifier.  Hinge loss plus ``lam / 2 * w**2``
    (``lam = 1 / C``, ``C = 1``), minimised by full-batch subgradient
    descent for 1000 epochs with step ``0.1 / t``.
``da``
    Two-class linear discriminant with pooled within-class variance.
``nb``
    Per-class univariate Gaussian with priors from training frequencies.

Class variances below ``1e-12`` are floored at ``1e-12 * (var + 1)``
(``var`` being the variance of the whole training feature), so a
constant feature falls back to prior-only prediction.  Exact ties
between classes go to the training majority.

MCI is the positive class throughout (``y = +1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cohort import MCI, NON_MCI, CohortTable
from .errors import NonFiniteInput, SingleClass, TooSmallCohort
from .hrv import FEATURE_NAMES

KINDS = ("svm", "da", "nb")
VAR_FLOOR = 1e-12


def _as_binary(ys) -> np.ndarray:
    ys = np.asarray(ys)
    if ys.dtype.kind in "US" or ys.dtype == object:
        bad = set(ys.tolist()) - {MCI, NON_MCI}
        if bad:
            raise ValueError(f"unknown labels {sorted(bad)}")
        return np.where(ys == MCI, 1, -1)
    return np.where(ys > 0, 1, -1)


@dataclass
class ClassifierModel:
    """Trained scalar classifier; :meth:`predict` returns +1 (MCI) / -1."""

    kind: str
    center: object  # float, or one value per feature column
    scale: object
    majority: int
    params: dict = field(default_factory=dict)

    def decision(self, xs) -> np.ndarray:
        """Signed score; positive favours MCI, zero is a tie."""
        x = np.asarray(xs, dtype=np.float64)
        if np.ndim(self.center) == 0:
            return self._score((x - self.center) / self.scale)
        z = (x.reshape(-1, len(self.center)) - self.center) / self.scale
        return self._score(z)

    def _score(self, z):
        p = self.params
        if self.kind == "svm":
            return z @ p["w"] + p["b"] if z.ndim == 2 else p["w"] * z + p["b"]
        if self.kind == "da":
            if z.ndim == 2:
                return (z - p["mid"]) @ p["coef"] + p["log_prior_ratio"]
            return (p["mu_pos"] - p["mu_neg"]) / p["var"] * (z - (p["mu_pos"] + p["mu_neg"]) / 2) + p["log_prior_ratio"]
        ll = []
        for s in ("pos", "neg"):
            var = p["var_" + s]
            term = -0.5 * np.log(2 * np.pi * var) - (z - p["mu_" + s]) ** 2 / (2 * var)
            ll.append((term.sum(axis=1) if z.ndim == 2 else term) + p["log_prior_" + s])
        return ll[0] - ll[1]

    def predict(self, xs) -> np.ndarray:
        d = self.decision(xs)
        return np.where(d > 0, 1, np.where(d < 0, -1, self.majority))

    def predict_labels(self, xs) -> np.ndarray:
        return np.where(self.predict(xs) > 0, MCI, NON_MCI)


def _floored(v, floor):
    return v if v >= VAR_FLOOR else floor


def train_classifier(kind: str, xs, ys, epochs: int = 1000, c: float = 1.0, step0: float = 0.1) -> ClassifierModel:
    """Fit a scalar classifier.

    Parameters
    ----------
    kind : {'svm', 'da', 'nb'}
    xs : sequence of float, or array of shape (n, d)
        One feature value (or row of ``d`` features) per subject.  With
        ``d > 1`` the SVM becomes a linear SVM on the vector, ``da`` uses
        the pooled covariance and ``nb`` multiplies per-feature Gaussians.
    ys : sequence
        Labels, either ``"MCI"``/``"nonMCI"`` or +1/-1.
    epochs, c, step0 : optional
        SVM schedule: ``epochs`` full-batch steps of size ``step0 / t``
        on the objective with ``lam = 1 / c``.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    x = np.asarray(xs, dtype=np.float64)
    if x.ndim == 2 and x.shape[1] == 1:
        x = x[:, 0]
    y = _as_binary(ys).ravel()
    if x.ndim > 2 or len(x) != len(y):
        raise ValueError("xs must hold one value (or one row) per label")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("feature values must be finite")
    n_pos = int(np.sum(y > 0))
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("training data must contain both classes")
    majority = 1 if n_pos > n_neg else -1
    if x.ndim == 2:
        return _train_multi(kind, x, y, n_pos, n_neg, majority, epochs, c, step0)

    center = float(x.mean())
    sd = float(x.std())
    scale = sd if sd > 0 else 1.0
    z = (x - center) / scale
    floor = VAR_FLOOR * (float(z.var()) + 1.0)
    zp, zn = z[y > 0], z[y < 0]

    if kind == "svm":
        w, b = _svm(z[:, None], y, epochs, c, step0)
        params = {"w": float(w[0]), "b": b}
    elif kind == "da":
        ss_within = np.sum((zp - zp.mean()) ** 2) + np.sum((zn - zn.mean()) ** 2)
        var = _floored(ss_within / max(len(z) - 2, 1), floor)
        params = {
            "mu_pos": float(zp.mean()),
            "mu_neg": float(zn.mean()),
            "var": var,
            "log_prior_ratio": math.log(n_pos / n_neg),
        }
    else:
        params = {
            "mu_pos": float(zp.mean()),
            "mu_neg": float(zn.mean()),
            "var_pos": _floored(float(zp.var()), floor),
            "var_neg": _floored(float(zn.var()), floor),
            "log_prior_pos": math.log(n_pos / len(y)),
            "log_prior_neg": math.log(n_neg / len(y)),
        }
    return ClassifierModel(kind, center, scale, majority, params)


def _svm(z, y, epochs, c, step0):
    lam = 1.0 / c
    w = np.zeros(z.shape[1])
    b = 0.0
    for t in range(1, epochs + 1):
        viol = y * (z @ w + b) < 1.0
        gw = lam * w - (y[viol] @ z[viol]) / len(z)
        gb = -np.sum(y[viol]) / len(z)
        eta = step0 / t
        w = w - eta * gw
        b -= eta * gb
    return w, b


def _train_multi(kind, x, y, n_pos, n_neg, majority, epochs, c, step0):
    # feature vectors: linear SVM, LDA with pooled covariance, diagonal Gaussian NB
    center = x.mean(axis=0)
    sd = x.std(axis=0)
    scale = np.where(sd > 0, sd, 1.0)
    z = (x - center) / scale
    floor = VAR_FLOOR * (z.var(axis=0) + 1.0)
    zp, zn = z[y > 0], z[y < 0]
    if kind == "svm":
        w, b = _svm(z, y, epochs, c, step0)
        params = {"w": w, "b": b}
    elif kind == "da":
        dp, dn = zp - zp.mean(axis=0), zn - zn.mean(axis=0)
        cov = (dp.T @ dp + dn.T @ dn) / max(len(z) - 2, 1) + np.diag(floor)
        mu_p, mu_n = zp.mean(axis=0), zn.mean(axis=0)
        params = {
            "coef": np.linalg.solve(cov, mu_p - mu_n),
            "mid": (mu_p + mu_n) / 2,
            "log_prior_ratio": math.log(n_pos / n_neg),
        }
    else:
        vp, vn = zp.var(axis=0), zn.var(axis=0)
        params = {
            "mu_pos": zp.mean(axis=0),
            "mu_neg": zn.mean(axis=0),
            "var_pos": np.where(vp >= VAR_FLOOR, vp, floor),
            "var_neg": np.where(vn >= VAR_FLOOR, vn, floor),
            "log_prior_pos": math.log(n_pos / len(y)),
            "log_prior_neg": math.log(n_neg / len(y)),
        }
    return ClassifierModel(kind, center, scale, majority, params)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class CvReport:
    classifier: str
    feature: str
    fold_accuracies: tuple
    pooled_accuracy: Optional[float]
    confusion: dict  # {"TP", "FP", "TN", "FN"} over out-of-fold predictions
    holdout_accuracy: Optional[float]
    seed: int

    def as_dict(self) -> dict:
        return {
            "classifier": self.classifier,
            "feature": self.feature,
            "fold_accuracies": list(self.fold_accuracies),
            "pooled_accuracy": self.pooled_accuracy,
            "confusion": dict(self.confusion),
            "holdout_accuracy": self.holdout_accuracy,
            "seed": self.seed,
        }


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def stratified_folds(y, k: int, seed: int) -> np.ndarray:
    """Fold number (0..k-1) of every subject.

    Each class is shuffled and dealt round-robin, the second class
    continuing where the first stopped, so fold sizes differ by at most
    one overall and per class.
    """
    y = _as_binary(y)
    rng = _rng(seed)
    fold = np.empty(len(y), dtype=np.int64)
    pos = 0
    for cls in (1, -1):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(len(members))]
        fold[members] = (pos + np.arange(len(members))) % k
        pos += len(members)
    return fold


def stratified_split(y, train_fraction: float, seed: int) -> np.ndarray:
    """Boolean training mask; each class contributes ``round(f * n_c)`` subjects."""
    y = _as_binary(y)
    rng = _rng(seed)
    train = np.zeros(len(y), dtype=bool)
    for cls in (1, -1):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(len(members))]
        n_train = int(math.floor(train_fraction * len(members) + 0.5))
        train[members[:n_train]] = True
    return train


def feature_key(feature) -> str:
    """Report key for a feature name or a tuple of names (joined with ``+``)."""
    return feature if isinstance(feature, str) else "+".join(feature)


def _check_table(table, feature):
    names = (feature,) if isinstance(feature, str) else tuple(feature)
    bad = [f for f in names if f not in FEATURE_NAMES]
    if bad or not names:
        raise ValueError(f"feature must be one of {FEATURE_NAMES}, got {feature!r}")
    x = table.feature(names[0]) if len(names) == 1 else np.column_stack([table.feature(f) for f in names])
    y = _as_binary(table.labels())
    if not (y > 0).any() or not (y < 0).any():
        raise SingleClass("cohort must contain both MCI and non-MCI subjects")
    return x, y


def _confusion(y, pred):
    return {
        "TP": int(np.sum((y > 0) & (pred > 0))),
        "FP": int(np.sum((y < 0) & (pred > 0))),
        "TN": int(np.sum((y < 0) & (pred < 0))),
        "FN": int(np.sum((y > 0) & (pred < 0))),
    }


def kfold_validate(table: CohortTable, kind: str, feature: str, k: int = 10, seed: int = 0) -> CvReport:
    """Stratified k-fold cross-validation of one classifier on one feature.

    ``pooled_accuracy`` scores the concatenated out-of-fold predictions.
    """
    x, y = _check_table(table, feature)
    if len(y) < k:
        raise TooSmallCohort(f"cohort of {len(y)} is smaller than k={k}")
    if min(np.sum(y > 0), np.sum(y < 0)) < 2:
        raise TooSmallCohort("each class needs at least 2 subjects for cross-validation")
    folds = stratified_folds(y, k, seed)
    pred = np.empty(len(y), dtype=np.int64)
    accs = []
    for f in range(k):
        test = folds == f
        model = train_classifier(kind, x[~test], y[~test])
        pred[test] = model.predict(x[test])
        accs.append(float(np.mean(pred[test] == y[test])))
    conf = _confusion(y, pred)
    pooled = (conf["TP"] + conf["TN"]) / len(y)
    return CvReport(kind, feature_key(feature), tuple(accs), pooled, conf, None, seed)


def holdout_validate(table: CohortTable, kind: str, feature: str, train_fraction: float = 0.7,
                     seed: int = 0) -> CvReport:
    """Stratified train/test split; accuracy on the held-out part.

    The returned report's ``confusion`` covers the test split only.
    """
    x, y = _check_table(table, feature)
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    train = stratified_split(y, train_fraction, seed)
    for cls in (1, -1):
        in_cls = y == cls
        if not (train & in_cls).any() or not (~train & in_cls).any():
            raise TooSmallCohort(
                f"train_fraction={train_fraction} leaves a class empty in the training or test split"
            )
    model = train_classifier(kind, x[train], y[train])
    pred = model.predict(x[~train])
    conf = _confusion(y[~train], pred)
    acc = float(np.mean(pred == y[~train]))
    return CvReport(kind, feature_key(feature), (), None, conf, acc, seed)


def validate(table: CohortTable, kind: str, feature: str, protocol: str = "both", k: int = 10,
             train_fraction: float = 0.7, seed: int = 0) -> CvReport:
    """Run k-fold, holdout, or both, merged into one report."""
    if protocol not in ("kfold", "holdout", "both"):
        raise ValueError(f"unknown protocol {protocol!r}")
    kf = kfold_validate(table, kind, feature, k, seed) if protocol != "holdout" else None
    ho = holdout_validate(table, kind, feature, train_fraction, seed) if protocol != "kfold" else None
    if kf is None:
        return ho
    if ho is None:
        return kf
    return CvReport(kind, feature_key(feature), kf.fold_accuracies, kf.pooled_accuracy, kf.confusion,
                    ho.holdout_accuracy, seed)


def accuracy_grid(table: CohortTable, protocol: str = "both", k: int = 10, train_fraction: float = 0.7,
                  seed: int = 0, features=FEATURE_NAMES, kinds=KINDS) -> dict:
    """``{feature: {classifier: CvReport}}`` over every cell of the grid.

    An entry of ``features`` may be a tuple of names, which trains each
    classifier on that feature vector; its key joins the names with ``+``.
    """
    return {
        feature_key(f): {c: validate(table, c, f, protocol, k, train_fraction, seed) for c in kinds}
        for f in features
    }
