"""Leave-one-out evaluation of the SMOTE + SVM pipeline."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigError, InsufficientDataError
from ..numcore import RandomStream
from .metrics import compute_metrics
from .smote import SmoteConfig, balance
from .svm import default_gamma, train_svm

MODES = ("fold-safe", "paper-faithful")


@dataclass(frozen=True)
class PipelineConfig:
    kernel: str = "rbf"
    C: float = 1.0
    gamma: float | None = None
    smote_k: int = 5
    tol: float = 1e-3
    max_iter: int = 100_000
    standardize: bool = True


def fit_standardizer(X):
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    return mean, np.where(sd > 0, sd, 1.0)


@dataclass
class FoldModel:
    model: object
    mean: np.ndarray
    scale: np.ndarray

    def decision(self, x):
        return self.model.decision_function((np.asarray(x, dtype=float) - self.mean) / self.scale)


def fit_fold(X, y, config, stream, oversample=True):
    """Train one fold: optional SMOTE balancing, z-scoring, then the SVM.

    Only the rows passed in are seen, so a fold's model cannot depend on its
    held-out sample.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    if oversample:
        X, y, _ = balance(X, y, SmoteConfig(config.smote_k, stream.substream("smote")))
    if config.standardize:
        mean, scale = fit_standardizer(X)
    else:
        mean, scale = np.zeros(X.shape[1]), np.ones(X.shape[1])
    Z = (X - mean) / scale
    gamma = config.gamma if config.gamma is not None else default_gamma(Z)
    model = train_svm(Z, np.where(y, 1, -1), config.kernel, config.C, gamma, config.tol,
                      config.max_iter)
    return FoldModel(model, mean, scale)


@dataclass
class CvResult:
    mode: str
    metrics: object
    decision_values: np.ndarray
    labels: np.ndarray
    synthetic: np.ndarray
    fold_gamma: np.ndarray
    original_metrics: object = None
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mode": self.mode,
            "metrics": self.metrics.to_dict(),
            "original_only_metrics": self.original_metrics.to_dict(),
            "config": self.config,
            "fold_gamma_mean": float(np.mean(self.fold_gamma)),
            "folds": [
                {"index": i, "pd_label": bool(l), "synthetic": bool(s), "decision_value": float(f)}
                for i, (l, s, f) in enumerate(zip(self.labels, self.synthetic,
                                                   self.decision_values))
            ],
        }


def loocv_evaluate(X, y, config=PipelineConfig(), mode="fold-safe", stream=RandomStream(0),
                   threads=1):
    """Leave-one-out metrics for boolean PD labels ``y``.

    ``fold-safe`` fits SMOTE and scaling inside each training fold.
    ``paper-faithful`` oversamples the whole data set first and then leaves
    out every row of the augmented set in turn, synthetic rows included
    (flagged in the result). Fold ``i`` draws from ``stream.substream(("fold", i))``
    so results do not depend on ``threads``.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    if min(int(y.sum()), int((~y).sum())) < 2:
        raise InsufficientDataError("leave-one-out needs at least 2 samples per class")
    if mode == "paper-faithful":
        X, y, synthetic = balance(X, y, SmoteConfig(config.smote_k, stream.substream("smote-all")))
        oversample = False
    else:
        synthetic = np.zeros(y.size, dtype=bool)
        oversample = True
    n = y.size

    def run(i):
        keep = np.arange(n) != i
        fm = fit_fold(X[keep], y[keep], config, stream.substream(("fold", i)), oversample)
        return float(fm.decision(X[i])), fm.model.gamma

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(run, range(n)))
    else:
        out = [run(i) for i in range(n)]
    f = np.array([o[0] for o in out])
    gammas = np.array([o[1] for o in out])
    pred = f >= 0
    metrics = compute_metrics(y, pred, f)
    orig = ~synthetic
    orig_metrics = compute_metrics(y[orig], pred[orig], f[orig])
    return CvResult(mode, metrics, f, y, synthetic, gammas, orig_metrics, asdict(config))
