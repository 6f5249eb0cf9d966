from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import DegenerateCovariance
from .base import PredictionBatch, TrainedModel, argmax_lowest, as_labels, as_matrix, register, resolve_classes


@register
@dataclass
class LinearDiscriminant(TrainedModel):
    """Shared-covariance Gaussian classifier.

    ``scalings`` whitens the pooled within-class covariance restricted to the
    retained singular directions, so discriminants are plain squared distances.
    """

    family = "LDA"
    priors: np.ndarray = None
    means: np.ndarray = None      # (K, d)
    scalings: np.ndarray = None   # (d, r)
    rank: int = 0

    def decision_function(self, X) -> np.ndarray:
        X = self.check_input(X)
        Z = X @ self.scalings
        M = self.means @ self.scalings
        d2 = (Z * Z).sum(axis=1)[:, None] - 2.0 * Z @ M.T + (M * M).sum(axis=1)[None, :]
        return -0.5 * d2 + np.log(self.priors)[None, :]

    def predict_proba(self, X) -> np.ndarray:
        s = self.decision_function(X)
        return np.exp(s - logsumexp(s, axis=1, keepdims=True))

    def predict(self, X) -> PredictionBatch:
        s = self.decision_function(X)
        return PredictionBatch(argmax_lowest(s), np.exp(s - logsumexp(s, axis=1, keepdims=True)))


def fit_lda(X, y, n_classes: int | None = None, tol: float = 1e-9) -> LinearDiscriminant:
    """SVD solver, no shrinkage, empirical priors.

    Singular directions below ``tol`` times the largest singular value of the
    standardized within-class data are dropped.
    """
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    k = resolve_classes(y, n_classes, require_all=True)
    if k < 2:
        raise ValueError("LDA needs at least 2 classes")
    n, d = X.shape
    if n <= k:
        raise DegenerateCovariance(f"{n} samples cannot estimate a pooled covariance for {k} classes")
    counts = np.bincount(y, minlength=k).astype(np.float64)
    means = np.zeros((k, d))
    for c in range(k):
        means[c] = X[y == c].mean(axis=0)
    Xc = X - means[y]
    std = Xc.std(axis=0)
    std[std == 0] = 1.0
    Xs = np.sqrt(1.0 / (n - k)) * (Xc / std)
    _, S, Vt = np.linalg.svd(Xs, full_matrices=False)
    if not len(S) or S[0] <= 0:
        raise DegenerateCovariance("within-class scatter is zero")
    rank = int(np.sum(S > tol * S[0]))
    scalings = (Vt[:rank].T / S[:rank]) / std[:, None]
    return LinearDiscriminant(n_features=d, n_classes=k, hyperparams={"solver": "svd", "tol": tol},
                              priors=counts / n, means=means, scalings=scalings, rank=rank)
