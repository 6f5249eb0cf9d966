from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .base import PredictionBatch, TrainedModel, argmax_lowest, as_labels, as_matrix, register, resolve_classes


@register
@dataclass
class GaussianNB(TrainedModel):
    family = "NB"
    priors: np.ndarray = None
    means: np.ndarray = None      # (K, d)
    variances: np.ndarray = None  # (K, d), smoothed
    epsilon: float = 0.0

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = self.check_input(X)
        out = np.empty((X.shape[0], self.n_classes))
        for k in range(self.n_classes):
            var = self.variances[k]
            ll = -0.5 * np.sum(np.log(2.0 * np.pi * var))
            ll = ll - 0.5 * np.sum((X - self.means[k]) ** 2 / var, axis=1)
            out[:, k] = np.log(self.priors[k]) + ll
        return out

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def predict(self, X) -> PredictionBatch:
        jll = self.joint_log_likelihood(X)
        proba = np.exp(jll - logsumexp(jll, axis=1, keepdims=True))
        return PredictionBatch(argmax_lowest(jll), proba)


def fit_gaussian_nb(X, y, n_classes: int | None = None, var_smoothing: float = 1e-9) -> GaussianNB:
    """Gaussian naive Bayes with empirical priors.

    A fraction ``var_smoothing`` of the largest per-feature variance is added
    to every class variance.
    """
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    k = resolve_classes(y, n_classes, require_all=True)
    epsilon = var_smoothing * float(np.max(np.var(X, axis=0))) if X.size else 0.0
    means = np.zeros((k, X.shape[1]))
    variances = np.zeros((k, X.shape[1]))
    counts = np.bincount(y, minlength=k).astype(np.float64)
    for c in range(k):
        Xc = X[y == c]
        means[c] = Xc.mean(axis=0)
        variances[c] = Xc.var(axis=0)
    variances += epsilon
    if epsilon == 0.0:
        # all features constant: keep densities finite
        variances[variances == 0] = np.finfo(np.float64).tiny
    return GaussianNB(n_features=X.shape[1], n_classes=k, hyperparams={"var_smoothing": var_smoothing},
                      priors=counts / counts.sum(), means=means, variances=variances, epsilon=epsilon)
