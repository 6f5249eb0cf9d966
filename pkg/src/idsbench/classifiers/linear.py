"""Linear models: L2 logistic regression (L-BFGS) and a hinge-loss SGD linear SVM."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numba
import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_expit

from ..errors import NoConvergence
from .base import PredictionBatch, TrainedModel, argmax_lowest, as_labels, as_matrix, register, resolve_classes


def sigmoid(z):
    return expit(z)


def _positives(k: int) -> list[int]:
    return [1] if k == 2 else list(range(k))


@register
@dataclass
class LinearModel(TrainedModel):
    """Weights ``coef[m]`` and bias ``intercept[m]`` per one-vs-rest machine."""

    family = "LR"
    coef: np.ndarray = None
    intercept: np.ndarray = None
    converged: bool = True
    n_iter: np.ndarray = None

    def decision_function(self, X) -> np.ndarray:
        X = self.check_input(X)
        return X @ self.coef.T + self.intercept[None, :]


@register
@dataclass
class LogisticRegression(LinearModel):
    family = "LR"

    def predict_proba(self, X) -> np.ndarray:
        z = self.decision_function(X)
        if self.n_classes == 2:
            p = expit(z[:, 0])
            return np.column_stack([1.0 - p, p])
        p = expit(z)
        s = p.sum(axis=1, keepdims=True)
        s[s == 0] = 1.0
        return p / s

    def predict(self, X) -> PredictionBatch:
        proba = self.predict_proba(X)
        return PredictionBatch(argmax_lowest(proba), proba)


def logistic_objective(wb: np.ndarray, X: np.ndarray, y: np.ndarray, C: float) -> tuple[float, np.ndarray]:
    """``C * sum(log(1 + exp(-y z))) + 1/2 ||w||^2`` and its gradient; y in {-1, +1}, bias last and unpenalized."""
    w, b = wb[:-1], wb[-1]
    z = X @ w + b
    yz = y * z
    f = -C * np.sum(log_expit(yz)) + 0.5 * np.dot(w, w)
    r = -C * y * expit(-yz)
    grad = np.empty_like(wb)
    grad[:-1] = X.T @ r + w
    grad[-1] = r.sum()
    return float(f), grad


def fit_logistic_regression(X, y, C: float = 1.0, max_iter: int = 1000, tol: float = 1e-5,
                            n_classes: int | None = None, seed: int = 0) -> LogisticRegression:
    """L2-penalized logistic regression, one-vs-rest beyond two classes.

    Each machine is minimized with limited-memory BFGS until the projected
    gradient falls below ``tol`` or ``max_iter`` iterations pass.
    """
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    k = resolve_classes(y, n_classes)
    if len(np.unique(y)) < 2:
        raise ValueError("logistic regression needs at least 2 classes in the training data")
    d = X.shape[1]
    coefs, biases, iters, ok = [], [], [], True
    for c in _positives(k):
        yy = np.where(y == c, 1.0, -1.0)
        res = minimize(logistic_objective, np.zeros(d + 1), args=(X, yy, float(C)), jac=True, method="L-BFGS-B",
                       options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-15, "maxls": 50})
        coefs.append(res.x[:-1])
        biases.append(res.x[-1])
        iters.append(res.nit)
        if res.nit >= max_iter:
            ok = False
    if not ok:
        warnings.warn(f"L-BFGS hit {max_iter} iterations", NoConvergence, stacklevel=2)
    return LogisticRegression(n_features=d, n_classes=k, hyperparams={"C": C, "max_iter": max_iter, "tol": tol},
                              coef=np.vstack(coefs), intercept=np.asarray(biases), converged=ok,
                              n_iter=np.asarray(iters, dtype=np.int64))


# -- stochastic gradient descent, hinge loss -----------------------------------

OPTIMAL = 0
CONSTANT = 1
SCHEDULES = {"optimal": OPTIMAL, "constant": CONSTANT}


@numba.njit(cache=True, nogil=True)
def _sgd_epochs(X, y, alpha, schedule, eta0, max_epochs, tol, n_no_change, shuffle, seed):
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    np.random.seed(seed)
    idx = np.arange(n)
    typw = np.sqrt(1.0 / np.sqrt(alpha))
    t0 = 1.0 / (typw * alpha)
    t = 0
    best = np.inf
    stall = 0
    epochs = 0
    for epoch in range(max_epochs):
        if shuffle:
            np.random.shuffle(idx)
        total = 0.0
        for q in range(n):
            r = idx[q]
            if schedule == OPTIMAL:
                eta = 1.0 / (alpha * (t0 + t))
            else:
                eta = eta0
            z = b
            for c in range(d):
                z += w[c] * X[r, c]
            m = y[r] * z
            if m < 1.0:
                total += 1.0 - m
            scale = 1.0 - eta * alpha
            for c in range(d):
                w[c] *= scale
            if m < 1.0:
                for c in range(d):
                    w[c] += eta * y[r] * X[r, c]
                b += eta * y[r]
            t += 1
        epochs = epoch + 1
        loss = total / n
        if tol >= 0.0:
            if loss > best - tol:
                stall += 1
            else:
                stall = 0
            if loss < best:
                best = loss
            if stall >= n_no_change:
                break
    return w, b, epochs


@register
@dataclass
class SGDClassifier(LinearModel):
    family = "SGD"

    def predict(self, X) -> PredictionBatch:
        f = self.decision_function(X)
        if self.n_classes == 2:
            return PredictionBatch((f[:, 0] > 0).astype(np.int64), np.column_stack([-f[:, 0], f[:, 0]]))
        return PredictionBatch(argmax_lowest(f), f)


def fit_sgd_hinge(X, y, alpha: float = 1e-4, max_epochs: int = 1000, tol: float | None = 1e-3,
                  n_iter_no_change: int = 5, learning_rate: str = "optimal", eta0: float = 0.0,
                  shuffle: bool = True, seed: int = 0, n_classes: int | None = None) -> SGDClassifier:
    """Linear SVM by per-sample subgradient steps on the L2-regularized hinge loss.

    Per sample, ``w <- (1 - eta*alpha) w + eta*y*x`` when ``y (w.x + b) < 1`` and
    just the shrink otherwise; the bias is not regularized. The "optimal"
    schedule is ``eta_t = 1 / (alpha (t0 + t))``. Training stops after
    ``max_epochs`` or when the mean epoch loss fails to improve by ``tol`` for
    ``n_iter_no_change`` consecutive epochs.
    """
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    k = resolve_classes(y, n_classes)
    if len(np.unique(y)) < 2:
        raise ValueError("SGD needs at least 2 classes in the training data")
    if alpha <= 0 and learning_rate == "optimal":
        raise ValueError("the optimal schedule needs alpha > 0")
    if learning_rate not in SCHEDULES:
        raise ValueError(f"learning_rate must be one of {sorted(SCHEDULES)}")
    positives = _positives(k)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(len(positives))]
    coefs, biases, epochs = [], [], []
    for c, s in zip(positives, seeds):
        yy = np.where(y == c, 1.0, -1.0)
        w, b, e = _sgd_epochs(X, yy, float(alpha), SCHEDULES[learning_rate], float(eta0), int(max_epochs),
                              -1.0 if tol is None else float(tol), int(n_iter_no_change), bool(shuffle), s)
        coefs.append(w)
        biases.append(b)
        epochs.append(e)
    return SGDClassifier(n_features=X.shape[1], n_classes=k,
                         hyperparams={"alpha": alpha, "max_epochs": max_epochs, "tol": tol,
                                      "learning_rate": learning_rate, "eta0": eta0, "shuffle": shuffle, "seed": seed},
                         coef=np.vstack(coefs), intercept=np.asarray(biases), converged=True,
                         n_iter=np.asarray(epochs, dtype=np.int64))
