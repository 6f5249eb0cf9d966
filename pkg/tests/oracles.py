"""Small, slow, obviously-correct reference implementations used by the tests."""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize


def gini_of(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    t = counts.sum()
    return 0.0 if t == 0 else 1.0 - float(((counts / t) ** 2).sum())


def best_split(X, y, w=None, k=None):
    """Exhaustive (feature, midpoint) search minimizing weighted child Gini.

    Ties go to the lower feature, then the lower threshold. Returns
    (feature, threshold, weighted impurity) or None when nothing improves.
    """
    X = np.asarray(X, float)
    y = np.asarray(y)
    w = np.ones(len(y)) if w is None else np.asarray(w, float)
    k = int(y.max()) + 1 if k is None else k
    parent = gini_of(np.bincount(y, weights=w, minlength=k)) * w.sum()
    best = None
    for f in range(X.shape[1]):
        vals = np.unique(X[:, f])
        for a, b in zip(vals[:-1], vals[1:]):
            thr = a / 2 + b / 2
            left = X[:, f] <= thr
            imp = (gini_of(np.bincount(y[left], weights=w[left], minlength=k)) * w[left].sum()
                   + gini_of(np.bincount(y[~left], weights=w[~left], minlength=k)) * w[~left].sum())
            if best is None or imp < best[2] - 1e-12:
                best = (f, thr, imp)
    if best is None or not best[2] < parent - 1e-12:
        return None
    return best


def stump_predict(X, split, y, w, k):
    f, thr, _ = split
    left = X[:, f] <= thr
    lv = np.bincount(y[left], weights=w[left], minlength=k)
    rv = np.bincount(y[~left], weights=w[~left], minlength=k)
    return np.where(left, np.argmax(lv), np.argmax(rv))


def samme_trace(X, y, k, stages):
    """Hand-run SAMME over exhaustive-search stumps; returns the stage weights."""
    n = len(y)
    w = np.full(n, 1.0 / n)
    alphas = []
    for _ in range(stages):
        split = best_split(X, y, w, k)
        if split is None:
            pred = np.full(n, np.argmax(np.bincount(y, weights=w, minlength=k)))
        else:
            pred = stump_predict(X, split, y, w, k)
        miss = pred != y
        err = w[miss].sum() / w.sum()
        if err <= 0:
            alphas.append(1.0)
            break
        if err >= 1 - 1 / k:
            break
        a = math.log((1 - err) / err) + math.log(k - 1)
        alphas.append(a)
        w = w * np.exp(a * miss)
        w = w / w.sum()
    return alphas


def knn_predict(Xtr, ytr, Q, k):
    out = []
    for q in Q:
        d = [(float(np.sum((x - q) ** 2)), i) for i, x in enumerate(Xtr)]
        d.sort()
        votes = np.bincount([ytr[i] for _, i in d[:k]], minlength=int(ytr.max()) + 1)
        out.append(int(np.argmax(votes)))
    return np.array(out)


def gaussian_nb_posterior(X, y, q, eps_frac=1e-9):
    X = np.asarray(X, float)
    eps = eps_frac * X.var(axis=0).max()
    classes = np.unique(y)
    logp = []
    for c in classes:
        Xc = X[y == c]
        prior = len(Xc) / len(X)
        mu = Xc.mean(axis=0)
        var = Xc.var(axis=0) + eps
        lp = math.log(prior)
        for j in range(X.shape[1]):
            lp += -0.5 * math.log(2 * math.pi * var[j]) - (q[j] - mu[j]) ** 2 / (2 * var[j])
        logp.append(lp)
    logp = np.array(logp)
    p = np.exp(logp - logp.max())
    return p / p.sum()


def lda_posterior(X, y, q):
    X = np.asarray(X, float)
    classes = np.unique(y)
    n, K = len(X), len(classes)
    means = np.array([X[y == c].mean(axis=0) for c in classes])
    S = sum((X[y == c] - means[i]).T @ (X[y == c] - means[i]) for i, c in enumerate(classes)) / (n - K)
    Si = np.linalg.inv(S)
    priors = np.array([np.mean(y == c) for c in classes])
    delta = np.array([q @ Si @ m - 0.5 * m @ Si @ m + math.log(p) for m, p in zip(means, priors)])
    e = np.exp(delta - delta.max())
    return e / e.sum()


def svm_dual_qp(X, y01, C, gamma):
    """Dense dual soft-margin SVM via SLSQP; returns (alpha * y, b)."""
    y = np.where(np.asarray(y01) == 1, 1.0, -1.0)
    d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    K = np.exp(-gamma * d2)
    Q = (y[:, None] * y[None, :]) * K
    n = len(y)
    res = minimize(lambda a: 0.5 * a @ Q @ a - a.sum(), np.zeros(n), jac=lambda a: Q @ a - 1.0,
                   bounds=[(0, C)] * n, constraints=[{"type": "eq", "fun": lambda a: a @ y, "jac": lambda a: y}],
                   method="SLSQP", options={"ftol": 1e-14, "maxiter": 2000})
    a = res.x
    free = (a > 1e-6) & (a < C - 1e-6)
    f = K @ (a * y)
    b = float(np.mean(y[free] - f[free])) if free.any() else 0.0
    return a * y, b, K
