"""RBF-kernel support vector machine trained by SMO, one-vs-rest for multiclass.

The working-set selection is the second-order rule used by LIBSVM; kernel rows
are computed on demand and kept in a small least-recently-used cache.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numba
import numpy as np

from ..errors import NoConvergence, TrainingSetTooLarge
from ..preprocess import stratified_subsample
from .base import PredictionBatch, TrainedModel, argmax_lowest, as_labels, as_matrix, register, resolve_classes

TAU = 1e-12
DEFAULT_CAP = 20_000
_CACHE_BYTES = 200 * 1024 * 1024


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for every pair of rows."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    d2 = (A * A).sum(axis=1)[:, None] - 2.0 * A @ B.T + (B * B).sum(axis=1)[None, :]
    return np.exp(-gamma * np.maximum(d2, 0.0))


@numba.njit(cache=True, nogil=True)
def _kernel_row(X, sq, i, gamma, out):
    n, d = X.shape
    for t in range(n):
        dot = 0.0
        for c in range(d):
            dot += X[i, c] * X[t, c]
        v = sq[i] + sq[t] - 2.0 * dot
        if v < 0.0:
            v = 0.0
        out[t] = np.exp(-gamma * v)


@numba.njit(cache=True, nogil=True)
def _get_row(X, sq, gamma, i, slot_of, owner, stamp, cache, clock):
    s = slot_of[i]
    if s < 0:
        # evict the least recently used slot
        s = 0
        for q in range(cache.shape[0]):
            if stamp[q] < stamp[s]:
                s = q
        if owner[s] >= 0:
            slot_of[owner[s]] = -1
        owner[s] = i
        slot_of[i] = s
        _kernel_row(X, sq, i, gamma, cache[s])
    stamp[s] = clock
    return s


@numba.njit(cache=True, nogil=True)
def _smo(X, y, C, gamma, eps, max_iter, cache_rows):
    """Solve min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0 with Q_ij = y_i y_j K_ij.

    Returns (alpha, rho, iterations, converged).
    """
    n = X.shape[0]
    sq = np.empty(n)
    for i in range(n):
        s = 0.0
        for c in range(X.shape[1]):
            s += X[i, c] * X[i, c]
        sq[i] = s
    cache_rows = max(2, min(cache_rows, n))
    cache = np.empty((cache_rows, n))
    slot_of = np.full(n, -1, dtype=np.int64)
    owner = np.full(cache_rows, -1, dtype=np.int64)
    stamp = np.full(cache_rows, -1, dtype=np.int64)

    alpha = np.zeros(n)
    G = np.full(n, -1.0)
    clock = 0
    it = 0
    converged = False
    while it < max_iter:
        # i: maximal violating index in I_up
        Gmax = -np.inf
        i = -1
        for t in range(n):
            if y[t] > 0:
                if alpha[t] < C and -G[t] >= Gmax:
                    Gmax = -G[t]
                    i = t
            else:
                if alpha[t] > 0.0 and G[t] >= Gmax:
                    Gmax = G[t]
                    i = t
        if i < 0:
            converged = True
            break
        clock += 1
        si = _get_row(X, sq, gamma, i, slot_of, owner, stamp, cache, clock)
        Ki = cache[si]

        # j: second-order choice in I_low
        Gmax2 = -np.inf
        j = -1
        best = np.inf
        for t in range(n):
            if y[t] > 0:
                if alpha[t] > 0.0:
                    diff = Gmax + G[t]
                    if G[t] >= Gmax2:
                        Gmax2 = G[t]
                    if diff > 0.0:
                        quad = 2.0 - 2.0 * y[i] * y[t] * Ki[t]
                        if quad <= 0.0:
                            quad = TAU
                        obj = -(diff * diff) / quad
                        if obj <= best:
                            best = obj
                            j = t
            else:
                if alpha[t] < C:
                    diff = Gmax - G[t]
                    if -G[t] >= Gmax2:
                        Gmax2 = -G[t]
                    if diff > 0.0:
                        quad = 2.0 + 2.0 * y[i] * y[t] * Ki[t]
                        if quad <= 0.0:
                            quad = TAU
                        obj = -(diff * diff) / quad
                        if obj <= best:
                            best = obj
                            j = t
        if Gmax + Gmax2 < eps or j < 0:
            converged = True
            break
        it += 1
        clock += 1
        sj = _get_row(X, sq, gamma, j, slot_of, owner, stamp, cache, clock)
        Kj = cache[sj]
        si = slot_of[i]
        if si < 0:  # evicted by j's fetch when the cache holds 2 rows
            clock += 1
            si = _get_row(X, sq, gamma, i, slot_of, owner, stamp, cache, clock)
        Ki = cache[si]

        ai, aj = alpha[i], alpha[j]
        Qij = y[i] * y[j] * Ki[j]
        if y[i] != y[j]:
            quad = 2.0 + 2.0 * Qij
            if quad <= 0.0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0.0:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > 0.0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = 2.0 - 2.0 * Qij
            if quad <= 0.0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = total
        dai = alpha[i] - ai
        daj = alpha[j] - aj
        for t in range(n):
            G[t] += y[t] * (y[i] * Ki[t] * dai + y[j] * Kj[t] * daj)

    # bias from free vectors, else midpoint of the feasible interval
    ub = np.inf
    lb = -np.inf
    nfree = 0
    sfree = 0.0
    for t in range(n):
        yG = y[t] * G[t]
        if alpha[t] >= C:
            if y[t] < 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        elif alpha[t] <= 0.0:
            if y[t] > 0:
                ub = min(ub, yG)
            else:
                lb = max(lb, yG)
        else:
            nfree += 1
            sfree += yG
    if nfree > 0:
        rho = sfree / nfree
    else:
        rho = (ub + lb) / 2.0
    return alpha, rho, it, converged


@register
@dataclass
class SupportVectorMachine(TrainedModel):
    """One binary machine per column of ``dual_coef`` (a single one when K = 2).

    ``dual_coef[m, s] = alpha_s * y_s`` for support vector s in machine m;
    decision value is ``K(x, SV) @ dual_coef[m] - rho[m]``.
    """

    family = "SVM"
    support_vectors: np.ndarray = None
    dual_coef: np.ndarray = None   # (n_machines, n_sv)
    rho: np.ndarray = None
    gamma: float = 1.0
    C: float = 1.0
    iterations: np.ndarray = None
    converged: bool = True
    subsampled: bool = False

    def decision_function(self, X) -> np.ndarray:
        X = self.check_input(X)
        out = np.empty((X.shape[0], len(self.rho)))
        step = max(1, (64 * 1024 * 1024) // (8 * max(len(self.support_vectors), 1)))
        for start in range(0, X.shape[0], step):
            K = rbf_kernel(X[start:start + step], self.support_vectors, self.gamma)
            out[start:start + step] = K @ self.dual_coef.T - self.rho[None, :]
        return out

    def predict(self, X) -> PredictionBatch:
        f = self.decision_function(X)
        if self.n_classes == 2:
            return PredictionBatch((f[:, 0] > 0).astype(np.int64), np.column_stack([-f[:, 0], f[:, 0]]))
        return PredictionBatch(argmax_lowest(f), f)


def default_gamma(X: np.ndarray) -> float:
    v = float(X.var())
    return 1.0 / (X.shape[1] * v) if v > 0 else 1.0


def fit_svm_rbf(X, y, C: float = 1.0, gamma: float | str | None = "scale", tol: float = 1e-3,
                max_iter: int | None = None, cap: int | None = DEFAULT_CAP, subsample: bool = True,
                seed: int = 0, n_classes: int | None = None) -> SupportVectorMachine:
    """Soft-margin RBF SVM.

    ``gamma="scale"`` (or None) uses ``1 / (d * Var(X))``. Training sets above
    ``cap`` rows are reduced by a seeded stratified subsample, or rejected with
    ``TrainingSetTooLarge`` when ``subsample`` is False. Hitting ``max_iter``
    (default ``max(10^7, 100 n)``) emits ``NoConvergence`` and sets
    ``converged=False``.
    """
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    k = resolve_classes(y, n_classes)
    if len(np.unique(y)) < 2:
        raise ValueError("SVM needs at least 2 classes in the training data")
    if C <= 0:
        raise ValueError("C must be positive")
    subsampled = False
    if cap is not None and X.shape[0] > cap:
        if not subsample:
            raise TrainingSetTooLarge(f"{X.shape[0]} rows exceed the SVM cap of {cap}")
        keep = stratified_subsample(y, cap, seed)
        X, y = np.ascontiguousarray(X[keep]), y[keep]
        subsampled = True
    g = default_gamma(X) if gamma is None or gamma == "scale" else float(gamma)
    n = X.shape[0]
    iters = max(10_000_000, 100 * n) if max_iter is None else int(max_iter)
    cache_rows = max(2, _CACHE_BYTES // (8 * n))

    positives = [1] if k == 2 else list(range(k))
    alphas, rhos, its, ok = [], [], [], True
    for c in positives:
        yy = np.where(y == c, 1.0, -1.0)
        if np.all(yy == yy[0]):
            # class absent (or everything): constant machine on the right side
            alphas.append(np.zeros(n))
            rhos.append(-yy[0])
            its.append(0)
            continue
        a, rho, it, conv = _smo(X, yy, float(C), g, float(tol), iters, int(cache_rows))
        alphas.append(a * yy)
        rhos.append(rho)
        its.append(it)
        ok &= bool(conv)
    coef = np.vstack(alphas)
    sv = np.flatnonzero(np.any(coef != 0.0, axis=0))
    if not ok:
        warnings.warn(f"SMO stopped at the iteration cap ({iters}) before reaching tolerance {tol}",
                      NoConvergence, stacklevel=2)
    return SupportVectorMachine(n_features=X.shape[1], n_classes=k,
                                hyperparams={"C": C, "gamma": gamma, "tol": tol, "cap": cap, "seed": seed},
                                support_vectors=X[sv].copy(), dual_coef=np.ascontiguousarray(coef[:, sv]),
                                rho=np.asarray(rhos, dtype=np.float64), gamma=g, C=float(C),
                                iterations=np.asarray(its, dtype=np.int64), converged=ok, subsampled=subsampled)
