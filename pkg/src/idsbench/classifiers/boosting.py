"""AdaBoost (SAMME over depth-1 trees) and second-order gradient boosted trees."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import expit, softmax

from .base import PredictionBatch, TrainedModel, argmax_lowest, as_labels, as_matrix, register, resolve_classes
from .tree import DecisionTree, apply_tree, fit_decision_tree


@register
@dataclass
class AdaBoost(TrainedModel):
    family = "AdaBoost"
    stumps: list = field(default_factory=list)
    stage_weights: np.ndarray = None
    stage_errors: np.ndarray = None

    def decision_function(self, X) -> np.ndarray:
        X = self.check_input(X)
        score = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for stump, alpha in zip(self.stumps, self.stage_weights):
            score[rows, stump.predict(X).labels] += alpha
        return score

    def predict(self, X) -> PredictionBatch:
        s = self.decision_function(X)
        total = float(np.sum(self.stage_weights)) or 1.0
        return PredictionBatch(argmax_lowest(s), s / total)


def fit_adaboost(X, y, n_estimators: int = 50, learning_rate: float = 1.0, n_classes: int | None = None,
                 seed: int = 0) -> AdaBoost:
    """Multiclass SAMME with Gini stumps.

    A stage whose weighted error reaches ``1 - 1/K`` is discarded and boosting
    stops; a perfect stage is kept with weight 1 and boosting stops.
    """
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    k = resolve_classes(y, n_classes)
    if k < 2:
        raise ValueError("AdaBoost needs at least 2 classes")
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    stumps, alphas, errors = [], [], []
    for m in range(n_estimators):
        stump = fit_decision_tree(X, y, sample_weight=w, max_depth=1, seed=seed + m, n_classes=k)
        miss = stump.predict(X).labels != y
        err = float(np.sum(w[miss]) / np.sum(w))
        if err <= 0.0:
            stumps.append(stump)
            alphas.append(1.0)
            errors.append(0.0)
            break
        if err >= 1.0 - 1.0 / k:
            if not stumps:
                # nothing better than chance: keep one stage so the model can predict
                stumps.append(stump)
                alphas.append(1.0)
                errors.append(err)
            break
        alpha = learning_rate * (math.log((1.0 - err) / err) + math.log(k - 1.0))
        stumps.append(stump)
        alphas.append(alpha)
        errors.append(err)
        if m == n_estimators - 1:
            break
        w = w * np.exp(alpha * miss)
        w /= w.sum()
    return AdaBoost(n_features=X.shape[1], n_classes=k,
                    hyperparams={"n_estimators": n_estimators, "learning_rate": learning_rate, "seed": seed},
                    stumps=stumps, stage_weights=np.asarray(alphas), stage_errors=np.asarray(errors))


# -- gradient boosted trees ----------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _soft(G, alpha):
    if alpha <= 0.0:
        return G
    if G > alpha:
        return G - alpha
    if G < -alpha:
        return G + alpha
    return 0.0


@numba.njit(cache=True, nogil=True)
def _similarity(G, H, lam, alpha):
    s = _soft(G, alpha)
    return s * s / (H + lam)


@numba.njit(cache=True, nogil=True)
def _grow_gbt(X, order, xs, g, h, max_depth, lam, alpha, gamma, min_child_weight):
    """Level-wise exact greedy regression tree on gradient statistics.

    ``order[f]`` lists row indices sorted by feature f and ``xs[f]`` the matching
    sorted values, so each level costs one sweep per feature with no re-sorting.
    """
    n, d = X.shape
    max_nodes = 2 ** (max_depth + 1) - 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    Gn = np.zeros(max_nodes)
    Hn = np.zeros(max_nodes)
    pos = np.zeros(n, dtype=np.int64)
    for r in range(n):
        Gn[0] += g[r]
        Hn[0] += h[r]
    n_nodes = 1
    lo, hi = 0, 1  # frontier = node ids lo..hi-1

    GL = np.zeros(max_nodes)
    HL = np.zeros(max_nodes)
    last = np.zeros(max_nodes)
    seen = np.zeros(max_nodes, dtype=np.bool_)
    best_gain = np.zeros(max_nodes)
    best_f = np.full(max_nodes, -1, dtype=np.int64)
    best_thr = np.zeros(max_nodes)

    for depth in range(max_depth):
        for nd in range(lo, hi):
            best_gain[nd] = 0.0
            best_f[nd] = -1
        for f in range(d):
            for nd in range(lo, hi):
                GL[nd] = 0.0
                HL[nd] = 0.0
                seen[nd] = False
            for t in range(n):
                r = order[f, t]
                nd = pos[r]
                if nd < 0:
                    continue
                v = xs[f, t]
                if seen[nd] and v != last[nd]:
                    HR = Hn[nd] - HL[nd]
                    if HL[nd] >= min_child_weight and HR >= min_child_weight:
                        GR = Gn[nd] - GL[nd]
                        gain = 0.5 * (_similarity(GL[nd], HL[nd], lam, alpha) + _similarity(GR, HR, lam, alpha)
                                      - _similarity(Gn[nd], Hn[nd], lam, alpha)) - gamma
                        if gain > best_gain[nd]:
                            thr = last[nd] / 2.0 + v / 2.0
                            if thr >= v or thr < last[nd]:
                                thr = last[nd]
                            best_gain[nd] = gain
                            best_f[nd] = f
                            best_thr[nd] = thr
                GL[nd] += g[r]
                HL[nd] += h[r]
                last[nd] = v
                seen[nd] = True

        new_lo = n_nodes
        any_split = False
        for nd in range(lo, hi):
            if best_f[nd] >= 0:
                feature[nd] = best_f[nd]
                threshold[nd] = best_thr[nd]
                left[nd] = n_nodes
                right[nd] = n_nodes + 1
                n_nodes += 2
                any_split = True
        for r in range(n):
            nd = pos[r]
            if nd < 0:
                continue
            if feature[nd] < 0:
                pos[r] = -1
                continue
            if X[r, feature[nd]] <= threshold[nd]:
                c = left[nd]
            else:
                c = right[nd]
            pos[r] = c
            Gn[c] += g[r]
            Hn[c] += h[r]
        lo, hi = new_lo, n_nodes
        if not any_split:
            break

    leaf_weight = np.zeros(n_nodes)
    for nd in range(n_nodes):
        if feature[nd] < 0:
            leaf_weight[nd] = -_soft(Gn[nd], alpha) / (Hn[nd] + lam)
    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), leaf_weight, Gn[:n_nodes].copy(), Hn[:n_nodes].copy())


@register
@dataclass
class RegressionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_weight: np.ndarray
    grad_sum: np.ndarray
    hess_sum: np.ndarray

    def predict(self, X) -> np.ndarray:
        return self.leaf_weight[apply_tree(X, self.feature, self.threshold, self.left, self.right)]


@register
@dataclass
class GradientBoostedTrees(TrainedModel):
    """``trees[round][k]`` is the round's tree for class k (a single tree when binary)."""

    family = "GBT"
    trees: list = field(default_factory=list)
    eta: float = 0.3
    base_score: float = 0.5

    @property
    def n_outputs(self) -> int:
        return 1 if self.n_classes <= 2 else self.n_classes

    def margin(self, X) -> np.ndarray:
        X = self.check_input(X)
        base = math.log(self.base_score / (1.0 - self.base_score)) if self.n_outputs == 1 else 0.0
        F = np.full((X.shape[0], self.n_outputs), base)
        for round_trees in self.trees:
            for k, t in enumerate(round_trees):
                F[:, k] += self.eta * t.predict(X)
        return F

    def predict_proba(self, X) -> np.ndarray:
        F = self.margin(X)
        if self.n_outputs == 1:
            p = expit(F[:, 0])
            return np.column_stack([1.0 - p, p])
        return softmax(F, axis=1)

    def predict(self, X) -> PredictionBatch:
        proba = self.predict_proba(X)
        return PredictionBatch(argmax_lowest(proba), proba)


def gradients(F: np.ndarray, y: np.ndarray, n_outputs: int) -> tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of the logistic / softmax loss w.r.t. the margins."""
    if n_outputs == 1:
        p = expit(F[:, 0])
        g = p - (y == 1)
        h = p * (1.0 - p)
        return g[:, None], np.maximum(h, 1e-16)[:, None]
    P = softmax(F, axis=1)
    Y = (y[:, None] == np.arange(n_outputs)[None, :])
    return P - Y, np.maximum(P * (1.0 - P), 1e-16)


def fit_gbt(X, y, n_rounds: int = 100, max_depth: int = 6, eta: float = 0.3, reg_lambda: float = 1.0,
            reg_alpha: float = 0.0, gamma: float = 0.0, min_child_weight: float = 1.0, base_score: float = 0.5,
            n_classes: int | None = None, seed: int = 0) -> GradientBoostedTrees:
    """Boosted regression trees fitted to first/second-order loss gradients.

    Leaf weight is ``-G / (H + lambda)`` (with optional L1 soft-thresholding of
    G); each round's trees are added with shrinkage ``eta``.
    """
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    k = resolve_classes(y, n_classes)
    if k < 2:
        raise ValueError("boosting needs at least 2 classes")
    n_out = 1 if k == 2 else k
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)
    xs = np.ascontiguousarray(np.take_along_axis(X.T, order, axis=1))
    model = GradientBoostedTrees(n_features=X.shape[1], n_classes=k,
                                 hyperparams={"n_rounds": n_rounds, "max_depth": max_depth, "eta": eta,
                                              "reg_lambda": reg_lambda, "reg_alpha": reg_alpha, "gamma": gamma,
                                              "min_child_weight": min_child_weight, "seed": seed},
                                 eta=float(eta), base_score=float(base_score))
    base = math.log(base_score / (1.0 - base_score)) if n_out == 1 else 0.0
    F = np.full((X.shape[0], n_out), base)
    for _ in range(n_rounds):
        g, h = gradients(F, y, n_out)
        round_trees = []
        for j in range(n_out):
            arrays = _grow_gbt(X, order, xs, np.ascontiguousarray(g[:, j]), np.ascontiguousarray(h[:, j]),
                               int(max_depth), float(reg_lambda), float(reg_alpha), float(gamma),
                               float(min_child_weight))
            round_trees.append(RegressionTree(*arrays))
        for j, t in enumerate(round_trees):
            F[:, j] += eta * t.predict(X)
        model.trees.append(round_trees)
    return model
