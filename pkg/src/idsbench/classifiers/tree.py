"""CART classification trees and random forests.

Trees grow depth-first with exhaustive (feature, midpoint) split search until
every leaf is pure or holds fewer than ``min_samples_split`` rows. A split is
only made when it strictly lowers the weighted impurity.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .base import PredictionBatch, TrainedModel, argmax_lowest, as_labels, as_matrix, register, resolve_classes

GINI = 0
ENTROPY = 1
CRITERIA = {"gini": GINI, "entropy": ENTROPY}


def gini(p) -> float:
    p = np.asarray(p, dtype=np.float64)
    return float(1.0 - np.sum(p * p))


def entropy(p) -> float:
    p = np.asarray(p, dtype=np.float64)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


@numba.njit(cache=True, nogil=True)
def _node_impurity(counts, total, criterion):
    if total <= 0.0:
        return 0.0
    if criterion == GINI:
        s = 0.0
        for c in range(counts.shape[0]):
            q = counts[c] / total
            s += q * q
        return 1.0 - s
    h = 0.0
    for c in range(counts.shape[0]):
        if counts[c] > 0.0:
            q = counts[c] / total
            h -= q * math.log2(q)
    return h


@numba.njit(cache=True, nogil=True)
def _grow(X, y, w, n_classes, max_depth, min_samples_split, max_features, criterion, seed):
    n, d = X.shape
    np.random.seed(seed)
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros((cap, n_classes))
    n_samples = np.zeros(cap, dtype=np.int64)
    impurity = np.zeros(cap)

    idx = np.arange(n)
    st_node = np.empty(cap, dtype=np.int64)
    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    sp = 0
    st_node[0], st_start[0], st_end[0], st_depth[0] = 0, 0, n, 0
    sp = 1
    n_nodes = 1

    feats = np.arange(d)
    tot = np.zeros(n_classes)
    lc = np.zeros(n_classes)
    rc = np.zeros(n_classes)
    vals = np.empty(n)

    while sp > 0:
        sp -= 1
        node, start, end, depth = st_node[sp], st_start[sp], st_end[sp], st_depth[sp]
        m = end - start
        tot[:] = 0.0
        for i in range(start, end):
            r = idx[i]
            tot[y[r]] += w[r]
        W = tot.sum()
        value[node, :] = tot
        n_samples[node] = m
        imp = _node_impurity(tot, W, criterion)
        impurity[node] = imp
        if imp <= 1e-15 or m < min_samples_split or (max_depth >= 0 and depth >= max_depth):
            continue

        if criterion == GINI:
            baseline = 0.0
            for c in range(n_classes):
                baseline += tot[c] * tot[c]
            baseline /= W
        else:
            baseline = -W * imp
        tol = 1e-12 * W

        if max_features < d:
            for i in range(d - 1, 0, -1):
                j = np.random.randint(0, i + 1)
                tmp = feats[i]
                feats[i] = feats[j]
                feats[j] = tmp

        best_f = -1
        best_thr = 0.0
        best_score = -np.inf
        visited = 0
        for fi in range(d):
            if visited >= max_features:
                break
            f = feats[fi]
            for i in range(m):
                vals[i] = X[idx[start + i], f]
            order = np.argsort(vals[:m])
            if vals[order[0]] == vals[order[m - 1]]:
                continue
            visited += 1
            lc[:] = 0.0
            rc[:] = tot
            wl = 0.0
            wr = W
            lsq = 0.0
            rsq = 0.0
            for c in range(n_classes):
                rsq += tot[c] * tot[c]
            for i in range(m - 1):
                r = idx[start + order[i]]
                c = y[r]
                ww = w[r]
                lsq += 2.0 * lc[c] * ww + ww * ww
                rsq += -2.0 * rc[c] * ww + ww * ww
                lc[c] += ww
                rc[c] -= ww
                wl += ww
                wr -= ww
                v0 = vals[order[i]]
                v1 = vals[order[i + 1]]
                if not v0 < v1:
                    continue
                if wl <= 0.0 or wr <= 0.0:
                    continue
                if criterion == GINI:
                    score = lsq / wl + rsq / wr
                else:
                    score = -(wl * _node_impurity(lc, wl, criterion) + wr * _node_impurity(rc, wr, criterion))
                thr = v0 / 2.0 + v1 / 2.0
                if thr >= v1 or thr < v0:
                    thr = v0
                if score > best_score or (score == best_score and (f < best_f or (f == best_f and thr < best_thr))):
                    best_score = score
                    best_f = f
                    best_thr = thr

        if best_f < 0 or not best_score > baseline + tol:
            continue

        i = start
        j = end - 1
        while i <= j:
            if X[idx[i], best_f] <= best_thr:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        mid = i
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lnode
        right[node] = rnode
        st_node[sp], st_start[sp], st_end[sp], st_depth[sp] = rnode, mid, end, depth + 1
        sp += 1
        st_node[sp], st_start[sp], st_end[sp], st_depth[sp] = lnode, start, mid, depth + 1
        sp += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy(), n_samples[:n_nodes].copy(),
            impurity[:n_nodes].copy())


@numba.njit(cache=True, nogil=True)
def apply_tree(X, feature, threshold, left, right):
    """Leaf node id reached by every row of X."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while left[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


@register
@dataclass
class DecisionTree(TrainedModel):
    family = "DT"
    feature: np.ndarray = None
    threshold: np.ndarray = None
    left: np.ndarray = None
    right: np.ndarray = None
    value: np.ndarray = None       # (n_nodes, K) weighted class counts
    n_node_samples: np.ndarray = None
    impurity: np.ndarray = None

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.left[node] >= 0:
                depth[self.left[node]] = depth[node] + 1
                depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        X = self.check_input(X)
        return apply_tree(X, self.feature, self.threshold, self.left, self.right)

    def predict_proba(self, X) -> np.ndarray:
        v = self.value[self.apply(X)]
        return v / v.sum(axis=1, keepdims=True)

    def predict(self, X) -> PredictionBatch:
        proba = self.predict_proba(X)
        return PredictionBatch(argmax_lowest(proba), proba)


def _max_features(spec, d: int) -> int:
    if spec is None:
        return d
    if spec == "sqrt":
        return max(1, int(math.sqrt(d)))
    if spec == "log2":
        return max(1, int(math.log2(d)))
    if isinstance(spec, float):
        return max(1, int(spec * d))
    return max(1, min(int(spec), d))


def _seed32(seed) -> int:
    return int(np.random.SeedSequence(seed).generate_state(1)[0])


def fit_decision_tree(X, y, criterion: str = "gini", sample_weight=None, max_depth: int | None = None,
                      min_samples_split: int = 2, max_features=None, seed: int = 0,
                      n_classes: int | None = None) -> DecisionTree:
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    if not X.shape[0]:
        raise ValueError("cannot fit a tree on empty data")
    k = resolve_classes(y, n_classes)
    w = np.ones(X.shape[0]) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    keep = w > 0
    if not keep.all():
        X, y, w = np.ascontiguousarray(X[keep]), y[keep], w[keep]
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {sorted(CRITERIA)}")
    mf = _max_features(max_features, X.shape[1])
    arrays = _grow(X, y, w, k, -1 if max_depth is None else int(max_depth), int(min_samples_split), mf,
                   CRITERIA[criterion], _seed32(seed))
    feature, threshold, left, right, value, n_samples, impurity = arrays
    return DecisionTree(n_features=X.shape[1], n_classes=k,
                        hyperparams={"criterion": criterion, "max_depth": max_depth,
                                     "min_samples_split": min_samples_split, "max_features": max_features,
                                     "seed": seed},
                        feature=feature, threshold=threshold, left=left, right=right, value=value,
                        n_node_samples=n_samples, impurity=impurity)


@register
@dataclass
class RandomForest(TrainedModel):
    family = "RF"
    trees: list = field(default_factory=list)
    tree_seeds: list = field(default_factory=list)

    def votes(self, X) -> np.ndarray:
        X = self.check_input(X)
        counts = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for t in self.trees:
            leaf = apply_tree(X, t.feature, t.threshold, t.left, t.right)
            counts[rows, np.argmax(t.value[leaf], axis=1)] += 1
        return counts

    def predict(self, X) -> PredictionBatch:
        counts = self.votes(X)
        return PredictionBatch(argmax_lowest(counts), counts / max(len(self.trees), 1))


def fit_random_forest(X, y, n_estimators: int = 100, max_features="sqrt", bootstrap: bool = True,
                      criterion: str = "gini", seed: int = 0, n_jobs: int = 1,
                      n_classes: int | None = None) -> RandomForest:
    """Bagged Gini trees with a random feature subset considered at each split.

    Each tree gets its own child seed, which drives both its bootstrap draw and
    its feature sampling, so results do not depend on ``n_jobs``.
    """
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    k = resolve_classes(y, n_classes)
    n = X.shape[0]
    children = np.random.SeedSequence(seed).spawn(n_estimators)
    tree_seeds = [int(c.generate_state(1)[0]) for c in children]

    def one(ts: int) -> DecisionTree:
        if bootstrap:
            draw = np.random.default_rng(ts).integers(0, n, size=n)
            w = np.bincount(draw, minlength=n).astype(np.float64)
        else:
            w = None
        return fit_decision_tree(X, y, criterion=criterion, sample_weight=w, max_features=max_features,
                                 seed=ts, n_classes=k)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            trees = list(pool.map(one, tree_seeds))
    else:
        trees = [one(ts) for ts in tree_seeds]
    return RandomForest(n_features=X.shape[1], n_classes=k,
                        hyperparams={"n_estimators": n_estimators, "max_features": max_features,
                                     "bootstrap": bootstrap, "criterion": criterion, "seed": seed},
                        trees=trees, tree_seeds=tree_seeds)
