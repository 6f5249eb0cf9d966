from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..errors import KTooLarge
from .base import PredictionBatch, TrainedModel, argmax_lowest, as_labels, as_matrix, register, resolve_classes

# bytes of distance matrix materialized per query chunk
_CHUNK_BYTES = 256 * 1024 * 1024


@numba.njit(cache=True, nogil=True)
def _select_k(D, k):
    """Per row, indices of the k smallest entries ordered by (distance, index)."""
    m, n = D.shape
    out = np.empty((m, k), dtype=np.int64)
    hd = np.empty(k)
    hi = np.empty(k, dtype=np.int64)
    for r in range(m):
        size = 0
        for j in range(n):
            d = D[r, j]
            if size < k:
                # insertion into sorted buffer
                p = size
                while p > 0 and (hd[p - 1] > d or (hd[p - 1] == d and hi[p - 1] > j)):
                    hd[p] = hd[p - 1]
                    hi[p] = hi[p - 1]
                    p -= 1
                hd[p] = d
                hi[p] = j
                size += 1
            elif d < hd[k - 1]:
                p = k - 1
                while p > 0 and (hd[p - 1] > d or (hd[p - 1] == d and hi[p - 1] > j)):
                    hd[p] = hd[p - 1]
                    hi[p] = hi[p - 1]
                    p -= 1
                hd[p] = d
                hi[p] = j
        for p in range(k):
            out[r, p] = hi[p]
    return out


@numba.njit(cache=True, nogil=True)
def _minkowski(Q, X, p):
    m, d = Q.shape
    n = X.shape[0]
    D = np.empty((m, n))
    for a in range(m):
        for b in range(n):
            s = 0.0
            for c in range(d):
                s += abs(Q[a, c] - X[b, c]) ** p
            D[a, b] = s
    return D


@register
@dataclass
class KNearestNeighbors(TrainedModel):
    family = "KNN"
    X: np.ndarray = None
    y: np.ndarray = None
    k: int = 5
    p: float = 2.0
    subsampled: bool = False

    def kneighbors(self, Q) -> np.ndarray:
        Q = self.check_input(Q)
        n = self.X.shape[0]
        chunk = max(1, _CHUNK_BYTES // (8 * max(n, 1)))
        sq = (self.X * self.X).sum(axis=1)
        out = np.empty((Q.shape[0], self.k), dtype=np.int64)
        for start in range(0, Q.shape[0], chunk):
            q = Q[start:start + chunk]
            if self.p == 2.0:
                # squared distances; monotone in the Euclidean distance
                D = (q * q).sum(axis=1)[:, None] - 2.0 * (q @ self.X.T) + sq[None, :]
                np.maximum(D, 0.0, out=D)
            else:
                D = _minkowski(np.ascontiguousarray(q), self.X, float(self.p))
            out[start:start + chunk] = _select_k(D, self.k)
        return out

    def predict(self, X) -> PredictionBatch:
        idx = self.kneighbors(X)
        votes = self.y[idx]
        counts = np.zeros((len(idx), self.n_classes))
        for c in range(self.n_classes):
            counts[:, c] = (votes == c).sum(axis=1)
        return PredictionBatch(argmax_lowest(counts), counts / self.k)


def fit_knn(X, y, k: int = 5, p: float = 2.0, n_classes: int | None = None) -> KNearestNeighbors:
    """Lazy learner: stores the training set; uniform majority vote over the k nearest."""
    X = as_matrix(X)
    y = as_labels(y, X.shape[0])
    if k < 1 or k > X.shape[0]:
        raise KTooLarge(f"k={k} but only {X.shape[0]} training rows")
    if p < 1:
        raise ValueError("Minkowski p must be >= 1")
    n_classes = resolve_classes(y, n_classes)
    return KNearestNeighbors(n_features=X.shape[1], n_classes=n_classes, hyperparams={"k": k, "p": p},
                             X=X.copy(), y=y.copy(), k=int(k), p=float(p))
