"""Exact nearest-neighbor search over encoded rows.

Two implementations of the same contract live here on purpose:

- nearest_neighbors: the production path, blocked scipy cdist plus a
  partition-and-refine top-k with (distance, index) tie-breaking.
- brute_force_neighbors: an independent pure-Python oracle that computes
  every distance with a sequential accumulation loop and a full sort.

The two must agree bit-for-bit on indices AND distances. That constrains
the distance definitions: weighted minkowski is defined as the plain
minkowski distance after scaling coordinate i by weights[i]**(1/p) (equal
to (sum w_i |d_i|^p)^(1/p) in exact arithmetic, but the pre-scaled form is
the one that evaluates reproducibly), and the oracle evaluates p == 2 via
d*d + sqrt and p == 1 via plain |d| sums, matching how cdist routes those
cases. Ties in distance are always broken by the lower row index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidArgumentError

METRICS = ("euclidean", "manhattan", "chebyshev", "minkowski", "weighted_minkowski")

_CDIST_NAME = {"euclidean": "euclidean", "manhattan": "cityblock", "chebyshev": "chebyshev"}


@dataclass(frozen=True)
class DistanceSpec:
    """Distance metric selection. p applies to the minkowski family;
    weights are per encoded column and required for weighted_minkowski."""

    metric: str = "euclidean"
    p: float = 2.0
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise InvalidArgumentError(f"unknown metric {self.metric!r}; choose from {METRICS}")
        if self.metric in ("minkowski", "weighted_minkowski"):
            if not (math.isfinite(self.p) and self.p >= 1):
                raise InvalidArgumentError(f"minkowski p must be finite and >= 1, got {self.p}")
        if self.metric == "weighted_minkowski":
            if self.weights is None:
                raise InvalidArgumentError("weighted_minkowski requires weights")
            w = tuple(float(x) for x in self.weights)
            if any(x < 0 for x in w):
                raise InvalidArgumentError("weights must be non-negative")
            if not any(x > 0 for x in w):
                raise InvalidArgumentError("weights must not all be zero")
            object.__setattr__(self, "weights", w)
        elif self.weights is not None:
            raise InvalidArgumentError(f"metric {self.metric!r} does not take weights")

    def to_dict(self) -> dict:
        d = {"metric": self.metric}
        if self.metric in ("minkowski", "weighted_minkowski"):
            d["p"] = self.p
        if self.weights is not None:
            d["weights"] = list(self.weights)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "DistanceSpec":
        w = doc.get("weights")
        return cls(metric=doc.get("metric", "euclidean"), p=float(doc.get("p", 2.0)),
                   weights=tuple(w) if w is not None else None)


@dataclass(frozen=True)
class NeighborSet:
    """k nearest rows for one query: indices into the searched matrix,
    distances ascending, equal distances ordered by index."""

    query_index: int | None
    neighbor_indices: tuple[int, ...]
    distances: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "query_index": self.query_index,
            "neighbor_indices": list(self.neighbor_indices),
            "distances": list(self.distances),
        }


def _check_weights(spec: DistanceSpec, d: int) -> None:
    if spec.weights is not None and len(spec.weights) != d:
        raise InvalidArgumentError(f"weights have length {len(spec.weights)}, rows have dimension {d}")


def _prepared(Q: np.ndarray, X: np.ndarray, spec: DistanceSpec):
    """Apply the weight pre-scaling and map to a cdist metric name + kwargs."""
    if spec.metric == "weighted_minkowski":
        # scalar pow per weight, the same call the oracle makes, so both
        # paths scale coordinates by bit-identical factors
        s = np.array([w ** (1.0 / spec.p) for w in spec.weights])
        return Q * s, X * s, "minkowski", {"p": spec.p}
    if spec.metric == "minkowski":
        return Q, X, "minkowski", {"p": spec.p}
    return Q, X, _CDIST_NAME[spec.metric], {}


def pairwise_distances(queries, rows, spec: DistanceSpec = DistanceSpec()) -> np.ndarray:
    """Dense len(queries) x len(rows) distance matrix."""
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    X = np.atleast_2d(np.asarray(rows, dtype=float))
    if Q.shape[1] != X.shape[1]:
        raise InvalidArgumentError(f"query dimension {Q.shape[1]} != row dimension {X.shape[1]}")
    _check_weights(spec, X.shape[1])
    Qp, Xp, name, kw = _prepared(Q, X, spec)
    return cdist(Qp, Xp, metric=name, **kw)


def _top_k_row(dist_row: np.ndarray, k: int):
    """Indices of the k smallest entries, ties broken by lower index."""
    n = dist_row.shape[0]
    if k >= n:
        order = np.lexsort((np.arange(n), dist_row))
        return order
    kth = np.partition(dist_row, k - 1)[k - 1]
    cand = np.flatnonzero(dist_row <= kth)
    order = cand[np.lexsort((cand, dist_row[cand]))[:k]]
    return order

def nearest_neighbors(queries, rows, k: int, spec: DistanceSpec = DistanceSpec(),
                      block: int = 512):
    """Exact k nearest rows for each query.

    Returns (indices, distances): int64 and float arrays of shape (m, k).
    Distances ascend within each row; ties are ordered by row index.
    """
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    X = np.atleast_2d(np.asarray(rows, dtype=float))
    if Q.shape[1] != X.shape[1]:
        raise InvalidArgumentError(f"query dimension {Q.shape[1]} != row dimension {X.shape[1]}")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"k must be in [1,{n}], got {k}")
    _check_weights(spec, X.shape[1])
    Qp, Xp, name, kw = _prepared(Q, X, spec)

    m = Qp.shape[0]
    idx = np.empty((m, k), dtype=np.int64)
    dst = np.empty((m, k), dtype=float)
    for start in range(0, m, block):
        stop = min(start + block, m)
        D = cdist(Qp[start:stop], Xp, metric=name, **kw)
        for r in range(stop - start):
            top = _top_k_row(D[r], k)
            idx[start + r] = top
            dst[start + r] = D[r, top]
    return idx, dst


def knn_graph(rows, k: int, spec: DistanceSpec = DistanceSpec(), block: int = 512) -> np.ndarray:
    """For each row, the indices of its k nearest other rows (self excluded).

    With duplicate rows the self index may lose the distance-0 tie to a
    lower duplicate index; exclusion is therefore by identity, not position.
    """
    X = np.atleast_2d(np.asarray(rows, dtype=float))
    n = X.shape[0]
    if not 1 <= k <= n - 1:
        raise InvalidArgumentError(f"k must be in [1,{n - 1}] for a graph over {n} rows")
    idx, _ = nearest_neighbors(X, X, k + 1, spec, block=block)
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        row = idx[i]
        out[i] = row[row != i][:k]
    return out


# -- the oracle --------------------------------------------------------------

def oracle_distance(q, row, spec: DistanceSpec) -> float:
    """Pure-Python distance between two sequences under spec.

    Sequential left-to-right accumulation; see module docstring for why the
    p == 2 and p == 1 cases use dedicated forms.
    """
    if spec.metric == "weighted_minkowski":
        p = spec.p
        s = [w ** (1.0 / p) for w in spec.weights]
        q = [a * si for a, si in zip(q, s)]
        row = [a * si for a, si in zip(row, s)]
        metric, p_eff = "minkowski", p
    elif spec.metric == "minkowski":
        metric, p_eff = "minkowski", spec.p
    else:
        metric, p_eff = spec.metric, None

    if metric == "chebyshev":
        best = 0.0
        for a, b in zip(q, row):
            d = abs(a - b)
            if d > best:
                best = d
        return best
    if metric == "manhattan" or (metric == "minkowski" and p_eff == 1.0):
        acc = 0.0
        for a, b in zip(q, row):
            acc += abs(a - b)
        return acc
    if metric == "euclidean" or (metric == "minkowski" and p_eff == 2.0):
        acc = 0.0
        for a, b in zip(q, row):
            d = abs(a - b)
            acc += d * d
        return math.sqrt(acc)
    acc = 0.0
    for a, b in zip(q, row):
        acc += abs(a - b) ** p_eff
    return acc ** (1.0 / p_eff)


def brute_force_neighbors(query, rows, k: int, spec: DistanceSpec = DistanceSpec()):
    """Oracle top-k: every distance via oracle_distance, full sort on
    (distance, index). Returns (indices list, distances list)."""
    rows = [list(map(float, r)) for r in np.atleast_2d(np.asarray(rows, dtype=float))]
    q = list(map(float, np.asarray(query, dtype=float)))
    n = len(rows)
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"k must be in [1,{n}], got {k}")
    _check_weights(spec, len(q))
    dists = [oracle_distance(q, r, spec) for r in rows]
    order = sorted(range(n), key=lambda i: (dists[i], i))[:k]
    return order, [dists[i] for i in order]
