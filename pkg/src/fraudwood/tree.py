"""Depth-limited binary CART trees.

Gini trees (0/1 targets, leaf = positive fraction) serve the random forest;
variance trees (real targets, leaf = mean) serve gradient boosting.  Splits
are exhaustive over midpoints between consecutive distinct node values,
``value <= threshold`` goes left, and ties prefer the lower feature index,
then the lower threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _backend
from .errors import EmptyNode, EmptyTrainingSet, WidthMismatch

IMPURITIES = ("gini", "variance")


@dataclass(frozen=True)
class TreeParams:
    max_depth: int
    min_samples_split: int = 2
    impurity: str = "gini"

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.impurity not in IMPURITIES:
            raise ValueError(f"impurity must be one of {IMPURITIES}")


@dataclass(frozen=True)
class SplitCandidate:
    feature_index: int
    threshold: float
    gain: float


def gini(n_pos: int, n_neg: int) -> float:
    n = n_pos + n_neg
    if n < 1:
        raise EmptyNode("gini impurity of an empty node")
    p, q = n_pos / n, n_neg / n
    return 1.0 - p * p - q * q


class RankedMatrix:
    """A float matrix plus per-column dense ranks of its values.

    Ranking once up front lets every node scan thresholds by counting
    instead of sorting.  Ranks are exact (one per distinct value), so this
    is not a binning approximation.
    """

    def __init__(self, m):
        values = np.ascontiguousarray(m, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("expected a 2-D matrix")
        if not np.isfinite(values).all():
            raise ValueError("matrix contains non-finite values")
        n, p = values.shape
        codes = np.empty((p, n), dtype=np.int32)
        uniques = []
        for j in range(p):
            u, inv = np.unique(values[:, j], return_inverse=True)
            codes[j] = inv.reshape(-1)
            uniques.append(u)
        self.values = values
        self.codes = codes
        self.uniques = uniques
        self.n_uniq = np.array([len(u) for u in uniques], dtype=np.intp)

    @property
    def shape(self):
        return self.values.shape

    def threshold(self, feature: int, code_left: int, code_right: int) -> float:
        u = self.uniques[feature]
        a, b = float(u[code_left]), float(u[code_right])
        t = (a + b) / 2.0
        if not np.isfinite(t):
            t = a / 2.0 + b / 2.0
        # Adjacent floats: the midpoint rounds onto b, which would send b left.
        if t >= b:
            t = a
        return t


def _ranked(m) -> RankedMatrix:
    return m if isinstance(m, RankedMatrix) else RankedMatrix(m)


def _seq_sum(a: np.ndarray) -> float:
    # Sequential left-to-right sum; both kernel backends rely on this order.
    return float(np.cumsum(a)[-1]) if a.shape[0] else 0.0


def best_split(m, targets, row_subset=None, feature_subset=None, impurity="gini") -> Optional[SplitCandidate]:
    """Exhaustive best axis-aligned split, or None if nothing has positive gain."""
    rm = _ranked(m)
    y = np.ascontiguousarray(targets, dtype=np.float64)
    rows = _as_index(row_subset, rm.shape[0])
    feats = _as_index(feature_subset, rm.shape[1], sort=True)
    if impurity not in IMPURITIES:
        raise ValueError(f"impurity must be one of {IMPURITIES}")
    f, cl, cr, gain = _backend.ops.find_split(
        rm.codes, rm.n_uniq, y, rows, feats, _seq_sum(y[rows]), impurity == "gini"
    )
    if f < 0:
        return None
    return SplitCandidate(int(f), rm.threshold(f, cl, cr), float(gain))


def _as_index(idx, n, sort=False) -> np.ndarray:
    if idx is None:
        return np.arange(n, dtype=np.intp)
    idx = np.ascontiguousarray(idx, dtype=np.intp)
    return np.sort(idx) if sort else idx


@dataclass(frozen=True)
class Tree:
    """Flat preorder node arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features: int
    impurity: str = "gini"

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.intp)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        X = _check_width(X, self.n_features)
        return _backend.ops.apply_tree(self.feature, self.threshold, self.left, self.right, X)

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def with_leaf_values(self, leaf_values: dict[int, float] | np.ndarray) -> "Tree":
        value = np.array(self.value, copy=True)
        if isinstance(leaf_values, dict):
            for node, v in leaf_values.items():
                value[node] = v
        else:
            value[:] = leaf_values
        return Tree(self.feature, self.threshold, self.left, self.right, value,
                    self.n_features, self.impurity)

    def to_dict(self) -> dict:
        def node(i):
            if self.feature[i] < 0:
                return {"value": float(self.value[i])}
            return {
                "feature": int(self.feature[i]),
                "threshold": float(self.threshold[i]),
                "value": float(self.value[i]),
                "left": node(self.left[i]),
                "right": node(self.right[i]),
            }

        return {"n_features": self.n_features, "impurity": self.impurity, "root": node(0)}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        b = _Builder()

        def walk(nd):
            if "feature" not in nd:
                return b.leaf(float(nd["value"]))
            i = b.split(int(nd["feature"]), float(nd["threshold"]), float(nd.get("value", 0.0)))
            b.left[i] = walk(nd["left"])
            b.right[i] = walk(nd["right"])
            return i

        walk(d["root"])
        return b.build(int(d["n_features"]), d.get("impurity", "gini"))

    def structurally_equal(self, other: "Tree") -> bool:
        return (
            self.n_features == other.n_features
            and np.array_equal(self.feature, other.feature)
            and np.array_equal(self.threshold, other.threshold)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
            and np.array_equal(self.value, other.value)
        )


def _check_width(X, width) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != width:
        raise WidthMismatch(width, X.shape[1])
    return X


class _Builder:
    def __init__(self):
        self.feature, self.threshold, self.left, self.right, self.value = [], [], [], [], []

    def _new(self, f, t, v):
        self.feature.append(f)
        self.threshold.append(t)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(v)
        return len(self.feature) - 1

    def leaf(self, v):
        return self._new(-1, 0.0, v)

    def split(self, f, t, v=0.0):
        return self._new(f, t, v)

    def build(self, n_features, impurity) -> Tree:
        return Tree(
            np.array(self.feature, dtype=np.intp),
            np.array(self.threshold, dtype=np.float64),
            np.array(self.left, dtype=np.intp),
            np.array(self.right, dtype=np.intp),
            np.array(self.value, dtype=np.float64),
            n_features,
            impurity,
        )


FeatureSampler = Callable[[int], np.ndarray]


def fit_tree(m, targets, params: TreeParams, row_subset=None,
             feature_sampler: FeatureSampler | None = None) -> Tree:
    """Grow a tree greedily in preorder.

    ``row_subset`` may repeat rows (bootstrap draws count once per copy).
    ``feature_sampler(width)`` is called once per node that attempts a
    split and returns the candidate feature indices; by default every
    feature is a candidate.
    """
    rm = _ranked(m)
    n, width = rm.shape
    y = np.ascontiguousarray(targets, dtype=np.float64)
    if y.shape != (n,):
        raise WidthMismatch(n, y.shape[0])
    rows = _as_index(row_subset, n)
    if rows.shape[0] == 0:
        raise EmptyTrainingSet("cannot fit a tree on zero rows")
    is_gini = params.impurity == "gini"
    if is_gini and not np.isin(y[rows], (0.0, 1.0)).all():
        raise ValueError("gini trees need 0/1 targets")
    all_features = np.arange(width, dtype=np.intp)
    find_split = _backend.ops.find_split
    b = _Builder()

    def grow(rows, depth):
        k = rows.shape[0]
        y_node = y[rows]
        total = _seq_sum(y_node)
        node = b.leaf(total / k)
        if depth >= params.max_depth or k < params.min_samples_split:
            return node
        if is_gini:
            if total == 0.0 or total == k:
                return node
        elif y_node.min() == y_node.max():
            return node
        feats = all_features if feature_sampler is None else np.sort(
            np.asarray(feature_sampler(width), dtype=np.intp))
        f, cl, cr, _gain = find_split(rm.codes, rm.n_uniq, y, rows, feats, total, is_gini)
        if f < 0:
            return node
        go_left = rm.codes[f, rows] <= cl
        b.feature[node] = int(f)
        b.threshold[node] = rm.threshold(f, cl, cr)
        b.left[node] = grow(rows[go_left], depth + 1)
        b.right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(rows, 0)
    return b.build(width, params.impurity)


def predict(tree: Tree, row) -> float | np.ndarray:
    """Leaf value for one row (1-D input) or for every row of a matrix."""
    out = tree.predict(row)
    return float(out[0]) if np.ndim(row) == 1 else out
