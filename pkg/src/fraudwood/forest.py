"""Random forest of gini trees scored by soft voting."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTrainingSet, SingleClassWarning, WidthMismatch
from .tree import RankedMatrix, Tree, TreeParams, fit_tree


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 4
    bootstrap: bool = True
    feature_fraction_rule: str = "sqrt"
    seed: int = 0
    min_samples_split: int = 2

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.feature_fraction_rule not in ("sqrt", "all"):
            raise ValueError("feature_fraction_rule must be 'sqrt' or 'all'")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[Tree, ...]
    params: ForestParams
    width: int

    def predict_proba(self, m) -> np.ndarray:
        return predict_proba(self, m)


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Independent stream for one tree, keyed by (seed, tree index) only."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tree_index])))


def fit_one_tree(rm: RankedMatrix, labels: np.ndarray, params: ForestParams, t: int) -> Tree:
    n, width = rm.shape
    rng = tree_rng(params.seed, t)
    rows = np.sort(rng.integers(0, n, n)) if params.bootstrap else None
    sampler = None
    if params.feature_fraction_rule == "sqrt":
        k = math.isqrt(width - 1) + 1 if width > 1 else 1  # ceil(sqrt(width))
        sampler = lambda w: rng.choice(w, k, replace=False)
    tp = TreeParams(params.max_depth, params.min_samples_split, "gini")
    return fit_tree(rm, labels, tp, rows, sampler)


def fit_forest(m, labels, params: ForestParams) -> ForestModel:
    """Bagged gini trees; tree ``t`` depends only on (seed, t) and the data."""
    rm = m if isinstance(m, RankedMatrix) else RankedMatrix(m)
    y = np.asarray(labels, dtype=np.float64)
    n, width = rm.shape
    if n == 0:
        raise EmptyTrainingSet("cannot fit a forest on zero rows")
    if y.shape != (n,):
        raise WidthMismatch(n, y.shape[0])
    if n < 2:
        raise EmptyTrainingSet("a forest needs at least 2 training rows")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0/1")
    if y.min() == y.max():
        warnings.warn("training labels hold a single class; forest is constant",
                      SingleClassWarning, stacklevel=2)
    trees = tuple(fit_one_tree(rm, y, params, t) for t in range(params.n_trees))
    return ForestModel(trees, params, width)


def predict_proba(model: ForestModel, m) -> np.ndarray:
    """Mean of per-tree positive-class leaf fractions."""
    X = np.asarray(m, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.width:
        raise WidthMismatch(model.width, X.shape[-1])
    acc = np.zeros(X.shape[0])
    for tree in model.trees:
        acc += tree.predict(X)
    return acc / len(model.trees)
