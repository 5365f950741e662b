"""Gradient-boosted regression trees for binary labels under logistic loss.

Each stage fits a variance tree to the pseudo-residuals ``y - sigmoid(F)``,
replaces every leaf with a one-step Newton value, and adds the tree to
``F`` scaled by the learning rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyTrainingSet, SingleClassTraining, WidthMismatch
from .tree import RankedMatrix, Tree, TreeParams, fit_tree

RAW_CLAMP = 36.0
HESSIAN_FLOOR = 1e-12


def sigmoid(z):
    z = np.clip(z, -RAW_CLAMP, RAW_CLAMP)
    return 1.0 / (1.0 + np.exp(-z))


def deviance(labels, raw) -> np.ndarray:
    """Per-row logistic deviance ``log(1 + e^F) - y F`` at clamped ``F``."""
    f = np.clip(np.asarray(raw, dtype=np.float64), -RAW_CLAMP, RAW_CLAMP)
    return np.logaddexp(0.0, f) - np.asarray(labels, dtype=np.float64) * f


@dataclass(frozen=True)
class GbdtParams:
    n_trees: int = 100
    max_depth: int = 4
    learning_rate: float = 0.1
    seed: int = 0
    min_samples_split: int = 2

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class GbdtModel:
    f0: float
    stages: tuple[Tree, ...]
    learning_rate: float
    width: int
    params: GbdtParams

    def raw_scores(self, m) -> np.ndarray:
        X = _check(m, self.width)
        F = np.full(X.shape[0], self.f0)
        for tree in self.stages:
            F += self.learning_rate * tree.predict(X)
        return F

    def predict_proba(self, m) -> np.ndarray:
        return sigmoid(self.raw_scores(m))


def _check(m, width) -> np.ndarray:
    X = np.asarray(m, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != width:
        raise WidthMismatch(width, X.shape[-1])
    return X


def init_score(labels) -> float:
    y = np.asarray(labels, dtype=np.float64)
    n_pos = float(y.sum())
    if y.size == 0 or n_pos == 0 or n_pos == y.size:
        raise SingleClassTraining("need both classes to initialise log-odds")
    p = n_pos / y.size
    return float(np.log(p / (1.0 - p)))


def pseudo_residuals(labels, raw) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    F = np.asarray(raw, dtype=np.float64)
    if y.shape != F.shape:
        raise WidthMismatch(y.shape[0], F.shape[0])
    return y - sigmoid(F)


def newton_leaf_values(leaf_of_row, residuals, prob, n_nodes) -> np.ndarray:
    """Per-node ``sum(r) / max(sum(p(1-p)), floor)`` over the rows in each leaf."""
    num = np.bincount(leaf_of_row, weights=residuals, minlength=n_nodes)
    den = np.bincount(leaf_of_row, weights=prob * (1.0 - prob), minlength=n_nodes)
    return num / np.maximum(den, HESSIAN_FLOOR)


def fit_gbdt(m, labels, params: GbdtParams) -> GbdtModel:
    rm = m if isinstance(m, RankedMatrix) else RankedMatrix(m)
    y = np.asarray(labels, dtype=np.float64)
    n, width = rm.shape
    if n == 0:
        raise EmptyTrainingSet("cannot boost on zero rows")
    if y.shape != (n,):
        raise WidthMismatch(n, y.shape[0])
    f0 = init_score(y)
    tp = TreeParams(params.max_depth, params.min_samples_split, "variance")
    nu = params.learning_rate
    F = np.full(n, f0)
    stages = []
    for _ in range(params.n_trees):
        p = sigmoid(F)
        r = y - p
        tree = fit_tree(rm, r, tp)
        leaf = tree.apply(rm.values)
        gamma = newton_leaf_values(leaf, r, p, tree.n_nodes)
        leaves = tree.feature < 0
        tree = tree.with_leaf_values(np.where(leaves, gamma, tree.value))
        F += nu * tree.value[leaf]
        stages.append(tree)
    return GbdtModel(f0, tuple(stages), nu, width, params)


def predict_proba(model: GbdtModel, m) -> np.ndarray:
    return model.predict_proba(m)


def staged_deviance(model: GbdtModel, m, labels) -> np.ndarray:
    """Mean deviance after 0, 1, ..., n_trees stages."""
    X = _check(m, model.width)
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise WidthMismatch(X.shape[0], y.shape[0])
    F = np.full(X.shape[0], model.f0)
    out = [deviance(y, F).mean()]
    for tree in model.stages:
        F += model.learning_rate * tree.predict(X)
        out.append(deviance(y, F).mean())
    return np.array(out)
