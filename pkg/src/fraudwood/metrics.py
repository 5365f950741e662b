"""ROC curves and AUC with half credit for tied scores."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import LabeledTable, class_balance
from .errors import IoFailure, SingleClassEval, WidthMismatch
from .features import FittedPipeline, apply_pipeline

REPORT_VERSION = 1


def _tie_groups(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise WidthMismatch(s.shape[0] if s.ndim else 0, y.shape[0] if y.ndim else 0)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    n_pos = int((y == 1).sum())
    n_neg = y.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassEval("ROC/AUC needs both classes")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # Last index of each block of equal scores, in descending score order.
    ends = np.r_[np.flatnonzero(np.diff(s) != 0), s.shape[0] - 1]
    tp = np.cumsum(y == 1)[ends]
    fp = (ends + 1) - tp
    return tp, fp, n_pos, n_neg


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def area(self) -> float:
        return float(np.sum(np.diff(self.fpr) * (self.tpr[1:] + self.tpr[:-1]) / 2.0))


def roc_curve(scores, labels) -> RocCurve:
    """One point per distinct score (descending), plus (0,0) and (1,1)."""
    tp, fp, n_pos, n_neg = _tie_groups(scores, labels)
    fpr = np.r_[0.0, fp / n_neg]
    tpr = np.r_[0.0, tp / n_pos]
    return RocCurve(fpr, tpr)


def auc(scores, labels) -> float:
    """Trapezoidal ROC area, evaluated on integer counts before one division."""
    tp, fp, n_pos, n_neg = _tie_groups(scores, labels)
    tp = np.r_[0, tp].astype(np.int64)
    fp = np.r_[0, fp].astype(np.int64)
    # 2 * area * n_pos * n_neg is an integer.
    twice = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    return twice / (2.0 * n_pos * n_neg)


@dataclass
class EvalReport:
    auc_test: float
    auc_validation: float
    counts: dict
    params: dict
    seconds: float = field(default=0.0, compare=False)
    schema_version: int = field(default=REPORT_VERSION)

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as e:
            raise IoFailure(str(e)) from e


def describe_model(model) -> dict:
    from .boosting import GbdtModel
    from .forest import ForestModel

    if isinstance(model, ForestModel):
        p = model.params
        return {"model": "rf", "n_trees": p.n_trees, "max_depth": p.max_depth,
                "bootstrap": p.bootstrap, "feature_fraction_rule": p.feature_fraction_rule,
                "seed": p.seed}
    if isinstance(model, GbdtModel):
        p = model.params
        return {"model": "gbdt", "n_trees": p.n_trees, "max_depth": p.max_depth,
                "learning_rate": p.learning_rate, "seed": p.seed}
    return {"model": type(model).__name__}


def score(model, m) -> np.ndarray:
    return model.predict_proba(m)


def evaluate(model, pipeline: FittedPipeline, test: LabeledTable,
             validation: LabeledTable) -> EvalReport:
    """Score both tables through the already-fitted pipeline."""
    t0 = time.perf_counter()
    auc_t = auc(score(model, apply_pipeline(test, pipeline)), test.labels)
    auc_v = auc(score(model, apply_pipeline(validation, pipeline)), validation.labels)
    counts = {}
    for name, table in (("test", test), ("validation", validation)):
        n_pos, n_neg, _ = class_balance(table)
        counts[name] = {"n_pos": n_pos, "n_neg": n_neg}
    params = {**describe_model(model), "pipeline": pipeline.describe()}
    return EvalReport(auc_t, auc_v, counts, params, time.perf_counter() - t0)
