"""Tree ensembles and AUC sweeps for tabular fraud and overdue-payment scoring."""

__version__ = "0.1.0"

from .boosting import GbdtModel, GbdtParams, fit_gbdt
from .dataset import (FeatureSchema, FeatureSpec, LabeledTable, SplitSpec, SynthConfig,
                      class_balance, read_csv, split, synthesize, write_csv)
from .features import (FittedPipeline, PipelineSpec, apply_pipeline, fit_pipeline,
                       fit_transform)
from .forest import ForestModel, ForestParams, fit_forest
from .metrics import EvalReport, auc, evaluate, roc_curve
from .persist import load_model, save_model
from .sweep import GridSpec, OutlierRule, SweepRow, enumerate_grid, run_sweep, summarize
from .tree import Tree, TreeParams, best_split, fit_tree

__all__ = [
    "FeatureSchema", "FeatureSpec", "LabeledTable", "SplitSpec", "SynthConfig",
    "class_balance", "read_csv", "split", "synthesize", "write_csv",
    "FittedPipeline", "PipelineSpec", "apply_pipeline", "fit_pipeline", "fit_transform",
    "Tree", "TreeParams", "best_split", "fit_tree",
    "ForestModel", "ForestParams", "fit_forest",
    "GbdtModel", "GbdtParams", "fit_gbdt",
    "EvalReport", "auc", "evaluate", "roc_curve",
    "GridSpec", "OutlierRule", "SweepRow", "enumerate_grid", "run_sweep", "summarize",
    "load_model", "save_model",
]
