"""Depth x tree-count grids: run, summarise, and plot.

Every cell gets its own seed derived from (sweep seed, cell index), so a
cell can be reproduced on its own and the output does not depend on how
many worker processes ran the grid.
"""

from __future__ import annotations

import csv
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .boosting import GbdtParams, fit_gbdt
from .dataset import FeatureSchema, LabeledTable
from .errors import EmptyInput, FraudwoodError, IoFailure
from .features import VARIANTS, PipelineSpec, apply_pipeline, fit_transform
from .forest import ForestParams, fit_forest
from .metrics import auc
from .tree import RankedMatrix

CSV_HEADER = ["depth", "n_trees", "learning_rate", "variant", "auc_test", "auc_validation", "seconds"]


class SweepCellError(FraudwoodError):
    pass


@dataclass(frozen=True)
class GridSpec:
    model: str = "rf"
    depths: tuple[int, int] = (2, 5)  # inclusive
    tree_counts: tuple[int, int, int] = (5, 120, 5)  # lo, hi inclusive, step
    learning_rates: tuple[float, ...] = (0.1,)
    pipeline_variant: str = "tanh"
    seed: int = 42
    pca_components: float | int = 0.95

    def __post_init__(self):
        object.__setattr__(self, "depths", tuple(int(d) for d in self.depths))
        object.__setattr__(self, "tree_counts", tuple(int(t) for t in self.tree_counts))
        object.__setattr__(self, "learning_rates", tuple(float(v) for v in self.learning_rates))
        if self.model not in ("rf", "gbdt"):
            raise ValueError("model must be 'rf' or 'gbdt'")
        if self.pipeline_variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        lo, hi = self.depths
        if not 1 <= lo <= hi:
            raise ValueError("depth range must satisfy 1 <= lo <= hi")
        tlo, thi, step = self.tree_counts
        if not (1 <= tlo <= thi and step >= 1):
            raise ValueError("tree range must satisfy 1 <= lo <= hi and step >= 1")
        if not self.learning_rates:
            raise ValueError("need at least one learning rate")
        if any(not 0.0 < v <= 1.0 for v in self.learning_rates):
            raise ValueError("learning rates must lie in (0, 1]")
        if self.model == "rf" and len(self.learning_rates) != 1:
            raise ValueError("random forests take no learning rate; pass a single value")

    @property
    def depth_values(self) -> list[int]:
        return list(range(self.depths[0], self.depths[1] + 1))

    @property
    def tree_values(self) -> list[int]:
        lo, hi, step = self.tree_counts
        return list(range(lo, hi + 1, step))


@dataclass(frozen=True)
class Cell:
    index: int
    depth: int
    n_trees: int
    learning_rate: Optional[float]


@dataclass(frozen=True)
class SweepRow:
    depth: int
    n_trees: int
    learning_rate: Optional[float]
    variant: str
    auc_test: float
    auc_validation: float
    seconds: Optional[float] = None


@dataclass(frozen=True)
class OutlierRule:
    method: str = "mad"
    k: float = 3.0

    def __post_init__(self):
        if self.method not in ("none", "mad"):
            raise ValueError("outlier method must be 'none' or 'mad'")
        if not self.k > 0:
            raise ValueError("k must be positive")


def enumerate_grid(spec: GridSpec) -> list[Cell]:
    """Depth outer, tree count inner, then learning rate."""
    rates = spec.learning_rates if spec.model == "gbdt" else (None,)
    product = itertools.product(spec.depth_values, spec.tree_values, rates)
    return [Cell(i, d, t, r) for i, (d, t, r) in enumerate(product)]


def cell_seed(sweep_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([sweep_seed, index]).generate_state(1, np.uint64)[0])


def make_params(spec: GridSpec, cell: Cell):
    seed = cell_seed(spec.seed, cell.index)
    if spec.model == "rf":
        return ForestParams(n_trees=cell.n_trees, max_depth=cell.depth, seed=seed)
    return GbdtParams(n_trees=cell.n_trees, max_depth=cell.depth,
                      learning_rate=cell.learning_rate, seed=seed)


def train_model(model: str, train_matrix, labels, params):
    if model == "rf":
        return fit_forest(train_matrix, labels, params)
    return fit_gbdt(train_matrix, labels, params)


# Per-process sweep inputs; set in the parent or by the pool initializer.
_CTX: dict = {}


def _init_worker(ctx):
    _CTX.clear()
    _CTX.update(ctx)


def _run_cell(cell: Cell) -> SweepRow:
    spec = _CTX["spec"]
    try:
        t0 = time.perf_counter()
        model = train_model(spec.model, _CTX["train"], _CTX["y_train"], make_params(spec, cell))
        seconds = time.perf_counter() - t0
        a_test = auc(model.predict_proba(_CTX["x_test"]), _CTX["y_test"])
        a_val = auc(model.predict_proba(_CTX["x_val"]), _CTX["y_val"])
    except Exception as e:
        raise SweepCellError(
            f"cell {cell.index} (depth={cell.depth}, n_trees={cell.n_trees}, "
            f"learning_rate={cell.learning_rate}) failed: {e}"
        ) from e
    return SweepRow(cell.depth, cell.n_trees, cell.learning_rate, spec.pipeline_variant,
                    a_test, a_val, seconds if _CTX["timing"] else None)


def run_sweep(spec: GridSpec, train: LabeledTable, test: LabeledTable,
              validation: LabeledTable, schema: FeatureSchema, workers: int = 1,
              timing: bool = False, progress=None) -> list[SweepRow]:
    """Fit the pipeline once on ``train``, then train and score every cell.

    Rows come back in enumeration order.  ``timing`` records per-cell
    training seconds; it is off by default because wall-clock values make
    otherwise identical sweeps differ byte-wise.
    """
    fitted, x_train = fit_transform(train, schema, PipelineSpec(spec.pipeline_variant,
                                                                 spec.pca_components))
    ctx = {
        "spec": spec,
        "train": RankedMatrix(x_train),
        "y_train": train.labels.astype(np.float64),
        "x_test": apply_pipeline(test, fitted),
        "y_test": test.labels,
        "x_val": apply_pipeline(validation, fitted),
        "y_val": validation.labels,
        "timing": timing,
    }
    cells = enumerate_grid(spec)
    rows = []
    if workers <= 1:
        _init_worker(ctx)
        try:
            for cell in cells:
                rows.append(_run_cell(cell))
                if progress:
                    progress(cell, rows[-1])
        finally:
            _CTX.clear()
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(ctx,)) as pool:
            for cell, row in zip(cells, pool.map(_run_cell, cells)):
                rows.append(row)
                if progress:
                    progress(cell, row)
    return rows


# ---------------------------------------------------------------------------
# summaries


def _stats(values: Sequence[float]) -> dict:
    a = np.asarray(values, dtype=np.float64)
    if a.size == 0:
        return {"n": 0, "mean": None, "median": None, "std": None}
    return {
        "n": int(a.size),
        "mean": float(a.mean()),
        "median": float(np.median(a)),
        "std": float(a.std(ddof=1)) if a.size > 1 else 0.0,
    }


def mad_outliers(values: Sequence[float], k: float) -> np.ndarray:
    """Mask of values farther than ``k`` median absolute deviations from the median."""
    a = np.asarray(values, dtype=np.float64)
    med = np.median(a)
    dev = np.abs(a - med)
    return dev > k * np.median(dev)


def summarize(rows: Sequence[SweepRow], rule: OutlierRule = OutlierRule()) -> dict:
    if not rows:
        raise EmptyInput("summarize needs at least one sweep row")
    test = [r.auc_test for r in rows]
    if rule.method == "mad":
        removed = mad_outliers(test, rule.k)
    else:
        removed = np.zeros(len(rows), dtype=bool)
    kept = [r for r, out in zip(rows, removed) if not out]

    def block(rs):
        return {"auc_test": _stats([r.auc_test for r in rs]),
                "auc_validation": _stats([r.auc_validation for r in rs])}

    by_depth = {}
    for d in sorted({r.depth for r in rows}):
        by_depth[str(d)] = block([r for r in rows if r.depth == d])
    return {
        "schema_version": 1,
        "outlier_rule": {"method": rule.method, "k": rule.k},
        "n_rows": len(rows),
        "unfiltered": block(rows),
        "filtered": block(kept),
        "removed": [
            {"depth": r.depth, "n_trees": r.n_trees, "learning_rate": r.learning_rate,
             "variant": r.variant, "auc_test": r.auc_test, "auc_validation": r.auc_validation}
            for r, out in zip(rows, removed) if out
        ],
        "by_depth": by_depth,
    }


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(CSV_HEADER) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(getattr(r, k)) for k in CSV_HEADER) + "\n")
    except OSError as e:
        raise IoFailure(str(e)) from e


def read_sweep_csv(path) -> list[SweepRow]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            records = list(reader)
    except OSError as e:
        raise IoFailure(str(e)) from e
    if header != CSV_HEADER:
        raise ValueError(f"unexpected sweep CSV header {header}")
    opt = lambda s: float(s) if s != "" else None
    return [
        SweepRow(int(d), int(t), opt(lr), v, float(at), float(av), opt(sec))
        for d, t, lr, v, at, av, sec in records
    ]


_SHAPES = ("circle", "square", "triangle", "diamond", "cross", "star")
_SHADES = ("#1b3a5c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555")


def _marker(shape: str, x: float, y: float, color: str, cls: str, r: float = 4.0) -> str:
    if shape == "circle":
        return f'<circle class="{cls}" cx="{x:.2f}" cy="{y:.2f}" r="{r:.1f}" fill="{color}"/>'
    if shape == "square":
        return (f'<rect class="{cls}" x="{x - r:.2f}" y="{y - r:.2f}" width="{2 * r:.1f}" '
                f'height="{2 * r:.1f}" fill="{color}"/>')
    if shape == "triangle":
        pts = [(x, y - r * 1.2), (x - r, y + r * 0.8), (x + r, y + r * 0.8)]
    elif shape == "diamond":
        pts = [(x, y - r * 1.3), (x + r, y), (x, y + r * 1.3), (x - r, y)]
    elif shape == "cross":
        a = r * 0.35
        pts = [(x - a, y - r), (x + a, y - r), (x + a, y - a), (x + r, y - a), (x + r, y + a),
               (x + a, y + a), (x + a, y + r), (x - a, y + r), (x - a, y + a), (x - r, y + a),
               (x - r, y - a), (x - a, y - a)]
    else:
        pts = []
        for i in range(10):
            rad = r * 1.3 if i % 2 == 0 else r * 0.55
            ang = math.pi / 2 + i * math.pi / 5
            pts.append((x + rad * math.cos(ang), y - rad * math.sin(ang)))
    coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
    return f'<polygon class="{cls}" points="{coords}" fill="{color}"/>'


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out, v = [], start
    while v <= hi + 1e-12:
        out.append(round(v, 10))
        v += step
    return out


def render_svg(rows: Sequence[SweepRow], title: str = "") -> str:
    """Test AUC against tree count, one marker shape and shade per depth."""
    W, H = 680, 440
    left, right, top, bottom = 70, 150, 40, 60
    pw, ph = W - left - right, H - top - bottom
    xs = [r.n_trees for r in rows]
    ys = [r.auc_test for r in rows]
    xlo, xhi = min(xs), max(xs)
    if xlo == xhi:
        xlo, xhi = xlo - 1, xhi + 1
    ylo, yhi = min(ys), max(ys)
    pad = max((yhi - ylo) * 0.1, 0.005)
    ylo, yhi = max(0.0, ylo - pad), min(1.0, yhi + pad)
    if ylo >= yhi:
        ylo, yhi = ylo - 0.01, yhi + 0.01
    sx = lambda v: left + (v - xlo) / (xhi - xlo) * pw
    sy = lambda v: top + (1.0 - (v - ylo) / (yhi - ylo)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
        f'{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333333"/>',
    ]
    for t in _ticks(xlo, xhi):
        x = sx(t)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="#333333"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(ylo, yhi):
        y = sy(t)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="#333333"/>')
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{t:.3f}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{H - 15}" text-anchor="middle">number of trees</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.1f})">test AUC</text>')

    depths = sorted({r.depth for r in rows})
    style = {d: (_SHAPES[i % len(_SHAPES)], _SHADES[i % len(_SHADES)]) for i, d in enumerate(depths)}
    for r in rows:
        shape, color = style[r.depth]
        out.append(_marker(shape, sx(r.n_trees), sy(r.auc_test), color, "marker"))
    lx, ly = left + pw + 20, top + 10
    out.append(f'<text x="{lx}" y="{ly}" font-weight="bold">max depth</text>')
    for i, d in enumerate(depths):
        shape, color = style[d]
        y = ly + 20 * (i + 1)
        out.append(_marker(shape, lx + 6, y - 4, color, "legend-marker"))
        out.append(f'<text x="{lx + 18}" y="{y}">{d}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_scatter(rows: Sequence[SweepRow], csv_path, svg_path, title: str = "") -> None:
    if not rows:
        raise EmptyInput("no sweep rows to plot")
    write_sweep_csv(rows, csv_path)
    try:
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(render_svg(rows, title))
    except OSError as e:
        raise IoFailure(str(e)) from e


def row_dict(row: SweepRow) -> dict:
    return asdict(row)
