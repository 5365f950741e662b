"""Borrower-table schema, CSV I/O, synthetic data, and 4:1:1 splitting.

Tables are stored column-wise: numeric features as float64 arrays and
categorical features as int32 codes into the feature's declared category
list.  Record-style access is available through :meth:`LabeledTable.row`.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadLabel,
    IoFailure,
    MissingColumn,
    NonNumericCell,
    SchemaError,
    TooFewRows,
    UnknownCategory,
)

GROUPS = ("financial", "work", "transaction", "demographic")
KINDS = ("numeric", "categorical")
SCHEMA_VERSION = 1

_TOKEN = re.compile(r"^[A-Za-z0-9_]+$")


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    group: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        if not self.name or not _TOKEN.match(self.name):
            raise SchemaError(f"feature name must match [A-Za-z0-9_]+: {self.name!r}")
        if self.group not in GROUPS:
            raise SchemaError(f"{self.name}: unknown group {self.group!r}")
        if self.kind not in KINDS:
            raise SchemaError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind == "numeric" and self.categories:
            raise SchemaError(f"{self.name}: numeric feature cannot list categories")
        if self.kind == "categorical":
            if len(self.categories) < 2:
                raise SchemaError(f"{self.name}: needs at least 2 categories")
            if len(set(self.categories)) != len(self.categories):
                raise SchemaError(f"{self.name}: duplicate category labels")
            for c in self.categories:
                if not _TOKEN.match(c):
                    raise SchemaError(f"{self.name}: bad category label {c!r}")

    @property
    def is_numeric(self) -> bool:
        return self.kind == "numeric"


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[FeatureSpec, ...]
    label_name: str = "label"

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")
        if not self.label_name or not _TOKEN.match(self.label_name):
            raise SchemaError(f"bad label column name {self.label_name!r}")
        if self.label_name in names:
            raise SchemaError("label column name collides with a feature name")

    def __len__(self):
        return len(self.features)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def n_numeric(self) -> int:
        return sum(f.is_numeric for f in self.features)

    @property
    def n_categorical(self) -> int:
        return len(self.features) - self.n_numeric

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "label_name": self.label_name,
            "features": [
                {
                    "name": f.name,
                    "group": f.group,
                    "kind": f.kind,
                    "categories": list(f.categories),
                }
                for f in self.features
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSchema":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"unsupported schema_version {d.get('schema_version')!r}")
        try:
            feats = [
                FeatureSpec(f["name"], f["group"], f["kind"], tuple(f.get("categories", ())))
                for f in d["features"]
            ]
            return cls(tuple(feats), d["label_name"])
        except (KeyError, TypeError) as e:
            raise SchemaError(f"malformed schema: {e}") from None

    def save(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(self.to_dict(), fh, indent=2)
                fh.write("\n")
        except OSError as e:
            raise IoFailure(str(e)) from e

    @classmethod
    def load(cls, path) -> "FeatureSchema":
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except OSError as e:
            raise IoFailure(str(e)) from e
        except json.JSONDecodeError as e:
            raise SchemaError(f"schema file is not valid JSON: {e}") from None
        return cls.from_dict(d)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True, order="C")
    a.flags.writeable = False
    return a


class LabeledTable:
    """Immutable borrower records plus 0/1 labels (1 = fraud or overdue)."""

    __slots__ = ("schema", "columns", "labels")

    def __init__(self, schema: FeatureSchema, columns: Sequence[np.ndarray], labels):
        if len(columns) != len(schema):
            raise SchemaError(f"expected {len(schema)} columns, got {len(columns)}")
        labels = np.asarray(labels)
        n = labels.shape[0]
        cols = []
        for spec, col in zip(schema.features, columns):
            col = np.asarray(col)
            if col.shape != (n,):
                raise SchemaError(f"{spec.name}: column length {col.shape} != {n}")
            if spec.is_numeric:
                col = col.astype(np.float64, copy=False)
                bad = ~np.isfinite(col)
                if bad.any():
                    i = int(np.argmax(bad))
                    raise NonNumericCell(i, spec.name, col[i])
            else:
                col = col.astype(np.int32, copy=False)
                bad = (col < 0) | (col >= len(spec.categories))
                if bad.any():
                    i = int(np.argmax(bad))
                    raise UnknownCategory(i, spec.name, int(col[i]))
            cols.append(_frozen(col))
        bad = (labels != 0) & (labels != 1)
        if bad.any():
            i = int(np.argmax(bad))
            raise BadLabel(i, labels[i])
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "columns", tuple(cols))
        object.__setattr__(self, "labels", _frozen(labels.astype(np.int8)))

    def __setattr__(self, name, value):
        raise AttributeError("LabeledTable is immutable")

    @classmethod
    def from_rows(cls, schema: FeatureSchema, rows: Iterable[Sequence], labels) -> "LabeledTable":
        """Build a table from records whose categorical cells are category labels."""
        rows = [tuple(r) for r in rows]
        labels = list(labels)
        if len(rows) != len(labels):
            raise SchemaError(f"{len(rows)} rows but {len(labels)} labels")
        cols = []
        for j, spec in enumerate(schema.features):
            if spec.is_numeric:
                out = np.empty(len(rows), dtype=np.float64)
                for i, r in enumerate(rows):
                    v = r[j]
                    if isinstance(v, (str, bool)) or not isinstance(v, (int, float, np.number)):
                        raise NonNumericCell(i, spec.name, v)
                    out[i] = v
            else:
                index = {c: k for k, c in enumerate(spec.categories)}
                out = np.empty(len(rows), dtype=np.int32)
                for i, r in enumerate(rows):
                    if r[j] not in index:
                        raise UnknownCategory(i, spec.name, r[j])
                    out[i] = index[r[j]]
            cols.append(out)
        for i, y in enumerate(labels):
            if y not in (0, 1) or isinstance(y, bool):
                raise BadLabel(i, y)
        return cls(schema, cols, np.asarray(labels, dtype=np.int8).reshape(len(labels)))

    @property
    def n_rows(self) -> int:
        return int(self.labels.shape[0])

    def __len__(self):
        return self.n_rows

    def row(self, i: int) -> tuple:
        out = []
        for spec, col in zip(self.schema.features, self.columns):
            out.append(float(col[i]) if spec.is_numeric else spec.categories[col[i]])
        return tuple(out)

    @property
    def rows(self) -> list[tuple]:
        return [self.row(i) for i in range(self.n_rows)]

    def take(self, indices) -> "LabeledTable":
        idx = np.asarray(indices, dtype=np.intp)
        return LabeledTable(self.schema, [c[idx] for c in self.columns], self.labels[idx])

    def __eq__(self, other):
        if not isinstance(other, LabeledTable):
            return NotImplemented
        return (
            self.schema == other.schema
            and np.array_equal(self.labels, other.labels)
            and all(np.array_equal(a, b) for a, b in zip(self.columns, other.columns))
        )

    def __repr__(self):
        return f"LabeledTable(n_rows={self.n_rows}, n_features={len(self.schema)})"


# ---------------------------------------------------------------------------
# CSV


def read_csv(path, schema: FeatureSchema) -> LabeledTable:
    """Read a data CSV written against ``schema``.

    Errors name the first offending cell in row-major order (rows are
    0-based data rows, header excluded).
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            records = list(reader)
    except OSError as e:
        raise IoFailure(str(e)) from e
    expected = schema.names + [schema.label_name]
    header = header or []
    for name in expected:
        if name not in header:
            raise MissingColumn(name)
    if header != expected:
        raise SchemaError(f"header order {header} does not match schema {expected}")
    width = len(expected)
    for i, rec in enumerate(records):
        if len(rec) != width:
            raise SchemaError(f"row {i} has {len(rec)} cells, expected {width}")

    n = len(records)
    cols = list(zip(*records)) if n else [()] * width
    errors = []  # (row, feature_index, exception)
    parsed = []
    for j, spec in enumerate(schema.features):
        raw = cols[j]
        if spec.is_numeric:
            try:
                arr = np.array(raw, dtype=np.float64) if n else np.empty(0)
                bad = ~np.isfinite(arr)
                first = int(np.argmax(bad)) if bad.any() else None
            except ValueError:
                arr = None
                first = _first_unparsable(raw)
            if first is not None:
                errors.append((first, j, NonNumericCell(first, spec.name, raw[first])))
            parsed.append(arr)
        else:
            index = {c: k for k, c in enumerate(spec.categories)}
            codes = [index.get(v, -1) for v in raw]
            arr = np.array(codes, dtype=np.int32)
            if n and (arr < 0).any():
                first = int(np.argmax(arr < 0))
                errors.append((first, j, UnknownCategory(first, spec.name, raw[first])))
            parsed.append(arr)
    raw_labels = cols[width - 1]
    labels = np.array([{"0": 0, "1": 1}.get(v, -1) for v in raw_labels], dtype=np.int8)
    if n and (labels < 0).any():
        first = int(np.argmax(labels < 0))
        errors.append((first, width - 1, BadLabel(first, raw_labels[first])))
    if errors:
        raise min(errors, key=lambda e: (e[0], e[1]))[2]
    return LabeledTable(schema, parsed, labels)


def _first_unparsable(cells) -> int:
    for i, v in enumerate(cells):
        try:
            x = float(v)
        except ValueError:
            return i
        if not math.isfinite(x):
            return i
    raise AssertionError("unreachable: no unparsable cell found")


def write_csv(table: LabeledTable, path) -> None:
    """Write ``table``; floats use shortest round-trip repr so re-reads are exact."""
    schema = table.schema
    out_cols = []
    for spec, col in zip(schema.features, table.columns):
        if spec.is_numeric:
            out_cols.append([repr(v) for v in col.tolist()])
        else:
            cats = spec.categories
            out_cols.append([cats[c] for c in col.tolist()])
    out_cols.append([str(v) for v in table.labels.tolist()])
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(schema.names + [schema.label_name]) + "\n")
            for rec in zip(*out_cols):
                fh.write(",".join(rec) + "\n")
    except OSError as e:
        raise IoFailure(str(e)) from e


# ---------------------------------------------------------------------------
# synthetic borrowers

PRESETS = {
    "A_like": dict(n_rows=60000, fraud_rate=0.5),
    "B_like": dict(n_rows=50000, fraud_rate=0.5),
}


# Numeric scales are log-spaced over this range (base-10 exponents).
LOG10_SCALE_RANGE = (-3.5, 1.0)
# Each categorical feature gets a category count drawn from this inclusive range.
CATEGORY_COUNT_RANGE = (2, 6)


@dataclass(frozen=True)
class SynthConfig:
    preset: str = "custom"
    n_rows: int = 10000
    fraud_rate: float = 0.5
    n_numeric: int = 64
    n_categorical: int = 33
    seed: int = 0
    noise: float = 0.5
    signal_numeric: int = 12
    signal_categorical: int = 0

    def __post_init__(self):
        if self.preset not in ("A_like", "B_like", "custom"):
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.preset != "custom":
            for k, v in PRESETS[self.preset].items():
                if getattr(self, k) != v:
                    raise ValueError(f"preset {self.preset} fixes {k}={v}")
        if self.n_rows < 1:
            raise ValueError("n_rows must be positive")
        if not 0.0 < self.fraud_rate < 1.0:
            raise ValueError("fraud_rate must lie in (0, 1)")
        if self.n_numeric < 0 or self.n_categorical < 0 or self.n_numeric + self.n_categorical < 2:
            raise ValueError("need at least 2 features in total")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")
        if self.signal_numeric < 0 or self.signal_categorical < 0:
            raise ValueError("signal counts must be non-negative")

    @classmethod
    def from_preset(cls, preset: str, seed: int = 0, **overrides) -> "SynthConfig":
        return cls(preset=preset, seed=seed, **{**PRESETS[preset], **overrides})


def _make_schema(cfg: SynthConfig, rng: np.random.Generator) -> FeatureSchema:
    feats = []
    total = cfg.n_numeric + cfg.n_categorical
    for j in range(total):
        group = GROUPS[j % len(GROUPS)]
        if j < cfg.n_numeric:
            feats.append(FeatureSpec(f"{group}_num{j:02d}", group, "numeric"))
        else:
            k = int(rng.integers(CATEGORY_COUNT_RANGE[0], CATEGORY_COUNT_RANGE[1] + 1))
            cats = tuple(f"c{i}" for i in range(k))
            feats.append(FeatureSpec(f"{group}_cat{j:02d}", group, "categorical", cats))
    return FeatureSchema(tuple(feats), "label")


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def synthesize(config: SynthConfig) -> tuple[LabeledTable, FeatureSchema]:
    """Generate a labelled borrower table with known signal structure.

    Numeric features are ``scale * N(0, 1)`` with scales log-spaced over
    10^-3.5..10^1.  The latent fraud score is linear in a fixed random subset of
    standardized features, plus one pairwise product of two of them, plus
    Gaussian noise.  The intercept is bisected so the empirical positive
    rate lands within 0.005 of ``config.fraud_rate``.
    """
    cfg = config
    rng = np.random.default_rng(cfg.seed)
    schema = _make_schema(cfg, rng)
    n = cfg.n_rows

    if cfg.n_numeric > 1:
        scales = 10.0 ** np.linspace(*LOG10_SCALE_RANGE, cfg.n_numeric)
        scales = scales[rng.permutation(cfg.n_numeric)]
    else:
        scales = np.ones(cfg.n_numeric)
    z = rng.standard_normal((n, cfg.n_numeric))
    columns = [z[:, j] * scales[j] for j in range(cfg.n_numeric)]

    # Standardized signal carriers, one per feature.
    carriers = [z[:, j] for j in range(cfg.n_numeric)]
    for spec in schema.features[cfg.n_numeric:]:
        k = len(spec.categories)
        codes = rng.integers(0, k, n).astype(np.int32)
        columns.append(codes)
        effects = rng.standard_normal(k)
        effects -= effects.mean()
        sd = effects.std()
        effects = effects / sd if sd > 0 else effects
        carriers.append(effects[codes])

    total = cfg.n_numeric + cfg.n_categorical
    n_sig_num = min(cfg.signal_numeric, cfg.n_numeric)
    n_sig_cat = min(cfg.signal_categorical, cfg.n_categorical)
    chosen = list(rng.choice(cfg.n_numeric, n_sig_num, replace=False)) if n_sig_num else []
    if n_sig_cat:
        chosen += list(cfg.n_numeric + rng.choice(cfg.n_categorical, n_sig_cat, replace=False))
    weights = rng.uniform(0.6, 1.2, len(chosen)) * rng.choice([-1.0, 1.0], len(chosen))
    latent = np.zeros(n)
    for w, j in zip(weights, chosen):
        latent += w * carriers[j]
    a, b = chosen[0], chosen[1] if len(chosen) > 1 else (chosen[0] + 1) % total
    latent += 1.5 * carriers[a] * carriers[b]
    latent += cfg.noise * rng.standard_normal(n)

    u = rng.random(n)
    labels = _calibrate_labels(latent, u, cfg.fraud_rate)
    return LabeledTable(schema, columns, labels), schema


def _calibrate_labels(latent, u, rate, tol=0.005):
    """Bisect an intercept so ``mean(u < sigmoid(latent + offset))`` ~ rate."""
    n = len(latent)
    lo, hi = -60.0, 60.0
    best = None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        labels = (u < _sigmoid(latent + mid)).astype(np.int8)
        frac = labels.sum() / n
        if best is None or abs(frac - rate) < abs(best[0] - rate):
            best = (frac, labels)
        if abs(frac - rate) <= tol / 10:
            break
        if frac < rate:
            lo = mid
        else:
            hi = mid
    return best[1]


# ---------------------------------------------------------------------------
# splitting


@dataclass(frozen=True)
class SplitSpec:
    ratio: tuple[int, ...] = (4, 1, 1)
    seed: int = 0
    stratify: bool = True

    def __post_init__(self):
        object.__setattr__(self, "ratio", tuple(int(r) for r in self.ratio))
        if len(self.ratio) != 3 or any(r < 1 for r in self.ratio):
            raise ValueError("ratio must be three positive integers")


def apportion(n: int, ratio: Sequence[int]) -> list[int]:
    """Largest-remainder apportionment of ``n`` items; ties go to the lower index."""
    total = sum(ratio)
    floors = [n * r // total for r in ratio]
    rems = [n * r % total for r in ratio]
    left = n - sum(floors)
    order = sorted(range(len(ratio)), key=lambda i: (-rems[i], i))
    for i in order[:left]:
        floors[i] += 1
    return floors


def split(table: LabeledTable, spec: SplitSpec = SplitSpec()):
    """Partition rows into (train, test, validation).

    Without stratification the part sizes are the largest-remainder
    apportionment of the row count.  With stratification each class is
    apportioned separately and part sizes are the per-class sums.
    Rows keep their original relative order inside each part.
    """
    n = table.n_rows
    if n < sum(spec.ratio):
        raise TooFewRows(f"{n} rows cannot be split {':'.join(map(str, spec.ratio))}")
    rng = np.random.default_rng(spec.seed)
    if spec.stratify:
        groups = [np.flatnonzero(table.labels == 1), np.flatnonzero(table.labels == 0)]
    else:
        groups = [np.arange(n)]
    parts = [[], [], []]
    for idx in groups:
        idx = rng.permutation(idx)
        start = 0
        for p, size in enumerate(apportion(len(idx), spec.ratio)):
            parts[p].append(idx[start:start + size])
            start += size
    return tuple(table.take(np.sort(np.concatenate(p))) for p in parts)


def class_balance(table: LabeledTable) -> tuple[int, int, float]:
    n_pos = int(table.labels.sum())
    n = table.n_rows
    return n_pos, n - n_pos, (n_pos / n if n else 0.0)
