"""Encoding of borrower tables into numeric matrices.

Four preprocessing variants are supported: ``raw`` (one-hot only),
``tanh`` (one-hot, then tanh on numeric-origin columns), ``pca`` (one-hot,
then PCA) and ``tanh_pca`` (one-hot, tanh, then PCA fitted on the squashed
matrix).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .dataset import FeatureSchema, LabeledTable
from .errors import DegenerateInput, SchemaError, UnknownCategory, WidthMismatch

VARIANTS = ("raw", "pca", "tanh", "tanh_pca")


@dataclass(frozen=True)
class OneHotMap:
    schema: FeatureSchema
    offsets: tuple[int, ...]  # first encoded column of each feature
    width: int

    def columns_of(self, feature_index: int) -> range:
        spec = self.schema.features[feature_index]
        start = self.offsets[feature_index]
        return range(start, start + (1 if spec.is_numeric else len(spec.categories)))

    @property
    def numeric_mask(self) -> np.ndarray:
        mask = np.zeros(self.width, dtype=bool)
        for j, spec in enumerate(self.schema.features):
            if spec.is_numeric:
                mask[self.offsets[j]] = True
        return mask

    @property
    def column_names(self) -> list[str]:
        names = []
        for spec in self.schema.features:
            if spec.is_numeric:
                names.append(spec.name)
            else:
                names.extend(f"{spec.name}={c}" for c in spec.categories)
        return names


def fit_one_hot(table: LabeledTable | None, schema: FeatureSchema) -> OneHotMap:
    """Lay out encoded columns from the schema's declared category universe.

    ``table`` is accepted for symmetry with the other fit steps; observed
    values never change the layout.
    """
    if table is not None and table.schema != schema:
        raise SchemaError("table was built against a different schema")
    offsets, pos = [], 0
    for spec in schema.features:
        offsets.append(pos)
        pos += 1 if spec.is_numeric else len(spec.categories)
    return OneHotMap(schema, tuple(offsets), pos)


def encode(table: LabeledTable, ohm: OneHotMap) -> np.ndarray:
    """One column per numeric feature, one 0/1 column per declared category."""
    fitted = ohm.schema
    if table.schema.names != fitted.names:
        raise WidthMismatch(len(fitted), len(table.schema))
    out = np.zeros((table.n_rows, ohm.width), dtype=np.float64)
    rows = np.arange(table.n_rows)
    for j, (spec, ref, col) in enumerate(zip(table.schema.features, fitted.features, table.columns)):
        if spec.kind != ref.kind:
            raise SchemaError(f"{spec.name}: kind {spec.kind} does not match fitted {ref.kind}")
        start = ohm.offsets[j]
        if spec.is_numeric:
            out[:, start] = col
            continue
        if spec.categories != ref.categories:
            # Table declares its own category list; translate by label.
            index = {c: k for k, c in enumerate(ref.categories)}
            remap = np.array([index.get(c, -1) for c in spec.categories], dtype=np.intp)
            col = remap[col]
            if (col < 0).any():
                i = int(np.argmax(col < 0))
                raise UnknownCategory(i, spec.name, spec.categories[table.columns[j][i]])
        out[rows, start + col] = 1.0
    return out


def tanh_transform(m: np.ndarray, numeric_mask) -> np.ndarray:
    mask = np.asarray(numeric_mask, dtype=bool)
    if mask.shape != (m.shape[1],):
        raise WidthMismatch(m.shape[1], mask.shape[0])
    out = np.array(m, dtype=np.float64, copy=True)
    out[:, mask] = np.tanh(out[:, mask])
    return out


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, width), rows orthonormal
    explained_variance: np.ndarray  # (k,)
    total_variance: float

    @property
    def width(self) -> int:
        return int(self.mean.shape[0])

    @property
    def n_components(self) -> int:
        return int(self.components.shape[0])

    @property
    def explained_variance_ratio(self) -> np.ndarray:
        if self.total_variance <= 0:
            return np.zeros_like(self.explained_variance)
        return self.explained_variance / self.total_variance


def fit_pca(m: np.ndarray, target: Union[int, float] = 0.95) -> PcaModel:
    """Principal axes of the sample covariance (divisor n - 1).

    ``target`` is either a component count (int) or a cumulative
    explained-variance fraction in (0, 1].  Each component is signed so its
    largest-magnitude entry is positive (first such entry on ties).
    """
    m = np.asarray(m, dtype=np.float64)
    n, width = m.shape
    if n < 2:
        raise DegenerateInput("PCA needs at least 2 rows")
    mean = m.mean(axis=0)
    centered = m - mean
    cov = centered.T @ centered / (n - 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(-vals, kind="stable")
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order].T.copy()
    for v in vecs:
        lead = int(np.argmax(np.abs(v) >= np.abs(v).max()))
        if v[lead] < 0:
            v *= -1.0
    total = float(np.trace(cov))

    if isinstance(target, (int, np.integer)) and not isinstance(target, bool):
        if not 1 <= target <= width:
            raise ValueError(f"component count must lie in [1, {width}]")
        k = int(target)
    else:
        frac = float(target)
        if not 0.0 < frac <= 1.0:
            raise ValueError("variance fraction must lie in (0, 1]")
        if total <= 0:
            k = 1
        else:
            cum = np.cumsum(vals) / total
            k = int(np.searchsorted(cum, frac - 1e-12) + 1)
            k = min(k, width)
    return PcaModel(mean, vecs[:k], vals[:k], total)


def project(m: np.ndarray, pca: PcaModel) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[1] != pca.width:
        raise WidthMismatch(pca.width, m.shape[-1])
    return (m - pca.mean) @ pca.components.T


def reconstruct(z: np.ndarray, pca: PcaModel) -> np.ndarray:
    return pca.mean + z @ pca.components


@dataclass(frozen=True)
class PipelineSpec:
    variant: str = "raw"
    pca_components: Union[int, float] = 0.95

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")

    @property
    def uses_tanh(self) -> bool:
        return self.variant in ("tanh", "tanh_pca")

    @property
    def uses_pca(self) -> bool:
        return self.variant in ("pca", "tanh_pca")


@dataclass(frozen=True)
class FittedPipeline:
    spec: PipelineSpec
    one_hot: OneHotMap
    tanh_mask: np.ndarray | None = None
    pca: PcaModel | None = None

    @property
    def schema(self) -> FeatureSchema:
        return self.one_hot.schema

    @property
    def output_width(self) -> int:
        return self.pca.n_components if self.pca is not None else self.one_hot.width

    def describe(self) -> dict:
        d = {"variant": self.spec.variant, "encoded_width": self.one_hot.width,
             "output_width": self.output_width}
        if self.pca is not None:
            d["pca_components"] = self.pca.n_components
        return d


def fit_transform(table: LabeledTable, schema: FeatureSchema, spec: PipelineSpec):
    """Fit every stage the variant needs and return ``(fitted, train_matrix)``."""
    ohm = fit_one_hot(table, schema)
    m = encode(table, ohm)
    mask = None
    if spec.uses_tanh:
        mask = ohm.numeric_mask
        m = tanh_transform(m, mask)
    pca = None
    if spec.uses_pca:
        pca = fit_pca(m, spec.pca_components)
        m = project(m, pca)
    return FittedPipeline(spec, ohm, mask, pca), m


def fit_pipeline(table: LabeledTable, schema: FeatureSchema, spec: PipelineSpec) -> FittedPipeline:
    return fit_transform(table, schema, spec)[0]


def apply_pipeline(table: LabeledTable, fitted: FittedPipeline) -> np.ndarray:
    m = encode(table, fitted.one_hot)
    if fitted.tanh_mask is not None:
        m = tanh_transform(m, fitted.tanh_mask)
    if fitted.pca is not None:
        m = project(m, fitted.pca)
    return m
