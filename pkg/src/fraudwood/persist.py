"""Model files: a fitted pipeline plus a forest or boosted model.

Layout::

    b"FRWD" | u32 format_version | u64 payload length | u32 crc32 | payload

The payload is UTF-8 JSON.  Floats are written with Python's shortest
round-trip repr, so loading reproduces every parameter bit for bit.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from .boosting import GbdtModel, GbdtParams
from .dataset import FeatureSchema
from .errors import CorruptModel, IoFailure, VersionMismatch
from .features import FittedPipeline, PcaModel, PipelineSpec, fit_one_hot
from .forest import ForestModel, ForestParams
from .tree import Tree

MAGIC = b"FRWD"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQI")


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a, dtype=np.float64).ravel()]


def pipeline_to_dict(p: FittedPipeline) -> dict:
    d = {
        "variant": p.spec.variant,
        "pca_components": p.spec.pca_components,
        "schema": p.schema.to_dict(),
        "tanh_mask": None if p.tanh_mask is None else [bool(v) for v in p.tanh_mask],
        "pca": None,
    }
    if p.pca is not None:
        d["pca"] = {
            "mean": _floats(p.pca.mean),
            "components": [_floats(c) for c in p.pca.components],
            "explained_variance": _floats(p.pca.explained_variance),
            "total_variance": float(p.pca.total_variance),
        }
    return d


def pipeline_from_dict(d: dict) -> FittedPipeline:
    schema = FeatureSchema.from_dict(d["schema"])
    spec = PipelineSpec(d["variant"], d["pca_components"])
    mask = None if d["tanh_mask"] is None else np.array(d["tanh_mask"], dtype=bool)
    pca = None
    if d["pca"] is not None:
        q = d["pca"]
        width = len(q["mean"])
        pca = PcaModel(
            np.array(q["mean"], dtype=np.float64),
            np.array(q["components"], dtype=np.float64).reshape(-1, width),
            np.array(q["explained_variance"], dtype=np.float64),
            float(q["total_variance"]),
        )
    return FittedPipeline(spec, fit_one_hot(None, schema), mask, pca)


def model_to_dict(model) -> dict:
    if isinstance(model, ForestModel):
        p = model.params
        return {
            "kind": "rf",
            "width": model.width,
            "params": {"n_trees": p.n_trees, "max_depth": p.max_depth, "bootstrap": p.bootstrap,
                       "feature_fraction_rule": p.feature_fraction_rule, "seed": p.seed,
                       "min_samples_split": p.min_samples_split},
            "trees": [t.to_dict() for t in model.trees],
        }
    if isinstance(model, GbdtModel):
        p = model.params
        return {
            "kind": "gbdt",
            "width": model.width,
            "f0": float(model.f0),
            "learning_rate": float(model.learning_rate),
            "params": {"n_trees": p.n_trees, "max_depth": p.max_depth,
                       "learning_rate": p.learning_rate, "seed": p.seed,
                       "min_samples_split": p.min_samples_split},
            "stages": [t.to_dict() for t in model.stages],
        }
    raise TypeError(f"cannot serialise {type(model).__name__}")


def model_from_dict(d: dict):
    if d["kind"] == "rf":
        trees = tuple(Tree.from_dict(t) for t in d["trees"])
        return ForestModel(trees, ForestParams(**d["params"]), int(d["width"]))
    if d["kind"] == "gbdt":
        stages = tuple(Tree.from_dict(t) for t in d["stages"])
        return GbdtModel(float(d["f0"]), stages, float(d["learning_rate"]), int(d["width"]),
                         GbdtParams(**d["params"]))
    raise CorruptModel(f"unknown model kind {d['kind']!r}")


def dumps(model, pipeline: FittedPipeline) -> bytes:
    payload = json.dumps(
        {"pipeline": pipeline_to_dict(pipeline), "model": model_to_dict(model)},
        separators=(",", ":"),
    ).encode("utf-8")
    return _HEADER.pack(MAGIC, FORMAT_VERSION, len(payload), zlib.crc32(payload)) + payload


def loads(blob: bytes):
    if len(blob) < _HEADER.size:
        raise CorruptModel("file too short for a model header")
    magic, version, length, crc = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CorruptModel("not a model file (bad magic)")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"model format_version {version}; this build reads {FORMAT_VERSION}")
    payload = blob[_HEADER.size:]
    if len(payload) != length:
        raise CorruptModel(f"payload is {len(payload)} bytes, header says {length}")
    if zlib.crc32(payload) != crc:
        raise CorruptModel("payload checksum mismatch")
    try:
        d = json.loads(payload.decode("utf-8"))
        return model_from_dict(d["model"]), pipeline_from_dict(d["pipeline"])
    except CorruptModel:
        raise
    except Exception as e:  # malformed but checksummed payload
        raise CorruptModel(f"cannot decode model payload: {e}") from None


def save_model(model, pipeline: FittedPipeline, path) -> None:
    blob = dumps(model, pipeline)
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
    except OSError as e:
        raise IoFailure(str(e)) from e


def load_model(path):
    """Return ``(model, pipeline)`` from a file written by :func:`save_model`."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as e:
        raise IoFailure(str(e)) from e
    return loads(blob)
