"""Field dumps as raw little-endian complex64 with a JSON sidecar."""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .grid import DataFunction, FrequencyGrid, Grid, SpacetimeField

FORMAT = "schrolab-field"
VERSION = 1
DTYPE = np.dtype("<c8")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_field(path, obj: SpacetimeField | DataFunction) -> Path:
    """Write ``obj`` to ``path`` (raw bytes) and ``path.json`` (metadata).

    Values are stored as complex64, so complex128 input is rounded once;
    fields that are already complex64-representable round-trip exactly.
    """
    path = Path(path)
    if isinstance(obj, SpacetimeField):
        kind, grid = "spacetime", asdict(obj.grid)
    elif isinstance(obj, DataFunction):
        kind, grid = "data", asdict(obj.grid)
    else:
        raise TypeError(f"cannot write {type(obj).__name__}")
    data = np.ascontiguousarray(obj.values, dtype=DTYPE)
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "dtype": "complex64",
        "byte_order": "little",
        "shape": list(data.shape),
        "grid": grid,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data.tobytes())
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_field(path) -> SpacetimeField | DataFunction:
    path = Path(path)
    meta = json.loads(sidecar_path(path).read_text())
    if meta.get("format") != FORMAT or meta.get("version") != VERSION:
        raise ValueError(f"{path} is not a version-{VERSION} {FORMAT} file")
    if meta["dtype"] != "complex64" or meta["byte_order"] != "little":
        raise ValueError("only little-endian complex64 dumps are supported")
    shape = tuple(meta["shape"])
    raw = np.frombuffer(path.read_bytes(), dtype=DTYPE)
    if raw.size != int(np.prod(shape)):
        raise ValueError(f"{path} holds {raw.size} values, sidecar expects shape {shape}")
    values = raw.reshape(shape).astype(complex)
    if meta["kind"] == "spacetime":
        return SpacetimeField(Grid(**meta["grid"]), values)
    if meta["kind"] == "data":
        return DataFunction(FrequencyGrid(**meta["grid"]), values)
    raise ValueError(f"unknown field kind {meta['kind']!r}")
