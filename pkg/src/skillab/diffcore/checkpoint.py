"""Parameter checkpoints: a JSON manifest plus one raw float32 blob.

`<prefix>.manifest.json` lists leaf names, shapes, dtype and byte offsets;
`<prefix>.blob` holds the concatenated little-endian float32 values.
Round-trips preserve values to float32 precision.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .params import ParamTree

FORMAT = "skillab-params-v1"


def _atomic_write_bytes(path, data):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _atomic_write_text(path, text):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def save_params(params, prefix, meta=None):
    """Write `<prefix>.manifest.json` + `<prefix>.blob`."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    leaves = []
    chunks = []
    offset = 0
    for name in sorted(params.keys()):
        arr = np.ascontiguousarray(params[name], dtype="<f4")
        raw = arr.tobytes()
        leaves.append({
            "name": name,
            "shape": list(arr.shape),
            "offset": offset,
            "nbytes": len(raw),
        })
        chunks.append(raw)
        offset += len(raw)
    manifest = {
        "format": FORMAT,
        "dtype": "<f4",
        "total_bytes": offset,
        "leaves": leaves,
        "meta": meta or {},
    }
    _atomic_write_bytes(prefix.with_suffix(".blob"), b"".join(chunks))
    _atomic_write_text(prefix.with_suffix(".manifest.json"),
                       json.dumps(manifest, indent=2, sort_keys=True))
    return prefix


def load_params(prefix):
    """Read a checkpoint pair; returns (ParamTree, meta dict)."""
    prefix = Path(prefix)
    manifest_path = prefix.with_suffix(".manifest.json")
    blob_path = prefix.with_suffix(".blob")
    if not manifest_path.exists():
        raise FileNotFoundError(str(manifest_path))
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"unreadable manifest {manifest_path}: {e}") from e
    if manifest.get("format") != FORMAT:
        raise FormatError(
            f"field 'format': expected '{FORMAT}', got {manifest.get('format')!r}"
        )
    if not blob_path.exists():
        raise FileNotFoundError(str(blob_path))
    blob = blob_path.read_bytes()
    if len(blob) != manifest.get("total_bytes"):
        raise FormatError(
            f"field 'total_bytes': manifest says {manifest.get('total_bytes')}, "
            f"blob has {len(blob)}"
        )
    leaves = {}
    for entry in manifest["leaves"]:
        name = entry.get("name")
        shape = tuple(entry.get("shape", ()))
        offset, nbytes = entry.get("offset"), entry.get("nbytes")
        expected = int(np.prod(shape, dtype=np.int64)) * 4
        if nbytes != expected:
            raise FormatError(
                f"leaf '{name}': shape {shape} implies {expected} bytes, "
                f"manifest says {nbytes}"
            )
        if offset + nbytes > len(blob):
            raise FormatError(f"leaf '{name}': blob truncated")
        arr = np.frombuffer(blob, dtype="<f4", count=expected // 4, offset=offset)
        leaves[name] = arr.reshape(shape).astype(np.float64)
    return ParamTree(leaves), manifest.get("meta", {})
