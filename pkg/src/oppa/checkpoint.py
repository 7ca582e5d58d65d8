"""Parameter checkpointing: a JSON manifest plus one little-endian
float64 blob per store. Values, Adam moments and the optimizer step
count round-trip bit-identically; gradients are transient and excluded."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .nn import ParamStore

MANIFEST_NAME = "manifest.json"
BLOB_NAME = "params.bin"
FORMAT = "oppa-checkpoint-v1"
KINDS = ("value", "m1", "m2")


class CheckpointError(Exception):
    """Base class for unreadable or inconsistent checkpoints."""


class CorruptManifestError(CheckpointError):
    """Manifest missing, unparsable, or internally inconsistent."""


class ShapeMismatchError(CheckpointError):
    """A manifest entry's shape disagrees with its recorded size."""


class TruncatedBlobError(CheckpointError):
    """Parameter blob shorter than the manifest promises."""


def save_checkpoint(store: ParamStore, path) -> Path:
    """Write manifest + blob into the directory at path."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    entries = []
    parts = []
    offset = 0
    for name in store.names():
        m1, m2 = store.moments(name)
        for kind, arr in zip(KINDS, (store[name].data, m1, m2)):
            size = int(arr.size)
            entries.append({"name": name, "kind": kind,
                            "shape": list(arr.shape),
                            "offset": offset, "size": size})
            parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
            offset += size
    manifest = {"format": FORMAT, "step_count": int(store.step_count),
                "total_floats": offset, "entries": entries}
    (path / MANIFEST_NAME).write_text(
        json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n")
    (path / BLOB_NAME).write_bytes(b"".join(parts))
    return path


def load_checkpoint(path) -> ParamStore:
    """Rebuild a ParamStore; raises a distinct error per failure mode."""
    path = Path(path)
    manifest_path = path / MANIFEST_NAME
    if not manifest_path.exists():
        raise CorruptManifestError(f"no manifest at {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CorruptManifestError(f"unparsable manifest: {e}") from e
    for key in ("format", "step_count", "total_floats", "entries"):
        if key not in manifest:
            raise CorruptManifestError(f"manifest missing key {key!r}")
    if manifest["format"] != FORMAT:
        raise CorruptManifestError(f"unknown format {manifest['format']!r}")

    running = 0
    for e in manifest["entries"]:
        declared = int(np.prod(e["shape"])) if e["shape"] else 1
        if declared != e["size"] or e["offset"] != running:
            raise ShapeMismatchError(
                f"entry {e['name']}:{e['kind']} shape {e['shape']} "
                f"inconsistent with size {e['size']} at offset {e['offset']}")
        running += e["size"]
    if running != manifest["total_floats"]:
        raise CorruptManifestError("entry sizes do not add up to total_floats")

    blob = (path / BLOB_NAME).read_bytes() if (path / BLOB_NAME).exists() else b""
    expected_bytes = manifest["total_floats"] * 8
    if len(blob) < expected_bytes:
        raise TruncatedBlobError(
            f"blob holds {len(blob)} bytes, manifest promises {expected_bytes}")
    if len(blob) > expected_bytes:
        raise CorruptManifestError(
            f"blob holds {len(blob)} bytes, manifest promises {expected_bytes}")

    store = ParamStore()
    for e in manifest["entries"]:
        arr = np.frombuffer(blob, dtype="<f8", count=e["size"],
                            offset=e["offset"] * 8).reshape(e["shape"]).copy()
        if e["kind"] == "value":
            store.add(e["name"], arr)
        else:
            if e["name"] not in store:
                raise CorruptManifestError(
                    f"moment entry {e['name']}:{e['kind']} precedes its value")
            m1, m2 = store.moments(e["name"])
            target = m1 if e["kind"] == "m1" else m2
            if target.shape != arr.shape:
                raise ShapeMismatchError(
                    f"entry {e['name']}:{e['kind']} shape {list(arr.shape)} "
                    f"does not match value shape {list(target.shape)}")
            target[...] = arr
    store.step_count = int(manifest["step_count"])
    return store
