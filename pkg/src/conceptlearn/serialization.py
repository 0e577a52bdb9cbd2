"""Versioned binary container: one JSON header line plus raw array payload.

The header records the format tag, version, arbitrary JSON metadata and the
sha256 of the payload. Writing is fully deterministic (sorted keys, fixed
separators, little-endian C-order arrays), so identical content yields
byte-identical files and round trips are bit-exact.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import SnapshotError

_MAGIC = "conceptlearn-container"


def write_container(path, fmt: str, version: int, meta: dict, arrays: list[tuple[str, np.ndarray]]):
    """Write metadata plus named arrays; array order is preserved in the payload."""
    specs = []
    chunks = []
    for name, arr in arrays:
        arr = np.ascontiguousarray(arr)
        if arr.dtype.kind == "f":
            arr = arr.astype("<f8", copy=False)
        elif arr.dtype.kind in "iu":
            arr = arr.astype("<i8", copy=False)
        else:
            raise SnapshotError(f"unsupported array dtype {arr.dtype} for {name}")
        specs.append({"name": name, "shape": list(arr.shape), "dtype": arr.dtype.str})
        chunks.append(arr.tobytes())
    payload = b"".join(chunks)
    header = {
        "magic": _MAGIC,
        "format": fmt,
        "version": version,
        "meta": meta,
        "arrays": specs,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode() + b"\n"
    Path(path).write_bytes(header_bytes + payload)


def read_container(path, fmt: str, version: int) -> tuple[dict, dict[str, np.ndarray]]:
    """Read and verify a container; returns (meta, {name: array})."""
    path = Path(path)
    if not path.exists():
        raise SnapshotError(f"file not found: {path}")
    raw = path.read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise SnapshotError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:nl].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"{path}: corrupt header: {exc}") from exc
    if header.get("magic") != _MAGIC or header.get("format") != fmt:
        raise SnapshotError(f"{path}: not a {fmt} container")
    if header.get("version") != version:
        raise SnapshotError(
            f"{path}: version {header.get('version')} unsupported (expected {version})"
        )
    payload = raw[nl + 1:]
    if hashlib.sha256(payload).hexdigest() != header.get("payload_sha256"):
        raise SnapshotError(f"{path}: payload checksum mismatch")
    arrays = {}
    offset = 0
    for spec in header["arrays"]:
        dt = np.dtype(spec["dtype"])
        count = int(np.prod(spec["shape"])) if spec["shape"] else 1
        nbytes = count * dt.itemsize
        if offset + nbytes > len(payload):
            raise SnapshotError(f"{path}: truncated payload")
        arr = np.frombuffer(payload[offset:offset + nbytes], dtype=dt).reshape(spec["shape"])
        arrays[spec["name"]] = arr.copy()
        offset += nbytes
    if offset != len(payload):
        raise SnapshotError(f"{path}: trailing bytes in payload")
    return header["meta"], arrays
