"""Single-file checkpoint container with a named-tensor manifest.

Layout: 4-byte magic "ACEK", little-endian u32 format version, little-endian
u64 manifest length, canonical UTF-8 JSON manifest, then raw little-endian
tensor payloads in manifest order. Tensors are written sorted by name so a
save -> load -> save cycle is byte-identical.
"""

from __future__ import annotations

import json
import struct

import numpy as np
import torch

MAGIC = b"ACEK"
FORMAT_VERSION = 1

_DTYPE_CODES = {
    torch.float32: "f4",
    torch.float64: "f8",
    torch.int64: "i8",
    torch.int32: "i4",
    torch.uint8: "u1",
}


class CheckpointError(RuntimeError):
    """Unreadable, corrupt, or version-incompatible checkpoint file."""


def save_checkpoint(path, tensors: dict[str, torch.Tensor], meta: dict) -> None:
    """Write named tensors plus a JSON-serializable meta block to path."""
    entries = []
    payloads = []
    offset = 0
    for name in sorted(tensors):
        t = tensors[name].detach().cpu().contiguous()
        code = _DTYPE_CODES.get(t.dtype)
        if code is None:
            raise CheckpointError(f"unsupported dtype {t.dtype} for tensor {name!r}")
        buf = t.numpy().astype(np.dtype(code).newbyteorder("<"), copy=False).tobytes()
        entries.append({"name": name, "dtype": code, "shape": list(t.shape),
                        "offset": offset})
        payloads.append(buf)
        offset += len(buf)
    manifest = json.dumps({"meta": meta, "tensors": entries},
                          sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<Q", len(manifest)))
        f.write(manifest)
        for buf in payloads:
            f.write(buf)


def load_checkpoint(path) -> tuple[dict[str, torch.Tensor], dict]:
    """Read a checkpoint written by save_checkpoint; returns (tensors, meta)."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
        (version,) = struct.unpack("<I", f.read(4))
        if version != FORMAT_VERSION:
            raise CheckpointError(
                f"{path}: unsupported format version {version} "
                f"(this build reads version {FORMAT_VERSION})")
        (manifest_len,) = struct.unpack("<Q", f.read(8))
        manifest = json.loads(f.read(manifest_len).decode("utf-8"))
        payload = f.read()
    tensors = {}
    for entry in manifest["tensors"]:
        dtype = np.dtype(entry["dtype"]).newbyteorder("<")
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        arr = np.frombuffer(payload, dtype=dtype, count=count,
                            offset=entry["offset"])
        native = arr.astype(dtype.newbyteorder("="), copy=True)
        tensors[entry["name"]] = torch.from_numpy(native).reshape(entry["shape"])
    return tensors, manifest["meta"]
