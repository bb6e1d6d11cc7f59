# -*- coding: utf-8 -*-
"""Versioned binary model container.

Layout: magic `CDPK`, u32 version, u8 float width, u64 header length, a JSON
header (config + vocabulary tables with frequencies), u32 blob count, then
per blob: u16 name length, name, u8 ndim, u64 dims, raw little-endian data.
A sidecar `<path>.config.json` duplicates the resolved config as plain text.
"""

import json
import struct

import numpy as np

MAGIC = b"CDPK"
VERSION = 1


def save_checkpoint(path, header, arrays):
    """header: JSON-serializable dict; arrays: name -> ndarray (one dtype)."""
    dtypes = {a.dtype.itemsize for a in arrays.values()}
    if len(dtypes) > 1:
        raise ValueError("mixed parameter precisions")
    width = dtypes.pop() if dtypes else 4
    header_bytes = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IBQ", VERSION, width, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(struct.pack("<I", len(arrays)))
        for name in sorted(arrays):
            arr = np.ascontiguousarray(arrays[name])
            name_bytes = name.encode("utf-8")
            fh.write(struct.pack("<H", len(name_bytes)))
            fh.write(name_bytes)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            fh.write(arr.astype(f"<f{width}").tobytes())
    with open(str(path) + ".config.json", "w", encoding="utf-8") as fh:
        json.dump(header.get("config", header), fh, ensure_ascii=False, indent=2,
                  sort_keys=True)
        fh.write("\n")


def load_checkpoint(path):
    """Return (header dict, arrays dict)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a model checkpoint (magic {magic!r})")
        version, width, header_len = struct.unpack("<IBQ", fh.read(13))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        (count,) = struct.unpack("<I", fh.read(4))
        arrays = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
            size = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(size * width), dtype=f"<f{width}")
            arrays[name] = data.reshape(shape).astype(f"f{width}")
        return header, arrays
