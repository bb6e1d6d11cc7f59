# -*- coding: utf-8 -*-
"""Plain-text embedding files: one token per line, `token v1 v2 ... vd`,
optionally preceded by a `count dim` header line."""

import numpy as np

# Separator for per-position vector keys in external-vector hook files,
# `word␟index` (U+241F symbol-for-unit-separator).
HOOK_SEP = "␟"


def load_embeddings(path, dim=None):
    """Return (vectors: dict token -> np.ndarray, dim)."""
    vectors = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    dim = int(parts[1])
                    continue
                except ValueError:
                    pass
            token, values = parts[0], parts[1:]
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric vector component") from None
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim} components, got {vec.size}")
            vectors[token] = vec
    if dim is None:
        raise ValueError(f"{path}: empty embedding file")
    return vectors, dim


def save_embeddings(path, vectors, header=False):
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            dim = len(next(iter(vectors.values())))
            fh.write(f"{len(vectors)} {dim}\n")
        for token, vec in vectors.items():
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def load_hook_vectors(path):
    """External per-character vectors keyed `word␟index` (0-based index)."""
    vectors, dim = load_embeddings(path)
    hook = {}
    for key, vec in vectors.items():
        word, _, index = key.rpartition(HOOK_SEP)
        if not word:
            raise ValueError(f"hook key without separator: {key!r}")
        hook[(word, int(index))] = vec
    return hook, dim
