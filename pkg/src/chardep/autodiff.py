# -*- coding: utf-8 -*-
"""Reverse-mode automatic differentiation over dense numpy tensors.

Covers exactly what the models here need: matmul, concat/split, elementwise
nonlinearities, embedding lookup, dropout, bilinear forms, softmax and
cross-entropy.  A Graph is an append-only tape; backward() replays it in
reverse insertion order, accumulating (never overwriting) gradients.
"""

import numpy as np


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def zero_grad(self):
        self.grad = None

    def accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __repr__(self):
        label = self.name or "tensor"
        return f"<{label} {self.data.shape} {self.data.dtype}>"


class Graph:
    """Append-only tape of backward closures, one per recorded operation."""

    def __init__(self):
        self.nodes = []

    def record(self, backward_fn):
        self.nodes.append(backward_fn)

    def backward(self, loss):
        if loss.data.size != 1:
            raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
        loss.accumulate(np.ones_like(loss.data))
        for fn in reversed(self.nodes):
            fn()


def _wants_grad(*tensors):
    return any(isinstance(t, Tensor) and t.requires_grad for t in tensors)


def _out(graph, data, *inputs):
    return Tensor(data, requires_grad=graph is not None and _wants_grad(*inputs))


def _record(graph, out, fn):
    """Register a backward closure that runs only if `out` received gradient
    (outputs built but never consumed by the loss stay inert)."""
    def wrapped():
        if out.grad is not None:
            fn()
    graph.record(wrapped)


def _shape_check(cond, op, *shapes):
    if not cond:
        raise ValueError(f"{op}: incompatible shapes {' vs '.join(str(s) for s in shapes)}")


def _unbroadcast(g, shape):
    """Sum gradient g down to `shape` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def constant(value, dtype=None):
    return Tensor(np.asarray(value, dtype=dtype))


def add(graph, a, b):
    out = _out(graph, a.data + b.data, a, b)
    if out.requires_grad:
        def backward():
            if a.requires_grad:
                a.accumulate(_unbroadcast(out.grad, a.data.shape))
            if b.requires_grad:
                b.accumulate(_unbroadcast(out.grad, b.data.shape))
        _record(graph, out, backward)
    return out


def mul(graph, a, b):
    out = _out(graph, a.data * b.data, a, b)
    if out.requires_grad:
        def backward():
            if a.requires_grad:
                a.accumulate(_unbroadcast(out.grad * b.data, a.data.shape))
            if b.requires_grad:
                b.accumulate(_unbroadcast(out.grad * a.data, b.data.shape))
        _record(graph, out, backward)
    return out


def scale(graph, a, s):
    out = _out(graph, a.data * s, a)
    if out.requires_grad:
        def backward():
            a.accumulate(out.grad * s)
        _record(graph, out, backward)
    return out


def matmul(graph, a, b):
    _shape_check(a.data.ndim == 2 and b.data.ndim == 2 and a.data.shape[1] == b.data.shape[0],
                 "matmul", a.data.shape, b.data.shape)
    out = _out(graph, a.data @ b.data, a, b)
    if out.requires_grad:
        def backward():
            if a.requires_grad:
                a.accumulate(out.grad @ b.data.T)
            if b.requires_grad:
                b.accumulate(a.data.T @ out.grad)
        _record(graph, out, backward)
    return out


def transpose(graph, t):
    out = _out(graph, t.data.T, t)
    if out.requires_grad:
        def backward():
            t.accumulate(out.grad.T)
        _record(graph, out, backward)
    return out


def concat(graph, tensors, axis=-1):
    out = _out(graph, np.concatenate([t.data for t in tensors], axis=axis), *tensors)
    if out.requires_grad:
        sizes = [t.data.shape[axis] for t in tensors]
        def backward():
            offset = 0
            for t, size in zip(tensors, sizes):
                if t.requires_grad:
                    index = [slice(None)] * out.grad.ndim
                    index[axis] = slice(offset, offset + size)
                    t.accumulate(out.grad[tuple(index)])
                offset += size
        _record(graph, out, backward)
    return out


def split(graph, t, sizes, axis=-1):
    _shape_check(sum(sizes) == t.data.shape[axis], "split", t.data.shape, tuple(sizes))
    outs = []
    offset = 0
    for size in sizes:
        index = [slice(None)] * t.data.ndim
        index[axis] = slice(offset, offset + size)
        index = tuple(index)
        piece = _out(graph, t.data[index], t)
        if piece.requires_grad:
            def backward(piece=piece, index=index):
                g = np.zeros_like(t.data)
                g[index] = piece.grad
                t.accumulate(g)
            _record(graph, piece, backward)
        outs.append(piece)
        offset += size
    return outs


def _elementwise(graph, t, value, local_grad):
    out = _out(graph, value, t)
    if out.requires_grad:
        def backward():
            t.accumulate(out.grad * local_grad())
        _record(graph, out, backward)
    return out


def tanh(graph, t):
    y = np.tanh(t.data)
    return _elementwise(graph, t, y, lambda: 1.0 - y * y)


def sigmoid(graph, t):
    y = 1.0 / (1.0 + np.exp(-t.data))
    return _elementwise(graph, t, y, lambda: y * (1.0 - y))


def relu(graph, t):
    return _elementwise(graph, t, np.maximum(t.data, 0.0), lambda: (t.data > 0).astype(t.data.dtype))


def leaky_relu(graph, t, alpha=0.1):
    y = np.where(t.data > 0, t.data, alpha * t.data)
    return _elementwise(graph, t, y,
                        lambda: np.where(t.data > 0, 1.0, alpha).astype(t.data.dtype))


def embedding_lookup(graph, table, indices):
    indices = np.asarray(indices, dtype=np.int64)
    out = _out(graph, table.data[indices], table)
    if out.requires_grad:
        def backward():
            g = np.zeros_like(table.data)
            np.add.at(g, indices, out.grad)
            table.accumulate(g)
        _record(graph, out, backward)
    return out


# take_rows is the same gather as an embedding lookup, read as row selection.
take_rows = embedding_lookup


def softmax(graph, t, axis=-1):
    shifted = t.data - t.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    out = _out(graph, y, t)
    if out.requires_grad:
        def backward():
            dot = (out.grad * y).sum(axis=axis, keepdims=True)
            t.accumulate(y * (out.grad - dot))
        _record(graph, out, backward)
    return out


def dropout(graph, t, rate, rng, train=True, mask=None):
    """Inverted dropout.  rate 0 or eval mode is the identity.

    Pass `mask` to reuse one mask across several tensors (same-mask dropout
    across LSTM time steps).
    """
    if not train or rate == 0.0:
        return t
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1): {rate}")
    if mask is None:
        mask = (rng.random(t.data.shape) >= rate).astype(t.data.dtype) / (1.0 - rate)
    out = _out(graph, t.data * mask, t)
    if out.requires_grad:
        def backward():
            t.accumulate(out.grad * mask)
        _record(graph, out, backward)
    return out


def make_dropout_mask(shape, rate, rng, dtype):
    return (rng.random(shape) >= rate).astype(dtype) / (1.0 - rate)


def bilinear(graph, x, w, y):
    """Bilinear form x W y^T.

    x: (n, dx), y: (m, dy); w is (dx, dy) giving an (n, m) score matrix, or a
    stacked (L, dx, dy) giving (n, m, L).
    """
    stacked = w.data.ndim == 3
    _shape_check(x.data.ndim == 2 and y.data.ndim == 2, "bilinear", x.data.shape, y.data.shape)
    if stacked:
        _shape_check(w.data.shape[1] == x.data.shape[1] and w.data.shape[2] == y.data.shape[1],
                     "bilinear", x.data.shape, w.data.shape, y.data.shape)
        value = np.einsum("ia,lab,jb->ijl", x.data, w.data, y.data, optimize=True)
    else:
        _shape_check(w.data.shape[0] == x.data.shape[1] and w.data.shape[1] == y.data.shape[1],
                     "bilinear", x.data.shape, w.data.shape, y.data.shape)
        value = x.data @ w.data @ y.data.T
    out = _out(graph, value, x, w, y)
    if out.requires_grad:
        def backward():
            g = out.grad
            if stacked:
                if x.requires_grad:
                    x.accumulate(np.einsum("ijl,lab,jb->ia", g, w.data, y.data, optimize=True))
                if w.requires_grad:
                    w.accumulate(np.einsum("ia,ijl,jb->lab", x.data, g, y.data, optimize=True))
                if y.requires_grad:
                    y.accumulate(np.einsum("ijl,ia,lab->jb", g, x.data, w.data, optimize=True))
            else:
                if x.requires_grad:
                    x.accumulate(g @ (w.data @ y.data.T).T)
                if w.requires_grad:
                    w.accumulate(x.data.T @ g @ y.data)
                if y.requires_grad:
                    y.accumulate(g.T @ x.data @ w.data)
        _record(graph, out, backward)
    return out


def bilinear_pairs(graph, x, w, y):
    """Per-row bilinear form: out[d, l] = x[d] W_l y[d]^T.

    x, y: (n, dx)/(n, dy); w: (L, dx, dy).  Used for label scoring where the
    head row has already been gathered per dependent.
    """
    _shape_check(x.data.shape[0] == y.data.shape[0] and w.data.ndim == 3,
                 "bilinear_pairs", x.data.shape, w.data.shape, y.data.shape)
    value = np.einsum("da,lab,db->dl", x.data, w.data, y.data, optimize=True)
    out = _out(graph, value, x, w, y)
    if out.requires_grad:
        def backward():
            g = out.grad
            if x.requires_grad:
                x.accumulate(np.einsum("dl,lab,db->da", g, w.data, y.data, optimize=True))
            if w.requires_grad:
                w.accumulate(np.einsum("da,dl,db->lab", x.data, g, y.data, optimize=True))
            if y.requires_grad:
                y.accumulate(np.einsum("dl,da,lab->db", g, x.data, w.data, optimize=True))
        _record(graph, out, backward)
    return out


def append_ones(graph, t):
    """Concatenate a ones column: (n, d) -> (n, d+1).  The biaffine bias trick."""
    ones = np.ones((t.data.shape[0], 1), dtype=t.data.dtype)
    out = _out(graph, np.concatenate([t.data, ones], axis=1), t)
    if out.requires_grad:
        def backward():
            t.accumulate(out.grad[:, :-1])
        _record(graph, out, backward)
    return out


def sum_all(graph, t):
    out = _out(graph, np.asarray(t.data.sum()), t)
    if out.requires_grad:
        def backward():
            t.accumulate(np.broadcast_to(out.grad, t.data.shape).copy())
        _record(graph, out, backward)
    return out


def cross_entropy(graph, logits, targets, mask=None):
    """Mean over unmasked rows of -log softmax(logits)[target].

    targets: int sequence, one per row; mask: optional booleans, True = keep.
    """
    targets = np.asarray(targets, dtype=np.int64)
    n, k = logits.data.shape
    _shape_check(targets.shape == (n,), "cross_entropy", logits.data.shape, targets.shape)
    if np.any((targets < 0) | (targets >= k)):
        raise ValueError("cross_entropy: target index out of range")
    keep = np.ones(n, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    count = int(keep.sum())
    if count == 0:
        raise ValueError("cross_entropy: all positions masked")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    picked = log_probs[np.arange(n), targets]
    loss = -picked[keep].mean()
    out = _out(graph, np.asarray(loss, dtype=logits.data.dtype), logits)
    if out.requires_grad:
        probs = np.exp(log_probs)
        def backward():
            g = probs.copy()
            g[np.arange(n), targets] -= 1.0
            g[~keep] = 0.0
            logits.accumulate(out.grad * g / count)
        _record(graph, out, backward)
    return out


def grad_check(build, params, eps=1e-5, max_coords=16, seed=0):
    """Max relative error between analytic and central-difference gradients.

    `build` constructs a fresh graph and returns the scalar loss tensor; it is
    re-run for every probe, so it must be deterministic.  Coordinates are
    sampled per parameter (all of them when small).  The step is refined per
    coordinate (with Richardson extrapolation of each h, h/2 pair): on deep
    compositions no single step works everywhere, since rounding noise
    dominates near-zero gradients at small steps while curvature dominates at
    large ones.
    """
    for p in params:
        p.zero_grad()
    graph = Graph()
    loss = build(graph)
    graph.backward(loss)
    analytic = {id(p): (np.zeros_like(p.data) if p.grad is None else p.grad.copy())
                for p in params}
    rng = np.random.default_rng(seed)
    worst = 0.0

    def central(flat, c, h):
        keep = flat[c]
        flat[c] = keep + h
        up = float(build(Graph()).data)
        flat[c] = keep - h
        down = float(build(Graph()).data)
        flat[c] = keep
        return (up - down) / (2.0 * h)

    for p in params:
        flat = p.data.reshape(-1)
        size = flat.size
        coords = (np.arange(size) if size <= max_coords
                  else rng.choice(size, size=max_coords, replace=False))
        for c in coords:
            a = analytic[id(p)].reshape(-1)[c]
            err = None
            for h in (eps, 10.0 * eps, 100.0 * eps):
                full = central(flat, c, h)
                half = central(flat, c, h / 2.0)
                richardson = (4.0 * half - full) / 3.0
                for numeric in (full, half, richardson):
                    if not np.isfinite(numeric):
                        raise FloatingPointError(
                            "non-finite value in finite differences")
                    e = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
                    err = e if err is None else min(err, e)
                if err < 1e-9:
                    break
            worst = max(worst, err)
    return worst
