# -*- coding: utf-8 -*-
"""Network building blocks over the autodiff tape: parameter store,
initializers, stacked BiLSTM with shared-mask dropout, MLP, and Adam."""

import numpy as np

from . import autodiff as ad


def xavier_uniform(rng, shape, dtype):
    fan_in, fan_out = shape[0], shape[-1]
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def orthogonal(rng, shape, dtype):
    """Orthogonal columns, deterministic for a given rng state."""
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))  # fix QR sign ambiguity
    if rows < cols:
        q = q.T
    return q[:rows, :cols].astype(dtype)


class ParamStore:
    """Named trainable tensors; iteration order is insertion order."""

    def __init__(self, dtype=np.float32):
        self.dtype = np.dtype(dtype)
        self.params = {}

    def add(self, name, array):
        if name in self.params:
            raise ValueError(f"duplicate parameter {name!r}")
        t = ad.Tensor(np.asarray(array, dtype=self.dtype), requires_grad=True, name=name)
        self.params[name] = t
        return t

    def __getitem__(self, name):
        return self.params[name]

    def __contains__(self, name):
        return name in self.params

    def values(self):
        return self.params.values()

    def items(self):
        return self.params.items()

    def zero_grad(self):
        for t in self.params.values():
            t.zero_grad()

    def state_arrays(self):
        return {name: t.data for name, t in self.params.items()}

    def load_arrays(self, arrays):
        for name, t in self.params.items():
            if name not in arrays:
                raise KeyError(f"missing parameter {name!r}")
            src = np.asarray(arrays[name], dtype=self.dtype)
            if src.shape != t.data.shape:
                raise ValueError(f"shape mismatch for {name!r}: "
                                 f"{src.shape} vs {t.data.shape}")
            t.data = src.copy()


def add_lstm_params(store, prefix, input_dim, hidden, rng):
    """One LSTM direction: w_x (D, 4H) xavier, w_h (H, 4H) orthogonal per
    gate block, bias zeros."""
    wx = xavier_uniform(rng, (input_dim, 4 * hidden), store.dtype)
    wh = np.concatenate(
        [orthogonal(rng, (hidden, hidden), store.dtype) for _ in range(4)], axis=1)
    store.add(f"{prefix}.wx", wx)
    store.add(f"{prefix}.wh", wh)
    store.add(f"{prefix}.b", np.zeros(4 * hidden, dtype=store.dtype))


def add_bilstm_params(store, prefix, input_dim, hidden, layers, rng):
    dim = input_dim
    for layer in range(layers):
        add_lstm_params(store, f"{prefix}.{layer}.f", dim, hidden, rng)
        add_lstm_params(store, f"{prefix}.{layer}.b", dim, hidden, rng)
        dim = 2 * hidden


def lstm_direction(graph, xs, wx, wh, b, reverse=False, train=False, rng=None,
                   hidden_dropout=0.0):
    """Run one LSTM direction over xs (T, D) -> (T, H).

    The recurrent state is dropped with one mask shared across all steps.
    """
    steps = xs.data.shape[0]
    hidden = wh.data.shape[0]
    dtype = xs.data.dtype
    pre_all = ad.add(graph, ad.matmul(graph, xs, wx), b)  # (T, 4H)
    hmask = None
    if train and hidden_dropout > 0.0:
        hmask = ad.make_dropout_mask((1, hidden), hidden_dropout, rng, dtype)
    h = ad.Tensor(np.zeros((1, hidden), dtype=dtype))
    c = ad.Tensor(np.zeros((1, hidden), dtype=dtype))
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    outs = [None] * steps
    for t in order:
        h_in = h if hmask is None else ad.dropout(graph, h, hidden_dropout, rng,
                                                  train=True, mask=hmask)
        pre = ad.add(graph, ad.take_rows(graph, pre_all, [t]),
                     ad.matmul(graph, h_in, wh))
        gi, gf, go, gg = ad.split(graph, pre, [hidden] * 4, axis=1)
        gi, gf, go = ad.sigmoid(graph, gi), ad.sigmoid(graph, gf), ad.sigmoid(graph, go)
        gg = ad.tanh(graph, gg)
        c = ad.add(graph, ad.mul(graph, gf, c), ad.mul(graph, gi, gg))
        h = ad.mul(graph, go, ad.tanh(graph, c))
        outs[t] = h
    return ad.concat(graph, outs, axis=0), h


def bilstm_forward(graph, xs, store, prefix, layers, train=False, rng=None,
                   dropout=0.0):
    """Stacked BiLSTM; per position the top layer's forward and backward
    hidden states are concatenated.  Layer inputs get shared-mask dropout."""
    if xs.data.shape[0] == 0:
        raise ValueError("bilstm_forward: empty sequence")
    current = xs
    for layer in range(layers):
        if train and dropout > 0.0:
            mask = ad.make_dropout_mask((1, current.data.shape[1]), dropout, rng,
                                        current.data.dtype)
            current = ad.dropout(graph, current, dropout, rng, train=True, mask=mask)
        fwd, _ = lstm_direction(graph, current, store[f"{prefix}.{layer}.f.wx"],
                                store[f"{prefix}.{layer}.f.wh"], store[f"{prefix}.{layer}.f.b"],
                                reverse=False, train=train, rng=rng, hidden_dropout=dropout)
        bwd, _ = lstm_direction(graph, current, store[f"{prefix}.{layer}.b.wx"],
                                store[f"{prefix}.{layer}.b.wh"], store[f"{prefix}.{layer}.b.b"],
                                reverse=True, train=train, rng=rng, hidden_dropout=dropout)
        current = ad.concat(graph, [fwd, bwd], axis=1)
    return current


def bilstm_last_states(graph, xs, store, prefix):
    """One-layer BiLSTM, returning concat(final forward, final backward)."""
    fwd, fwd_last = lstm_direction(graph, xs, store[f"{prefix}.0.f.wx"],
                                   store[f"{prefix}.0.f.wh"], store[f"{prefix}.0.f.b"])
    bwd, bwd_last = lstm_direction(graph, xs, store[f"{prefix}.0.b.wx"],
                                   store[f"{prefix}.0.b.wh"], store[f"{prefix}.0.b.b"],
                                   reverse=True)
    return ad.concat(graph, [fwd_last, bwd_last], axis=1)


def mlp(graph, x, store, prefix, train=False, rng=None, dropout=0.0):
    out = ad.leaky_relu(graph, ad.add(graph, ad.matmul(graph, x, store[f"{prefix}.w"]),
                                      store[f"{prefix}.b"]))
    return ad.dropout(graph, out, dropout, rng, train=train)


def add_mlp_params(store, prefix, input_dim, output_dim, rng):
    store.add(f"{prefix}.w", xavier_uniform(rng, (input_dim, output_dim), store.dtype))
    store.add(f"{prefix}.b", np.zeros(output_dim, dtype=store.dtype))


class Adam:
    """Adam with bias correction and stepwise learning-rate annealing."""

    def __init__(self, store, lr=2e-3, beta1=0.9, beta2=0.9, eps=1e-12,
                 anneal=0.75, anneal_every=5000):
        self.store = store
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.anneal = anneal
        self.anneal_every = anneal_every
        self.step_count = 0
        self.m = {name: np.zeros_like(t.data) for name, t in store.items()}
        self.v = {name: np.zeros_like(t.data) for name, t in store.items()}

    def current_lr(self):
        return self.lr * self.anneal ** (self.step_count // self.anneal_every)

    def step(self):
        self.step_count += 1
        lr = self.lr * self.anneal ** ((self.step_count - 1) // self.anneal_every)
        for name, t in self.store.items():
            g = t.grad
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for parameter {name!r}")
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / (1.0 - self.beta1 ** self.step_count)
            v_hat = v / (1.0 - self.beta2 ** self.step_count)
            t.data -= (lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(t.data.dtype)
