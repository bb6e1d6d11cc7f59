# -*- coding: utf-8 -*-
"""First-order projective decoding (Eisner's span DP), single-root.

Items over positions 0..n (0 = virtual root), all initialized to -inf except
zero-width complete spans:

  I_R[s,t] = max_{s<=k<t} C_R[s,k] + C_L[k+1,t] + score[s,t]   (arc s -> t)
  I_L[s,t] = max_{s<=k<t} C_R[s,k] + C_L[k+1,t] + score[t,s]   (arc t -> s)
  C_R[s,t] = max_{s<k<=t} I_R[s,k] + C_R[k,t]
  C_L[s,t] = max_{s<=k<t} C_L[s,k] + I_L[k,t]

The root attaches exactly one child: I_R[0,t] only splits at k=0, so any
derivation of the goal item C_R[0,n] contains exactly one arc out of node 0.
Ties break toward the lowest split point (first argmax), which also gives the
lowest-index root child.
"""

import numpy as np

NEG = -np.inf


def eisner_decode(scores):
    """scores[h][d] for h, d in 0..n; returns the head array (length n)."""
    scores = np.asarray(scores, dtype=np.float64)
    size = scores.shape[0]
    n = size - 1
    if scores.shape != (size, size) or n < 1:
        raise ValueError(f"need an (n+1)x(n+1) score matrix with n >= 1, got {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")

    c_r = np.full((size, size), NEG)
    c_l = np.full((size, size), NEG)
    i_r = np.full((size, size), NEG)
    i_l = np.full((size, size), NEG)
    np.fill_diagonal(c_r, 0.0)
    np.fill_diagonal(c_l, 0.0)
    s_cr = np.zeros((size, size), dtype=np.int64)
    s_cl = np.zeros((size, size), dtype=np.int64)
    s_ir = np.zeros((size, size), dtype=np.int64)
    s_il = np.zeros((size, size), dtype=np.int64)

    for w in range(1, size):
        starts = np.arange(0, size - w)
        ends = starts + w
        offs = np.arange(w)[:, None]
        span_s = np.broadcast_to(starts, (w, starts.size))
        span_t = np.broadcast_to(ends, (w, starts.size))

        # incomplete spans: split k = s + off, off in [0, w)
        ks = starts + offs
        totals = c_r[span_s, ks] + c_l[ks + 1, span_t]
        arg = totals.argmax(axis=0)
        best = totals[arg, np.arange(starts.size)]
        i_r[starts, ends] = best + scores[starts, ends]
        i_l[starts, ends] = best + scores[ends, starts]
        s_ir[starts, ends] = starts + arg
        s_il[starts, ends] = starts + arg

        # root arcs: force the split at k=0 (exactly one child of the root)
        i_r[0, w] = c_l[1, w] + scores[0, w]
        s_ir[0, w] = 0
        i_l[0, w] = NEG

        # complete right: split k = s + off + 1, off in [0, w)
        ks = starts + offs + 1
        totals = i_r[span_s, ks] + c_r[ks, span_t]
        arg = totals.argmax(axis=0)
        c_r[starts, ends] = totals[arg, np.arange(starts.size)]
        s_cr[starts, ends] = starts + arg + 1

        # complete left: split k = s + off, off in [0, w)
        ks = starts + offs
        totals = c_l[span_s, ks] + i_l[ks, span_t]
        arg = totals.argmax(axis=0)
        c_l[starts, ends] = totals[arg, np.arange(starts.size)]
        s_cl[starts, ends] = starts + arg

    heads = np.zeros(size, dtype=np.int64)
    stack = [("CR", 0, n)]
    while stack:
        item, s, t = stack.pop()
        if s == t:
            continue
        if item == "CR":
            k = s_cr[s, t]
            stack.append(("IR", s, k))
            stack.append(("CR", k, t))
        elif item == "CL":
            k = s_cl[s, t]
            stack.append(("CL", s, k))
            stack.append(("IL", k, t))
        elif item == "IR":
            heads[t] = s
            k = s_ir[s, t]
            stack.append(("CR", s, k))
            stack.append(("CL", k + 1, t))
        else:  # IL
            heads[s] = t
            k = s_il[s, t]
            stack.append(("CR", s, k))
            stack.append(("CL", k + 1, t))
    return [int(h) for h in heads[1:]]


def tree_score(scores, heads):
    """Total score of a head array under scores[h][d]."""
    scores = np.asarray(scores)
    deps = np.arange(1, len(heads) + 1)
    return float(scores[np.asarray(heads), deps].sum())
