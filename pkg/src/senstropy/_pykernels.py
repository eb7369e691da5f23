"""Pure-Python implementations of the hot loops (fallback for ``_ckernels``)."""
from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def cumulative_log_markov(word, log_pi, log_P):
    """``out[j] = log mu([w_0 ... w_j])`` for a Markov measure; ``-inf`` once zero."""
    n = len(word)
    out = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    acc = float(log_pi[word[0]])
    out[0] = acc
    for j in range(1, n):
        acc += float(log_P[word[j - 1], word[j]])
        out[j] = acc
    return out


def scan_branch(succ_by_label, label_mask, states, coords):
    """Walk ``coords`` from the state set ``states`` until a state can emit a label
    different from the current coordinate.

    ``succ_by_label[s, a]`` is the bitmask of successors of ``s`` labelled ``a``;
    ``label_mask[s]`` the bitmask of labels reachable from ``s`` in one step.
    Returns ``(offset, states)``: the offset of the first branching coordinate
    (``-1`` if none) and the state set reached.
    """
    for i in range(len(coords)):
        a = int(coords[i])
        bit = 1 << a
        nxt = 0
        s = 0
        mask = states
        while mask:
            if mask & 1:
                if int(label_mask[s]) & ~bit:
                    return i, states
                nxt |= int(succ_by_label[s][a])
            mask >>= 1
            s += 1
        states = nxt
    return -1, states


def pivot(T, r, c):
    """In-place Gauss-Jordan pivot of a dense float tableau on ``(r, c)``."""
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, c] = 0.0
    T[r, c] = 1.0


def ratio_test(T, c, rhs_col, tol, basis):
    """Bland's leaving row: minimum ratio, ties broken by smallest basic index."""
    best = -1
    best_ratio = math.inf
    best_var = 0
    for i in range(T.shape[0]):
        a = T[i, c]
        if a > tol:
            ratio = T[i, rhs_col] / a
            if ratio < best_ratio - tol or (
                ratio <= best_ratio + tol and best >= 0 and basis[i] < best_var
            ):
                best = i
                best_ratio = ratio
                best_var = basis[i]
    return best
