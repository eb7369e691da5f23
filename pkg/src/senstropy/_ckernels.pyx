# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see ``_pykernels`` for the reference code."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

BACKEND = "cython"


def cumulative_log_markov(const cnp.int64_t[:] word, const double[:] log_pi,
                          const double[:, :] log_P):
    cdef Py_ssize_t n = word.shape[0], j
    out = np.empty(n, dtype=np.float64)
    cdef double[:] o = out
    cdef double acc
    if n == 0:
        return out
    acc = log_pi[word[0]]
    o[0] = acc
    for j in range(1, n):
        acc += log_P[word[j - 1], word[j]]
        o[j] = acc
    return out


def scan_branch(const cnp.int64_t[:, :] succ_by_label, const cnp.int64_t[:] label_mask,
                states, const cnp.int64_t[:] coords):
    cdef Py_ssize_t i, n = coords.shape[0]
    cdef unsigned long long cur = states, nxt, mask, bit
    cdef Py_ssize_t s
    cdef cnp.int64_t a
    for i in range(n):
        a = coords[i]
        bit = (<unsigned long long>1) << a
        nxt = 0
        s = 0
        mask = cur
        while mask:
            if mask & 1:
                if (<unsigned long long>label_mask[s]) & ~bit:
                    return i, int(cur)
                nxt |= <unsigned long long>succ_by_label[s, a]
            mask >>= 1
            s += 1
        cur = nxt
    return -1, int(cur)


def pivot(double[:, :] T, Py_ssize_t r, Py_ssize_t c):
    cdef Py_ssize_t i, j, m = T.shape[0], n = T.shape[1]
    cdef double p = T[r, c], f
    for j in range(n):
        T[r, j] /= p
    for i in range(m):
        if i == r:
            continue
        f = T[i, c]
        if f != 0.0:
            for j in range(n):
                T[i, j] -= f * T[r, j]
        T[i, c] = 0.0
    T[r, c] = 1.0


def ratio_test(const double[:, :] T, Py_ssize_t c, Py_ssize_t rhs_col, double tol,
               const cnp.int64_t[:] basis):
    cdef Py_ssize_t i, best = -1
    cdef double a, ratio, best_ratio = INFINITY
    cdef cnp.int64_t best_var = 0
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
