"""Brute-force oracles shared by the tests."""
from itertools import product

import numpy as np


def word_array(sft, length):
    return np.array(sft.words(length), dtype=np.int64).reshape(-1, length)


def shifted_distance_exponents(words):
    """``E[p, q, i]``: first ``j >= 0`` with ``u_{i+j} != v_{i+j}``, or a large
    sentinel when the truncations agree from ``i`` on; computed straight from
    the definition of the metric on every pair of truncations."""
    n_words, length = words.shape
    diff = words[:, None, :] != words[None, :, :]
    out = np.full((n_words, n_words, length), 10**6, dtype=np.int64)
    for i in range(length):
        tail = diff[:, :, i:]
        has = tail.any(axis=2)
        first = tail.argmax(axis=2)
        out[:, :, i] = np.where(has, first, 10**6)
    return out


def in_bowen_ball(exps, n, m):
    """``rho_n(u, v) < 2**-m``  iff  every shifted distance exponent exceeds ``m``."""
    return (exps[:, :, : n + 1] > m).all(axis=2)


def all_pairs(alphabet, length):
    return list(product(range(alphabet), repeat=length))
