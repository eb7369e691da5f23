"""Dense two-phase simplex with Bland's rule, in exact rationals or floats.

Solves ``min c.x  s.t.  A x = b, x >= 0``.  Problems here are tiny (a few
thousand variables at most), so a full tableau is kept; the artificial
columns stay in it so that ``B^-1`` and hence the dual solution can be read
off at the end.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _pykernels, kernels

FLOAT_TOL = 1e-9


class LPError(RuntimeError):
    """Infeasible or unbounded program, or a solver failure."""


@dataclass
class LPResult:
    value: Fraction | float
    x: list
    dual: list
    iterations: int
    exact: bool


def _exact_pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] = T[r] / T[r, c]
    for i in range(T.shape[0]):
        if i != r and T[i, c] != 0:
            T[i] = T[i] - T[i, c] * T[r]


def solve_lp(
    c: Sequence,
    A: Sequence[Sequence],
    b: Sequence,
    exact: bool = True,
    tol: float = FLOAT_TOL,
    max_iter: int = 200_000,
) -> LPResult:
    m = len(A)
    n = len(c)
    if any(len(row) != n for row in A) or len(b) != m:
        raise LPError("inconsistent LP dimensions")
    if exact:
        conv = lambda v: v if isinstance(v, Fraction) else Fraction(v)  # noqa: E731
        T = np.empty((m + 1, n + m + 1), dtype=object)
        T[:, :] = Fraction(0)
        zero = Fraction(0)
        tol = zero
        pivot = _exact_pivot
        ratio_test = _pykernels.ratio_test
    else:
        conv = float
        T = np.zeros((m + 1, n + m + 1), dtype=np.float64)
        zero = 0.0
        pivot = kernels.pivot
        ratio_test = kernels.ratio_test
    signs = []
    for i in range(m):
        row = [conv(v) for v in A[i]]
        rhs = conv(b[i])
        s = -1 if rhs < 0 else 1
        signs.append(s)
        for j in range(n):
            T[i, j] = s * row[j]
        T[i, n + i] = conv(1)
        T[i, -1] = s * rhs
    basis = np.arange(n, n + m, dtype=np.int64)
    obj = m
    rhs_col = n + m
    iterations = 0

    def run(allowed: int) -> None:
        nonlocal iterations
        while True:
            d = T[obj, :allowed]
            neg = np.nonzero(d < -tol)[0]
            if neg.size == 0:
                return
            col = int(neg[0])
            row = ratio_test(T[:m], col, rhs_col, tol, basis)
            if row < 0:
                raise LPError("unbounded linear program")
            pivot(T, row, col)
            basis[row] = col
            iterations += 1
            if iterations > max_iter:
                raise LPError("simplex iteration limit reached")

    # phase I: minimise the sum of artificials
    T[obj, :n] = -T[:m, :n].sum(axis=0)
    T[obj, rhs_col] = -T[:m, rhs_col].sum()
    run(n + m)
    infeas = -T[obj, rhs_col]
    if infeas > (0 if exact else tol * max(1.0, float(m))):
        raise LPError(f"infeasible linear program (phase I residual {infeas})")
    # drive artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n:
            if exact:
                nz = [j for j in range(n) if T[i, j] != 0]
            else:
                nz = np.nonzero(np.abs(T[i, :n]) > tol)[0].tolist()
            if nz:
                pivot(T, i, nz[0])
                basis[i] = nz[0]
    # phase II
    cc = [conv(v) for v in c]
    T[obj, :] = zero
    for j in range(n):
        T[obj, j] = cc[j]
    for i in range(m):
        if basis[i] < n and cc[basis[i]] != 0:
            T[obj] = T[obj] - cc[basis[i]] * T[i]
    run(n)
    x = [zero] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, rhs_col]
    value = -T[obj, rhs_col]
    dual = [-T[obj, n + i] * signs[i] for i in range(m)]
    if not exact:
        x = [float(v) for v in x]
        dual = [float(v) for v in dual]
        value = float(value)
    return LPResult(value=value + zero, x=x, dual=dual, iterations=iterations, exact=exact)
