"""Topological entropy, spanning/separated counts and Brin-Katok profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measures import InvariantMeasure
from .symbolic import Sft, SymbolicPoint, strongly_connected_components, word_count

POWER_TOL = 1e-14
POWER_MAX_ITER = 100_000


def perron_root(sft: Sft) -> float:
    """Spectral radius of the transition matrix.

    Each strongly connected block is handled separately; shifting a block by
    the identity makes it primitive, so power iteration converges even for
    periodic or reducible graphs.
    """
    A = sft.matrix.astype(np.float64)
    best = 0.0
    for comp in strongly_connected_components(sft.matrix):
        block = A[np.ix_(comp, comp)]
        if not block.any():
            continue
        if (block.sum(axis=1) == 1).all():  # a single cycle: root exactly 1
            best = max(best, 1.0)
            continue
        best = max(best, _power_iteration(block + np.eye(len(comp))) - 1.0)
    return best


def _power_iteration(M: np.ndarray) -> float:
    v = np.ones(M.shape[0]) / math.sqrt(M.shape[0])
    q = float(v @ M @ v)
    for _ in range(POWER_MAX_ITER):
        w = M @ v
        v = w / np.linalg.norm(w)
        q_new = float(v @ M @ v)
        if abs(q_new - q) <= POWER_TOL * abs(q_new):
            return q_new
        q = q_new
    raise RuntimeError("power iteration did not converge")


def topological_entropy(sft: Sft) -> float:
    """``log`` of the Perron root (natural log)."""
    lam = perron_root(sft)
    return math.log(lam) if lam > 1.0 else 0.0


def word_growth_entropy(sft: Sft, L: int) -> float:
    """``log(W(L+1) / W(L))``, the word-count estimate of the entropy."""
    return math.log(word_count(sft, L + 1)) - math.log(word_count(sft, L))


def pack_count(sft: Sft, n: int, m: int) -> int:
    """Minimal ``(n, 2**-m)``-spanning and maximal separated cardinality.

    Both equal the number of admissible words of length ``n + m + 1`` because
    Bowen balls are cylinders of that length.
    """
    if n < 0 or m < 0:
        raise ValueError("n and m must be >= 0")
    return word_count(sft, n + m + 1)


# ---------------------------------------------------------------------------
# profiles


def _tail_fit(n: np.ndarray, v: np.ndarray) -> float:
    """Intercept of the least-squares fit ``v ~ h + c / n``."""
    if len(v) == 1:
        return float(v[0])
    x = 1.0 / n
    xm, vm = x.mean(), v.mean()
    sxx = float(((x - xm) ** 2).sum())
    if sxx == 0.0:
        return float(vm)
    slope = float(((x - xm) * (v - vm)).sum()) / sxx
    return float(vm - slope * xm)


@dataclass
class RateProfile:
    """A finite table ``n -> value`` with a declared tail summary.

    ``tail_estimate`` is the intercept of a fit ``value ~ h + c/n`` over the
    window ``n in [ceil(N/2), N]`` (finite entries only); it reproduces the
    limit exactly whenever the profile has the form ``h + c/n``.  The plain
    window mean and the running minimum are reported alongside.
    """

    n: np.ndarray
    values: np.ndarray
    tail_estimate: float = field(init=False)
    tail_mean: float = field(init=False)
    running_min: float = field(init=False)
    window: tuple[int, int] = field(init=False)
    successive_difference: float = field(init=False)
    monotone: bool = field(init=False)

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if len(self.n) == 0:
            raise ValueError("empty profile")
        if np.any(np.diff(self.n) <= 0):
            raise ValueError("profile entries must be sorted by n")
        self._summarize()

    def _summarize(self):
        N = int(self.n[-1])
        lo = math.ceil(N / 2)
        sel = self.n >= lo
        tn, tv = self.n[sel], self.values[sel]
        fin = np.isfinite(tv)
        self.window = (lo, N)
        self.running_min = float(self.values.min())
        if not fin.any():
            self.tail_estimate = math.inf
            self.tail_mean = math.inf
            self.successive_difference = 0.0
            self.monotone = True
            return
        self.tail_estimate = _tail_fit(tn[fin].astype(np.float64), tv[fin])
        self.tail_mean = float(tv[fin].mean())
        diffs = np.diff(tv[fin])
        self.successive_difference = float(np.abs(diffs).max()) if diffs.size else 0.0
        self.monotone = bool(np.all(diffs <= 0) or np.all(diffs >= 0))

    def value_at(self, n: int) -> float:
        idx = np.searchsorted(self.n, n)
        if idx >= len(self.n) or self.n[idx] != n:
            raise KeyError(n)
        return float(self.values[idx])

    def summary(self) -> dict:
        return {
            "tail_estimate": self.tail_estimate,
            "tail_mean": self.tail_mean,
            "running_min": self.running_min,
            "window": list(self.window),
            "successive_difference": self.successive_difference,
            "monotone": self.monotone,
            "entries": int(len(self.n)),
        }

    def rows(self):
        return zip(self.n.tolist(), self.values.tolist())


def bk_profile(x: SymbolicPoint, mu: InvariantMeasure, m: int, N: int) -> RateProfile:
    """``n -> -log mu(B_n(x, 2**-m)) / n`` for ``1 <= n <= N`` (``inf`` on null balls)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if m < 0:
        raise ValueError("m must be >= 0")
    cum = mu.log_prefix_measures(x, N + m + 1)
    n = np.arange(1, N + 1)
    values = -cum[n + m] / n + 0.0
    return RateProfile(n, values)


@dataclass
class LocalEntropyEstimate:
    value: float
    m_range: list[int]
    profiles: dict[int, RateProfile]
    tail_by_m: dict[int, float]
    converged: bool
    max_m_difference: float

    def summary(self) -> dict:
        return {
            "value": self.value,
            "m_range": self.m_range,
            "tail_by_m": {str(m): v for m, v in self.tail_by_m.items()},
            "converged": self.converged,
            "max_m_difference": self.max_m_difference,
        }


def _check_m_range(m_range: Sequence[int]) -> list[int]:
    ms = [int(m) for m in m_range]
    if not ms or any(b <= a for a, b in zip(ms, ms[1:])) or ms[0] < 0:
        raise ValueError("m_range must be a nonempty increasing list of scales >= 0")
    return ms


def bk_local_entropy_estimate(
    x: SymbolicPoint,
    mu: InvariantMeasure,
    m_range: Sequence[int],
    N: int,
    tol: float = 1e-2,
) -> LocalEntropyEstimate:
    """Brin-Katok local entropy at ``x``: the tail estimate at the finest scale.

    Convergence across scales is reported: the estimate is flagged as not
    converged when tail estimates at successive scales differ by more than
    ``tol`` (relative to ``max(1, |value|)``).
    """
    ms = _check_m_range(m_range)
    if N < 2:
        raise ValueError("N must be >= 2")
    profiles = {m: bk_profile(x, mu, m, N) for m in ms}
    tails = {m: profiles[m].tail_estimate for m in ms}
    diffs = []
    for a, b in zip(ms, ms[1:]):
        ta, tb = tails[a], tails[b]
        if math.isinf(ta) and math.isinf(tb):
            diffs.append(0.0)
        else:
            diffs.append(abs(tb - ta))
    value = tails[ms[-1]]
    max_diff = max(diffs) if diffs else 0.0
    scale = max(1.0, abs(value)) if math.isfinite(value) else 1.0
    return LocalEntropyEstimate(
        value=value,
        m_range=ms,
        profiles=profiles,
        tail_by_m=tails,
        converged=bool(max_diff <= tol * scale),
        max_m_difference=max_diff,
    )
