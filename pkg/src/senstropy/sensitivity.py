"""First sensitive times and restricted asymptotic rates.

With ``delta = 2**-m`` the event ``rho(T^n x, T^n y) > delta`` means that
``x`` and ``y`` disagree somewhere in ``[n, n+m-1]``.  For a set ``V`` the
least such ``n`` over ``y in V`` is therefore ``max(0, d - m + 1)`` where
``d`` is the earliest index at which some ``y in V`` can differ from ``x``.
``d`` is found exactly: inside the cylinder words by direct comparison, and
past them by walking ``x`` through the support graph until a state offers a
symbol other than the next coordinate of ``x`` (or the walk provably cycles).

Ratio conventions follow ``c / 0 = +inf`` for every ``c >= 0`` (so ``0/0``
is ``+inf`` too) and ``c / inf = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .capacity import avoider_nonempty, capacity_lp
from .entropy import RateProfile, bk_local_entropy_estimate
from .measures import InvariantMeasure, Presentation, sft_presentation
from .symbolic import (
    Cylinder,
    CylinderUnion,
    Sft,
    SymbolicPoint,
    Word,
    bowen_cylinder,
    format_word,
    iter_unions,
    word_count,
)

INF = math.inf


def ratio(num: float, den: float) -> float:
    """``num / den`` with ``c/0 = inf`` and ``c/inf = 0``."""
    if den == 0:
        return INF
    if math.isinf(den):
        return 0.0 if math.isfinite(num) else INF
    return num / den


def reciprocal(v: float) -> float:
    if v == 0:
        return INF
    if math.isinf(v):
        return 0.0
    return 1.0 / v


# ---------------------------------------------------------------------------
# earliest possible disagreement


def branch_index(pres: Presentation, x: SymbolicPoint, start: int, states: int) -> float:
    """First index ``i >= start`` where a path that followed ``x`` up to ``i-1``
    (ending in ``states``) can read a symbol other than ``x_i``; ``inf`` if never."""
    if not states:
        return INF
    succ, labels = pres.kernel_tables
    lp, p = len(x.preperiod), len(x.period)
    pos = start
    if pos < lp:
        coords = np.asarray(x.preperiod[pos:], dtype=np.int64)
        off, states = kernels.scan_branch(succ, labels, states, coords)
        if off >= 0:
            return pos + off
        pos = lp
    # periodic regime: align to a period boundary, then detect repetition
    phase = (pos - lp) % p
    if phase:
        coords = np.asarray(x.period[phase:], dtype=np.int64)
        off, states = kernels.scan_branch(succ, labels, states, coords)
        if off >= 0:
            return pos + off
        pos += p - phase
    coords = np.asarray(x.period, dtype=np.int64)
    seen = set()
    while states not in seen:
        seen.add(states)
        off, states = kernels.scan_branch(succ, labels, states, coords)
        if off >= 0:
            return pos + off
        pos += p
    return INF


def earliest_disagreement(
    x: SymbolicPoint, words: Iterable[Word], pres: Presentation
) -> float:
    """``min`` over points ``y`` of the support whose prefix lies in ``words``
    of the first index where ``y`` differs from ``x``."""
    best = INF
    follow: Word | None = None
    for w in words:
        if not pres.accepts(w):
            continue
        L = len(w)
        xw = x.prefix(L)
        d = next((i for i in range(L) if w[i] != xw[i]), None)
        if d is None:
            follow = w
        elif d < best:
            best = d
    if follow is not None and best == INF:
        best = branch_index(pres, x, len(follow), pres.run(follow))
    return best


def _time_from_disagreement(d: float, m: int) -> float:
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0 or math.isinf(d):
        return INF
    return max(0, int(d) - m + 1)


def _as_union(V: CylinderUnion | Cylinder) -> tuple[Word, ...]:
    if isinstance(V, Cylinder):
        return (V.word,)
    return tuple(V.sorted_words())


def first_sensitive_time_top(
    x: SymbolicPoint, V: CylinderUnion | Cylinder, m: int, sft: Sft | None = None
) -> float:
    """Least ``n`` with some ``y in V`` and ``rho(T^n x, T^n y) > 2**-m``; ``inf`` if none."""
    if sft is None:
        if not isinstance(V, CylinderUnion):
            raise ValueError("pass the SFT when V is a bare cylinder")
        sft = V.sft
    if not sft.contains(x):
        raise ValueError(f"point {x} is not in the subshift")
    d = earliest_disagreement(x, _as_union(V), sft_presentation(sft))
    return _time_from_disagreement(d, m)


def first_sensitive_time_measure(
    x: SymbolicPoint, V: CylinderUnion | Cylinder, m: int, mu: InvariantMeasure
) -> float:
    """Least ``n`` with ``mu({y in V : rho(T^n x, T^n y) > 2**-m}) > 0``; ``inf`` if none."""
    words = _as_union(V)
    if not any(mu.positive(w) for w in words):
        raise ValueError("V has measure zero")
    if not mu.sft.contains(x):
        raise ValueError(f"point {x} is not in the subshift")
    d = earliest_disagreement(x, words, mu.presentation)
    return _time_from_disagreement(d, m)


# ---------------------------------------------------------------------------
# estimates


@dataclass
class RateEstimate:
    """Estimate of a reciprocal rate ``1/a`` with its declared direction.

    ``direction`` is one of ``"exact"``, ``"estimate"`` (two-sided, limit
    extrapolation), ``"upper-estimate"`` (a subfamily infimum, never below
    the true value).
    """

    value: float
    direction: str
    quantity: str
    params: dict
    profile: RateProfile | None = None
    details: dict = field(default_factory=dict)
    converged: bool = True

    @property
    def rate(self) -> float:
        """The asymptotic rate ``a`` itself (``1/value`` with the conventions)."""
        return reciprocal(self.value)

    def as_dict(self) -> dict:
        out = {
            "quantity": self.quantity,
            "value": self.value,
            "rate": self.rate,
            "direction": self.direction,
            "converged": self.converged,
            "params": self.params,
            "details": self.details,
        }
        if self.profile is not None:
            out["profile_summary"] = self.profile.summary()
        return out


def rate_mu_bowen(
    x: SymbolicPoint,
    mu: InvariantMeasure,
    m_range: Sequence[int],
    N: int,
    tol: float = 1e-2,
) -> RateEstimate:
    """``1/a_mu(x)`` from the Bowen-ball profiles ``-log mu(B_n(x, 2**-m)) / n``.

    Points outside the support give ``inf`` (``a_mu = 0``) and atoms give ``0``
    (``a_mu = inf``); both are decided symbolically.  Otherwise the tail
    estimate at the finest scale is reported.
    """
    est = bk_local_entropy_estimate(x, mu, m_range, N, tol=tol)
    params = {"x": str(x), "measure": mu.label, "m_range": list(est.m_range), "N": N}
    details = {
        "running_min_by_m": {str(m): p.running_min for m, p in est.profiles.items()},
        "tail_by_m": {str(m): v for m, v in est.tail_by_m.items()},
        "tail_mean_by_m": {str(m): p.tail_mean for m, p in est.profiles.items()},
    }
    profile = est.profiles[est.m_range[-1]]
    if not mu.contains_point(x):
        details["case"] = "outside-support"
        return RateEstimate(INF, "exact", "1/a_mu", params, profile, details)
    if mu.atom_mass(x) > 0:
        details["case"] = "atom"
        return RateEstimate(0.0, "exact", "1/a_mu", params, profile, details)
    details["case"] = "profile"
    value = max(est.value, 0.0)
    return RateEstimate(
        value, "estimate", "1/a_mu", params, profile, details, converged=est.converged
    )


def positive_words(mu: InvariantMeasure, max_length: int) -> list[Word]:
    """Words of length ``1..max_length`` with positive measure, shortest first."""
    pres = mu.presentation
    out: list[Word] = []
    layer = [((a,), pres.initial_by_label[a]) for a in range(pres.alphabet_size)]
    layer = [(w, s) for w, s in layer if s]
    for _ in range(max_length):
        out.extend(w for w, _ in layer)
        nxt = []
        for w, s in layer:
            for b in range(pres.alphabet_size):
                t = pres.step(s, b)
                if t:
                    nxt.append((w + (b,), t))
        layer = nxt
    return out


def bowen_bracket(
    x: SymbolicPoint,
    mu: InvariantMeasure,
    m: int,
    max_time: float,
    max_level: int,
    unbounded: bool = False,
) -> tuple[float, float]:
    """Bounds for the cylinder-family infimum of ``-log mu(V) / s_mu(x, V, 2**-m)``.

    Lower: a set first separated at time ``s`` lies, up to a null set, in the
    cylinder ``[x_0 .. x_{s+m-2}]``, so its ratio is at least
    ``min_{1<=s<=max_time} -log mu([x_0..x_{s+m-2}]) / s``.
    Upper: the Bowen cylinder ``[x_0..x_{n+m}]`` is first separated no earlier
    than ``n + 2``, giving ``min_n -log mu(B_n) / (n + 2)`` over cylinders of
    length ``<= max_level``.  ``unbounded`` marks a family member that is
    never separated (ratio 0), which drops the lower bound to 0.
    """
    if m < 1:
        return 0.0, INF
    top = max(1, int(max_time))
    cum = mu.log_prefix_measures(x, max(top + m, max_level) + 1)
    lower = min(ratio(-cum[s + m - 2], s) for s in range(1, top + 1))
    if unbounded:
        lower = 0.0
    upper = INF
    for n in range(0, max_level - m):
        upper = min(upper, ratio(-cum[n + m], n + 2))
    return float(lower) + 0.0, float(upper) + 0.0


def rate_mu_direct(
    x: SymbolicPoint,
    mu: InvariantMeasure,
    m: int,
    L: int,
    unions: Iterable[CylinderUnion] = (),
) -> RateEstimate:
    """``inf -log mu(V) / s_mu(x, V, 2**-m)`` over positive cylinders up to level ``L``
    and the given unions; an upper estimate of ``1/a_mu(x, 2**-m)``."""
    if L < 1:
        raise ValueError("L must be >= 1")
    if not mu.sft.contains(x):
        raise ValueError(f"point {x} is not in the subshift")
    pres = mu.presentation
    xp = x.prefix(L)
    tail_cache: dict[int, float] = {}

    def s_of_word(w: Word) -> float:
        n = len(w)
        d = next((i for i in range(n) if w[i] != xp[i]), None)
        if d is None:
            if n not in tail_cache:
                tail_cache[n] = branch_index(pres, x, n, pres.run(w))
            d = tail_cache[n]
        return _time_from_disagreement(d, m)

    best = INF
    arg = None
    count = 0
    max_time = 0.0
    unbounded = False
    for w in positive_words(mu, L):
        s = s_of_word(w)
        r = ratio(-mu.log_cylinder_measure(w), s)
        count += 1
        if math.isfinite(s):
            max_time = max(max_time, s)
        else:
            unbounded = True
        if r < best:
            best, arg = r, format_word(w)
    for U in unions:
        if not mu.positive_union(U):
            continue
        s = first_sensitive_time_measure(x, U, m, mu)
        r = ratio(-mu.log_measure_of_union(U), s)
        count += 1
        if math.isfinite(s):
            max_time = max(max_time, s)
        else:
            unbounded = True
        if r < best:
            best, arg = r, str(U)
    lower, upper = bowen_bracket(x, mu, m, max_time, L, unbounded)
    details = {
        "argmin": arg,
        "family_size": count,
        "bracket_lower": lower,
        "bracket_upper": upper,
        "max_finite_time": max_time,
    }
    params = {"x": str(x), "measure": mu.label, "m": m, "L": L}
    return RateEstimate(best + 0.0, "upper-estimate", "1/a_mu(x,delta)", params, None, details)


# ---------------------------------------------------------------------------
# topological rates


def union_family(
    sft: Sft, L: int, exhaustive_limit: int = 8, extra: Iterable[CylinderUnion] = ()
) -> list[CylinderUnion]:
    """Cylinder unions at levels ``1..L``: every union where a level has at most
    ``exhaustive_limit`` words, otherwise single cylinders and their complements."""
    fam: list[CylinderUnion] = []
    for level in range(1, L + 1):
        words = sft.words(level)
        if len(words) <= exhaustive_limit:
            fam.extend(iter_unions(sft, level))
        else:
            fam.append(CylinderUnion.whole(sft, level))
            for w in words:
                fam.append(CylinderUnion(sft, level, frozenset([w])))
                if len(words) > 1:
                    fam.append(CylinderUnion(sft, level, frozenset(words) - {w}))
    fam.extend(extra)
    return fam


@lru_cache(maxsize=65536)
def _capacity_value(sft: Sft, V: CylinderUnion, exact: bool):
    return capacity_lp(sft, V, exact=exact).value


@dataclass
class A1Term:
    union: CylinderUnion
    capacity: float
    time: float
    ratio: float


def rate_a1(
    x: SymbolicPoint,
    m: int,
    L: int,
    sft: Sft,
    candidates: Iterable[CylinderUnion] = (),
    exhaustive_limit: int = 8,
    exact: bool = True,
) -> RateEstimate:
    """``inf -log c(V) / s~(x, V, 2**-m)`` over positive-capacity unions up to level ``L``.

    A subfamily infimum: an upper estimate of ``1/a_1(x, 2**-m)``.
    """
    if not sft.contains(x):
        raise ValueError(f"point {x} is not in the subshift")
    pres = sft_presentation(sft)
    terms: list[A1Term] = []
    best = INF
    arg = None
    for V in union_family(sft, L, exhaustive_limit, candidates):
        if avoider_nonempty(sft, V)[0]:
            continue
        c = _capacity_value(sft, V, exact)
        s = _time_from_disagreement(earliest_disagreement(x, V.sorted_words(), pres), m)
        r = ratio(-math.log(c), s) + 0.0
        terms.append(A1Term(V, float(c), s, r))
        if r < best:
            best, arg = r, str(V)
    params = {"x": str(x), "m": m, "L": L, "exhaustive_limit": exhaustive_limit}
    details = {"argmin": arg, "family_size": len(terms)}
    est = RateEstimate(best, "upper-estimate", "1/a_1(x,delta)", params, None, details)
    est.terms = terms
    return est


def rate_a2_profile(
    x: SymbolicPoint, m_e: int, m_d: int, N_range: Sequence[int], sft: Sft
) -> RateEstimate:
    """``1/a_2(x)`` from ``a(N) = s~(x, B_N(x, 2**-m_e), 2**-m_d) / log r(N, 2**-m_e)``.

    The estimate of ``a_2(x, 2**-m_d)`` is the largest ``a(N)`` over the upper
    half of ``N_range``; an infinite first sensitive time there makes it ``inf``.
    """
    Ns = [int(n) for n in N_range]
    if not Ns or any(b <= a for a, b in zip(Ns, Ns[1:])) or Ns[0] < 0:
        raise ValueError("N_range must be a nonempty increasing list")
    if not sft.contains(x):
        raise ValueError(f"point {x} is not in the subshift")
    pres = sft_presentation(sft)
    values = []
    times = []
    for N in Ns:
        cyl = bowen_cylinder(x, N, m_e)
        L = len(cyl.word)
        d = branch_index(pres, x, L, pres.run(cyl.word))
        s = _time_from_disagreement(d, m_d)
        log_r = math.log(word_count(sft, L))
        values.append(ratio(s, log_r) if math.isfinite(s) else INF)
        times.append(s)
    profile = RateProfile(np.array(Ns), np.array(values, dtype=np.float64))
    tail = values[len(values) // 2:]
    a2 = max(tail)
    params = {"x": str(x), "m_e": m_e, "m_d": m_d, "N_range": [Ns[0], Ns[-1], len(Ns)]}
    details = {
        "a2_estimate": a2,
        "tail_start": Ns[len(Ns) // 2],
        "last_time": times[-1],
    }
    return RateEstimate(reciprocal(a2), "estimate", "1/a_2(x)", params, profile, details)
