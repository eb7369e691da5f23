"""Shift-invariant measures with exact cylinder evaluation.

Two families are provided: stationary Markov measures (Bernoulli measures are
the constant-row case) and uniform measures on a periodic orbit.  Every
measure exposes its topological support as a labelled graph
(:class:`Presentation`); whether a word, a cylinder union or a point carries
positive mass is decided on that graph and never by comparing floats to zero.
"""
from __future__ import annotations

import json
import math
import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels
from .symbolic import (
    CylinderUnion,
    Sft,
    SftError,
    SymbolicPoint,
    Word,
    format_word,
    parse_word,
)

ROW_TOL = 1e-12

Number = Fraction | float


class MeasureError(ValueError):
    """Invalid measure specification."""


# ---------------------------------------------------------------------------
# support graphs


@dataclass(frozen=True)
class Presentation:
    """A labelled graph whose label sequences along infinite paths form a support.

    A path ``s_0 s_1 ...`` starting in ``initial`` reads the symbols
    ``labels[s_0] labels[s_1] ...``.  Every state has at least one successor.
    """

    alphabet_size: int
    labels: tuple[int, ...]
    successors: tuple[tuple[int, ...], ...]
    initial: tuple[int, ...]

    @property
    def n_states(self) -> int:
        return len(self.labels)

    @cached_property
    def initial_by_label(self) -> tuple[int, ...]:
        masks = [0] * self.alphabet_size
        for s in self.initial:
            masks[self.labels[s]] |= 1 << s
        return tuple(masks)

    @cached_property
    def succ_by_label(self) -> list[list[int]]:
        table = [[0] * self.alphabet_size for _ in self.labels]
        for s, succ in enumerate(self.successors):
            for t in succ:
                table[s][self.labels[t]] |= 1 << t
        return table

    @cached_property
    def label_mask(self) -> list[int]:
        return [
            sum(1 << a for a in range(self.alphabet_size) if row[a])
            for row in self.succ_by_label
        ]

    @cached_property
    def kernel_tables(self):
        """Tables in the layout expected by :func:`kernels.scan_branch`."""
        if self.n_states <= kernels.MAX_COMPILED_STATES:
            return (
                np.array(self.succ_by_label, dtype=np.int64),
                np.array(self.label_mask, dtype=np.int64),
            )
        return self.succ_by_label, self.label_mask

    def step(self, states: int, symbol: int) -> int:
        nxt = 0
        s = 0
        while states:
            if states & 1:
                nxt |= self.succ_by_label[s][symbol]
            states >>= 1
            s += 1
        return nxt

    def run(self, word: Sequence[int]) -> int:
        """Bitmask of the states where paths reading ``word`` can end (0 if none)."""
        if not word:
            raise ValueError("empty word")
        if word[0] >= self.alphabet_size:
            return 0
        states = self.initial_by_label[word[0]]
        for a in word[1:]:
            if not states:
                return 0
            states = self.step(states, a)
        return states

    def accepts(self, word: Sequence[int]) -> bool:
        return self.run(word) != 0

    def accepts_point(self, x: SymbolicPoint) -> bool:
        """Whether every prefix of ``x`` is readable, i.e. ``x`` lies in the support."""
        lp, p = len(x.preperiod), len(x.period)
        states = self.run(x.prefix(lp + p))
        seen = set()
        while states and states not in seen:
            seen.add(states)
            for a in x.period:
                states = self.step(states, a)
                if not states:
                    break
        return states != 0


def sft_presentation(sft: Sft) -> Presentation:
    k = sft.alphabet_size
    return Presentation(k, tuple(range(k)), sft.successors, tuple(range(k)))


# ---------------------------------------------------------------------------
# parsing helpers


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, (float, np.floating)):
        return Fraction(repr(float(v)))
    try:
        return Fraction(str(v).strip())
    except (ValueError, ZeroDivisionError):
        raise MeasureError(f"bad numeric entry {v!r}") from None


def _solve_stationary(P: list[list[Fraction]]) -> list[Fraction]:
    """Unique probability vector with ``pi P = pi`` (exact Gauss-Jordan)."""
    k = len(P)
    # unknowns pi_0..pi_{k-1}; equations (P^T - I) pi = 0 and sum pi = 1
    rows = [[P[j][i] - (1 if i == j else 0) for j in range(k)] + [Fraction(0)] for i in range(k)]
    rows.append([Fraction(1)] * k + [Fraction(1)])
    n_rows = len(rows)
    pivot_cols = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, n_rows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(n_rows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivot_cols.append(c)
        r += 1
    if len(pivot_cols) < k:
        raise MeasureError(
            "stationary vector is not unique (reducible chain); pass pi explicitly"
        )
    if any(rows[i][k] != 0 for i in range(r, n_rows)):
        raise MeasureError("no stationary probability vector")
    return [rows[i][k] for i in range(k)]


# ---------------------------------------------------------------------------
# measures


class InvariantMeasure:
    """Common interface; subclasses define the cylinder function and support."""

    sft: Sft
    exact: bool

    @property
    def presentation(self) -> Presentation:
        raise NotImplementedError

    def cylinder_measure(self, word: Sequence[int]) -> Number:
        raise NotImplementedError

    def log_cylinder_measure(self, word: Sequence[int]) -> float:
        raise NotImplementedError

    def log_prefix_measures(self, x: SymbolicPoint, length: int) -> np.ndarray:
        """``out[j] = log mu([x_0 ... x_j])`` for ``j < length``."""
        raise NotImplementedError

    def entropy_rate(self) -> float:
        raise NotImplementedError

    def atom_mass(self, x: SymbolicPoint) -> Number:
        raise NotImplementedError

    @property
    def is_ergodic(self) -> bool:
        raise NotImplementedError

    def sample_point(self, horizon: int, seed: int) -> SymbolicPoint:
        raise NotImplementedError

    def positive(self, word: Sequence[int]) -> bool:
        """Exact decision of ``mu([word]) > 0``."""
        return self.presentation.accepts(word)

    def positive_union(self, V: CylinderUnion) -> bool:
        return any(self.positive(w) for w in V.words)

    def contains_point(self, x: SymbolicPoint) -> bool:
        """Whether ``x`` lies in the support of the measure."""
        return self.presentation.accepts_point(x)

    def measure_of_union(self, V: CylinderUnion) -> Number:
        total: Number = Fraction(0) if self.exact else 0.0
        for w in V.sorted_words():
            total += self.cylinder_measure(w)
        return total

    def log_measure_of_union(self, V: CylinderUnion) -> float:
        logs = [self.log_cylinder_measure(w) for w in V.sorted_words()]
        finite = [v for v in logs if v > -math.inf]
        if not finite:
            return -math.inf
        top = max(finite)
        return top + math.log(sum(math.exp(v - top) for v in finite))


class MarkovMeasure(InvariantMeasure):
    """Stationary Markov measure ``mu([w]) = pi[w_0] prod P[w_i, w_{i+1}]``."""

    def __init__(self, sft: Sft, P, pi, exact: bool, label: str = ""):
        self.sft = sft
        self.P = tuple(tuple(row) for row in P)
        self.pi = tuple(pi)
        self.exact = exact
        self.label = label or "markov"

    def __repr__(self) -> str:
        return f"MarkovMeasure({self.label})"

    @cached_property
    def P_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.P])

    @cached_property
    def pi_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.pi])

    @cached_property
    def _log_P(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.P_float)

    @cached_property
    def _log_pi(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.pi_float)

    @cached_property
    def presentation(self) -> Presentation:
        k = self.sft.alphabet_size
        succ = tuple(
            tuple(j for j in range(k) if self.P[i][j] > 0) for i in range(k)
        )
        initial = tuple(i for i in range(k) if self.pi[i] > 0)
        return Presentation(k, tuple(range(k)), succ, initial)

    @property
    def full_support(self) -> bool:
        k = self.sft.alphabet_size
        return all(p > 0 for p in self.pi) and all(
            (self.P[i][j] > 0) == bool(self.sft.transitions[i][j])
            for i in range(k)
            for j in range(k)
        )

    @cached_property
    def is_ergodic(self) -> bool:
        """Irreducibility of the positive-transition graph on the states with ``pi > 0``."""
        live = [i for i in range(self.sft.alphabet_size) if self.pi[i] > 0]
        for root in live:
            seen = {root}
            queue = deque([root])
            while queue:
                a = queue.popleft()
                for b in self.presentation.successors[a]:
                    if b not in seen:
                        seen.add(b)
                        queue.append(b)
            if not set(live) <= seen:
                return False
        return True

    def cylinder_measure(self, word: Sequence[int]) -> Number:
        if not word:
            raise ValueError("empty word")
        k = self.sft.alphabet_size
        if any(not (0 <= a < k) for a in word):
            return Fraction(0) if self.exact else 0.0
        if not self.exact:
            return math.exp(self.log_cylinder_measure(word))
        value = self.pi[word[0]]
        for a, b in zip(word, word[1:]):
            if value == 0:
                break
            value *= self.P[a][b]
        return value

    def log_cylinder_measure(self, word: Sequence[int]) -> float:
        if not word:
            raise ValueError("empty word")
        k = self.sft.alphabet_size
        if any(not (0 <= a < k) for a in word):
            return -math.inf
        w = np.asarray(word, dtype=np.int64)
        total = self._log_pi[w[0]] + self._log_P[w[:-1], w[1:]].sum()
        return float(total)

    def log_prefix_measures(self, x: SymbolicPoint, length: int) -> np.ndarray:
        w = np.asarray(x.prefix(length), dtype=np.int64)
        if w.size and w.max() >= self.sft.alphabet_size:
            raise SftError("point uses symbols outside the alphabet")
        return kernels.cumulative_log_markov(w, self._log_pi, self._log_P)

    def entropy_rate(self) -> float:
        h = 0.0
        P = self.P_float
        for i, p_i in enumerate(self.pi_float):
            if p_i == 0:
                continue
            row = P[i][P[i] > 0]
            h -= p_i * float(np.sum(row * np.log(row)))
        return max(h, 0.0)

    def atom_mass(self, x: SymbolicPoint) -> Number:
        """``mu({x})``: positive only if every transition along the period has probability 1."""
        zero: Number = Fraction(0) if self.exact else 0.0
        cycle = x.period + x.period[:1]
        if any(self.P[a][b] != 1 for a, b in zip(cycle, cycle[1:])):
            return zero
        return self.cylinder_measure(x.prefix(len(x.preperiod) + len(x.period)))

    def sample_point(self, horizon: int, seed: int) -> SymbolicPoint:
        """Draw ``horizon`` symbols from the stationary chain, then close with a cycle."""
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        rng = np.random.default_rng(seed)
        cum_pi = np.cumsum(self.pi_float)
        cum_P = np.cumsum(self.P_float, axis=1)
        u = rng.random(horizon)
        k = self.sft.alphabet_size
        symbols = [min(int(np.searchsorted(cum_pi, u[0], side="right")), k - 1)]
        for j in range(1, horizon):
            row = cum_P[symbols[-1]]
            symbols.append(min(int(np.searchsorted(row, u[j], side="right")), k - 1))
        # guard against round-off landing on a zero-probability symbol
        for j, a in enumerate(symbols):
            prev_ok = self.pi[a] > 0 if j == 0 else self.P[symbols[j - 1]][a] > 0
            if not prev_ok:
                choices = (
                    self.presentation.initial
                    if j == 0
                    else self.presentation.successors[symbols[j - 1]]
                )
                symbols[j] = choices[-1]
        tail = _shortest_cycle(self.presentation.successors, symbols[-1])
        if tail is None:
            raise MeasureError(
                f"symbol {symbols[-1]} lies on no cycle of the support; chain has "
                "unreachable stationary states"
            )
        return SymbolicPoint(tuple(symbols), tail)

    def as_dict(self) -> dict:
        return {
            "kind": "markov",
            "label": self.label,
            "P": [[str(v) for v in row] for row in self.P],
            "pi": [str(v) for v in self.pi],
            "mode": "exact" if self.exact else "float",
        }


def _shortest_cycle(successors, start: int) -> Word | None:
    """Symbols after ``start`` along a shortest cycle returning to ``start``."""
    parent: dict[int, int] = {}
    queue = deque()
    for b in successors[start]:
        if b == start:
            return (start,)
        if b not in parent:
            parent[b] = start
            queue.append(b)
    while queue:
        a = queue.popleft()
        for b in successors[a]:
            if b == start:
                path = [a]
                while path[-1] in parent and parent[path[-1]] != start:
                    path.append(parent[path[-1]])
                return tuple(reversed(path)) + (start,)
            if b not in parent:
                parent[b] = a
                queue.append(b)
    return None


class PeriodicOrbitMeasure(InvariantMeasure):
    """Uniform probability on the orbit of the periodic point ``period^inf``."""

    def __init__(self, sft: Sft, period: Sequence[int]):
        point = SymbolicPoint((), tuple(period))
        if not sft.contains(point):
            raise MeasureError(f"orbit {format_word(period)} is not admissible")
        self.sft = sft
        self.period = point.period
        self.exact = True
        self.label = "orbit " + format_word(self.period)

    def __repr__(self) -> str:
        return f"PeriodicOrbitMeasure({format_word(self.period)})"

    @cached_property
    def presentation(self) -> Presentation:
        p = len(self.period)
        return Presentation(
            self.sft.alphabet_size,
            self.period,
            tuple(((s + 1) % p,) for s in range(p)),
            tuple(range(p)),
        )

    @property
    def is_ergodic(self) -> bool:
        return True

    def _matching_phases(self, word: Sequence[int]) -> int:
        return bin(self._start_mask(word)).count("1")

    def _start_mask(self, word: Sequence[int]) -> int:
        p = len(self.period)
        mask = 0
        for j in range(p):
            if all(self.period[(j + i) % p] == a for i, a in enumerate(word)):
                mask |= 1 << j
        return mask

    def cylinder_measure(self, word: Sequence[int]) -> Fraction:
        if not word:
            raise ValueError("empty word")
        return Fraction(self._matching_phases(word), len(self.period))

    def log_cylinder_measure(self, word: Sequence[int]) -> float:
        c = self._matching_phases(word)
        return math.log(c / len(self.period)) if c else -math.inf

    def log_prefix_measures(self, x: SymbolicPoint, length: int) -> np.ndarray:
        p = len(self.period)
        alive = list(range(p))
        out = np.empty(length, dtype=np.float64)
        for j in range(length):
            a = x.at(j)
            alive = [s for s in alive if self.period[(s + j) % p] == a]
            out[j] = math.log(len(alive) / p) if alive else -math.inf
            if not alive:
                out[j:] = -math.inf
                break
        return out

    def entropy_rate(self) -> float:
        return 0.0

    def atom_mass(self, x: SymbolicPoint) -> Fraction:
        if x.preperiod or len(x.period) != len(self.period):
            return Fraction(0)
        return Fraction(1, len(self.period)) if self._start_mask(x.period) else Fraction(0)

    def orbit_points(self) -> list[SymbolicPoint]:
        p = len(self.period)
        return [SymbolicPoint((), self.period[i:] + self.period[:i]) for i in range(p)]

    def sample_point(self, horizon: int, seed: int) -> SymbolicPoint:
        rng = np.random.default_rng(seed)
        return self.orbit_points()[int(rng.integers(len(self.period)))]

    def as_markov(self) -> MarkovMeasure:
        """Equivalent one-step Markov presentation (orbits with distinct symbols only)."""
        p = len(self.period)
        if len(set(self.period)) != p:
            raise MeasureError("orbit revisits a symbol; not a one-step Markov measure")
        k = self.sft.alphabet_size
        P = [[Fraction(0)] * k for _ in range(k)]
        pi = [Fraction(0)] * k
        for i, a in enumerate(self.period):
            P[a][self.period[(i + 1) % p]] = Fraction(1)
            pi[a] = Fraction(1, p)
        for a in range(k):
            if a not in self.period:
                P[a][self.sft.successors[a][0]] = Fraction(1)
        return build_markov_measure(P, pi, self.sft, mode="exact", label=self.label)

    def as_dict(self) -> dict:
        return {"kind": "orbit", "label": self.label, "period": format_word(self.period)}


def build_markov_measure(
    P,
    pi=None,
    support: Sft | None = None,
    mode: str = "exact",
    require_ergodic: bool = False,
    label: str = "",
) -> MarkovMeasure:
    """Validate ``(P, pi)`` on ``support`` and return the Markov measure.

    ``mode`` is ``"exact"`` (rational arithmetic) or ``"float"`` (log-space
    floats).  When ``pi`` is omitted the unique stationary vector is solved for.
    """
    if support is None:
        raise MeasureError("a support SFT is required")
    if mode not in ("exact", "float"):
        raise MeasureError(f"unknown mode {mode!r}")
    k = support.alphabet_size
    rows = [list(r) for r in P]
    if len(rows) != k or any(len(r) != k for r in rows):
        raise MeasureError(f"P must be {k}x{k}")
    Pf = [[_to_fraction(v) for v in r] for r in rows]
    if any(v < 0 for r in Pf for v in r):
        raise MeasureError("P has negative entries")
    exact = mode == "exact"
    for i, r in enumerate(Pf):
        s = sum(r)
        if (s != 1) if exact else abs(float(s) - 1) > ROW_TOL:
            raise MeasureError(f"row {i} of P sums to {s}, not 1")
    for i in range(k):
        for j in range(k):
            if Pf[i][j] > 0 and not support.transitions[i][j]:
                raise MeasureError(f"P[{i}][{j}] > 0 on a forbidden transition")
    if pi is None:
        pif = _solve_stationary(Pf)
    else:
        pif = [_to_fraction(v) for v in pi]
        if len(pif) != k or any(v < 0 for v in pif):
            raise MeasureError("pi must be a nonnegative vector of length k")
        if (sum(pif) != 1) if exact else abs(float(sum(pif)) - 1) > ROW_TOL:
            raise MeasureError("pi must sum to 1")
        for j in range(k):
            lhs = sum(pif[i] * Pf[i][j] for i in range(k))
            if (lhs != pif[j]) if exact else abs(float(lhs - pif[j])) > ROW_TOL:
                raise MeasureError("pi is not stationary for P")
    if exact:
        mu = MarkovMeasure(support, Pf, pif, True, label)
    else:
        mu = MarkovMeasure(
            support, [[float(v) for v in r] for r in Pf], [float(v) for v in pif], False, label
        )
    if require_ergodic and not mu.is_ergodic:
        raise MeasureError("measure is not ergodic (reducible positive-transition graph)")
    return mu


def bernoulli(probs: Sequence, sft: Sft, mode: str = "exact") -> MarkovMeasure:
    probs = list(probs)
    label = "bernoulli " + " ".join(str(_to_fraction(p)) for p in probs)
    return build_markov_measure(
        [probs] * len(probs), probs, sft, mode=mode, label=label
    )


def orbit_measure(period: Sequence[int] | str, sft: Sft) -> PeriodicOrbitMeasure:
    w = parse_word(period) if isinstance(period, str) else tuple(period)
    return PeriodicOrbitMeasure(sft, w)


def cylinder_measure(mu: InvariantMeasure, word: Sequence[int]) -> Number:
    return mu.cylinder_measure(word)


def measure_of_union(mu: InvariantMeasure, V: CylinderUnion) -> Number:
    return mu.measure_of_union(V)


def entropy_rate(mu: InvariantMeasure) -> float:
    return mu.entropy_rate()


def sample_point(mu: InvariantMeasure, horizon: int, seed: int) -> SymbolicPoint:
    return mu.sample_point(horizon, seed)


def birkhoff_average(x: SymbolicPoint, V: CylinderUnion, n: int) -> Fraction:
    """``(1/n) #{0 <= i < n : T^i x in V}``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    L = V.level
    lp, p = len(x.preperiod), len(x.period)
    words = V.words
    if n <= lp + p:
        seq = x.prefix(n + L - 1)
        hits = sum(seq[i:i + L] in words for i in range(n))
        return Fraction(hits, n)
    # preperiod windows, then whole periods, then a remainder
    seq = x.prefix(lp + p + L - 1)
    head = sum(seq[i:i + L] in words for i in range(lp))
    cyc = [seq[lp + i:lp + i + L] in words for i in range(p)]
    full, rem = divmod(n - lp, p)
    return Fraction(head + full * sum(cyc) + sum(cyc[:rem]), n)


# ---------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"(-?[0-9][0-9./eE+-]*)")


def _parse_nested(text: str):
    return json.loads(_TOKEN.sub(r'"\1"', text))


def parse_measure(text: str, sft: Sft) -> InvariantMeasure:
    """Parse ``bernoulli p0 p1 ...``, ``markov P=[[...]] [pi=[...]]`` or ``orbit w``.

    Entries may be rationals such as ``1/3``.  A trailing ``mode=float``
    selects log-float arithmetic.
    """
    text = text.strip()
    mode = "exact"
    m = re.search(r"\bmode\s*=\s*(\w+)\s*$", text)
    if m:
        mode = m.group(1)
        text = text[: m.start()].strip()
    kind, _, rest = text.partition(" ")
    try:
        if kind == "bernoulli":
            return bernoulli(rest.split(), sft, mode=mode)
        if kind == "orbit":
            return orbit_measure(rest.strip(), sft)
        if kind == "markov":
            pm = re.search(r"P\s*=\s*(\[\[.*?\]\])", rest)
            if not pm:
                raise MeasureError("markov measure needs P=[[...]]")
            P = _parse_nested(pm.group(1))
            pim = re.search(r"pi\s*=\s*(\[[^\[\]]*\])", rest)
            pi = _parse_nested(pim.group(1)) if pim else None
            return build_markov_measure(P, pi, sft, mode=mode, label=text)
    except (json.JSONDecodeError, SftError) as exc:
        raise MeasureError(f"bad measure spec {text!r}: {exc}") from None
    raise MeasureError(f"unknown measure kind {kind!r}")
