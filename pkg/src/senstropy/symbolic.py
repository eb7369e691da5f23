"""Subshifts of finite type, eventually periodic points and the dyadic metric.

Conventions used throughout the package:

* points are one-sided sequences ``x_0 x_1 ...``; the map is the left shift;
* ``rho(x, y) = 2**-j`` where ``j`` is the first index with ``x_j != y_j``
  (``rho = 0`` for equal points);
* a scale ``m`` stands for ``delta = 2**-m``.

Under this metric the Bowen ball ``B_n(x, 2**-m)`` is exactly the cylinder
``[x_0 ... x_{n+m}]`` and ``rho(T^n x, T^n y) > 2**-m`` holds exactly when
``x`` and ``y`` disagree somewhere in the window ``[n, n+m-1]``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

Word = tuple[int, ...]

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"
MAX_ALPHABET = len(_DIGITS)


class SftError(ValueError):
    """Invalid subshift, point, word or cylinder specification."""


def _bool_closure(adj: np.ndarray) -> np.ndarray:
    """Transitive closure (paths of length >= 1) of a boolean adjacency matrix."""
    k = adj.shape[0]
    reach = adj.astype(bool).copy()
    for _ in range(max(1, k.bit_length() + 1)):
        nxt = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    return reach


def _bool_power(adj: np.ndarray, p: int) -> np.ndarray:
    result = np.eye(adj.shape[0], dtype=bool)
    base = adj.astype(bool)
    while p:
        if p & 1:
            result = (result.astype(np.int64) @ base.astype(np.int64)) > 0
        base = (base.astype(np.int64) @ base.astype(np.int64)) > 0
        p >>= 1
    return result


def strongly_connected_components(adj: np.ndarray) -> list[list[int]]:
    """Vertex classes of mutual reachability; singletons without a self-loop included."""
    k = adj.shape[0]
    reach = _bool_closure(adj) | np.eye(k, dtype=bool)
    seen: set[int] = set()
    comps = []
    for i in range(k):
        if i in seen:
            continue
        comp = [j for j in range(k) if reach[i, j] and reach[j, i]]
        seen.update(comp)
        comps.append(comp)
    return comps


@dataclass(frozen=True)
class Sft:
    """A one-sided subshift of finite type on symbols ``0 .. alphabet_size-1``.

    Build instances with :func:`build_sft`, which validates the matrix and
    computes the irreducibility and primitivity flags.
    """

    alphabet_size: int
    transitions: tuple[tuple[int, ...], ...]
    irreducible: bool
    primitive: bool

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.array(self.transitions, dtype=np.int64)

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(j for j, e in enumerate(row) if e) for row in self.transitions
        )

    def allowed(self, a: int, b: int) -> bool:
        return bool(self.transitions[a][b])

    def is_admissible(self, word: Sequence[int]) -> bool:
        k = self.alphabet_size
        if any(not (0 <= s < k) for s in word):
            return False
        return all(self.transitions[a][b] for a, b in zip(word, word[1:]))

    def words(self, length: int) -> list[Word]:
        """All admissible words of the given length, in lexicographic order."""
        if length < 1:
            raise SftError("word length must be >= 1")
        layer: list[Word] = [(a,) for a in range(self.alphabet_size)]
        for _ in range(length - 1):
            layer = [w + (b,) for w in layer for b in self.successors[w[-1]]]
        return layer

    def iter_words(self, max_length: int) -> Iterator[Word]:
        layer: list[Word] = [(a,) for a in range(self.alphabet_size)]
        yield from layer
        for _ in range(max_length - 1):
            layer = [w + (b,) for w in layer for b in self.successors[w[-1]]]
            yield from layer

    def word_count(self, length: int) -> int:
        return word_count(self, length)

    def contains(self, x: "SymbolicPoint") -> bool:
        """Whether the eventually periodic point ``x`` is admissible."""
        seq = x.preperiod + x.period + x.period[:1]
        return self.is_admissible(seq)

    def __str__(self) -> str:
        return format_sft(self)


def build_sft(alphabet_size: int, transitions: Sequence[Sequence[int]]) -> Sft:
    """Validate a 0/1 transition matrix and return the subshift it defines."""
    k = int(alphabet_size)
    if k < 1:
        raise SftError("alphabet size must be >= 1")
    if k > MAX_ALPHABET:
        raise SftError(f"alphabet size must be <= {MAX_ALPHABET}")
    rows = [list(r) for r in transitions]
    if len(rows) != k or any(len(r) != k for r in rows):
        raise SftError(f"transition matrix must be {k}x{k}")
    if any(e not in (0, 1) for r in rows for e in r):
        raise SftError("transition matrix entries must be 0 or 1")
    adj = np.array(rows, dtype=np.int64)
    dead_rows = [i for i in range(k) if not adj[i].any()]
    dead_cols = [j for j in range(k) if not adj[:, j].any()]
    if dead_rows or dead_cols:
        raise SftError(
            f"dead symbols: no successor {dead_rows}, no predecessor {dead_cols}"
        )
    reach = _bool_closure(adj)
    if not reach.diagonal().any():
        raise SftError("empty subshift: transition graph has no cycle")
    irreducible = bool(reach.all())
    primitive = irreducible and bool(_bool_power(adj, (k - 1) ** 2 + 1).all())
    return Sft(
        alphabet_size=k,
        transitions=tuple(tuple(int(e) for e in r) for r in rows),
        irreducible=irreducible,
        primitive=primitive,
    )


def full_shift(k: int) -> Sft:
    return build_sft(k, [[1] * k for _ in range(k)])


def golden_mean_shift() -> Sft:
    return build_sft(2, [[1, 1], [1, 0]])


def word_count(sft: Sft, length: int) -> int:
    """Exact number of admissible words of the given length."""
    if length < 1:
        raise SftError("word length must be >= 1")
    succ = sft.successors
    counts = [1] * sft.alphabet_size  # words of current length ending at each symbol
    for _ in range(length - 1):
        nxt = [0] * sft.alphabet_size
        for a, c in enumerate(counts):
            if c:
                for b in succ[a]:
                    nxt[b] += c
        counts = nxt
    return sum(counts)


# ---------------------------------------------------------------------------
# points


def _primitive_root(w: Word) -> Word:
    p = len(w)
    for d in range(1, p + 1):
        if p % d == 0 and w[:d] * (p // d) == w:
            return w[:d]
    return w


@dataclass(frozen=True)
class SymbolicPoint:
    """The eventually periodic sequence ``preperiod . period period ...``.

    The representation is canonical (shortest preperiod, primitive period),
    so two instances are equal iff they denote the same sequence.
    """

    preperiod: Word
    period: Word

    def __post_init__(self):
        pre = tuple(int(s) for s in self.preperiod)
        per = tuple(int(s) for s in self.period)
        if not per:
            raise SftError("period must be nonempty")
        if any(s < 0 for s in pre + per):
            raise SftError("symbols must be nonnegative")
        per = _primitive_root(per)
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    def at(self, n: int) -> int:
        if n < 0:
            raise IndexError("coordinate index must be >= 0")
        lp = len(self.preperiod)
        if n < lp:
            return self.preperiod[n]
        return self.period[(n - lp) % len(self.period)]

    def prefix(self, length: int) -> Word:
        lp = len(self.preperiod)
        if length <= lp:
            return self.preperiod[:length]
        reps = (length - lp) // len(self.period) + 1
        return (self.preperiod + self.period * reps)[:length]

    def shift(self, n: int = 1) -> "SymbolicPoint":
        lp = len(self.preperiod)
        if n <= lp:
            return SymbolicPoint(self.preperiod[n:], self.period)
        r = (n - lp) % len(self.period)
        return SymbolicPoint((), self.period[r:] + self.period[:r])

    @property
    def eventual_index(self) -> int:
        """Index from which the sequence is purely periodic."""
        return len(self.preperiod)

    @property
    def is_periodic(self) -> bool:
        return not self.preperiod

    def __str__(self) -> str:
        return format_word(self.preperiod) + ":" + format_word(self.period)


def coordinate_at(x: SymbolicPoint, n: int) -> int:
    return x.at(n)


def first_disagreement(x: SymbolicPoint, y: SymbolicPoint) -> int | None:
    """Least ``j`` with ``x_j != y_j``; ``None`` when the points coincide."""
    horizon = max(len(x.preperiod), len(y.preperiod)) + math.lcm(
        len(x.period), len(y.period)
    )
    for j in range(horizon):
        if x.at(j) != y.at(j):
            return j
    return None


def rho(x: SymbolicPoint, y: SymbolicPoint) -> Fraction:
    j = first_disagreement(x, y)
    return Fraction(0) if j is None else Fraction(1, 2**j)


def rho_n(x: SymbolicPoint, y: SymbolicPoint, n: int) -> Fraction:
    """``max_{0<=i<=n} rho(T^i x, T^i y)`` as an exact dyadic rational."""
    if n < 0:
        raise ValueError("n must be >= 0")
    d = first_disagreement(x, y)
    if d is None:
        return Fraction(0)
    return Fraction(1, 2 ** max(0, d - n))


def rho_on_words(u: Sequence[int], v: Sequence[int], n: int) -> float:
    """``rho_n`` evaluated on finite truncations; disagreement past the end is ignored."""
    best = math.inf
    for i in range(n + 1):
        for j in range(i, min(len(u), len(v))):
            if u[j] != v[j]:
                best = min(best, j - i)
                break
    return 0.0 if best == math.inf else 2.0 ** (-best)


# ---------------------------------------------------------------------------
# cylinders


@dataclass(frozen=True)
class Cylinder:
    """``[w] = {y : y_0 ... y_{L-1} = w}``."""

    word: Word

    @property
    def level(self) -> int:
        return len(self.word)

    def contains(self, y: SymbolicPoint) -> bool:
        return y.prefix(len(self.word)) == self.word


def bowen_cylinder(x: SymbolicPoint, n: int, m: int) -> Cylinder:
    """The cylinder equal to the Bowen ball ``B_n(x, 2**-m)``."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be >= 0")
    return Cylinder(x.prefix(n + m + 1))


@dataclass(frozen=True)
class CylinderUnion:
    """A nonempty union of admissible cylinders sharing one level."""

    sft: Sft = field(repr=False)
    level: int
    words: frozenset[Word]

    def __post_init__(self):
        if self.level < 1:
            raise SftError("cylinder level must be >= 1")
        if not self.words:
            raise SftError("empty cylinder union")
        for w in self.words:
            if len(w) != self.level:
                raise SftError(f"word {format_word(w)} is not of level {self.level}")
            if not self.sft.is_admissible(w):
                raise SftError(f"word {format_word(w)} is not admissible")

    @classmethod
    def of(cls, sft: Sft, words: Iterable[Sequence[int] | str]) -> "CylinderUnion":
        ws = frozenset(parse_word(w) if isinstance(w, str) else tuple(w) for w in words)
        if not ws:
            raise SftError("empty cylinder union")
        levels = {len(w) for w in ws}
        if len(levels) != 1:
            raise SftError("all words of a cylinder union must share one level")
        return cls(sft, levels.pop(), ws)

    @classmethod
    def whole(cls, sft: Sft, level: int = 1) -> "CylinderUnion":
        return cls(sft, level, frozenset(sft.words(level)))

    @property
    def is_whole(self) -> bool:
        return len(self.words) == word_count(self.sft, self.level)

    def sorted_words(self) -> list[Word]:
        return sorted(self.words)

    def contains(self, y: SymbolicPoint) -> bool:
        return y.prefix(self.level) in self.words

    def refine(self, level: int | None = None) -> "CylinderUnion":
        """Re-express the same set at a finer level."""
        target = self.level + 1 if level is None else level
        if target < self.level:
            raise SftError("cannot coarsen a cylinder union")
        words = set(self.words)
        for _ in range(target - self.level):
            words = {w + (b,) for w in words for b in self.sft.successors[w[-1]]}
        return CylinderUnion(self.sft, target, frozenset(words))

    def complement(self) -> "CylinderUnion":
        rest = frozenset(self.sft.words(self.level)) - self.words
        return CylinderUnion(self.sft, self.level, rest)

    def __str__(self) -> str:
        return ",".join(format_word(w) for w in self.sorted_words())


def iter_unions(sft: Sft, level: int) -> Iterator[CylinderUnion]:
    """Every nonempty union of level-``level`` cylinders (exponential; small levels only)."""
    words = sft.words(level)
    for mask in range(1, 1 << len(words)):
        yield CylinderUnion(
            sft, level, frozenset(w for i, w in enumerate(words) if mask >> i & 1)
        )


# ---------------------------------------------------------------------------
# text formats


def format_word(w: Sequence[int]) -> str:
    return "".join(_DIGITS[s] for s in w)


def parse_word(text: str) -> Word:
    text = text.strip()
    try:
        return tuple(_DIGITS.index(c) for c in text.lower())
    except ValueError:
        raise SftError(f"bad word {text!r}") from None


def parse_point(text: str, sft: Sft | None = None) -> SymbolicPoint:
    """Parse ``"pre:period"``; e.g. ``":01"`` is ``(01)^inf`` and ``"0:1"`` is ``0 1^inf``."""
    if text.count(":") != 1:
        raise SftError(f"point {text!r} must look like 'pre:period'")
    pre, per = text.split(":")
    x = SymbolicPoint(parse_word(pre), parse_word(per))
    if sft is not None:
        if any(s >= sft.alphabet_size for s in x.preperiod + x.period):
            raise SftError(f"point {text!r} uses symbols outside the alphabet")
        if not sft.contains(x):
            raise SftError(f"point {text!r} is not admissible")
    return x


_SFT_RE = re.compile(r"^\s*k\s*=\s*(\d+)\s*;\s*A\s*=\s*(\[.*\])\s*$", re.S)


def parse_sft(text: str) -> Sft:
    """Parse ``"k=2; A=[[1,1],[1,0]]"``."""
    match = _SFT_RE.match(text)
    if not match:
        raise SftError(f"bad SFT spec {text!r}; expected 'k=<n>; A=[[...]]'")
    try:
        matrix = json.loads(match.group(2))
    except json.JSONDecodeError as exc:
        raise SftError(f"bad transition matrix: {exc}") from None
    return build_sft(int(match.group(1)), matrix)


def format_sft(sft: Sft) -> str:
    rows = ",".join("[" + ",".join(map(str, r)) + "]" for r in sft.transitions)
    return f"k={sft.alphabet_size}; A=[{rows}]"


def parse_union(text: str, sft: Sft) -> CylinderUnion:
    """Parse comma separated words, e.g. ``"00,10,11"``; ``"*"`` or ``"X"`` is the whole space."""
    text = text.strip()
    if text in ("*", "X"):
        return CylinderUnion.whole(sft)
    return CylinderUnion.of(sft, [w for w in text.split(",") if w.strip()])


def periodic_points(sft: Sft, max_period: int) -> list[SymbolicPoint]:
    """Periodic points with least period ``<= max_period``, one per orbit."""
    seen: set[Word] = set()
    out = []
    for p in range(1, max_period + 1):
        for w in product(range(sft.alphabet_size), repeat=p):
            if not sft.is_admissible(w + w[:1]):
                continue
            if _primitive_root(w) != w:
                continue
            canon = min(w[i:] + w[:i] for i in range(p))
            if canon in seen:
                continue
            seen.add(canon)
            out.append(SymbolicPoint((), canon))
    return out
