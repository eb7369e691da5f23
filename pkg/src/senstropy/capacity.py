"""Capacity of cylinder unions.

The capacity ``c(V) = inf_x limsup (1/n) #{i < n : T^i x in V}`` of a clopen
set equals ``inf_mu mu(V)`` over invariant measures.  For a union of level-L
cylinders (``L >= 2``) the level-L marginals of invariant measures are
exactly the stationary word distributions: nonnegative weights on
admissible L-words with total mass one and, for every admissible
(L-1)-word ``u``, ``sum_a p(au) = sum_b p(ub)``.  Any such distribution is the
marginal of its (L-1)-step Markov extension, which is invariant and supported
on the subshift.  Minimising ``sum_{w in V} p(w)`` over this polytope is a
linear program.

Capacity zero is certified combinatorially: ``c(V) = 0`` iff some point never
enters ``V``, i.e. the graph on (L-1)-words whose edges are the words outside
``V`` has a cycle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .measures import birkhoff_average
from .simplex import LPError, solve_lp
from .symbolic import (
    CylinderUnion,
    Sft,
    SymbolicPoint,
    Word,
    format_word,
    periodic_points,
)


def _lp_union(V: CylinderUnion) -> CylinderUnion:
    return V if V.level >= 2 else V.refine(2)


@dataclass
class StationaryWordLP:
    level: int
    words: list[Word]
    objective: list[int]
    A: list[list[int]]
    b: list[int]
    constraint_labels: list[str] = field(default_factory=list)

    @classmethod
    def build(cls, sft: Sft, V: CylinderUnion) -> "StationaryWordLP":
        U = _lp_union(V)
        L = U.level
        words = sft.words(L)
        index = {w: i for i, w in enumerate(words)}
        A = [[1] * len(words)]
        b = [1]
        labels = ["mass"]
        for u in sft.words(L - 1):
            row = [0] * len(words)
            for a in range(sft.alphabet_size):
                w = (a,) + u
                if w in index:
                    row[index[w]] += 1
            for c in sft.successors[u[-1]]:
                row[index[u + (c,)]] -= 1
            if any(row):
                A.append(row)
                b.append(0)
                labels.append("stationary " + format_word(u))
        objective = [1 if w in U.words else 0 for w in words]
        return cls(L, words, objective, A, b, labels)


@dataclass
class CapacityResult:
    value: Fraction | float
    level: int
    distribution: dict[Word, Fraction | float]
    dual: dict[str, Fraction | float]
    avoider_witness: SymbolicPoint | None
    exact: bool

    @property
    def positive(self) -> bool:
        return self.avoider_witness is None

    def as_dict(self) -> dict:
        num = str if self.exact else float
        return {
            "value": num(self.value),
            "level": self.level,
            "distribution": {
                format_word(w): num(p) for w, p in sorted(self.distribution.items()) if p
            },
            "dual": {k: num(v) for k, v in self.dual.items()},
            "avoider_witness": None if self.avoider_witness is None else str(self.avoider_witness),
        }


def avoider_nonempty(sft: Sft, V: CylinderUnion) -> tuple[bool, SymbolicPoint | None]:
    """Whether some point never visits ``V``; returns a periodic witness if so."""
    U = _lp_union(V)
    edges: dict[Word, list[Word]] = {}
    for w in sft.words(U.level):
        if w not in U.words:
            edges.setdefault(w[:-1], []).append(w[1:])
    # iterative DFS for a cycle
    color: dict[Word, int] = {}
    for root in sorted(edges):
        if color.get(root):
            continue
        stack = [(root, iter(edges.get(root, ())))]
        path = [root]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                color[node] = 2
                continue
            state = color.get(nxt, 0)
            if state == 1:
                cycle = path[path.index(nxt):]
                return True, SymbolicPoint((), tuple(u[0] for u in cycle))
            if state == 0:
                color[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(edges.get(nxt, ()))))
    return False, None


def _orbit_distribution(x: SymbolicPoint, level: int) -> dict[Word, Fraction]:
    p = len(x.period)
    seq = x.prefix(p + level - 1)
    dist: dict[Word, Fraction] = {}
    for i in range(p):
        w = seq[i:i + level]
        dist[w] = dist.get(w, Fraction(0)) + Fraction(1, p)
    return dist


def capacity_lp(sft: Sft, V: CylinderUnion, exact: bool = True) -> CapacityResult:
    """``c(V) = min mu(V)`` over invariant measures, with optimal marginal and duals."""
    empty, witness = avoider_nonempty(sft, V)
    lp = StationaryWordLP.build(sft, V)
    if empty:
        zero = Fraction(0) if exact else 0.0
        dist = _orbit_distribution(witness, lp.level)
        if not exact:
            dist = {w: float(p) for w, p in dist.items()}
        return CapacityResult(
            zero, lp.level, dist, {lab: zero for lab in lp.constraint_labels}, witness, exact
        )
    try:
        res = solve_lp(lp.objective, lp.A, lp.b, exact=exact)
    except LPError as exc:
        raise LPError(f"capacity LP failed for V={V}: {exc} (feasibility is guaranteed)") from exc
    dist = {w: p for w, p in zip(lp.words, res.x)}
    dual = dict(zip(lp.constraint_labels, res.dual))
    return CapacityResult(res.value, lp.level, dist, dual, None, exact)


def capacity(sft: Sft, V: CylinderUnion, exact: bool = True) -> Fraction | float:
    return capacity_lp(sft, V, exact=exact).value


def in_oc(sft: Sft, V: CylinderUnion) -> bool:
    """Membership in OC: positive capacity, decided exactly by the avoider test."""
    return not avoider_nonempty(sft, V)[0]


def capacity_orbit_upper(
    sft: Sft, V: CylinderUnion, max_period: int
) -> tuple[Fraction, SymbolicPoint]:
    """Least visit frequency to ``V`` over periodic orbits of period ``<= max_period``."""
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    best: tuple[Fraction, SymbolicPoint] | None = None
    for x in periodic_points(sft, max_period):
        freq = birkhoff_average(x, V, len(x.period))
        if best is None or freq < best[0]:
            best = (freq, x)
    if best is None:
        raise ValueError(f"no periodic orbit of period <= {max_period}")
    return best
