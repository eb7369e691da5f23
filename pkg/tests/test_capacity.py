from fractions import Fraction

import numpy as np
import pytest

from senstropy.capacity import (
    StationaryWordLP,
    avoider_nonempty,
    capacity,
    capacity_lp,
    capacity_orbit_upper,
    in_oc,
)
from senstropy.harness import random_markov_measure
from senstropy.measures import birkhoff_average
from senstropy.simplex import LPError, solve_lp
from senstropy.symbolic import CylinderUnion, iter_unions, parse_point, parse_union, word_count


def all_unions(sft, max_level):
    for level in range(1, max_level + 1):
        yield from iter_unions(sft, level)


def test_capacity_examples(full2, golden):
    assert capacity(golden, parse_union("0", golden)) == Fraction(1, 2)
    assert capacity(full2, parse_union("00,10,11", full2)) == Fraction(1, 2)
    res = capacity_lp(full2, parse_union("0", full2))
    assert res.value == 0 and res.avoider_witness == parse_point(":1")
    assert capacity(golden, parse_union("1", golden)) == 0
    assert capacity(full2, parse_union("*", full2)) == 1


@pytest.mark.parametrize("name", ["full2", "golden", "two_fixed", "single"])
def test_capacity_equals_best_periodic_orbit(request, name):
    """Extreme points of the stationary-word polytope are simple-cycle orbit measures."""
    sft = request.getfixturevalue(name)
    for V in all_unions(sft, 2):
        level = max(V.level, 2)
        upper, witness = capacity_orbit_upper(sft, V, word_count(sft, level - 1))
        assert capacity(sft, V) == upper
        assert birkhoff_average(witness, V, len(witness.period)) == upper


@pytest.mark.parametrize("name", ["full2", "golden"])
def test_sandwich_level3(request, name):
    sft = request.getfixturevalue(name)
    for V in iter_unions(sft, 3):
        c = capacity(sft, V)
        upper, _ = capacity_orbit_upper(sft, V, 4)
        assert 0 <= c <= upper <= 1


@pytest.mark.parametrize("name", ["full2", "golden", "two_fixed"])
def test_zero_capacity_characterization(request, name):
    sft = request.getfixturevalue(name)
    for V in all_unions(sft, 3):
        empty, witness = avoider_nonempty(sft, V)
        c = capacity(sft, V)
        assert (c == 0) == empty == (not in_oc(sft, V))
        if empty:
            assert sft.contains(witness)
            assert birkhoff_average(witness, V, 12 * len(witness.period)) == 0


def test_refinement_and_monotonicity(golden, full2):
    for sft in (golden, full2):
        for V in all_unions(sft, 2):
            c = capacity(sft, V)
            assert capacity(sft, V.refine()) == c
            assert capacity(sft, V.refine(4)) == c
            assert abs(capacity(sft, V.refine(), exact=False) - float(c)) <= 1e-9
            W = V.refine(3)
            for w in sorted(W.words):
                if len(W.words) > 1:
                    sub = CylinderUnion(sft, 3, W.words - {w})
                    assert capacity(sft, sub) <= c


def test_dual_certificate(golden, full2):
    for sft in (golden, full2):
        for V in all_unions(sft, 2):
            lp = StationaryWordLP.build(sft, V)
            res = capacity_lp(sft, V)
            if not res.positive:
                continue
            y = np.array([res.dual[k] for k in lp.constraint_labels], dtype=object)
            A = np.array(lp.A, dtype=object)
            reduced = np.array(lp.objective, dtype=object) - A.T.dot(y)
            assert all(r >= 0 for r in reduced)  # dual feasible
            assert sum(b * v for b, v in zip(lp.b, y)) == res.value  # zero gap
            p = [res.distribution[w] for w in lp.words]
            assert all(v >= 0 for v in p)
            assert list(A.dot(np.array(p, dtype=object))) == lp.b


def test_float_matches_exact(golden):
    for V in all_unions(golden, 3):
        ex = capacity_lp(golden, V)
        fl = capacity_lp(golden, V, exact=False)
        assert abs(float(ex.value) - fl.value) <= 1e-9


@pytest.mark.parametrize("name", ["full2", "golden", "two_fixed", "single"])
def test_capacity_below_random_markov_measures(request, name):
    sft = request.getfixturevalue(name)
    unions = list(all_unions(sft, 2))
    caps = [capacity(sft, V) for V in unions]
    for i in range(10):
        rng = np.random.default_rng(np.random.SeedSequence([99, i]))
        mu = random_markov_measure(sft, rng, 9)
        for V, c in zip(unions, caps):
            assert c <= mu.measure_of_union(V)


def test_random_markov_measure_reducible(two_fixed):
    mu = random_markov_measure(two_fixed, np.random.default_rng(0), 9)
    assert sum(mu.pi) == 1 and all(p > 0 for p in mu.pi)
    assert not mu.is_ergodic


# --- simplex ------------------------------------------------------------


@pytest.mark.parametrize("exact", [True, False])
def test_simplex_small(exact):
    # min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
    res = solve_lp([-1, -1, 0, 0], [[1, 2, 1, 0], [3, 1, 0, 1]], [4, 6], exact=exact)
    if exact:
        assert res.value == Fraction(-14, 5)
    assert res.value == pytest.approx(-2.8)
    assert res.x[0] == pytest.approx(Fraction(8, 5)) and res.x[1] == pytest.approx(Fraction(6, 5))
    # duals reproduce the optimum (strong duality)
    assert sum(d * b for d, b in zip(res.dual, [4, 6])) == pytest.approx(float(res.value))


@pytest.mark.parametrize("exact", [True, False])
def test_simplex_degenerate_and_negative_rhs(exact):
    # x1 - x2 = -1 (negative rhs), x1 + x2 + x3 = 3, min x2
    res = solve_lp([0, 1, 0], [[1, -1, 0], [1, 1, 1]], [-1, 3], exact=exact)
    assert float(res.value) == pytest.approx(1.0)


def test_simplex_errors():
    with pytest.raises(LPError):
        solve_lp([1, 1], [[1, 1]], [-1])  # infeasible
    with pytest.raises(LPError):
        solve_lp([-1, 0], [[1, -1]], [0])  # unbounded
    with pytest.raises(LPError):
        solve_lp([1], [[1, 1]], [1])  # shape mismatch
